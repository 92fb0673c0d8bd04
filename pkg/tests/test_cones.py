"""Weighted cone measures: oracles, homogeneity, admissibility probes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cone_sobolev import (BUILTIN_CONE_NAMES, DomainError,
                          QuadratureConfig,
                          ValidationError, WeightedCone, ball_measure,
                          builtin_cone, concavity_probe, thread_cap,
                          unit_ball_measure, weight_eval)

# closed forms: integrate the monomial over the unit sector
ORACLES = {
    "halfplane-x1": 2.0 / 3.0,
    "quadrant-x1x2": 1.0 / 8.0,
    "disc-unweighted": math.pi,
}


@pytest.mark.parametrize("name", BUILTIN_CONE_NAMES)
def test_product_rule_matches_oracle(name):
    cone = builtin_cone(name)
    oracle = ORACLES[name]
    assert abs(cone.c_d - oracle) / oracle <= 1e-6
    assert cone.c_d_error <= 1e-6 * oracle


@pytest.mark.parametrize("name", BUILTIN_CONE_NAMES)
def test_monte_carlo_within_three_standard_errors(name):
    cone = builtin_cone(name)
    cfg = QuadratureConfig(mode="monte-carlo", samples=200_000, seed=7,
                           partitions=4)
    value, err = unit_ball_measure(cone, cfg)
    deviation = abs(value - ORACLES[name])
    assert deviation <= 3.0 * err or deviation == 0.0


def test_monte_carlo_partitioning_is_reproducible(halfplane):
    cfg = QuadratureConfig(mode="monte-carlo", samples=50_000, seed=11,
                           partitions=5)
    assert unit_ball_measure(halfplane, cfg) == unit_ball_measure(
        halfplane, cfg)


def test_effective_dimension_bookkeeping(halfplane, quadrant, disc):
    assert (halfplane.alpha, halfplane.big_d) == (1.0, 3.0)
    assert (quadrant.alpha, quadrant.big_d) == (2.0, 4.0)
    assert (disc.alpha, disc.big_d) == (0.0, 2.0)
    assert disc.extension_unweighted


@given(r=st.floats(min_value=1e-3, max_value=1e3))
def test_ball_measure_homogeneity(r):
    cone = builtin_cone("halfplane-x1")
    assert ball_measure(cone, r) == pytest.approx(
        cone.c_d * r ** cone.big_d, rel=1e-14)
    assert cone.radius_of_measure(ball_measure(cone, r)) == pytest.approx(
        r, rel=1e-12)


def test_weight_eval_monomial_and_boundary(halfplane):
    assert weight_eval(halfplane, [2.0, -1.0]) == 2.0
    assert weight_eval(halfplane, [0.0, 1.0]) == 0.0
    vals = weight_eval(halfplane, np.array([[1.0, 0.0], [0.0, 0.0],
                                            [0.25, 3.0]]))
    assert np.allclose(vals, [1.0, 0.0, 0.25])


def test_weight_eval_rejects_points_outside_the_closure(halfplane):
    with pytest.raises(DomainError):
        weight_eval(halfplane, [-0.5, 1.0])
    with pytest.raises(ValidationError):
        weight_eval(halfplane, [1.0, 2.0, 3.0])


def test_contains(quadrant):
    assert quadrant.contains(np.array([1.0, 2.0]))
    assert quadrant.contains(np.array([0.0, 2.0]))
    assert not quadrant.contains(np.array([0.0, 2.0]), strict=True)
    assert not quadrant.contains(np.array([-1e-9, 2.0]))


@pytest.mark.parametrize("name", BUILTIN_CONE_NAMES)
def test_concavity_probe_accepts_monomial_weights(name):
    report = concavity_probe(builtin_cone(name), trials=500, seed=1)
    assert report.passed
    assert report.violations == 0


def test_concavity_probe_accepts_fractional_powers():
    cone = WeightedCone.create(3, [(0, 0.5), (2, 1.5)])
    report = concavity_probe(cone, trials=500, seed=2)
    assert report.passed


def test_concavity_probe_rejects_non_concave_plugin_weight():
    # w^(1/alpha) = |x| is convex, not concave: an inadmissible weight
    cone = WeightedCone.create_plugin(
        2, [0, 1], alpha=2.0,
        weight_fn=lambda pts: pts[:, 0] ** 2 + pts[:, 1] ** 2)
    report = concavity_probe(cone, trials=500, seed=3)
    assert not report.passed
    assert report.violations > 0
    assert report.worst_margin < -1e-6


def test_plugin_cone_is_not_serializable():
    cone = WeightedCone.create_plugin(
        2, [0], alpha=1.0, weight_fn=lambda pts: np.abs(pts[:, 0]))
    with pytest.raises(ValidationError):
        cone.to_json_dict()


def test_serialization_roundtrip(quadrant):
    clone = WeightedCone.from_json_dict(quadrant.to_json_dict())
    assert clone.d == quadrant.d
    assert clone.exponents == quadrant.exponents
    assert clone.c_d == pytest.approx(quadrant.c_d, rel=1e-12)


@pytest.mark.parametrize("spec", [
    dict(d=1),
    dict(d=2, exponents=[(0, 1.0), (0, 2.0)]),
    dict(d=2, exponents=[(2, 1.0)]),
    dict(d=2, exponents=[(0, 0.0)]),
    dict(d=2, exponents=[(0, -1.0)]),
])
def test_invalid_cone_specs_are_rejected(spec):
    with pytest.raises(ValidationError):
        WeightedCone.create(**spec)


def test_unweighted_cone_requires_extension_flag():
    with pytest.raises(ValidationError):
        WeightedCone.create(2, [])
    assert WeightedCone.create(2, [], extension_unweighted=True).alpha == 0.0


@pytest.mark.parametrize("cfg", [
    dict(mode="trapezoid"),
    dict(order=2),
    dict(samples=0),
    dict(partitions=0),
])
def test_quadrature_config_validation(cfg):
    with pytest.raises(ValidationError):
        QuadratureConfig(**cfg)


def test_thread_cap_env(monkeypatch):
    monkeypatch.delenv("CONE_SOBOLEV_THREADS", raising=False)
    assert thread_cap() >= 1
    monkeypatch.setenv("CONE_SOBOLEV_THREADS", "3")
    assert thread_cap() == 3
    monkeypatch.setenv("CONE_SOBOLEV_THREADS", "0")
    assert thread_cap() >= 1
    monkeypatch.setenv("CONE_SOBOLEV_THREADS", "-1")
    with pytest.raises(ValidationError):
        thread_cap()
    monkeypatch.setenv("CONE_SOBOLEV_THREADS", "many")
    with pytest.raises(ValidationError):
        thread_cap()


@settings(max_examples=10, deadline=None)
@given(power=st.floats(min_value=0.25, max_value=3.0),
       seed=st.integers(min_value=0, max_value=100))
def test_random_weighted_halfspace_routes_agree(power, seed):
    """Product rule and Monte Carlo agree on arbitrary single-axis powers."""
    cone = WeightedCone.create(2, [(0, power)])
    cfg = QuadratureConfig(mode="monte-carlo", samples=40_000, seed=seed)
    mc, err = unit_ball_measure(cone, cfg)
    assert abs(mc - cone.c_d) <= 4.0 * err
