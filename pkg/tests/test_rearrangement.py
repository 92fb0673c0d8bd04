"""Rearrangement operators: steps, sampled fields, radial interpolants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cone_sobolev import (DomainError, SampledField, StepFunction1D,
                          ValidationError, WeightedCone, builtin_cone,
                          distribution_function, radial_rearrangement,
                          rearrangement)

BOX = ((-1.2, 1.2), (-1.2, 1.2))


def steps(max_size=10):
    return st.lists(
        st.tuples(st.floats(min_value=0.01, max_value=5.0),
                  st.floats(min_value=0.0, max_value=3.0)),
        min_size=1, max_size=max_size)


def build_step(cells):
    bps, t = [], 0.0
    for width, _ in cells:
        t += width
        bps.append(t)
    return StepFunction1D(tuple(bps), tuple(v for _, v in cells))


def step_inner(f, g):
    # integral of f*g over (0, inf) via merged plateau edges
    edges = sorted(set(f.breakpoints) | set(g.breakpoints))
    total, prev = 0.0, 0.0
    for e in edges:
        mid = 0.5 * (prev + e)
        total += float(f.value(mid)) * float(g.value(mid)) * (e - prev)
        prev = e
    return total


def bump_field(center, grid=48):
    def fn(pts):
        r2 = np.sum((pts - np.asarray(center)) ** 2, axis=1) / 0.25
        out = np.zeros(len(pts))
        inside = r2 < 1
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
        return out
    return SampledField.from_function(
        builtin_cone("disc-unweighted"), BOX, (grid, grid), fn)


# -- step functions ------------------------------------------------------------

@pytest.mark.parametrize("bps, vals", [
    ((1.0,), (1.0, 2.0)),
    ((1.0, 1.0), (1.0, 2.0)),
    ((2.0, 1.0), (1.0, 2.0)),
    ((0.0,), (1.0,)),
    ((-1.0,), (1.0,)),
    ((1.0,), (-0.5,)),
    ((1.0,), (math.inf,)),
])
def test_step_validation(bps, vals):
    with pytest.raises(ValidationError):
        StepFunction1D(bps, vals)


def test_step_evaluation():
    f = StepFunction1D((1.0, 3.0), (2.0, 0.5))
    assert f.value(0.5) == 2.0
    assert f.value(2.0) == 0.5
    assert f.value(4.0) == 0.0
    assert f.value(0.0) == 0.0
    assert f.support_end == 3.0
    assert [p.value(p.t0 + 0.1) for p in f.as_pieces()] == [2.0, 0.5]


def test_step_distribution_exact():
    f = StepFunction1D((1.0, 3.0, 4.5), (2.0, 0.5, 1.0))
    assert f.distribution_function(0.75) == pytest.approx(2.5, abs=0)
    assert f.distribution_function(1.5) == 1.0
    assert f.distribution_function(2.5) == 0.0
    with pytest.raises(DomainError):
        f.distribution_function(0.0)


def test_rearrangement_merges_and_drops_zeros():
    f = StepFunction1D((1.0, 2.0, 3.0, 4.0), (1.0, 0.0, 1.0, 2.0))
    r = rearrangement(f)
    assert r.breakpoints == (1.0, 3.0)
    assert r.values == (2.0, 1.0)


@given(cells=steps())
def test_rearrangement_idempotent_exactly(cells):
    r = rearrangement(build_step(cells))
    assert rearrangement(r) == r
    assert r.is_nonincreasing()
    assert all(a > b for a, b in zip(r.values, r.values[1:]))


@given(cells=steps())
def test_rearrangement_equimeasurable(cells):
    f = build_step(cells)
    r = rearrangement(f)
    for _, v in cells:
        for tau in (0.5 * v, v, 1.0000001 * v + 1e-9):
            if tau <= 0:
                continue
            assert r.distribution_function(tau) == pytest.approx(
                f.distribution_function(tau), rel=1e-12, abs=1e-12)


@given(fc=steps(6), gc=steps(6))
@settings(deadline=None)
def test_hardy_littlewood_inequality(fc, gc):
    f, g = build_step(fc), build_step(gc)
    lhs = step_inner(f, g)
    rhs = step_inner(rearrangement(f), rearrangement(g))
    assert lhs <= rhs * (1.0 + 1e-12) + 1e-12


def test_dispatcher_rejects_other_types():
    with pytest.raises(ValidationError):
        distribution_function([1.0, 2.0], 0.5)
    with pytest.raises(ValidationError):
        rearrangement(np.array([1.0]))


# -- sampled fields ------------------------------------------------------------

def test_cell_measures_match_monomial_integrals(halfplane):
    f = SampledField.from_function(
        halfplane, [(0.0, 2.0), (-1.0, 1.0)], (4, 3), lambda p: p[:, 0])
    # integral of x1 over the box: 2 * 2
    assert f.total_measure() == pytest.approx(4.0, rel=1e-13)
    square = WeightedCone.create(2, [(0, 2.0)])
    g = SampledField.from_function(
        square, [(0.0, 1.0), (0.0, 1.0)], (5, 2), lambda p: p[:, 0])
    assert g.total_measure() == pytest.approx(1.0 / 3.0, rel=1e-13)
    frac = WeightedCone.create(2, [(0, 0.5)])
    h = SampledField.from_function(
        frac, [(0.0, 1.0), (0.0, 1.0)], (16, 2), lambda p: p[:, 0])
    assert h.total_measure() == pytest.approx(2.0 / 3.0, rel=1e-3)


def test_from_function_validation(halfplane):
    with pytest.raises(ValidationError):
        SampledField.from_function(
            halfplane, [(-0.5, 1.0), (0.0, 1.0)], (4, 4), lambda p: p[:, 0])
    with pytest.raises(ValidationError):
        SampledField.from_function(
            halfplane, [(0.0, 1.0), (0.0, 1.0)], (1, 4), lambda p: p[:, 0])
    plugin = WeightedCone.create_plugin(
        2, [0], alpha=1.0, weight_fn=lambda pts: pts[:, 0])
    with pytest.raises(ValidationError):
        SampledField.from_function(
            plugin, [(0.0, 1.0), (0.0, 1.0)], (4, 4), lambda p: p[:, 0])


def test_affine_field_has_exact_gradient(halfplane):
    f = SampledField.from_function(
        halfplane, [(0.0, 1.0), (0.0, 1.0)], (6, 7),
        lambda p: 3.0 * p[:, 0] - p[:, 1] + 2.0)
    r = rearrangement(f, use_gradient=True)
    # one plateau up to roundoff in the finite differences
    assert np.allclose(r.values, math.sqrt(10.0), rtol=1e-13)
    assert r.breakpoints[-1] == pytest.approx(f.total_measure(), rel=1e-14)


def test_rearrangement_ignores_cell_layout(disc):
    rng = np.random.default_rng(3)
    vals = rng.random((6, 5))
    meas = rng.random((6, 5)) + 0.1
    zero = np.zeros((6, 5))
    perm = rng.permutation(vals.size)
    a = SampledField(disc, ((0.0, 1.0), (0.0, 1.0)), (6, 5),
                     vals, meas, zero)
    b = SampledField(disc, ((0.0, 1.0), (0.0, 1.0)), (6, 5),
                     vals.ravel()[perm].reshape(6, 5),
                     meas.ravel()[perm].reshape(6, 5), zero)
    assert rearrangement(a) == rearrangement(b)


def test_rearrangement_translation_invariant():
    h = 2.4 / 48
    f0 = bump_field((0.0, 0.0))
    f1 = bump_field((3.0 * h, -2.0 * h))
    assert f0.total_measure() == f1.total_measure()
    for tau in (0.02, 0.05, 0.1, 0.2, 0.3):
        assert f1.distribution_function(tau) == pytest.approx(
            f0.distribution_function(tau), rel=1e-12)


def test_field_csv_roundtrip():
    f = bump_field((0.1, -0.3), grid=12)
    clone = SampledField.from_csv(f.to_csv())
    assert np.array_equal(clone.values, f.values)
    assert np.allclose(clone.cell_measures, f.cell_measures, rtol=1e-15)
    assert rearrangement(clone) == rearrangement(f)
    assert clone.cone.c_d == pytest.approx(math.pi, rel=1e-12)


@pytest.mark.parametrize("mangle", [
    lambda text: text.splitlines()[1] + "\n" + text,       # no metadata line
    lambda text: text.replace('"shape": [12, 12]', '"shape": [12, 13]'),
    lambda text: "\n".join(text.splitlines()[:-3]),        # truncated rows
])
def test_field_csv_rejects_malformed(mangle):
    text = bump_field((0.0, 0.0), grid=12).to_csv()
    with pytest.raises(ValidationError):
        SampledField.from_csv(mangle(text))


# -- radial rearrangement -------------------------------------------------------

def test_radial_rearrangement_recovers_radial_cone(disc):
    def fn(pts):
        return np.maximum(0.0, 1.0 - np.sqrt(np.sum(pts * pts, axis=1)))
    f = SampledField.from_function(disc, BOX, (64, 64), fn)
    prof = radial_rearrangement(f)
    for r in (0.2, 0.5, 0.8):
        assert prof.radial_value(r) == pytest.approx(1.0 - r, abs=5e-3)
    step = rearrangement(f)
    assert prof.t_max == pytest.approx(step.support_end, rel=1e-12)
    # interpolation preserves mass at the grid scale
    edges = np.concatenate(([0.0], step.breakpoints))
    mass_step = float(np.sum(np.diff(edges) * np.asarray(step.values)))
    ts = np.linspace(1e-9, prof.t_max, 20001)
    mass_prof = float(np.trapezoid(np.asarray(prof.value(ts)), ts))
    assert mass_prof == pytest.approx(mass_step, rel=1e-2)


def test_radial_rearrangement_of_zero_field(disc):
    f = SampledField.from_function(disc, BOX, (8, 8),
                                   lambda p: np.zeros(len(p)))
    prof = radial_rearrangement(f)
    assert float(prof.value(0.5)) == 0.0
    assert rearrangement(f).breakpoints == ()
