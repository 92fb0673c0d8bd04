"""Lorentz norms: dual-route agreement, Hardy checks, restrictions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cone_sobolev import (DomainError, LorentzParams, StepFunction1D,
                          ValidationError, alvino_profile, ell_q_norm,
                          from_knots, gradient_density, hardy_check,
                          lorentz_norm_distributional,
                          lorentz_norm_rearranged, rearrangement,
                          restricted_norm)

PAIRS = [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (2.5, 1.4), (4.0, 3.0)]


def random_step(rng, max_plateaus=30):
    n = rng.integers(1, max_plateaus + 1)
    widths = rng.uniform(0.01, 3.0, n)
    values = rng.uniform(0.0, 5.0, n)
    return StepFunction1D(tuple(np.cumsum(widths)), tuple(values))


# -- parameters -------------------------------------------------------------------

@pytest.mark.parametrize("p, q", [(0.5, 0.5), (2.0, 0.9), (1.5, 2.0),
                                  (math.inf, 1.0), (2.0, math.nan)])
def test_params_validation(p, q):
    with pytest.raises(ValidationError):
        LorentzParams(p, q)


def test_params_cone_binding(halfplane):
    params = LorentzParams(2.0, 1.0, halfplane)
    assert params.p_star == pytest.approx(6.0, rel=1e-14)
    star = params.star_params()
    assert (star.p, star.q) == (params.p_star, 1.0)
    with pytest.raises(DomainError):
        LorentzParams(3.0, 1.0, halfplane)  # p = D is supercritical
    with pytest.raises(ValidationError):
        LorentzParams(2.0, 1.0).p_star


def test_conjugate_exponent():
    assert LorentzParams(2.0, 1.0).q_prime == math.inf
    assert LorentzParams(2.0, 2.0).q_prime == 2.0
    assert LorentzParams(3.0, 1.5).q_prime == pytest.approx(3.0)


# -- the two routes ----------------------------------------------------------------

@settings(deadline=None)
@given(p=st.floats(min_value=1.0, max_value=6.0),
       q_frac=st.floats(min_value=0.0, max_value=1.0),
       m=st.floats(min_value=1e-6, max_value=1e6),
       c=st.floats(min_value=1e-3, max_value=1e3))
def test_indicator_norm_closed_form(p, q_frac, m, c):
    # || c * chi ||_(p,q) = c (p/q)^(1/q) m^(1/p)
    q = 1.0 + q_frac * (p - 1.0)
    params = LorentzParams(p, q)
    step = StepFunction1D((m,), (c,))
    want = c * (p / q) ** (1.0 / q) * m ** (1.0 / p)
    assert lorentz_norm_rearranged(step, params) == pytest.approx(
        want, rel=1e-12)
    assert lorentz_norm_distributional(step, params) == pytest.approx(
        want, rel=1e-12)


def test_routes_agree_on_random_steps():
    rng = np.random.default_rng(2)
    for _ in range(200):
        step = random_step(rng)
        p, q = PAIRS[int(rng.integers(len(PAIRS)))]
        params = LorentzParams(p, q)
        via_lambda = lorentz_norm_distributional(step, params)
        via_t = lorentz_norm_rearranged(rearrangement(step), params)
        assert via_lambda == pytest.approx(via_t, rel=1e-10, abs=1e-300)


def test_routes_agree_on_power_arcs(halfplane):
    prof = alvino_profile(halfplane, 3.0, 1.0, 50.0)
    for p, q in PAIRS:
        params = LorentzParams(p, q)
        a = lorentz_norm_rearranged(prof, params)
        b = lorentz_norm_distributional(prof, params)
        assert a == pytest.approx(b, rel=1e-10)


def test_rearranged_route_matches_quadrature(halfplane):
    prof = alvino_profile(halfplane, 3.0, 1.0, 50.0)
    p, q = 2.0, 1.5
    got = lorentz_norm_rearranged(prof, LorentzParams(p, q))

    def integrand(t):
        return t ** (q / p - 1.0) * float(prof.value(t)) ** q

    ref, err = integrate.quad(integrand, 0.0, 50.0, points=[1.0],
                              limit=200, epsabs=0.0, epsrel=1e-11)
    assert got == pytest.approx(ref ** (1.0 / q), rel=1e-9)


def test_rearranged_route_requires_nonincreasing():
    rising = StepFunction1D((1.0, 2.0), (1.0, 2.0))
    with pytest.raises(ValidationError):
        lorentz_norm_rearranged(rising, LorentzParams(2.0, 1.0))
    # the distributional route has no such restriction
    got = lorentz_norm_distributional(rising, LorentzParams(2.0, 1.0))
    srt = lorentz_norm_rearranged(rearrangement(rising),
                                  LorentzParams(2.0, 1.0))
    assert got == pytest.approx(srt, rel=1e-12)


def test_norm_of_nothing_is_zero():
    empty = StepFunction1D((), ())
    params = LorentzParams(2.0, 1.0)
    assert lorentz_norm_rearranged(empty, params) == 0.0
    assert lorentz_norm_distributional(empty, params) == 0.0


# -- Hardy inequality ---------------------------------------------------------------

def test_hardy_equality_at_q_one(halfplane):
    prof = from_knots(halfplane, [(0.5, 2.0), (1.5, 0.5), (3.0, 0.0)])
    params = LorentzParams(2.0, 1.0, halfplane)
    lhs, rhs = hardy_check(prof, params)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert lhs > 0


def test_hardy_indicator_frozen_value(halfplane):
    # p = q = 1 on the indicator of unit measure: both sides are 9/10
    step = StepFunction1D((1.0,), (1.0,))
    lhs, rhs = hardy_check(step, LorentzParams(1.0, 1.0, halfplane))
    assert lhs == pytest.approx(0.9, abs=1e-12)
    assert rhs == pytest.approx(0.9, abs=1e-12)


def test_hardy_strict_inequality_at_larger_q(halfplane):
    step = StepFunction1D((1.0, 2.5), (2.0, 0.5))
    params = LorentzParams(2.0, 2.0, halfplane)
    lhs, rhs = hardy_check(step, params)
    assert lhs < rhs
    assert lhs > 0


def test_hardy_on_random_steps_never_exceeds(halfplane):
    rng = np.random.default_rng(5)
    for _ in range(25):
        step = random_step(rng, max_plateaus=8)
        q = float(rng.uniform(1.0, 2.5))
        params = LorentzParams(2.5, q, halfplane)
        lhs, rhs = hardy_check(step, params)  # raises beyond 1e-9 slack
        assert lhs <= rhs * (1.0 + 1e-9)


def test_hardy_rejects_divergent_input(halfplane):
    from cone_sobolev.segments import Law, Piece
    singular_head = [Piece(0.0, 1.0, Law(1.0, -2.0))]
    with pytest.raises(DomainError):
        hardy_check(singular_head, LorentzParams(2.0, 1.0, halfplane))


# -- restricted norms ---------------------------------------------------------------

def test_restricted_norm_nested_and_saturating(halfplane):
    prof = from_knots(halfplane, [(1.0, 1.0), (2.0, 0.0)])
    params = LorentzParams(2.0, 1.0)
    full = lorentz_norm_rearranged(prof, params)
    cuts = [restricted_norm(prof, params, t_cut=t)
            for t in (0.5, 1.0, 1.5, 2.0, 5.0)]
    assert all(a <= b * (1.0 + 1e-14) for a, b in zip(cuts, cuts[1:]))
    assert cuts[-1] == pytest.approx(full, rel=1e-12)
    assert cuts[-2] == pytest.approx(full, rel=1e-12)


def test_restricted_norm_radius_form(halfplane):
    prof = from_knots(halfplane, [(1.0, 1.0), (2.0, 0.0)])
    params = LorentzParams(2.0, 1.0)
    radius = 1.1
    t_cut = halfplane.c_d * radius ** halfplane.big_d
    assert restricted_norm(prof, params, radius=radius) == pytest.approx(
        restricted_norm(prof, params, t_cut=t_cut), rel=1e-13)
    # unbound params need the profile's cone; plain steps need bound params
    step = StepFunction1D((1.0,), (1.0,))
    bound = LorentzParams(2.0, 1.0, halfplane)
    assert restricted_norm(step, bound, radius=radius) == pytest.approx(
        restricted_norm(step, bound, t_cut=t_cut), rel=1e-13)
    with pytest.raises(ValidationError):
        restricted_norm(step, params, radius=radius)


def test_restricted_norm_validation(halfplane):
    prof = from_knots(halfplane, [(1.0, 1.0), (2.0, 0.0)])
    params = LorentzParams(2.0, 1.0)
    with pytest.raises(ValidationError):
        restricted_norm(prof, params)
    with pytest.raises(ValidationError):
        restricted_norm(prof, params, t_cut=1.0, radius=1.0)
    with pytest.raises(DomainError):
        restricted_norm(prof, params, radius=-1.0)
    assert restricted_norm(prof, params, t_cut=0.0) == 0.0


def test_restricted_norm_of_gradient_density(halfplane):
    # alvino gradient densities are a single decreasing arc
    psi = gradient_density(alvino_profile(halfplane, 3.0, 1.0, 8.0))
    params = LorentzParams(2.0, 1.0)
    full = lorentz_norm_rearranged(psi, params)
    tail_only = restricted_norm(psi, params, t_cut=4.0)
    assert 0 < tail_only < full
    assert restricted_norm(psi, params, t_cut=8.0) == pytest.approx(
        full, rel=1e-12)


# -- sequence norms -----------------------------------------------------------------

def test_ell_q_norm_values():
    assert ell_q_norm([3.0, -4.0], 1.0) == 7.0
    assert ell_q_norm([3.0, -4.0], 2.0) == pytest.approx(5.0, rel=1e-15)
    assert ell_q_norm([3.0, -4.0], math.inf) == 4.0
    assert ell_q_norm([], 2.0) == 0.0
    assert ell_q_norm([0.0, 0.0], 3.0) == 0.0
    got = ell_q_norm(np.full(4, 1e307), 2.0)
    assert math.isfinite(got)
    assert got == pytest.approx(2.0 * 1e307, rel=1e-14)
    # naive sum of q-th powers would overflow here
    big = ell_q_norm(np.full(4, 1e308), 8.0)
    assert math.isfinite(big)
    assert big == pytest.approx(4.0 ** 0.125 * 1e308, rel=1e-14)


def test_ell_q_norm_validation():
    with pytest.raises(ValidationError):
        ell_q_norm([1.0], 0.5)
