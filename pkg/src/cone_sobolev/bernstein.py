"""Almost-extremal shell systems and non-compactness certificates.

The embedding of the gradient-Lorentz space into L^{p*,q} is maximally
non-compact: its Bernstein numbers equal its norm.  The constructive
witness is a nested system of radial shell functions u_1, u_2, ... with

* ||grad u_j|| = 1 and ||u_j|| = lambda, for a chosen lambda < ||E||,
* gradients supported in disjoint annuli (flat heads cover the successors),
* tail budgets gamma_j controlling how much of ||u_j|| survives inside the
  next shell, with || {gamma_j} ||_{ell_q'} <= eps2,
* a windowed-energy condition: (1+eps1)^q times the Lorentz integrand of
  u_j restricted to the annulus between consecutive measures delta_{j+1},
  delta_j still covers lambda^q.

Together these give the superadditivity bound

    || sum alpha_j u_j || >= (lambda/(1+eps1) - eps2) ||alpha||_q

while disjoint gradient supports give || sum alpha_j grad u_j || <=
||alpha||_q, so every span direction has quotient at least
lambda/(1+eps1) - eps2: a certified Bernstein lower bound, valid for
every m since the shells keep coming.  Restricted norms along the
shrinking supports vanish (absolute continuity), which is the mechanism
that defeats any fixed finite cover.

Shell profiles are truncated power arcs placed by two monotone bisections
per shell (head ratio for the quotient, cutoff radius for tail and window
conditions); everything is exact segment arithmetic or adaptive
quadrature at 1e-12.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .cones import WeightedCone
from .errors import (DomainError, InfeasibleError, InternalConsistencyError,
                     ResourceError, ValidationError)
from .lorentz import (LorentzParams, ell_q_norm, lorentz_norm_rearranged,
                      restricted_norm)
from .profiles import RadialProfile, alvino_profile, gradient_density
from .segments import (Law, LevelSet, Piece, abs_pieces, clip_pieces,
                       moment_integral)
from .sobolev import embedding_norm, quotient

__all__ = [
    "ShellSpec",
    "AlmostExtremalSystem",
    "gamma_sequence",
    "build_shell_function",
    "construct_system",
    "superadditivity_certificate",
    "gradient_upper_certificate",
    "bernstein_lower_bound",
    "BernsteinBound",
    "absolute_continuity_witness",
    "verify_system",
]

_NORM_RTOL = 1e-10
_CERT_SLACK = 1e-9
_MAX_LOG10_RANGE = 300.0


@dataclass(frozen=True)
class ShellSpec:
    """One shell: radii, measures, budget, and the profile itself.

    ``cutoff_radius`` is the next outer radius R_{j+1} (the tail and
    window conditions are stated relative to it); ``cutoff_measure`` is
    delta_{j+1}.
    """

    index: int
    outer_radius: float
    inner_radius: float
    cutoff_radius: float
    delta: float
    cutoff_measure: float
    gamma: float
    profile: RadialProfile

    @property
    def head_measure(self) -> float:
        """mu(B_{r_j}), the flat-head extent in measure units."""
        return self.profile.pieces[0].t1


@dataclass(frozen=True)
class AlmostExtremalSystem:
    """The full shell system with its defining scalars."""

    cone: WeightedCone
    params: LorentzParams
    lam: float
    eps1: float
    eps2: float
    geometric_ratio: float | None
    shells: tuple[ShellSpec, ...]

    @property
    def m(self) -> int:
        return len(self.shells)

    def prefix(self, k: int) -> "AlmostExtremalSystem":
        """The subsystem of the first k shells (valid on its own)."""
        if not 1 <= k <= self.m:
            raise ValidationError(f"prefix length must be in 1..{self.m}")
        return AlmostExtremalSystem(self.cone, self.params, self.lam,
                                    self.eps1, self.eps2,
                                    self.geometric_ratio, self.shells[:k])

    # -- serialization --------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "cone": self.cone.to_json_dict(),
            "params": {"p": self.params.p, "q": self.params.q},
            "lambda": self.lam,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "geometric_ratio": self.geometric_ratio,
            "shells": [{
                "index": s.index,
                "outer_radius": s.outer_radius,
                "inner_radius": s.inner_radius,
                "cutoff_radius": s.cutoff_radius,
                "delta": s.delta,
                "cutoff_measure": s.cutoff_measure,
                "gamma": s.gamma,
                "profile": {"segments": s.profile.to_json_dict()["segments"]},
            } for s in self.shells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json_dict(data: Mapping) -> "AlmostExtremalSystem":
        try:
            cone = WeightedCone.from_json_dict(data["cone"])
            params = LorentzParams(float(data["params"]["p"]),
                                   float(data["params"]["q"]), cone)
            shells = tuple(
                ShellSpec(
                    index=int(s["index"]),
                    outer_radius=float(s["outer_radius"]),
                    inner_radius=float(s["inner_radius"]),
                    cutoff_radius=float(s["cutoff_radius"]),
                    delta=float(s["delta"]),
                    cutoff_measure=float(s["cutoff_measure"]),
                    gamma=float(s["gamma"]),
                    profile=RadialProfile.from_json_dict(
                        {"segments": s["profile"]["segments"]}, cone),
                ) for s in data["shells"])
            ratio = data.get("geometric_ratio")
            return AlmostExtremalSystem(
                cone, params, float(data["lambda"]), float(data["eps1"]),
                float(data["eps2"]),
                None if ratio is None else float(ratio), shells)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed system spec: {exc}") from exc

    @staticmethod
    def from_json(text: str) -> "AlmostExtremalSystem":
        return AlmostExtremalSystem.from_json_dict(json.loads(text))


# -- tail budgets ------------------------------------------------------------

def _geometric_ratio(q_prime: float, eps2: float) -> float:
    """Largest a in (0,1) with a^q' / (1 - a^q') <= eps2^q', by bisection."""
    target = eps2 ** q_prime
    lo, hi = 0.0, 1.0 - 1e-16
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        aq = mid ** q_prime
        if aq / (1.0 - aq) <= target:
            lo = mid
        else:
            hi = mid
    return lo

def gamma_sequence(params: LorentzParams, eps2: float,
                   count: int) -> list[float]:
    """Tail budgets with ell_{q'} norm within eps2.

    q = 1 (q' = inf) allows the constant choice gamma_j = eps2; for q > 1
    a geometric sequence a^j is used with a chosen so the full series
    stays within budget.
    """
    if eps2 <= 0:
        raise ValidationError("eps2 must be positive")
    if count < 1:
        raise ValidationError("at least one budget term is required")
    if params.q == 1.0:
        return [eps2] * count
    a = _geometric_ratio(params.q_prime, eps2)
    return [a ** j for j in range(1, count + 1)]


# -- single shell ------------------------------------------------------------

def _quotient_of_ratio(cone: WeightedCone, bound: LorentzParams,
                       ratio: float, t_outer: float) -> float:
    profile = alvino_profile(cone, bound.p_star, t_outer / ratio, t_outer)
    return quotient(profile, bound).quotient


def build_shell_function(cone: WeightedCone, params: LorentzParams,
                         lam: float, outer_radius: float
                         ) -> tuple[RadialProfile, float]:
    """A radial function with quotient lambda, unit gradient norm, flat head.

    The head-to-support ratio of a truncated power profile is expanded
    until its (scale-invariant) quotient brackets lambda, then bisected to
    1e-12; the amplitude is then set so ||grad u|| = 1, which makes
    ||u|| = lambda.  Returns the profile and the flat-head radius r.
    """
    bound = LorentzParams(params.p, params.q, cone)
    e_norm = embedding_norm(cone, bound)
    if not 0.0 < lam < e_norm:
        raise InfeasibleError(
            f"a shell needs 0 < lambda < the sharp constant {e_norm}; "
            f"got {lam} (the supremum is not attained)")
    if bound.p == 1.0 and bound.q == 1.0:
        raise InfeasibleError(
            "at p = q = 1 every radial nonincreasing profile attains the "
            "sharp constant exactly, so no profile has quotient "
            "lambda < ||E||; use q = 1 with p > 1 instead")
    if outer_radius <= 0:
        raise DomainError("the outer radius must be positive")
    t_outer = cone.c_d * outer_radius ** cone.big_d

    # bracket the quotient in log-ratio space (quotient grows with ratio)
    lo, hi = math.log(2.0), math.log(16.0)
    cap = _MAX_LOG10_RANGE * math.log(10.0)
    while _quotient_of_ratio(cone, bound, math.exp(hi), t_outer) < lam:
        lo = hi
        hi *= 2.0
        if hi > cap:
            raise ResourceError(
                f"lambda = {lam} is so close to the sharp constant "
                f"{e_norm} that the required head-to-support ratio "
                f"exceeds 1e{_MAX_LOG10_RANGE:.0f} in measure units")
    while _quotient_of_ratio(cone, bound, math.exp(lo), t_outer) > lam:
        hi = lo
        lo *= 0.5
        if lo < 1e-12:
            raise InternalConsistencyError(
                "quotient bracketing failed at vanishing head ratio")
    tol = 1e-12 * max(1.0, lam)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = _quotient_of_ratio(cone, bound, math.exp(mid), t_outer)
        if abs(val - lam) <= tol:
            lo = hi = mid
            break
        if val < lam:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    ratio = math.exp(0.5 * (lo + hi))
    raw = alvino_profile(cone, bound.p_star, t_outer / ratio, t_outer)
    report = quotient(raw, bound)
    if abs(report.quotient - lam) > 100.0 * tol:
        raise InternalConsistencyError(
            "head-ratio bisection failed to pin the quotient")
    profile = raw.scaled_amplitude(1.0 / report.denominator)
    inner_radius = cone.radius_of_measure(t_outer / ratio)
    return profile, inner_radius


# -- windowed energy ----------------------------------------------------------

def _window_energy(profile: RadialProfile, bound: LorentzParams,
                   tau: float) -> float:
    """integral over (tau, delta) of t^(q/p*-1) u*(t + tau)^q dt.

    u* restricted outside measure tau has rearrangement u*(. + tau), a
    shifted-argument law on each overlapping segment; the flat head
    contributes an exact power moment, the arcs integrate adaptively.
    """
    q = bound.q
    gamma = q / bound.p_star
    delta = profile.t_max
    total = 0.0
    for piece in profile.pieces:
        lo = max(piece.t0 - tau, tau)
        hi = piece.t1 - tau
        if lo >= hi:
            continue
        shifted = piece.law.with_argument_shifted(tau)
        total += moment_integral(lo, min(hi, delta), shifted, gamma, q)
    return total


# -- the inductive construction ----------------------------------------------

def _bisect_threshold(predicate, lo: float, hi: float,
                      iterations: int = 80) -> float:
    """Largest x in (lo, hi] with predicate(x) true, for a predicate that
    holds near 0 and fails near hi.  Returns hi if it never fails."""
    if predicate(hi):
        return hi
    for _ in range(40):
        if predicate(lo):
            break
        lo *= 1e-6
    else:
        raise InternalConsistencyError(
            "monotone bisection found no feasible cutoff: restricted "
            "norms are not behaving monotonically")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo


def construct_system(cone: WeightedCone, params: LorentzParams, m: int,
                     lam: float, eps1: float, eps2: float
                     ) -> AlmostExtremalSystem:
    """Build the m-shell almost-extremal system, verifying every invariant.

    Per shell: a quotient-lambda profile in B_{R_j}; a cutoff radius found
    by monotone bisection so the tail norm stays within gamma_j while the
    windowed energy inflated by (1+eps1) still covers lambda; then the
    next outer radius shrinks further to meet the measure-decay rule
    delta_{j+1} < delta_j / j.
    """
    if int(m) != m or m < 1:
        raise ValidationError("shell count m must be a positive integer")
    if eps1 <= 0 or eps2 <= 0:
        raise ValidationError("eps1 and eps2 must be positive")
    bound = LorentzParams(params.p, params.q, cone)
    gammas = gamma_sequence(bound, eps2, m)
    ratio = (None if bound.q == 1.0
             else _geometric_ratio(bound.q_prime, eps2))
    star = bound.star_params()
    lam_q = lam ** bound.q
    inflate = (1.0 + eps1) ** bound.q

    shells: list[ShellSpec] = []
    outer = 1.0
    for j in range(1, m + 1):
        profile, inner = build_shell_function(cone, bound, lam, outer)
        delta = cone.c_d * outer ** cone.big_d
        head = profile.pieces[0].t1  # mu(B_{r_j})

        def tail_ok(tau: float) -> bool:
            return restricted_norm(profile, star, t_cut=tau) \
                <= gammas[j - 1]

        def window_ok(tau: float) -> bool:
            return inflate * _window_energy(profile, bound, tau) >= lam_q

        tau_tail = _bisect_threshold(tail_ok, head * 1e-24, head)
        tau_window = _bisect_threshold(window_ok, head * 1e-24, head)
        tau_feasible = 0.5 * min(tau_tail, tau_window, 0.75 * head)
        if not (tail_ok(tau_feasible) and window_ok(tau_feasible)):
            raise InternalConsistencyError(
                "cutoff bisection produced an infeasible radius")
        cutoff_measure = min(0.5 * tau_feasible,
                             delta / (2.0 * j))
        cutoff_radius = cone.radius_of_measure(cutoff_measure)
        shells.append(ShellSpec(j, outer, inner, cutoff_radius, delta,
                                cutoff_measure, gammas[j - 1], profile))
        outer = cutoff_radius
    system = AlmostExtremalSystem(cone, bound, lam, eps1, eps2, ratio,
                                  tuple(shells))
    verify_system(system)
    return system


def verify_system(system: AlmostExtremalSystem) -> dict:
    """Check every system invariant exactly; raise on any failure.

    Returns a report dict with the measured values for each shell.
    """
    cone, bound = system.cone, system.params
    star = bound.star_params()
    e_norm = embedding_norm(cone, bound)
    if not 0.0 < system.lam < e_norm:
        raise InternalConsistencyError("lambda outside (0, ||E||)")
    budgets = [s.gamma for s in system.shells]
    if ell_q_norm(budgets, bound.q_prime) > system.eps2 * (1.0 + 1e-12):
        raise InternalConsistencyError("tail budgets exceed eps2")
    lam_q = system.lam ** bound.q
    inflate = (1.0 + system.eps1) ** bound.q
    report = {"shells": [], "lambda": system.lam,
              "embedding_norm": e_norm}
    for k, s in enumerate(system.shells):
        psi = gradient_density(s.profile)
        grad_norm = LevelSet.from_pieces(list(psi.pieces)) \
            .lorentz_qth_power(bound.p, bound.q) ** (1.0 / bound.q)
        fn_norm = lorentz_norm_rearranged(s.profile, star)
        if abs(grad_norm - 1.0) > _NORM_RTOL:
            raise InternalConsistencyError(
                f"shell {s.index}: gradient norm {grad_norm} is not 1")
        if abs(fn_norm - system.lam) > _NORM_RTOL * system.lam:
            raise InternalConsistencyError(
                f"shell {s.index}: function norm {fn_norm} is not lambda")
        if not 0.0 < s.cutoff_radius < s.inner_radius < s.outer_radius:
            raise InternalConsistencyError(
                f"shell {s.index}: radii are not strictly nested")
        if not s.cutoff_measure < s.delta / s.index:
            raise InternalConsistencyError(
                f"shell {s.index}: measure decay delta/{s.index} violated")
        if s.cutoff_measure >= s.profile.t_max:
            raise InternalConsistencyError(
                f"shell {s.index}: cutoff ball is not inside the support")
        tail = restricted_norm(s.profile, star, t_cut=s.cutoff_measure)
        if tail > s.gamma * (1.0 + 1e-12):
            raise InternalConsistencyError(
                f"shell {s.index}: tail norm {tail} exceeds gamma")
        window = inflate * _window_energy(s.profile, bound,
                                          s.cutoff_measure)
        if window < lam_q * (1.0 - 1e-12):
            raise InternalConsistencyError(
                f"shell {s.index}: windowed energy fails to cover lambda^q")
        if k + 1 < system.m:
            nxt = system.shells[k + 1]
            if nxt.outer_radius != s.cutoff_radius:
                raise InternalConsistencyError(
                    "shell chain broken: outer radius mismatch")
            if nxt.profile.t_max > s.head_measure:
                raise InternalConsistencyError(
                    f"shell {s.index + 1} support leaks into the gradient "
                    f"annulus of shell {s.index}")
        report["shells"].append({
            "index": s.index, "gradient_norm": grad_norm,
            "function_norm": fn_norm, "tail_norm": tail,
            "windowed_energy_qth_power": window,
            "delta": s.delta, "cutoff_measure": s.cutoff_measure,
        })
    return report


# -- span arithmetic -----------------------------------------------------------

def _span_pieces(system: AlmostExtremalSystem,
                 alpha: Sequence[float]) -> list[Piece]:
    """Exact pieces of sum alpha_j u_j on (0, delta_1).

    Inside shell j's annulus every earlier shell is flat, so the sum is
    that shell's profile scaled and lifted by a constant: still one law
    per segment.
    """
    alpha = [float(a) for a in alpha]
    if not alpha or len(alpha) > system.m:
        raise ValidationError(
            f"alpha must have between 1 and {system.m} entries; "
            f"got {len(alpha)}")
    if not all(math.isfinite(a) for a in alpha):
        raise ValidationError("alpha entries must be finite")
    pieces: list[Piece] = []
    lift = 0.0
    for a_j, shell in zip(alpha, system.shells):
        for pc in clip_pieces(shell.profile.pieces, shell.cutoff_measure,
                              shell.profile.t_max):
            pieces.append(Piece(pc.t0, pc.t1,
                                pc.law.scaled(a_j).shifted(lift)))
        lift += a_j * shell.profile.max_value
    last_cut = system.shells[len(alpha) - 1].cutoff_measure
    if lift != 0.0:
        pieces.append(Piece(0.0, last_cut, Law.constant(lift)))
    return sorted(pieces, key=lambda p: p.t0)


def _span_function_norm(system: AlmostExtremalSystem,
                        alpha: Sequence[float]) -> float:
    pieces = abs_pieces(_span_pieces(system, alpha))
    pieces = [p for p in pieces
              if not (p.law.is_constant and p.law.constant_value() == 0.0)]
    if not pieces:
        return 0.0
    level = LevelSet.from_pieces(pieces)
    q = system.params.q
    return level.lorentz_qth_power(system.params.p_star, q) ** (1.0 / q)


def _span_gradient_norm(system: AlmostExtremalSystem,
                        alpha: Sequence[float]) -> float:
    pieces = []
    for a_j, shell in zip(alpha, system.shells):
        if a_j == 0.0:
            continue
        psi = gradient_density(shell.profile)
        pieces.extend(Piece(p.t0, p.t1, p.law.scaled(abs(a_j)))
                      for p in psi.pieces)
    if not pieces:
        return 0.0
    level = LevelSet.from_pieces(pieces)
    q = system.params.q
    return level.lorentz_qth_power(system.params.p, q) ** (1.0 / q)


# -- certificates ---------------------------------------------------------------

def superadditivity_certificate(system: AlmostExtremalSystem,
                                alpha: Sequence[float]
                                ) -> tuple[float, float, bool]:
    """||sum alpha_j u_j|| against (lambda/(1+eps1) - eps2) ||alpha||_q."""
    lhs = _span_function_norm(system, alpha)
    floor = system.lam / (1.0 + system.eps1) - system.eps2
    bound_val = floor * ell_q_norm(alpha, system.params.q)
    return lhs, bound_val, lhs >= bound_val * (1.0 - _CERT_SLACK)


def gradient_upper_certificate(system: AlmostExtremalSystem,
                               alpha: Sequence[float]
                               ) -> tuple[float, float, bool]:
    """||sum alpha_j grad u_j|| against ||alpha||_q (disjoint supports)."""
    lhs = _span_gradient_norm(system, alpha)
    bound_val = ell_q_norm(alpha, system.params.q)
    return lhs, bound_val, lhs <= bound_val * (1.0 + _CERT_SLACK)


@dataclass(frozen=True)
class BernsteinBound:
    """A certified Bernstein lower bound with its empirical witness."""

    certified: float
    empirical_minimum: float
    directions: int
    seed: int


def bernstein_lower_bound(system: AlmostExtremalSystem,
                          directions: int = 5000,
                          seed: int = 0) -> BernsteinBound:
    """The certified bound lambda/(1+eps1) - eps2, with a random sweep.

    Every direction of the shell span has Sobolev quotient at least the
    certified value; the sweep over random directions reports the
    empirical minimum as a direct witness.
    """
    certified = system.lam / (1.0 + system.eps1) - system.eps2
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(directions):
        alpha = rng.standard_normal(system.m)
        num = _span_function_norm(system, alpha)
        den = _span_gradient_norm(system, alpha)
        if den == 0.0:
            continue
        worst = min(worst, num / den)
    return BernsteinBound(certified, worst, directions, seed)


def absolute_continuity_witness(system: AlmostExtremalSystem,
                                g: RadialProfile) -> list[float]:
    """Restricted norms of g along the system's shrinking supports.

    Returns [ ||g chi_{B_{R_j}}|| for j = 1..m ]: nonincreasing, and
    vanishing as the supports shrink, which is what defeats any fixed
    finite cover in the non-compactness argument.
    """
    star = system.params.star_params()
    return [restricted_norm(g, star, t_cut=s.delta)
            for s in system.shells]
