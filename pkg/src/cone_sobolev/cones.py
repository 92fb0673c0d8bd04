"""Convex cones with monomial weights and their weighted measures.

A cone is the set where a chosen subset of coordinates is positive,

    S = {x in R^d : x_i > 0 for every listed axis i},

carrying the weight w(x) = prod x_i^{A_i} over the listed axes with all
A_i > 0.  The weighted measure is d(mu) = w dx.  Writing alpha for the sum
of the exponents, w is alpha-homogeneous, w^(1/alpha) is concave on S, and
the measure scales with the effective dimension

    D = d + alpha,        mu(B_r cap S) = c_d * r^D,

where c_d = mu(B_1 cap S) is the weighted measure of the unit ball sector.
c_d is always computed numerically here (two independent routes, below);
closed forms for special cones live in the test suite as oracles.

Two quadrature modes compute c_d:

* product rule: hyperspherical coordinates turn B_1 cap S into
  (radius) x (angular box).  The radial factor integrates exactly to 1/D,
  and for monomial weights the angular integrand factorises into univariate
  integrals of cos^a sin^b, each evaluated by Gauss-Jacobi quadrature whose
  endpoint exponents match the integrand's algebraic zeros.  The error
  estimate compares two orders (Richardson style).
* monte-carlo: uniform samples in the unit ball, averaging w * chi_S,
  with a standard-error estimate; deterministic for a fixed seed and
  partition count.

Setting ``extension_unweighted`` produces the unweighted extension
(no listed axes, w == 1, S = R^d, D = d); reports must flag this mode.
An opaque plugin weight may replace the monomial sampler for adversarial
probes (e.g. failing the concavity check); plugin cones integrate through
monte-carlo only.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError, NumericalError, ValidationError

__all__ = [
    "WeightedCone",
    "QuadratureConfig",
    "ConcavityReport",
    "weight_eval",
    "unit_ball_measure",
    "ball_measure",
    "concavity_probe",
    "builtin_cone",
    "BUILTIN_CONE_NAMES",
    "thread_cap",
]

_HALF_PI = 0.5 * math.pi


def thread_cap() -> int:
    """Parallelism cap from CONE_SOBOLEV_THREADS (0 or unset = auto)."""
    raw = os.environ.get("CONE_SOBOLEV_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValidationError(
            f"CONE_SOBOLEV_THREADS must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise ValidationError("CONE_SOBOLEV_THREADS must be >= 0")
    if cap == 0:
        return os.cpu_count() or 1
    return cap


@dataclass(frozen=True)
class QuadratureConfig:
    """How to integrate over the cone.

    mode is "product-rule" or "monte-carlo".  ``order`` is the points per
    angular factor for the product rule; ``samples`` the total draw count
    for monte-carlo.  ``partitions`` fixes the monte-carlo chunking so the
    result is reproducible for a given (seed, partitions) pair regardless
    of parallel execution.
    """

    mode: str = "product-rule"
    order: int = 96
    samples: int = 1_000_000
    seed: int = 0
    partitions: int = 1

    def __post_init__(self) -> None:
        if self.mode not in ("product-rule", "monte-carlo"):
            raise ValidationError(f"unknown quadrature mode {self.mode!r}")
        if self.order < 4:
            raise ValidationError("product-rule order must be >= 4")
        if self.samples < 1:
            raise ValidationError("monte-carlo sample count must be >= 1")
        if self.partitions < 1:
            raise ValidationError("monte-carlo partitions must be >= 1")


@dataclass(frozen=True)
class WeightedCone:
    """A cone with a monomial weight; carries its measured constants.

    Fields mirror the data contract: dimension ``d``; ``exponents`` as
    (axis, power) pairs with 0-based axis indices; ``alpha`` the exponent
    sum; ``big_d`` the effective dimension d + alpha; ``c_d`` the weighted
    unit-ball sector measure (computed at construction).
    """

    d: int
    exponents: tuple[tuple[int, float], ...]
    alpha: float
    big_d: float
    c_d: float
    c_d_error: float
    extension_unweighted: bool = False
    plugin_weight: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, compare=False, repr=False)

    # -- construction -------------------------------------------------

    @staticmethod
    def create(d: int,
               exponents: Sequence[tuple[int, float]] = (),
               extension_unweighted: bool = False,
               quad: QuadratureConfig | None = None) -> "WeightedCone":
        _validate_cone_spec(d, exponents, extension_unweighted)
        exps = tuple((int(a), float(p)) for a, p in exponents)
        alpha = float(sum(p for _, p in exps))
        big_d = d + alpha
        cfg = quad or QuadratureConfig()
        pre = WeightedCone(d, exps, alpha, big_d, math.nan, math.nan,
                           extension_unweighted)
        c_d, err = unit_ball_measure(pre, cfg)
        return WeightedCone(d, exps, alpha, big_d, c_d, err,
                            extension_unweighted)

    @staticmethod
    def create_plugin(d: int,
                      constrained_axes: Sequence[int],
                      alpha: float,
                      weight_fn: Callable[[np.ndarray], np.ndarray],
                      quad: QuadratureConfig | None = None) -> "WeightedCone":
        """Cone with an opaque weight sampler (adversarial probes).

        ``alpha`` is the caller-declared homogeneity degree; the measure
        constant is estimated by monte-carlo since no product structure is
        available.
        """
        if d < 2:
            raise ValidationError("cone dimension d must be >= 2")
        axes = tuple(sorted(int(a) for a in constrained_axes))
        if any(a < 0 or a >= d for a in axes) or len(set(axes)) != len(axes):
            raise ValidationError("constrained axes must be distinct and in range")
        exps = tuple((a, 0.0) for a in axes)  # axes listed, powers opaque
        cfg = quad or QuadratureConfig(mode="monte-carlo", samples=200_000)
        if cfg.mode != "monte-carlo":
            raise DomainError("plugin weights integrate via monte-carlo only")
        pre = WeightedCone(d, exps, float(alpha), d + float(alpha), math.nan,
                           math.nan, False, weight_fn)
        c_d, err = unit_ball_measure(pre, cfg)
        return WeightedCone(d, exps, float(alpha), d + float(alpha), c_d, err,
                            False, weight_fn)

    # -- basic queries ------------------------------------------------

    @property
    def constrained_axes(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.exponents)

    def power_of(self, axis: int) -> float:
        for a, p in self.exponents:
            if a == axis:
                return p
        return 0.0

    def contains(self, x: np.ndarray, strict: bool = False) -> bool:
        x = np.asarray(x, dtype=float)
        for a in self.constrained_axes:
            if strict and not x[..., a] > 0:
                return False
            if not strict and x[..., a] < 0:
                return False
        return True

    def measure_of_radius(self, r: float) -> float:
        return ball_measure(self, r)

    def radius_of_measure(self, t: float) -> float:
        """Inverse of r -> mu(B_r), for t >= 0."""
        if t < 0:
            raise DomainError("measure must be nonnegative")
        return (t / self.c_d) ** (1.0 / self.big_d)

    # -- serialization ------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.plugin_weight is not None:
            raise ValidationError("plugin-weight cones are not serializable")
        return {
            "d": self.d,
            "exponents": [{"axis": a, "power": p} for a, p in self.exponents],
            "extension_unweighted": self.extension_unweighted,
        }

    @staticmethod
    def from_json_dict(data: Mapping, quad: QuadratureConfig | None = None
                       ) -> "WeightedCone":
        try:
            d = int(data["d"])
            exps = [(int(e["axis"]), float(e["power"]))
                    for e in data.get("exponents", [])]
            ext = bool(data.get("extension_unweighted", False))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed cone spec: {exc}") from exc
        return WeightedCone.create(d, exps, ext, quad)

    @staticmethod
    def from_json(text: str, quad: QuadratureConfig | None = None
                  ) -> "WeightedCone":
        return WeightedCone.from_json_dict(json.loads(text), quad)


def _validate_cone_spec(d: int, exponents: Sequence[tuple[int, float]],
                        extension_unweighted: bool) -> None:
    if int(d) != d or d < 2:
        raise ValidationError("cone dimension d must be an integer >= 2")
    axes = [int(a) for a, _ in exponents]
    if len(set(axes)) != len(axes):
        raise ValidationError("duplicate axis in exponent list")
    for a, p in exponents:
        if a < 0 or a >= d:
            raise ValidationError(f"axis {a} outside 0..{d - 1}")
        if not p > 0:
            raise ValidationError("monomial powers must be strictly positive")
    if extension_unweighted and exponents:
        raise ValidationError(
            "extension mode carries no weight exponents")
    if not extension_unweighted and not exponents:
        raise ValidationError(
            "at least one weighted axis is required "
            "(or set extension_unweighted)")


# -- weight evaluation ----------------------------------------------------

def weight_eval(cone: WeightedCone, x: Sequence[float] | np.ndarray) -> float | np.ndarray:
    """Evaluate w at a point (shape (d,)) or batch (shape (n, d)).

    Points must lie in the closure of the cone; a strictly negative
    constrained coordinate is a domain error.  On the boundary w vanishes.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.shape[-1] != cone.d:
        raise ValidationError(f"points must have {cone.d} coordinates")
    for a in cone.constrained_axes:
        if np.any(pts[:, a] < 0):
            raise DomainError(
                f"coordinate on axis {a} is negative: outside the cone closure")
    vals = _weight_values(cone, pts)
    return float(vals[0]) if single else vals


def _weight_values(cone: WeightedCone, pts: np.ndarray) -> np.ndarray:
    """Weight on a batch of points, zero outside the (closed) cone."""
    if cone.plugin_weight is not None:
        vals = np.asarray(cone.plugin_weight(pts), dtype=float)
    elif cone.extension_unweighted:
        vals = np.ones(pts.shape[0])
    else:
        vals = np.ones(pts.shape[0])
        for a, p in cone.exponents:
            vals = vals * np.power(np.maximum(pts[:, a], 0.0), p)
    mask = np.ones(pts.shape[0], dtype=bool)
    for a in cone.constrained_axes:
        mask &= pts[:, a] > 0
    return np.where(mask | (len(cone.constrained_axes) == 0), vals, 0.0)


# -- unit ball measure: product rule --------------------------------------

def _angular_factors(cone: WeightedCone) -> list[dict]:
    """Describe each univariate angular integral cos^a sin^b over its range.

    Hyperspherical coordinates with angles theta_1..theta_{d-1}: coordinate
    j < d carries cos(theta_j) (after the sines of earlier angles), the last
    coordinate carries only sines.  Positivity of coordinate j therefore
    restricts theta_j to angles of positive cosine; the region is an exact
    angular box.
    """
    d = cone.d
    powers = np.zeros(d)
    for a, p in cone.exponents:
        powers[a] = p
    constrained = np.zeros(d, dtype=bool)
    for a in cone.constrained_axes:
        constrained[a] = True
    factors = []
    for j in range(1, d):  # 1-based angle index
        a_exp = powers[j - 1]
        b_exp = (d - 1 - j if j <= d - 2 else 0) + float(np.sum(powers[j:]))
        if j <= d - 2:
            lo, hi = (0.0, _HALF_PI) if constrained[j - 1] else (0.0, math.pi)
        else:
            c1, c2 = constrained[d - 2], constrained[d - 1]
            if c1 and c2:
                lo, hi = 0.0, _HALF_PI
            elif c1:
                lo, hi = -_HALF_PI, _HALF_PI
            elif c2:
                lo, hi = 0.0, math.pi
            else:
                lo, hi = 0.0, 2.0 * math.pi
        factors.append({"a": float(a_exp), "b": float(b_exp),
                        "lo": lo, "hi": hi})
    return factors


def _factor_integral(a: float, b: float, lo: float, hi: float,
                     order: int) -> float:
    """integral of cos^a(t) sin^b(t) over [lo, hi] via matched Gauss-Jacobi.

    The Jacobi weight exponents are chosen equal to the algebraic order of
    the integrand's zeros at the interval endpoints, so the remaining
    factor is analytic and the rule converges spectrally for any real
    a, b >= 0.
    """
    if hi - lo > math.pi + 1e-12:
        # full circle: only reachable with a == b == 0
        return hi - lo
    # algebraic zero exponents at the endpoints
    up_cos = abs(hi - _HALF_PI) < 1e-14
    lo_cos = abs(lo + _HALF_PI) < 1e-14
    up_sin = abs(hi - math.pi) < 1e-14
    lo_sin = abs(lo) < 1e-14
    alpha = (a if up_cos else 0.0) + (b if up_sin else 0.0)
    beta = (a if lo_cos else 0.0) + (b if lo_sin else 0.0)
    x, w = roots_jacobi(order, alpha, beta)
    h = 0.5 * (hi - lo)
    mid = 0.5 * (lo + hi)
    theta = mid + h * x
    one_m = 1.0 - x
    one_p = 1.0 + x

    g = np.ones_like(x)
    if a != 0.0:
        if up_cos and lo_cos:
            u = one_m * one_p
            base = np.sin(h * u / (1.0 + np.abs(x))) / u
        elif up_cos:
            base = np.sin(h * one_m) / one_m
        elif lo_cos:
            base = np.sin(h * one_p) / one_p
        else:
            base = np.cos(theta)
        g = g * np.power(base, a)
    if b != 0.0:
        if up_sin and lo_sin:
            u = one_m * one_p
            base = np.sin(h * u / (1.0 + np.abs(x))) / u
        elif up_sin:
            base = np.sin(h * one_m) / one_m
        elif lo_sin:
            base = np.sin(h * one_p) / one_p
        else:
            base = np.sin(theta)
        g = g * np.power(base, b)
    return float(h * np.dot(w, g))


def _unit_ball_product(cone: WeightedCone, cfg: QuadratureConfig
                       ) -> tuple[float, float]:
    if cone.plugin_weight is not None:
        raise DomainError("plugin weights integrate via monte-carlo only")
    factors = _angular_factors(cone)
    value = 1.0 / cone.big_d  # exact radial factor: int_0^1 r^{D-1} dr
    rel_err = 0.0
    for fac in factors:
        hi_ord = _factor_integral(fac["a"], fac["b"], fac["lo"], fac["hi"],
                                  cfg.order)
        lo_ord = _factor_integral(fac["a"], fac["b"], fac["lo"], fac["hi"],
                                  max(8, cfg.order // 2))
        if hi_ord <= 0:
            raise NumericalError("angular factor integrated to a nonpositive value")
        value *= hi_ord
        rel_err += abs(hi_ord - lo_ord) / abs(hi_ord)
    rel_err = max(rel_err, 4e-16 * len(factors))
    err = abs(value) * rel_err
    if err > 0.1 * abs(value):
        raise NumericalError(
            f"product-rule quadrature failed to converge: value {value:.3e}, "
            f"error estimate {err:.3e} exceeds 10% of the value")
    return value, err


# -- unit ball measure: monte-carlo ----------------------------------------

def _lebesgue_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def _mc_partition(cone: WeightedCone, n: int, seed_seq: np.random.SeedSequence
                  ) -> tuple[float, float, int]:
    rng = np.random.default_rng(seed_seq)
    normals = rng.standard_normal((n, cone.d))
    radii = rng.random(n) ** (1.0 / cone.d)
    norms = np.linalg.norm(normals, axis=1)
    norms[norms == 0] = 1.0
    pts = normals * (radii / norms)[:, None]
    vals = _weight_values(cone, pts)
    return float(np.sum(vals)), float(np.sum(vals * vals)), n


def _unit_ball_mc(cone: WeightedCone, cfg: QuadratureConfig
                  ) -> tuple[float, float]:
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.partitions)
    base = cfg.samples // cfg.partitions
    counts = [base + (1 if i < cfg.samples % cfg.partitions else 0)
              for i in range(cfg.partitions)]
    parts = [_mc_partition(cone, c, s) for c, s in zip(counts, seeds) if c > 0]
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    vol = _lebesgue_ball_volume(cone.d)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * (n / max(n - 1, 1))
    se = vol * math.sqrt(var / n)
    value = vol * mean
    if n >= 100 and se > 0.1 * abs(value):
        raise NumericalError(
            f"monte-carlo estimate did not converge: value {value:.3e}, "
            f"standard error {se:.3e} exceeds 10% of the value")
    return value, se


def unit_ball_measure(cone: WeightedCone, config: QuadratureConfig | None = None
                      ) -> tuple[float, float]:
    """Weighted measure of B_1 cap S with an error estimate.

    Product rule returns a Richardson-style error estimate; monte-carlo
    returns one standard error.  An estimate above 10% of the value raises
    NumericalError.
    """
    cfg = config or QuadratureConfig()
    if cfg.mode == "product-rule":
        return _unit_ball_product(cone, cfg)
    return _unit_ball_mc(cone, cfg)


def ball_measure(cone: WeightedCone, r: float) -> float:
    """mu(B_r cap S) = c_d * r^D by homogeneity."""
    if r < 0:
        raise DomainError("ball radius must be nonnegative")
    if r == 0:
        return 0.0
    return cone.c_d * r ** cone.big_d


# -- concavity probe -------------------------------------------------------

@dataclass(frozen=True)
class ConcavityReport:
    trials: int
    violations: int
    worst_margin: float
    passed: bool


def concavity_probe(cone: WeightedCone, trials: int = 1000, seed: int = 0
                    ) -> ConcavityReport:
    """Sample midpoint concavity of w^(1/alpha) on segments inside the cone.

    For each random pair x, y in S the probe checks

        w^(1/alpha)((x+y)/2) >= (w^(1/alpha)(x) + w^(1/alpha)(y)) / 2

    up to a 1e-12 relative slack.  Monomial weights satisfy this for every
    pair; a violation count > 0 flags a weight outside the admissible class.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if cone.alpha == 0.0:
        # unweighted extension: w == 1 and the inequality is an identity
        return ConcavityReport(trials, 0, 0.0, True)
    rng = np.random.default_rng(seed)
    constrained = cone.constrained_axes
    free = [a for a in range(cone.d) if a not in constrained]

    def sample(n: int) -> np.ndarray:
        pts = np.empty((n, cone.d))
        for a in constrained:
            pts[:, a] = np.exp(rng.uniform(math.log(0.05), math.log(2.0), n))
        for a in free:
            pts[:, a] = rng.uniform(-2.0, 2.0, n)
        return pts

    xs, ys = sample(trials), sample(trials)
    inv_alpha = 1.0 / cone.alpha
    fx = _weight_values(cone, xs) ** inv_alpha
    fy = _weight_values(cone, ys) ** inv_alpha
    fm = _weight_values(cone, 0.5 * (xs + ys)) ** inv_alpha
    avg = 0.5 * (fx + fy)
    scale = np.maximum(np.maximum(fm, avg), 1e-300)
    margins = (fm - avg) / scale
    bad = margins < -1e-12
    worst = float(np.min(margins)) if trials else 0.0
    return ConcavityReport(trials, int(np.sum(bad)), worst, not bool(np.any(bad)))


# -- built-in cones --------------------------------------------------------

_BUILTIN_SPECS: dict[str, dict] = {
    "halfplane-x1": {"d": 2, "exponents": [{"axis": 0, "power": 1.0}],
                     "extension_unweighted": False},
    "quadrant-x1x2": {"d": 2, "exponents": [{"axis": 0, "power": 1.0},
                                            {"axis": 1, "power": 1.0}],
                      "extension_unweighted": False},
    "disc-unweighted": {"d": 2, "exponents": [],
                        "extension_unweighted": True},
}

BUILTIN_CONE_NAMES = tuple(sorted(_BUILTIN_SPECS))

_BUILTIN_CACHE: dict[str, WeightedCone] = {}


def builtin_cone(name: str) -> WeightedCone:
    """Construct one of the named built-in cones (cached)."""
    if name not in _BUILTIN_SPECS:
        raise ValidationError(
            f"unknown cone {name!r}; built-ins: {', '.join(BUILTIN_CONE_NAMES)}")
    if name not in _BUILTIN_CACHE:
        _BUILTIN_CACHE[name] = WeightedCone.from_json_dict(_BUILTIN_SPECS[name])
    return _BUILTIN_CACHE[name]
