"""Distribution functions and nonincreasing rearrangements.

The rearrangement of a function on the weighted cone lives on (0, inf)
with Lebesgue measure in the measure coordinate t: equimeasurability

    |{ f* > tau }| = mu({ |f| > tau })   for every tau > 0

defines f* uniquely as a nonincreasing right-continuous function.  Two
input kinds are supported: 1D step functions (exact arithmetic) and
sampled multi-dimensional fields (cell values with per-cell weighted
measures, gradients by finite differences).  Sorting cells by value with a
deterministic tie-break realizes the rearrangement; the radial
rearrangement reinterprets it in the measure coordinate and also provides
a piecewise-affine interpolant for gradient purposes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cones import WeightedCone, weight_eval
from .errors import DomainError, ValidationError
from .profiles import RadialProfile, from_knots
from .quadrature import gauss_nodes
from .segments import Law, Piece

__all__ = [
    "StepFunction1D",
    "SampledField",
    "distribution_function",
    "rearrangement",
    "radial_rearrangement",
]


@dataclass(frozen=True)
class StepFunction1D:
    """Nonnegative step function on (0, inf), zero after the last breakpoint.

    values[k] holds on (breakpoints[k-1], breakpoints[k]), starting at 0.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.breakpoints) != len(self.values):
            raise ValidationError(
                "breakpoints and values must have equal length")
        prev = 0.0
        for b in self.breakpoints:
            if not (math.isfinite(b) and b > prev):
                raise ValidationError(
                    "breakpoints must be finite, positive, and increasing")
            prev = b
        for v in self.values:
            if not (math.isfinite(v) and v >= 0):
                raise ValidationError("step values must be finite and >= 0")

    @property
    def support_end(self) -> float:
        return self.breakpoints[-1] if self.breakpoints else 0.0

    def as_pieces(self) -> list[Piece]:
        out, prev = [], 0.0
        for b, v in zip(self.breakpoints, self.values):
            out.append(Piece(prev, b, Law.constant(v)))
            prev = b
        return out

    def value(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t)
        out = np.zeros_like(flat)
        edges = np.concatenate(([0.0], self.breakpoints))
        idx = np.searchsorted(edges, flat, side="right") - 1
        ok = (idx >= 0) & (idx < len(self.values)) & (flat > 0)
        if self.values:
            vals = np.asarray(self.values)
            out[ok] = vals[idx[ok]]
        return out if t.shape else float(out[0])

    def is_nonincreasing(self) -> bool:
        return all(a >= b for a, b in zip(self.values, self.values[1:]))

    def distribution_function(self, tau: float) -> float:
        if tau <= 0:
            raise DomainError("distribution threshold must be positive")
        total, prev = 0.0, 0.0
        for b, v in zip(self.breakpoints, self.values):
            if v > tau:
                total += b - prev
            prev = b
        return total


@dataclass(frozen=True)
class SampledField:
    """Grid samples of a function on a box inside the cone closure.

    Cell values are center samples; cell measures are per-cell integrals
    of the weight (separable per-axis panels, order ``quad_order``), so
    the weight's zero set is integrated accurately.  Gradients use central
    differences inside, one-sided at the box faces.
    """

    cone: WeightedCone
    box: tuple[tuple[float, float], ...]
    shape: tuple[int, ...]
    values: np.ndarray
    cell_measures: np.ndarray
    gradient_magnitude: np.ndarray

    def __post_init__(self) -> None:
        if len(self.box) != self.cone.d or len(self.shape) != self.cone.d:
            raise ValidationError("box and shape must match the dimension")
        if any(n < 2 for n in self.shape):
            raise ValidationError("grid needs at least 2 cells per axis")
        if self.values.shape != self.shape:
            raise ValidationError("value array does not match the grid shape")
        if np.any(self.cell_measures < 0):
            raise ValidationError("cell measures must be nonnegative")

    @staticmethod
    def from_function(cone: WeightedCone,
                      box: Sequence[tuple[float, float]],
                      shape: Sequence[int],
                      fn: Callable[[np.ndarray], np.ndarray],
                      quad_order: int = 4) -> "SampledField":
        """Sample fn (vectorized over an (n, d) point array) on the grid."""
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        shape = tuple(int(n) for n in shape)
        _validate_box(cone, box, shape)
        axes = [np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(box, shape)]
        centers = [0.5 * (a[1:] + a[:-1]) for a in axes]
        mesh = np.meshgrid(*centers, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        values = np.asarray(fn(pts), dtype=float).reshape(shape)
        measures = _cell_measures(cone, axes, quad_order)
        spacings = [(hi - lo) / n for (lo, hi), n in zip(box, shape)]
        grads = np.gradient(values, *spacings, edge_order=1)
        if isinstance(grads, np.ndarray):
            grads = [grads]
        gmag = np.sqrt(np.sum([g * g for g in grads], axis=0))
        return SampledField(cone, box, shape, values, measures, gmag)

    @property
    def max_cell_diameter(self) -> float:
        return math.sqrt(sum(((hi - lo) / n) ** 2
                             for (lo, hi), n in zip(self.box, self.shape)))

    def total_measure(self) -> float:
        return float(np.sum(self.cell_measures))

    def distribution_function(self, tau: float, use_gradient: bool = False
                              ) -> float:
        if tau <= 0:
            raise DomainError("distribution threshold must be positive")
        data = self.gradient_magnitude if use_gradient else self.values
        return float(np.sum(self.cell_measures[np.abs(data) > tau]))

    # -- CSV interchange ------------------------------------------------

    def to_csv(self) -> str:
        """Header line with JSON metadata, then x..., value rows."""
        meta = {"cone": self.cone.to_json_dict(),
                "box": [list(b) for b in self.box],
                "shape": list(self.shape)}
        buf = io.StringIO()
        buf.write(f"# {json.dumps(meta, sort_keys=True)}\n")
        writer = csv.writer(buf)
        writer.writerow([f"x{i}" for i in range(self.cone.d)] + ["value"])
        centers = [np.linspace(lo, hi, n, endpoint=False)
                   + 0.5 * (hi - lo) / n
                   for (lo, hi), n in zip(self.box, self.shape)]
        mesh = np.meshgrid(*centers, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        for row, v in zip(pts, self.values.ravel()):
            writer.writerow([repr(float(c)) for c in row]
                            + [repr(float(v))])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str, quad_order: int = 4) -> "SampledField":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValidationError("field CSV must start with a '# {json}' "
                                  "metadata line")
        try:
            meta = json.loads(lines[0][1:].strip())
            cone = WeightedCone.from_json_dict(meta["cone"])
            box = tuple((float(lo), float(hi)) for lo, hi in meta["box"])
            shape = tuple(int(n) for n in meta["shape"])
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ValidationError(f"malformed field metadata: {exc}") from exc
        reader = csv.reader(lines[1:])
        header = next(reader)
        if header[-1] != "value":
            raise ValidationError("field CSV needs a trailing value column")
        vals = [float(row[-1]) for row in reader if row]
        n_cells = int(np.prod(shape))
        if len(vals) != n_cells:
            raise ValidationError(
                f"expected {n_cells} rows of cell values, got {len(vals)}")
        values = np.asarray(vals).reshape(shape)
        _validate_box(cone, box, shape)
        edges = [np.linspace(lo, hi, n + 1)
                 for (lo, hi), n in zip(box, shape)]
        measures = _cell_measures(cone, edges, quad_order)
        return SampledField(cone, box, shape, values, measures,
                            _gradient_magnitude(values, box, shape))


def _gradient_magnitude(values: np.ndarray, box, shape) -> np.ndarray:
    spacings = [(hi - lo) / n for (lo, hi), n in zip(box, shape)]
    grads = np.gradient(values, *spacings, edge_order=1)
    if isinstance(grads, np.ndarray):
        grads = [grads]
    return np.sqrt(np.sum([g * g for g in grads], axis=0))


def _validate_box(cone: WeightedCone, box, shape) -> None:
    for (lo, hi) in box:
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValidationError("box intervals must be finite and ordered")
    for a in cone.constrained_axes:
        if box[a][0] < 0:
            raise ValidationError(
                f"box extends to negative values on constrained axis {a}")
    if any(n < 2 for n in shape):
        raise ValidationError("grid needs at least 2 cells per axis")


def _cell_measures(cone: WeightedCone, axes: list[np.ndarray],
                   quad_order: int) -> np.ndarray:
    """Per-cell mu measures via separable per-axis panel quadrature."""
    if cone.plugin_weight is not None:
        raise ValidationError("sampled fields require a monomial weight")
    x, w = gauss_nodes(quad_order)
    per_axis = []
    for a, edges in enumerate(axes):
        power = cone.power_of(a)
        lo, hi = edges[:-1], edges[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        if power == 0.0:
            per_axis.append(hi - lo)
            continue
        pts = mid[:, None] + half[:, None] * x[None, :]
        vals = np.power(np.maximum(pts, 0.0), power)
        per_axis.append(half * (vals @ w))
    measure = per_axis[0]
    for arr in per_axis[1:]:
        measure = np.multiply.outer(measure, arr)
    return measure


# -- the operators ---------------------------------------------------------

def distribution_function(obj, tau: float) -> float:
    """mu-measure (or Lebesgue measure, for 1D steps) of {|f| > tau}."""
    if isinstance(obj, (StepFunction1D, SampledField)):
        return obj.distribution_function(tau)
    raise ValidationError(
        "distribution_function expects a StepFunction1D or SampledField")


def _canonical_step(measures: np.ndarray, values: np.ndarray
                    ) -> StepFunction1D:
    """Sort (measure, value) cells into the canonical nonincreasing step.

    Stable descending sort on value with ties broken by original cell
    index; adjacent equal values merge, zero values drop (the implicit
    tail).  This canonical form makes rearrangement exactly idempotent.
    """
    order = np.argsort(-values, kind="stable")
    breakpoints, step_values = [], []
    t = 0.0
    for idx in order:
        v, m = float(values[idx]), float(measures[idx])
        if v <= 0.0 or m <= 0.0:
            continue
        t += m
        if step_values and step_values[-1] == v:
            breakpoints[-1] = t
        else:
            breakpoints.append(t)
            step_values.append(v)
    return StepFunction1D(tuple(breakpoints), tuple(step_values))


def rearrangement(obj, use_gradient: bool = False) -> StepFunction1D:
    """The nonincreasing rearrangement as a canonical step function.

    For sampled fields, set ``use_gradient`` to rearrange the sampled
    |grad u| instead of the values.
    """
    if isinstance(obj, StepFunction1D):
        vals = obj.values
        if (not vals or vals[-1] > 0.0) and all(
                a > b for a, b in zip(vals, vals[1:])):
            return obj  # already canonical; re-summing lengths would drift
        lengths = np.diff(np.concatenate(([0.0], obj.breakpoints)))
        return _canonical_step(lengths, np.abs(np.asarray(obj.values)))
    if isinstance(obj, SampledField):
        data = obj.gradient_magnitude if use_gradient else obj.values
        return _canonical_step(obj.cell_measures.ravel(),
                               np.abs(data.ravel()))
    raise ValidationError(
        "rearrangement expects a StepFunction1D or SampledField")


def _interpolant_from_step(cone: WeightedCone, step: StepFunction1D,
                           resolution: float = 0.0) -> RadialProfile:
    """Piecewise-affine profile through plateau midpoints of a step.

    With a positive ``resolution`` (a length scale h), consecutive
    plateaus are first pooled into groups of measure comparable to one
    radial shell of thickness h, D*C_D^(1/D)*t^(1-1/D)*h, and each group
    contributes one knot at its measure midpoint with its measure-weighted
    mean value.  Slopes of the interpolant then difference quantities
    averaged over a full shell's worth of cells; differencing individual
    plateaus would make the derivative oscillate at the cell scale, which
    is noise, not geometry (values closer than one cell's value span are
    not resolved by the grid).  The shell of a ball is the least measure
    any level boundary of thickness h can have, so this pooling never
    exceeds the grid's actual resolution.
    """
    if not step.breakpoints:
        return RadialProfile(cone, (Piece(0.0, 1.0, Law.constant(0.0)),))
    knots: list[tuple[float, float]] = []
    if resolution > 0.0:
        ring = (cone.big_d * cone.c_d ** (1.0 / cone.big_d) * resolution)
        expo = 1.0 - 1.0 / cone.big_d
        prev = 0.0
        start, mass, moment = 0.0, 0.0, 0.0
        for b, v in zip(step.breakpoints, step.values):
            width = b - prev
            prev = b
            mass += width
            moment += width * v
            if mass >= ring * (start + 0.5 * mass) ** expo:
                knots.append((start + 0.5 * mass, moment / mass))
                start, mass, moment = start + mass, 0.0, 0.0
        if mass > 0.0:
            if knots:
                # fold the remainder into the last group
                (t_last, v_last), t0 = knots[-1], start
                prev_mass = 2.0 * (t0 - t_last)
                total = prev_mass + mass
                knots[-1] = (t_last - 0.5 * prev_mass + 0.5 * total,
                             (v_last * prev_mass + moment) / total)
            else:
                knots.append((start + 0.5 * mass, moment / mass))
    else:
        prev = 0.0
        for b, v in zip(step.breakpoints, step.values):
            knots.append((0.5 * (prev + b), v))
            prev = b
    knots.append((step.support_end, 0.0))
    return from_knots(cone, knots)


def radial_rearrangement(field: SampledField) -> RadialProfile:
    """The radial rearrangement of a sampled field, as a profile.

    Returns the piecewise-affine interpolant of the rearranged step, with
    knots pooled at the field's own grid resolution (one radial shell of
    thickness max_cell_diameter per knot; see _interpolant_from_step), so
    that gradient-density operations apply; the exact step itself is
    available via ``rearrangement``.
    """
    return _interpolant_from_step(field.cone, rearrangement(field),
                                  resolution=field.max_cell_diameter)
