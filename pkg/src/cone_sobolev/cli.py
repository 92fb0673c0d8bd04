"""Batch command line front end with machine-readable JSON reports.

Every command is a reproducible run: the report embeds the full effective
configuration (defaults resolved, config file merged, flags applied), the
outputs, the tolerances used, and named pass/fail verdicts.  Identical
configuration and seed produce byte-identical reports apart from the
timestamp field.

Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 for
configuration errors, 3 for numerical failures inside the library.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import acceptance
from .bernstein import (bernstein_lower_bound, construct_system,
                        gradient_upper_certificate,
                        superadditivity_certificate, verify_system)
from .cones import BUILTIN_CONE_NAMES, WeightedCone, builtin_cone, thread_cap
from .errors import ConeSobolevError, DomainError, ValidationError
from .lorentz import (LorentzParams, lorentz_norm_distributional,
                      lorentz_norm_rearranged)
from .profiles import RadialProfile, from_knots
from .sobolev import (alvino_search, bump_superposition_field, embedding_norm,
                      polya_szego_check, quotient)

EXIT_PASS = 0
EXIT_VERDICT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_QUOTIENT_SLACK = 1e-9
_ROUTE_RTOL = 1e-10

# defaults for every option that may come from a config file; None marks
# options with no usable default (must be supplied for commands needing them)
_DEFAULTS: dict[str, Any] = {
    "cone": "halfplane-x1",
    "p": 1.0,
    "q": 1.0,
    "seed": 0,
    "out": None,
    "profile": None,
    "grid": 64,
    "bumps": 3,
    "box": None,
    "ratios": "1e2,1e4,1e8,1e40",
    "m": 6,
    "lambda_frac": 0.9,
    "eps1": 0.05,
    "eps2": 0.05,
    "alpha_trials": 1000,
    "directions": 5000,
    "criteria": None,
}

# per-command default overrides: shell systems need p > q, so the
# bernstein command defaults to the gradient exponent 2
_COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "bernstein": {"p": 2.0},
}

_COMMAND_OPTIONS: dict[str, tuple[str, ...]] = {
    "constant": ("cone", "p", "q", "seed", "out"),
    "norm": ("cone", "p", "q", "seed", "out", "profile"),
    "quotient": ("cone", "p", "q", "seed", "out", "profile"),
    "polya-szego": ("cone", "p", "q", "seed", "out", "grid", "bumps", "box"),
    "alvino": ("cone", "p", "q", "seed", "out", "ratios"),
    "bernstein": ("cone", "p", "q", "seed", "out", "m", "lambda_frac",
                  "eps1", "eps2", "alpha_trials", "directions"),
    "selftest": ("seed", "out", "criteria"),
}


# -- configuration plumbing -------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None,
                        help="JSON file with option defaults; flags override")
    common.add_argument("--cone", type=str, default=None,
                        help="builtin cone name or path to a cone JSON file")
    common.add_argument("--p", type=float, default=None)
    common.add_argument("--q", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=str, default=None,
                        help="also write the JSON report to this path")

    parser = argparse.ArgumentParser(
        prog="cone-sobolev",
        description="weighted Lorentz-Sobolev embedding verifications")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("constant", parents=[common],
                   help="sharp embedding constant for a cone and exponents")

    p_norm = sub.add_parser("norm", parents=[common],
                            help="Lorentz norm of a profile by both routes")
    p_norm.add_argument("--profile", type=str, default=None,
                        help="path to a profile JSON file")

    p_quot = sub.add_parser("quotient", parents=[common],
                            help="Sobolev quotient report for a profile")
    p_quot.add_argument("--profile", type=str, default=None,
                        help="path to a profile JSON file")

    p_ps = sub.add_parser("polya-szego", parents=[common],
                          help="rearrangement gradient-contraction check on "
                               "a sampled bump field")
    p_ps.add_argument("--grid", type=int, default=None,
                      help="cells per axis")
    p_ps.add_argument("--bumps", type=int, default=None,
                      help="number of random bumps")
    p_ps.add_argument("--box", type=str, default=None,
                      help="sampling box as lo:hi,lo:hi,... "
                           "(default derived from the cone)")

    p_alv = sub.add_parser("alvino", parents=[common],
                           help="maximizing-family quotient sweep")
    p_alv.add_argument("--ratios", type=str, default=None,
                       help="comma separated head-to-support ratios")

    p_bern = sub.add_parser("bernstein", parents=[common],
                            help="almost-extremal shell system with "
                                 "certificates and the lower bound")
    p_bern.add_argument("--m", type=int, default=None,
                        help="number of shells")
    p_bern.add_argument("--lambda-frac", dest="lambda_frac", type=float,
                        default=None,
                        help="target norm as a fraction of the embedding "
                             "norm, in (0, 1)")
    p_bern.add_argument("--eps1", type=float, default=None)
    p_bern.add_argument("--eps2", type=float, default=None)
    p_bern.add_argument("--alpha-trials", dest="alpha_trials", type=int,
                        default=None,
                        help="random coefficient vectors per certificate")
    p_bern.add_argument("--directions", type=int, default=None,
                        help="directions for the empirical minimum")

    p_self = sub.add_parser("selftest", parents=[common],
                            help="run the acceptance criteria")
    p_self.add_argument("--criteria", type=str, default=None,
                        help="comma separated criterion numbers "
                             "(default: all)")
    return parser


def _load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    return data


def _effective_config(args: argparse.Namespace) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    allowed = _COMMAND_OPTIONS[args.command]
    config = {key: _DEFAULTS[key] for key in allowed}
    config.update(_COMMAND_DEFAULTS.get(args.command, {}))
    if args.config is not None:
        for key, value in _load_config_file(args.config).items():
            norm_key = key.replace("-", "_")
            if norm_key == "command":
                continue
            if norm_key not in allowed:
                raise ValidationError(
                    f"config key {key!r} is not an option of "
                    f"{args.command!r}")
            config[norm_key] = value
    for key in allowed:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _resolve_cone(spec: Any) -> WeightedCone:
    if isinstance(spec, Mapping):
        return WeightedCone.from_json_dict(spec)
    if isinstance(spec, str):
        if spec in BUILTIN_CONE_NAMES:
            return builtin_cone(spec)
        path = Path(spec)
        if path.exists():
            return WeightedCone.from_json(path.read_text())
        raise ValidationError(
            f"unknown cone {spec!r}: not a builtin "
            f"{sorted(BUILTIN_CONE_NAMES)} and not a file")
    raise ValidationError("cone must be a name, a path, or a JSON object")


def _load_profile(path: str | None,
                  fallback_cone: WeightedCone | None) -> RadialProfile:
    if path is None:
        raise ValidationError("this command requires --profile")
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read profile file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"profile file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("profile file must hold a JSON object")
    cone = (WeightedCone.from_json_dict(data["cone"]) if "cone" in data
            else fallback_cone)
    if cone is None:
        raise ValidationError(
            "profile file has no cone entry and no --cone was given")
    if "knots" in data:
        try:
            knots = [(float(t), float(v)) for t, v in data["knots"]]
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed knot list: {exc}") from exc
        return from_knots(cone, knots)
    if "segments" in data:
        return RadialProfile.from_json_dict(data, cone)
    raise ValidationError("profile file needs a 'knots' or 'segments' entry")


def _parse_floats(value: Any, what: str) -> list[float]:
    if isinstance(value, str):
        parts = [s for s in value.split(",") if s.strip()]
    elif isinstance(value, Sequence):
        parts = list(value)
    else:
        raise ValidationError(f"{what} must be a comma list or an array")
    try:
        return [float(s) for s in parts]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed {what}: {exc}") from exc


def _parse_box(value: Any, cone: WeightedCone) -> list[tuple[float, float]]:
    if value is None:
        constrained = set(cone.constrained_axes)
        return [(0.0, 3.0) if axis in constrained else (-1.5, 1.5)
                for axis in range(cone.d)]
    if isinstance(value, str):
        pairs = []
        for part in value.split(","):
            lo, _, hi = part.partition(":")
            pairs.append((lo, hi))
    elif isinstance(value, Sequence):
        pairs = [(pair[0], pair[1]) for pair in value]
    else:
        raise ValidationError("box must be lo:hi,lo:hi,... or an array")
    try:
        box = [(float(lo), float(hi)) for lo, hi in pairs]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed box: {exc}") from exc
    if len(box) != cone.d:
        raise ValidationError(
            f"box has {len(box)} axes but the cone has {cone.d}")
    return box


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


# -- commands ---------------------------------------------------------------

def _cmd_constant(config: dict) -> tuple[dict, dict, dict]:
    cone = _resolve_cone(config["cone"])
    config["cone"] = cone.to_json_dict()
    params = LorentzParams(config["p"], config["q"], cone)
    value = embedding_norm(cone, params)
    outputs = {
        "embedding_norm": value,
        "c_d": cone.c_d,
        "big_d": cone.big_d,
        "p_star": params.p_star,
    }
    verdicts = {"finite_positive": math.isfinite(value) and value > 0.0}
    return outputs, {}, verdicts


def _cmd_norm(config: dict) -> tuple[dict, dict, dict]:
    fallback = (_resolve_cone(config["cone"])
                if config["cone"] is not None else None)
    profile = _load_profile(config["profile"], fallback)
    config["cone"] = profile.cone.to_json_dict()
    params = LorentzParams(config["p"], config["q"])
    rearranged = lorentz_norm_rearranged(profile, params)
    distributional = lorentz_norm_distributional(profile, params)
    scale = max(rearranged, distributional, 1.0)
    outputs = {
        "rearranged": rearranged,
        "distributional": distributional,
        "difference": abs(rearranged - distributional),
    }
    tolerances = {"route_agreement_rel": _ROUTE_RTOL}
    verdicts = {"routes_agree":
                abs(rearranged - distributional) <= _ROUTE_RTOL * scale}
    return outputs, tolerances, verdicts


def _cmd_quotient(config: dict) -> tuple[dict, dict, dict]:
    fallback = (_resolve_cone(config["cone"])
                if config["cone"] is not None else None)
    profile = _load_profile(config["profile"], fallback)
    config["cone"] = profile.cone.to_json_dict()
    params = LorentzParams(config["p"], config["q"], profile.cone)
    report = quotient(profile, params)
    outputs = {
        "numerator": report.numerator,
        "denominator": report.denominator,
        "quotient": report.quotient,
        "embedding_norm": report.embedding_norm,
        "ratio": report.ratio,
    }
    tolerances = {"upper_bound_rel": _QUOTIENT_SLACK}
    verdicts = {"upper_bound": report.quotient
                <= report.embedding_norm * (1.0 + _QUOTIENT_SLACK)}
    return outputs, tolerances, verdicts


def _cmd_polya_szego(config: dict) -> tuple[dict, dict, dict]:
    cone = _resolve_cone(config["cone"])
    config["cone"] = cone.to_json_dict()
    params = LorentzParams(config["p"], config["q"], cone)
    box = _parse_box(config["box"], cone)
    config["box"] = [list(pair) for pair in box]
    grid = int(config["grid"])
    if grid < 2:
        raise ValidationError("grid must have at least 2 cells per axis")
    field = bump_superposition_field(cone, box, (grid,) * cone.d,
                                     int(config["bumps"]),
                                     int(config["seed"]))
    lhs, rhs, ok = polya_szego_check(field, params)
    h = field.max_cell_diameter
    outputs = {
        "lhs_profile_gradient_norm": lhs,
        "rhs_rearranged_gradient_norm": rhs,
        "grid_h": h,
        "box": [list(pair) for pair in box],
    }
    tolerances = {"grid_rel": 5.0 * h}
    verdicts = {"rearrangement_contracts_gradient": ok}
    return outputs, tolerances, verdicts


def _cmd_alvino(config: dict) -> tuple[dict, dict, dict]:
    cone = _resolve_cone(config["cone"])
    config["cone"] = cone.to_json_dict()
    params = LorentzParams(config["p"], config["q"], cone)
    ratios = _parse_floats(config["ratios"], "ratios")
    config["ratios"] = ratios
    reports = alvino_search(cone, params, ratios)
    norm_value = embedding_norm(cone, params)
    outputs = {
        "embedding_norm": norm_value,
        "sweep": [{"ratio": r, "quotient": rep.quotient,
                   "fraction_of_norm": rep.ratio}
                  for r, rep in zip(ratios, reports)],
    }
    quotients = [rep.quotient for rep in reports]
    tolerances = {"upper_bound_rel": _QUOTIENT_SLACK,
                  "monotone_rel": _QUOTIENT_SLACK}
    # at p = 1 the sweep is exactly flat, so allow roundoff in the
    # monotonicity verdict
    verdicts = {
        "nondecreasing": all(b >= a * (1.0 - _QUOTIENT_SLACK)
                             for a, b in zip(quotients, quotients[1:])),
        "below_embedding_norm": all(
            value <= norm_value * (1.0 + _QUOTIENT_SLACK)
            for value in quotients),
    }
    return outputs, tolerances, verdicts


def _cmd_bernstein(config: dict) -> tuple[dict, dict, dict]:
    cone = _resolve_cone(config["cone"])
    config["cone"] = cone.to_json_dict()
    params = LorentzParams(config["p"], config["q"], cone)
    frac = float(config["lambda_frac"])
    if not 0.0 < frac < 1.0:
        raise ValidationError("lambda_frac must lie strictly in (0, 1)")
    lam = frac * embedding_norm(cone, params)
    m = int(config["m"])
    system = construct_system(cone, params, m, lam,
                              float(config["eps1"]), float(config["eps2"]))
    verification = verify_system(system)
    rng = np.random.default_rng(int(config["seed"]))
    trials = int(config["alpha_trials"])
    super_failures = grad_failures = 0
    for _ in range(trials):
        alpha = rng.standard_normal(m)
        if not superadditivity_certificate(system, alpha)[2]:
            super_failures += 1
        if not gradient_upper_certificate(system, alpha)[2]:
            grad_failures += 1
    bound = bernstein_lower_bound(system, int(config["directions"]),
                                  int(config["seed"]))
    outputs = {
        "lambda": lam,
        "certified_lower_bound": bound.certified,
        "empirical_minimum": bound.empirical_minimum,
        "superadditivity_failures": super_failures,
        "gradient_upper_failures": grad_failures,
        "alpha_trials": trials,
        "shells": [{"index": s.index,
                    "outer_radius": s.outer_radius,
                    "inner_radius": s.inner_radius,
                    "cutoff_radius": s.cutoff_radius,
                    "delta": s.delta,
                    "gamma": s.gamma}
                   for s in system.shells],
        "verification": _jsonable(verification),
    }
    tolerances = {"certificate_slack": 1e-9}
    verdicts = {
        "certificates": super_failures == 0 and grad_failures == 0,
        "empirical_at_least_certified":
            bound.empirical_minimum >= bound.certified,
    }
    return outputs, tolerances, verdicts


def _cmd_selftest(config: dict) -> tuple[dict, dict, dict]:
    numbers = None
    if config["criteria"] is not None:
        numbers = [int(v) for v in _parse_floats(config["criteria"],
                                                 "criteria")]
        config["criteria"] = numbers
    results = acceptance.run_criteria(numbers)
    for result in results:
        print(acceptance.result_line(result), file=sys.stderr)
    outputs = {
        "criteria": [{"number": r.number, "title": r.title,
                      "passed": r.passed, "details": _jsonable(r.details)}
                     for r in results],
    }
    verdicts = {f"criterion_{r.number:02d}": r.passed for r in results}
    return outputs, {}, verdicts


_COMMANDS = {
    "constant": _cmd_constant,
    "norm": _cmd_norm,
    "quotient": _cmd_quotient,
    "polya-szego": _cmd_polya_szego,
    "alvino": _cmd_alvino,
    "bernstein": _cmd_bernstein,
    "selftest": _cmd_selftest,
}


# -- entry point ------------------------------------------------------------

def _apply_thread_cap() -> int:
    cap = thread_cap()
    if os.environ.get("CONE_SOBOLEV_THREADS", "0") not in ("", "0"):
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(cap))
    return cap


def run(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cap = _apply_thread_cap()
        config = _effective_config(args)
        outputs, tolerances, verdicts = _COMMANDS[args.command](config)
    except (ValidationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConeSobolevError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    echo = {k: _jsonable(v) for k, v in config.items() if k != "out"}
    echo["threads"] = cap
    report = {
        "command": args.command,
        "config": echo,
        "outputs": _jsonable(outputs),
        "tolerances": _jsonable(tolerances),
        "verdicts": _jsonable(verdicts),
        "passed": all(verdicts.values()),
        "timestamp": datetime.datetime.now(datetime.timezone.utc)
                     .isoformat(timespec="seconds"),
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if config.get("out"):
        Path(config["out"]).write_text(text)
    return EXIT_PASS if report["passed"] else EXIT_VERDICT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
