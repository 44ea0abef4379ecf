"""Command-line front end.

Subcommands: classify, sweep, orbit, certify, product, verify.  Angle
arguments accept plain floats or "pi" literals like pi/6 or 2pi/3.  Exit
codes: 0 success, 1 invalid input, 2 homeomorphism condition violated,
3 search exhausted / verdict unknown.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys as _sys

import numpy as np

from . import certificates, products, reports, sweep as sweep_mod
from .errors import (
    HomeoConditionViolated,
    MalformedWitness,
    NotInvertible,
    SearchExhausted,
    SphereDynError,
    WitnessNotFound,
)
from .system import orbit as run_orbit, system_from_dict

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_HOMEO = 2
EXIT_UNKNOWN = 3

_EXIT_DOC = (
    "exit codes: 0 success; 1 invalid input; 2 homeomorphism condition "
    "violated; 3 search exhausted / verdict unknown"
)

_PI_RE = re.compile(
    r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*([+-]?\d*\.?\d+))?\s*$", re.IGNORECASE
)


def parse_angle(text: str) -> float:
    """Parse radians: a float, or 'pi' literals such as pi, -pi/2, 2pi/3."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse angle {text!r}")
    coef_text, denom_text = m.groups()
    if coef_text in ("", "+"):
        coef = 1.0
    elif coef_text == "-":
        coef = -1.0
    else:
        coef = float(coef_text)
    denom = float(denom_text) if denom_text else 1.0
    if denom == 0:
        raise ValueError("zero denominator in angle literal")
    return coef * math.pi / denom


def parse_range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (parse_angle(p) for p in parts)
    return sweep_mod.grid_values(start, stop, step)


def parse_point(text: str) -> np.ndarray:
    try:
        v = np.array([float(p) for p in text.split(",")], dtype=float)
    except ValueError as exc:
        raise ValueError(f"cannot parse point {text!r}: {exc}") from exc
    n = np.linalg.norm(v)
    if n == 0.0 or not np.all(np.isfinite(v)):
        raise ValueError("point must be a nonzero finite vector")
    return v / n


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


def _load_system(path, require_homeo=False):
    return system_from_dict(_load_json(path), require_homeo=require_homeo)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    sys_obj = _load_system(args.input, require_homeo=args.require_homeo)
    report = reports.classify_system(
        sys_obj,
        horizon=args.horizon,
        delta=args.delta,
        exp_horizon=args.exp_horizon,
        seed=args.seed,
    )
    _emit(report, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = sweep_mod.run_sweep(parse_range(args.theta), parse_range(args.alpha))
    sweep_mod.write_csv(grid, args.output)
    if args.svg:
        from . import plots

        plots.render_sweep(grid, args.svg)
    return EXIT_OK


def cmd_orbit(args) -> int:
    sys_obj = _load_system(args.input)
    point = parse_point(args.point)
    if point.shape != (sys_obj.dim,):
        raise ValueError(
            f"point has {point.shape[0]} components, system dim is {sys_obj.dim}"
        )
    n = args.n
    segment = run_orbit(sys_obj, point, min(0, n), max(0, n))
    ks = range(segment.n_min, segment.n_max + 1)
    if args.format == "csv":
        header = "k," + ",".join(f"x{i + 1}" for i in range(sys_obj.dim))
        lines = [header]
        for k in ks:
            coords = ",".join(f"{v:.17g}" for v in segment.point(k))
            lines.append(f"{k},{coords}")
        text = "\n".join(lines) + "\n"
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            _sys.stdout.write(text)
    else:
        payload = {
            "points": [
                {"k": k, "point": [float(v) for v in segment.point(k)]} for k in ks
            ]
        }
        _emit(payload, args.output)
    if args.svg:
        from . import plots

        plots.render_orbit(
            segment.points, args.svg, title=f"orbit, k in [{segment.n_min}, {segment.n_max}]"
        )
    return EXIT_OK


def cmd_certify(args) -> int:
    sys_obj = _load_system(args.input, require_homeo=True)
    if args.mode == "nondistal":
        witness = reports.certify_nondistal(sys_obj, horizon=args.horizon)
    else:
        witness = reports.certify_nonexpansive(
            sys_obj, delta=args.delta, horizon=args.horizon, seed=args.seed
        )
    if witness is None:
        _sys.stderr.write(f"no {args.mode} witness found (verdict unknown)\n")
        return EXIT_UNKNOWN
    _emit(certificates.witness_to_dict(witness), args.output)
    return EXIT_OK


def _factor_verdicts(prod, args):
    distal, expansive = [], []
    for factor in prod.factors:
        rep = reports.classify_system(
            factor,
            horizon=args.horizon,
            delta=args.delta,
            exp_horizon=args.exp_horizon,
            seed=args.seed,
        )
        dv = rep["distality"]
        witness = (
            certificates.witness_from_dict(dv["witness"]) if dv["witness"] else None
        )
        distal.append(
            products.Verdict(kind=dv["verdict"], witness=witness, reason=dv["reason"])
        )
        ev = rep["expansivity"]
        ewitness = (
            certificates.witness_from_dict(ev["witness"]) if ev["witness"] else None
        )
        expansive.append(products.Verdict(kind=ev["verdict"], witness=ewitness))
    return distal, expansive


def _verdict_dict(v: products.Verdict) -> dict:
    return {
        "verdict": v.kind,
        "witness": certificates.witness_to_dict(v.witness) if v.witness else None,
        "reason": v.reason,
    }


def _load_product(paths):
    descs = []
    for path in paths:
        payload = _load_json(path)
        if "factors" in payload:
            descs.extend(payload["factors"])
        else:
            descs.append(payload)
    return products.product_from_dict({"factors": descs})


def cmd_product(args) -> int:
    prod = _load_product(args.input)
    if args.action == "apply":
        if not args.point:
            raise ValueError("--point is required for product apply")
        comps = [parse_point(p) for p in args.point.split(";")]
        image = products.product_apply(prod, comps)
        _emit({"point": [[float(v) for v in u] for u in image]}, args.output)
        return EXIT_OK

    distal, expansive = _factor_verdicts(prod, args)
    d_verdict = products.product_distality_verdict(prod, distal)
    e_verdict = products.product_expansivity_verdict(prod, expansive)

    if args.action == "certify":
        verdict = d_verdict if args.mode == "nondistal" else e_verdict
        if verdict.witness is None:
            _sys.stderr.write(
                f"no liftable {args.mode} witness for the product (verdict "
                f"{verdict.kind})\n"
            )
            return EXIT_UNKNOWN
        _emit(certificates.witness_to_dict(verdict.witness), args.output)
        return EXIT_OK

    report = {
        "factors": [
            reports.classify_system(
                f,
                horizon=args.horizon,
                delta=args.delta,
                exp_horizon=args.exp_horizon,
                seed=args.seed,
            )
            for f in prod.factors
        ],
        "total_dim": prod.total_dim,
        "homeo_certified": prod.homeo_certified,
        "distality": _verdict_dict(d_verdict),
        "expansivity": _verdict_dict(e_verdict),
    }
    _emit(report, args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    witness = certificates.load_witness(args.input)
    report = certificates.verify(witness)
    _emit(
        {
            "passed": report.passed,
            "kind": report.kind,
            "recomputed_bounds": report.recomputed_bounds,
        },
        args.output,
    )
    return EXIT_OK if report.passed else EXIT_INVALID


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _add_common(p, seed=True):
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    if seed:
        p.add_argument("--seed", type=int, default=42,
                       help="seed for randomized searches (default 42)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spheredyn",
        description="dynamics of sphere maps induced by affine maps",
        epilog=_EXIT_DOC,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="full report for one system",
                       epilog=_EXIT_DOC)
    p.add_argument("-i", "--input", required=True, help="system JSON path")
    p.add_argument("--require-homeo", action="store_true",
                   help="fail (exit 2) unless the homeomorphism condition holds")
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--exp-horizon", type=int, default=500)
    p.add_argument("--delta", type=float, default=0.01)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="(theta, alpha) phase-diagram sweep",
                       epilog=_EXIT_DOC)
    p.add_argument("--theta", required=True, help="range start:stop:step (pi literals ok)")
    p.add_argument("--alpha", required=True, help="range start:stop:step in (0,1)")
    p.add_argument("-o", "--output", required=True, help="CSV output path")
    p.add_argument("--svg", help="also render the phase diagram to this file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("orbit", help="dump an orbit segment", epilog=_EXIT_DOC)
    p.add_argument("-i", "--input", required=True, help="system JSON path")
    p.add_argument("--point", required=True, help="start point, comma separated")
    p.add_argument("-n", type=int, required=True,
                   help="iterate count; negative runs the inverse map")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--svg", help="also render the orbit to this file")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("certify", help="search for a witness", epilog=_EXIT_DOC)
    p.add_argument("--mode", choices=("nondistal", "nonexpansive"), required=True)
    p.add_argument("-i", "--input", required=True, help="system JSON path")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--horizon", type=int, default=500)
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("product", help="assemble and analyze a product system",
                       epilog=_EXIT_DOC)
    p.add_argument("-i", "--input", required=True, action="append",
                   help="factor system JSON or product JSON (repeatable)")
    p.add_argument("--action", choices=("classify", "apply", "certify"),
                   default="classify")
    p.add_argument("--mode", choices=("nondistal", "nonexpansive"),
                   default="nondistal", help="witness mode for --action certify")
    p.add_argument("--point", help="semicolon-separated factor points for apply")
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--exp-horizon", type=int, default=500)
    p.add_argument("--delta", type=float, default=0.01)
    _add_common(p)
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("verify", help="independently verify a witness JSON",
                       epilog=_EXIT_DOC)
    p.add_argument("-i", "--input", required=True, help="witness JSON path")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HomeoConditionViolated, NotInvertible) as exc:
        _sys.stderr.write(f"error: {exc}\n")
        return EXIT_HOMEO
    except (WitnessNotFound, SearchExhausted) as exc:
        _sys.stderr.write(f"error: {exc}\n")
        return EXIT_UNKNOWN
    except (
        SphereDynError,
        MalformedWitness,
        ValueError,
        OSError,
        json.JSONDecodeError,
        KeyError,
    ) as exc:
        _sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    _sys.exit(main())
