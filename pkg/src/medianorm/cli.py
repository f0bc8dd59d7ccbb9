"""Command-line front end.

Subcommands: median, check, search, shadow, defect, suite. Bodies come from
named presets (sphere, ellipsoid:a,b,c, lp:p, l1, linf, hpoly:FILE,
vpoly:FILE) or from a body-JSON file. Reports are JSON on standard output;
shadow scans can also emit CSV. Exit status: 0 completed, 1 input error,
2 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .bodies import Body, BodyError, Ellipsoid, HPolytope, LpBall, VPolytope
from .ellipsoid import DetectorError, mm_scan, parallelogram_defect
from .intuition import InconclusiveError, SearchConfig, check_intuitive, replay_witness, search_witness
from .median import MedianError, SolveOptions, WeightedPoints, solve_unconstrained
from .serialize import body_from_json, body_to_json, result_to_json, witness_from_json, witness_to_json
from .suites import SUITE_ALIASES, SUITE_NAMES, run_suite


class InputError(ValueError):
    pass


def _parse_points(text: str) -> np.ndarray:
    """Parse "(0,0,1);(0,1,0)" into an array of points."""
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip().strip("()")
        if not chunk:
            continue
        rows.append([float(Fraction(t.strip())) for t in chunk.split(",")])
    if not rows or len({len(r) for r in rows}) != 1:
        raise InputError(f"could not parse points from {text!r}")
    return np.array(rows, float)


def _parse_weights(text: str, n: int) -> np.ndarray:
    w = np.array([float(Fraction(t.strip())) for t in text.split(";") if t.strip()])
    if len(w) != n:
        raise InputError(f"{len(w)} weights for {n} points")
    return w


def _load_matrix(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix from {path}: {exc}")
    return np.array(data, float)


def parse_body(spec: str, dim: int = 3) -> Body:
    """Build a body from a preset name or a body-JSON file path."""
    if spec.endswith(".json"):
        try:
            with open(spec, encoding="utf-8") as fh:
                return body_from_json(json.load(fh))
        except (OSError, json.JSONDecodeError, BodyError) as exc:
            raise InputError(f"bad body file {spec}: {exc}")
    name, _, arg = spec.partition(":")
    if name == "sphere":
        return LpBall(2.0, np.ones(dim))
    if name == "ellipsoid":
        axes = np.array([float(Fraction(t)) for t in arg.split(",")])
        if len(axes) != dim or axes.min() <= 0:
            raise InputError(f"ellipsoid needs {dim} positive semi-axes, got {arg!r}")
        return Ellipsoid(np.diag(1.0 / axes**2))
    if name == "lp":
        p = float(Fraction(arg))
        if p < 1:
            raise InputError("lp preset needs p >= 1")
        return LpBall(p, np.ones(dim))
    if name == "l1":
        return LpBall(1.0, np.ones(dim))
    if name == "linf":
        return HPolytope(np.eye(dim))
    if name == "hpoly":
        return HPolytope(_load_matrix(arg))
    if name == "vpoly":
        return VPolytope(_load_matrix(arg))
    raise InputError(f"unknown body spec {spec!r}")


def _instance(args) -> tuple[np.ndarray, np.ndarray]:
    if args.instance:
        try:
            with open(args.instance, encoding="utf-8") as fh:
                data = json.load(fh)
            pts = np.array(data["points"], float)
            w = np.array(data["weights"], float)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"bad instance file {args.instance}: {exc}")
    else:
        if not args.points:
            raise InputError("need --points or --instance")
        pts = _parse_points(args.points)
        if args.weights:
            w = _parse_weights(args.weights, len(pts))
        else:
            w = np.full(len(pts), 1.0 / len(pts))
    return pts, w


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _envelope(args, result: dict, t0: float) -> dict:
    return {
        "command": args.command,
        "config": {k: v for k, v in sorted(vars(args).items())
                   if k not in ("func",) and v is not None},
        "version": __version__,
        "seed": args.seed,
        "wall_time": round(time.perf_counter() - t0, 3),
        "result": result,
    }


def _cmd_median(args, t0: float) -> int:
    pts, w = _instance(args)
    body = parse_body(args.body, dim=pts.shape[1])
    wp = WeightedPoints(pts, w)
    opts = SolveOptions(tol=args.tol, seed=args.seed)
    res = solve_unconstrained(body, wp, opts)
    _emit(_envelope(args, result_to_json(res, seed=args.seed), t0), args.out)
    return 2 if res.status == "iteration_cap" else 0


def _cmd_check(args, t0: float) -> int:
    pts, w = _instance(args)
    body = parse_body(args.body, dim=pts.shape[1])
    wp = WeightedPoints(pts, w)
    outcome = check_intuitive(body, wp, tol=args.tol,
                              opts=SolveOptions(tol=min(args.tol, 1e-7), seed=args.seed))
    result = {"verdict": outcome.verdict, "gap": float(outcome.gap)}
    if outcome.diagnostic:
        result["diagnostic"] = outcome.diagnostic
    if outcome.certificate is not None:
        result["certificate"] = witness_to_json(outcome.certificate)
    _emit(_envelope(args, result, t0), args.out)
    return 0


def _cmd_search(args, t0: float) -> int:
    if args.replay:
        try:
            with open(args.replay, encoding="utf-8") as fh:
                w = witness_from_json(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"bad witness file {args.replay}: {exc}")
        ok = replay_witness(w)
        _emit(_envelope(args, {"replayed": bool(ok), "witness": witness_to_json(w)}, t0),
              args.out)
        return 0 if ok else 2
    if args.region not in ("hull", "affine_span"):
        raise InputError(f"region must be 'hull' or 'affine_span', got {args.region!r}")
    body = parse_body(args.body)
    cfg = SearchConfig(trials=args.trials, seed=args.seed, region=args.region)
    w = search_witness(body, cfg)
    if w is None:
        result = {"witness": None, "note": "none found at budget", "trials": args.trials}
    else:
        result = {"witness": witness_to_json(w)}
    _emit(_envelope(args, result, t0), args.out)
    return 0


def _cmd_shadow(args, t0: float) -> int:
    body = parse_body(args.body)
    scan = mm_scan(body, n_directions=args.directions, seed=args.seed, m=args.samples)
    if args.out_format == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["direction_x", "direction_y", "direction_z", "sigma3"])
        for r in scan.reports:
            wr.writerow([f"{r.direction[0]:.17g}", f"{r.direction[1]:.17g}",
                         f"{r.direction[2]:.17g}", f"{r.sigma3:.17g}"])
        text = buf.getvalue()
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        print(text, end="")
        return 0
    result = {
        "max_sigma3": float(scan.max_sigma3),
        "argmax_direction": np.asarray(scan.argmax_direction).tolist(),
        "directions": args.directions,
        "samples": args.samples,
    }
    _emit(_envelope(args, result, t0), args.out)
    return 0


def _cmd_defect(args, t0: float) -> int:
    body = parse_body(args.body)
    d = parallelogram_defect(body, n_samples=args.samples, seed=args.seed)
    _emit(_envelope(args, {"defect": float(d), "samples": args.samples}, t0), args.out)
    return 0


def _cmd_suite(args, t0: float) -> int:
    name = SUITE_ALIASES.get(args.name, args.name)
    if name not in SUITE_NAMES:
        raise InputError(f"unknown suite {args.name!r}; choose from {SUITE_NAMES}")
    reports = run_suite(name, seed=args.seed)
    result = {
        "passed": all(r.passed for r in reports),
        "batteries": [r.to_json() for r in sorted(reports, key=lambda r: r.name)],
    }
    _emit(_envelope(args, result, t0), args.out)
    return 0 if result["passed"] else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="medianorm",
        description="Geometric medians under convex-body norms: solve, check "
                    "hull membership, search for certified escapes, scan for "
                    "non-ellipsoid shadow boundaries.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, body=True, instance=False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--out", help="also write the report to this file")
        if body:
            p.add_argument("--body", help="preset or body-JSON file")
        if instance:
            p.add_argument("--points", help='e.g. "(0,1);(1,0)"')
            p.add_argument("--weights", help='e.g. "1/2;1/2" (defaults to uniform)')
            p.add_argument("--instance", help="instance JSON file (points + weights)")

    p = sub.add_parser("median", help="solve one weighted-median instance")
    common(p, instance=True)
    p.set_defaults(func=_cmd_median)

    p = sub.add_parser("check", help="does a geometric median meet the hull?")
    common(p, instance=True)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("search", help="randomized search for a certified hull escape")
    common(p)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--region", default="hull", help="hull or affine_span")
    p.add_argument("--replay", help="re-certify a stored witness JSON instead")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("shadow", help="shadow-boundary rank scan over directions")
    common(p)
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--csv", dest="out_format", action="store_const", const="csv",
                   default="json")
    p.set_defaults(func=_cmd_shadow)

    p = sub.add_parser("defect", help="parallelogram-law defect of a body")
    common(p)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=_cmd_defect)

    p = sub.add_parser("suite", help="run a verification battery")
    p.add_argument("name", help="|".join(SUITE_NAMES))
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_suite)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        needs_body = args.command in ("median", "check", "shadow", "defect") or (
            args.command == "search" and not args.replay)
        if needs_body and not args.body:
            raise InputError("need --body")
        return args.func(args, t0)
    except (InputError, BodyError, MedianError, DetectorError, ValueError) as exc:
        print(json.dumps({"error": str(exc), "command": args.command}), file=sys.stderr)
        return 1
    except InconclusiveError as exc:
        print(json.dumps({"error": str(exc), "command": args.command}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
