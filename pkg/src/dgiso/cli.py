"""Command-line front end.

    dgiso profile     ray point and perimeter for every (a^2, A)
    dgiso oracle      brute-force optimum against the ray for every (a^2, A)
    dgiso verify      run the verification suite, write a JSON (or CSV) report
    dgiso candidates  list the stationary candidates for one (a^2, A)

Exit codes: 0 success, 1 verification failure, 2 invalid arguments,
3 output could not be written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from .density import DoubleGaussianDensity
from .line import (
    SCORE_TOL,
    WIN_MARGIN,
    BoundaryConfiguration,
    isoperimetric_profile,
    ray_for_mass,
    second_variation_test,
)
from .oracle import OracleConfig, profile_csv, profile_table
from .stationary import MASS_TOL, classify_candidates
from .suite import (
    DEFAULT_MASSES,
    DEFAULT_VARIANCES,
    ORACLE_GAP,
    RunConfig,
    default_workers,
    run_suite,
    suite_document,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variances", type=_float_list, default=DEFAULT_VARIANCES, help="comma-separated a^2 values")
    p.add_argument("--masses", type=_float_list, default=DEFAULT_MASSES, help="comma-separated masses in (0, 1/2)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--out", default=None, help="output file (default: standard output)")
    p.add_argument("--seed", type=int, default=0, help="reserved; every algorithm is deterministic")


def _add_oracle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-points", type=int, default=4001, help="oracle grid size (odd)")
    p.add_argument("--kmax", type=int, default=4, help="oracle max boundary points")
    p.add_argument("--band", type=float, default=0.2, help="oracle |psi'| spread allowed among free points")
    p.add_argument("--oracle-mass-tol", type=float, default=5e-4)
    p.add_argument("--workers", type=int, default=default_workers())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgiso", description="Isoperimetric checks for the double-Gaussian density")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="ray point and perimeter table")
    _add_grid_args(p)

    p = sub.add_parser("oracle", help="brute-force optimum against the ray")
    _add_grid_args(p)
    _add_oracle_args(p)

    p = sub.add_parser("verify", help="run the verification suite")
    _add_grid_args(p)
    _add_oracle_args(p)
    p.add_argument("--tol-mass", type=float, default=MASS_TOL, help="mass residual allowed for stationary candidates")
    p.add_argument("--tol-root", type=float, default=SCORE_TOL, help="mass residual allowed for the ray")
    p.add_argument("--margin", type=float, default=WIN_MARGIN, help="perimeter margin separating wins from ties")
    p.add_argument("--oracle-gap", type=float, default=ORACLE_GAP, help="allowed oracle undercut of the ray")
    p.add_argument("--skip-oracle", action="store_true", help="leave out the brute-force cross-check")
    p.add_argument("--timings", action="store_true", help="include wall times (output no longer byte-stable)")

    p = sub.add_parser("candidates", help="stationary candidates for one (a^2, A)")
    p.add_argument("--a2", type=float, required=True)
    p.add_argument("--mass", type=float, required=True)
    p.add_argument("--all", action="store_true", help="also list configurations of unexpected shape")
    p.add_argument("--tol-mass", type=float, default=MASS_TOL)
    p.add_argument("--margin", type=float, default=WIN_MARGIN)
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    return parser


def _run_config(args, default_format: str) -> RunConfig:
    oracle = OracleConfig(
        grid_points=getattr(args, "grid_points", 4001),
        max_boundary_points=getattr(args, "kmax", 4),
        mass_tolerance=getattr(args, "oracle_mass_tol", 5e-4),
        band=getattr(args, "band", 0.2),
    )
    return RunConfig(
        variance_grid=tuple(args.variances),
        mass_grid=tuple(args.masses),
        oracle=oracle,
        output_format=args.format or default_format,
        output_path=args.out,
        seed=args.seed,
        tol_mass=getattr(args, "tol_mass", MASS_TOL),
        tol_root=getattr(args, "tol_root", SCORE_TOL),
        margin=getattr(args, "margin", WIN_MARGIN),
        oracle_gap=getattr(args, "oracle_gap", ORACLE_GAP),
        run_oracle=not getattr(args, "skip_oracle", False),
        workers=getattr(args, "workers", 1),
    )


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r.values()])
    return buf.getvalue()


def cmd_profile(cfg: RunConfig) -> int:
    rows = []
    for v in sorted(cfg.variance_grid):
        d = DoubleGaussianDensity(v)
        for A, b, perim in isoperimetric_profile(d, sorted(cfg.mass_grid)):
            rows.append({"a2": v, "A": A, "ray_point": b, "ray_perimeter": perim})
    _write(_table(rows, cfg.output_format), cfg.output_path)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    rows = []
    for v in sorted(cfg.variance_grid):
        rows += profile_table(DoubleGaussianDensity(v), sorted(cfg.mass_grid), cfg.oracle)
    if cfg.output_format == "csv":
        text = profile_csv(rows, cfg.oracle.max_boundary_points)
    else:
        text = json.dumps(
            [
                {
                    "a2": r.a2,
                    "A": r.A,
                    "k": len(r.oracle.points),
                    "points": list(r.oracle.points),
                    "mass": r.oracle.mass,
                    "perimeter": r.oracle.perimeter,
                    "ray_perimeter": r.ray_perimeter,
                    "gap": r.gap,
                }
                for r in rows
            ],
            indent=2,
            sort_keys=True,
        ) + "\n"
    _write(text, cfg.output_path)
    return EXIT_FAILED if any(r.gap < -cfg.oracle_gap for r in rows) else EXIT_OK


def cmd_verify(cfg: RunConfig, timing: bool = False) -> int:
    reports = run_suite(cfg)
    doc = suite_document(cfg, reports, timing=timing)
    if cfg.output_format == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "a2", "A", "passed"])
        for r in reports:
            w.writerow([
                r.check,
                _fmt(r.parameters["a2"]),
                _fmt(r.parameters["A"]) if "A" in r.parameters else "",
                str(r.passed).lower(),
            ])
        text = buf.getvalue()
    _write(text, cfg.output_path)
    if doc["failed_checks"]:
        print("failing checks:", file=sys.stderr)
        for name in doc["failed_checks"]:
            print(f"  {name}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_candidates(a2: float, A: float, *, include_all: bool, tol_mass: float, margin: float, fmt: str) -> int:
    if not (0.0 < A < 0.5):
        raise UsageError(f"mass must lie in (0, 1/2), got {A}")
    if not (0.0 < a2 <= 1.0):
        raise UsageError(f"candidate classification needs 0 < a^2 <= 1, got {a2}")
    d = DoubleGaussianDensity(a2)
    ray = ray_for_mass(d, A)
    rows = []
    for cand in classify_candidates(d, A, include_anomalies=include_all, mass_tol=tol_mass):
        cfg = BoundaryConfiguration.from_candidate(d, cand)
        stability = second_variation_test(d, cfg).second_variation_sign.value if len(cfg.points) > 1 else "n/a"
        gap = cfg.perimeter - ray.perimeter
        rows.append({
            "tag": cand.tag.value,
            "points": " ".join(_fmt(p) for p in cfg.points),
            "mass": cfg.mass,
            "perimeter": cfg.perimeter,
            "curvature": cand.kappa,
            "stability": stability,
            "gap": gap,
            "verdict": "ray" if len(cfg.points) == 1 else ("loses" if gap > margin else ("unstable" if stability == "negative" else "tie")),
        })
    if fmt == "table":
        header = f"{'tag':<20} {'mass':>10} {'perimeter':>12} {'curvature':>12} {'stability':>9} {'gap':>12}  points"
        lines = [header]
        for r in rows:
            lines.append(
                f"{r['tag']:<20} {r['mass']:>10.6f} {r['perimeter']:>12.8f} {r['curvature']:>12.6f} "
                f"{r['stability']:>9} {r['gap']:>12.3e}  {r['points']}"
            )
        text = "\n".join(lines) + "\n"
    else:
        text = _table(rows, fmt)
    sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "candidates":
            if not (math.isfinite(args.tol_mass) and args.tol_mass > 0):
                raise UsageError("--tol-mass must be positive")
            return cmd_candidates(
                args.a2, args.mass, include_all=args.all, tol_mass=args.tol_mass, margin=args.margin, fmt=args.format
            )
        default_format = "json" if args.command == "verify" else "csv"
        try:
            cfg = _run_config(args, default_format)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if args.command == "profile":
            return cmd_profile(cfg)
        if args.command == "oracle":
            return cmd_oracle(cfg)
        return cmd_verify(cfg, timing=args.timings)
    except UsageError as exc:
        print(f"dgiso: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"dgiso: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
