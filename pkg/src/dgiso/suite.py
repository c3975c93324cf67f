"""The full verification suite over a variance x mass grid.

Each grid cell and each variance yields a list of reports; which checks run
depends on the variance regime:

* ``a^2 <= 1/2``: gamma function, sliding window, straddling-interval mass,
  flank comparison, two-ray comparisons, and ray shift for ``A <= 1/4``;
* ``1/2 <= a^2 < 1``: the density upper bound;
* ``a^2 >= 1``: instability of every two-point stationary boundary;
* ``a^2 <= 1``: elimination of classified multi-point candidates;
* every variance: rays against all stationary boundaries, the oracle
  cross-check, and the plane checks.
"""

from __future__ import annotations

import math
import os
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .density import DoubleGaussianDensity
from .line import (
    WIN_MARGIN,
    SCORE_TOL,
    candidate_elimination_check,
    density_upper_bound_check,
    gamma_function_check,
    ray_for_mass,
    ray_shift_comparison,
    sliding_interval_check,
    straddling_mass_check,
    two_point_instability_check,
    two_ray_sweep,
    verify_rays_optimal,
)
from .oracle import OracleConfig, brute_force_minimum
from .plane import PlaneDensity, compare_lines, split_rays_check, stationary_lines_check
from .report import VerificationReport
from .stationary import MASS_TOL, flank_comparison_check

DEFAULT_VARIANCES = (0.05, 0.1, 0.16, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0, 1.25, 1.5)
DEFAULT_MASSES = tuple(round(0.02 * i, 2) for i in range(1, 25))
MAX_VARIANCE = 2.25
ORACLE_GAP = 1e-6


@dataclass(frozen=True)
class RunConfig:
    variance_grid: tuple[float, ...] = DEFAULT_VARIANCES
    mass_grid: tuple[float, ...] = DEFAULT_MASSES
    oracle: OracleConfig = field(default_factory=OracleConfig)
    output_format: str = "json"
    output_path: str | None = None
    seed: int = 0
    tol_mass: float = MASS_TOL
    tol_root: float = SCORE_TOL
    margin: float = WIN_MARGIN
    oracle_gap: float = ORACLE_GAP
    run_oracle: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.variance_grid:
            raise ValueError("variance grid is empty")
        if not self.mass_grid:
            raise ValueError("mass grid is empty")
        for v in self.variance_grid:
            if not (0.0 < v <= MAX_VARIANCE and math.isfinite(v)):
                raise ValueError(f"variance {v!r} outside (0, {MAX_VARIANCE}]")
        for A in self.mass_grid:
            if not (0.0 < A < 0.5):
                raise ValueError(f"mass {A!r} outside (0, 1/2)")
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        for name in ("tol_mass", "tol_root", "margin", "oracle_gap"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def describe(self) -> dict:
        """Everything that determines the results (not where or how fast they are written)."""
        out = asdict(self)
        for key in ("output_format", "output_path", "workers"):
            out.pop(key)
        return out


def _timed(fn: Callable[[], VerificationReport]) -> VerificationReport:
    t0 = time.perf_counter()
    rep = fn()
    rep.wall_time = time.perf_counter() - t0
    return rep


def oracle_cross_check(d: DoubleGaussianDensity, A: float, cfg: OracleConfig, gap_tol: float = ORACLE_GAP):
    """Brute-force optimum against the ray: pass when ``oracle >= ray - gap_tol``."""
    ray = ray_for_mass(d, A)
    best = brute_force_minimum(d, A, cfg)
    gap = best.perimeter - ray.perimeter
    return VerificationReport(
        check="oracle_cross_check",
        parameters={
            "a2": d.variance,
            "A": A,
            "grid_points": cfg.grid_points,
            "k_max": cfg.max_boundary_points,
            "band": cfg.band,
        },
        passed=gap >= -gap_tol,
        witnesses={
            "ray_point": ray.points[0],
            "ray_perimeter": ray.perimeter,
            "oracle_points": list(best.points),
            "oracle_region": [list(iv) for iv in best.region],
            "oracle_mass": best.mass,
            "oracle_perimeter": best.perimeter,
            "gap": gap,
        },
        tolerances={"gap": gap_tol, "mass": cfg.mass_tolerance},
    )


def variance_reports(v: float, cfg: RunConfig) -> list[VerificationReport]:
    d = DoubleGaussianDensity(v)
    jobs = []
    if v <= 0.5:
        jobs += [
            lambda: gamma_function_check(d),
            lambda: sliding_interval_check(d),
            lambda: straddling_mass_check(d),
            lambda: flank_comparison_check(d),
            lambda: two_ray_sweep(d),
        ]
    if 0.5 <= v < 1.0:
        jobs.append(lambda: density_upper_bound_check(d))
    if v >= 1.0:
        jobs.append(lambda: two_point_instability_check(d, cfg.mass_grid, mass_tol=cfg.tol_mass))
    jobs.append(lambda: stationary_lines_check(PlaneDensity(v), seed=cfg.seed))
    return [_timed(job) for job in jobs]


def cell_reports(v: float, A: float, cfg: RunConfig) -> list[VerificationReport]:
    d = DoubleGaussianDensity(v)
    p = PlaneDensity(v)
    jobs = [
        lambda: verify_rays_optimal(d, A, margin=cfg.margin, mass_tol=cfg.tol_mass, root_tol=cfg.tol_root),
    ]
    if v <= 1.0:
        jobs.append(lambda: candidate_elimination_check(d, A, margin=cfg.margin, mass_tol=cfg.tol_mass))
    if v <= 0.5 and A <= 0.25:
        jobs.append(lambda: ray_shift_comparison(d, A))
    jobs += [lambda: compare_lines(p, A), lambda: split_rays_check(p, A)]
    if cfg.run_oracle:
        jobs.append(lambda: oracle_cross_check(d, A, cfg.oracle, cfg.oracle_gap))
    return [_timed(job) for job in jobs]


def _run_task(task) -> list[VerificationReport]:
    kind, v, A, cfg = task
    return variance_reports(v, cfg) if kind == "variance" else cell_reports(v, A, cfg)


def run_suite(cfg: RunConfig) -> list[VerificationReport]:
    """All reports, ordered by (variance, mass) regardless of worker count."""
    tasks = []
    for v in sorted(cfg.variance_grid):
        tasks.append(("variance", v, None, cfg))
        tasks += [("cell", v, A, cfg) for A in sorted(cfg.mass_grid)]
    if cfg.workers == 1 or len(tasks) == 1:
        chunks = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    return [rep for chunk in chunks for rep in chunk]


def suite_document(cfg: RunConfig, reports: list[VerificationReport], *, timing: bool = False) -> dict:
    failed = [r for r in reports if not r.passed]
    return {
        "passed": not failed,
        "n_reports": len(reports),
        "n_failed": len(failed),
        "failed_checks": sorted({_label(r) for r in failed}),
        "config": cfg.describe(),
        "reports": [r.to_dict(timing=timing) for r in reports],
    }


def _label(rep: VerificationReport) -> str:
    keys = [f"{k}={rep.parameters[k]:g}" for k in ("a2", "A", "s", "t") if k in rep.parameters]
    return f"{rep.check}({', '.join(keys)})"


def default_workers() -> int:
    return os.cpu_count() or 1
