"""Stationary boundaries on the double-Gaussian line.

A finite boundary is stationary when its generalized curvature is the same
at every point.  On the line that curvature is ``psi'(p)`` at a right
endpoint of the region and ``-psi'(p)`` at a left endpoint, so all
stationary boundaries sit inside one level set ``|psi'| = kappa``.

For ``a**2 < 1``, ``psi'`` increases on ``[-c, c]`` and decreases outside it,
where ``c = a**2 * arccosh(1/a)`` is the inflection point of ``psi``.  A seed
``s`` in ``(0, c)`` therefore determines six level-set points
``-u < -t < -s < s < t < u`` (``psi'(t) = psi'(s)``, ``psi'(u) = -psi'(s)``),
and every stationary configuration with a point in ``[-c, c]`` is a subset
of them.  :func:`classify_candidates` sweeps the seed, keeps the subsets and
orientations whose signed curvatures agree, and root-finds the seed so the
enclosed mass hits the target.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .density import DoubleGaussianDensity, check_mass, tail_quantile
from .precise import flank_slope_gap
from .report import VerificationReport

ROOT_XTOL = 1e-14
N_SEEDS = 512
DEDUP_TOL = 1e-6
CURVATURE_TOL = 1e-9
MASS_TOL = 1e-9


class NoInflectionError(ValueError):
    """psi'' has no sign change (variance above 1)."""


class NoPositiveZeroError(ValueError):
    """psi' has no positive zero (variance at least 1)."""


def far_field(d: DoubleGaussianDensity) -> float:
    """Half-width beyond which |psi'| is strictly increasing and masses are negligible."""
    return 1.0 + 8.0 * d.a


def inflection_point(d: DoubleGaussianDensity, *, verify: bool = True) -> float:
    """Positive zero ``c = a**2 arccosh(1/a)`` of psi'' (0 when a = 1).

    With ``verify`` the closed form is cross-checked against a bracketed root
    of psi'' and an AssertionError is raised on disagreement above 1e-12.
    """
    v = d.variance
    if v > 1.0:
        raise NoInflectionError(f"psi'' < 0 away from 0 for a^2 = {v} > 1; no inflection point")
    c = v * math.acosh(1.0 / d.a)
    if verify and c > 0.0:
        root = brentq(lambda x: float(d.psi_second(x)), 0.0, 2.0 * c + 1.0, xtol=ROOT_XTOL)
        if abs(root - c) > 1e-12:
            raise AssertionError(f"inflection closed form {c!r} disagrees with root {root!r}")
    return c


def psi_prime_zero_right(d: DoubleGaussianDensity) -> float:
    """Unique positive solution of ``x = tanh(x / a**2)`` (the maximiser of f)."""
    if d.variance >= 1.0:
        raise NoPositiveZeroError(f"psi' has no positive zero for a^2 = {d.variance} >= 1")
    c = inflection_point(d, verify=False)
    return brentq(lambda x: float(d.psi_prime(x)), c, 1.0, xtol=ROOT_XTOL)


@dataclass(frozen=True)
class InflectionData:
    """``c``: inflection of psi; ``d``: zero of psi' right of c;
    ``b_match``: the point beyond ``d`` where psi returns to ``psi(c)``."""

    c: float
    d: float
    b_match: float


def inflection_data(d: DoubleGaussianDensity) -> InflectionData:
    c = inflection_point(d)
    z = psi_prime_zero_right(d)
    psi_c = float(d.log_pdf(c))
    hi = z + 1.0
    while float(d.log_pdf(hi)) > psi_c:
        hi *= 2.0
    b = brentq(lambda x: float(d.log_pdf(x)) - psi_c, z, hi, xtol=ROOT_XTOL)
    return InflectionData(c=c, d=z, b_match=b)


def _monotone_pieces(d: DoubleGaussianDensity, kappa: float) -> list[tuple[float, float]]:
    # psi' is monotone on each piece; pieces cover the whole line for level kappa
    big = max(far_field(d), 2.0 + d.variance * kappa)
    if d.variance >= 1.0:
        return [(-big, big)]
    c = inflection_point(d, verify=False)
    if c == 0.0:
        return [(-big, big)]
    return [(-big, -c), (-c, c), (c, big)]


def level_set_abs_psi_prime(d: DoubleGaussianDensity, kappa: float) -> list[float]:
    """All solutions of ``|psi'(x)| = kappa``, sorted ascending (at most six)."""
    if kappa < 0 or math.isnan(kappa):
        raise ValueError(f"kappa must be nonnegative, got {kappa!r}")
    targets = (0.0,) if kappa == 0.0 else (kappa, -kappa)
    roots: list[float] = []
    for lo, hi in _monotone_pieces(d, kappa):
        flo, fhi = float(d.psi_prime(lo)), float(d.psi_prime(hi))
        for target in targets:
            glo, ghi = flo - target, fhi - target
            if glo == 0.0:
                roots.append(lo)
            elif ghi == 0.0:
                roots.append(hi)
            elif glo * ghi < 0.0:
                roots.append(
                    brentq(lambda x: float(d.psi_prime(x)) - target, lo, hi, xtol=ROOT_XTOL)
                )
    roots.sort()
    out: list[float] = []
    for r in roots:
        if not out or r - out[-1] > 1e-11:
            out.append(r)
    return out


def generalized_curvature_at(d: DoubleGaussianDensity, x: float, inward_sign: int) -> float:
    """Generalized curvature of a boundary point on the line.

    ``inward_sign`` is +1 when the enclosed region lies to the right of ``x``
    (``x`` is a left endpoint) and -1 when it lies to the left.  The result
    is ``-psi'(x)`` at a left endpoint and ``psi'(x)`` at a right endpoint.
    """
    if inward_sign not in (1, -1):
        raise ValueError("inward_sign must be +1 or -1")
    return -inward_sign * float(d.psi_prime(x))


# ---------------------------------------------------------------------------
# Candidate enumeration
# ---------------------------------------------------------------------------


class CandidateType(str, enum.Enum):
    SINGLE_RAY = "SingleRay"
    # interval with both ends on one side of 0 (mirror images share the tag)
    INTERVAL_RIGHT = "IntervalRight"
    INTERVAL_STRADDLING = "IntervalStraddling"
    THREE_POINT = "ThreePoint"
    # stationary but none of the four shapes above
    OTHER = "Other"


@dataclass(frozen=True)
class CandidateClass:
    tag: CandidateType
    points: tuple[float, ...]
    region: tuple[tuple[float, float], ...]
    mass: float
    kappa: float
    family: str = ""
    seed: float = float("nan")

    @property
    def is_anomaly(self) -> bool:
        return self.tag is CandidateType.OTHER

    @property
    def starts_inside(self) -> bool:
        """Region contains a left-infinite ray."""
        return math.isinf(self.region[0][0])


def region_from_points(points, starts_inside: bool) -> tuple[tuple[float, float], ...]:
    """Alternating union of intervals bounded by ``points``.

    ``starts_inside`` means the region contains ``(-inf, points[0]]``.
    """
    pts = [float(p) for p in points]
    edges = ([-math.inf] if starts_inside else []) + pts
    if len(edges) % 2:
        edges.append(math.inf)
    return tuple((edges[i], edges[i + 1]) for i in range(0, len(edges), 2))


def signed_curvatures(d: DoubleGaussianDensity, points, starts_inside: bool) -> list[float]:
    out = []
    for i, p in enumerate(points):
        is_left = (i % 2 == 0) != starts_inside
        out.append(generalized_curvature_at(d, p, 1 if is_left else -1))
    return out


def _alternating_tail(d: DoubleGaussianDensity, pts: np.ndarray, starts_inside: bool) -> np.ndarray:
    # mass of the alternating region, pts has shape (..., m) ascending
    tails = d.tail_mass(pts)
    signs = np.where(np.arange(pts.shape[-1]) % 2 == 0, 1.0, -1.0)
    m = (tails * signs).sum(axis=-1)
    return 1.0 - m if starts_inside else m


@dataclass(frozen=True)
class _Family:
    name: str
    labels: tuple[int, ...]
    starts_inside: bool
    regime: str  # "inner" or "outer"


# level-set labels in ascending position; sign of psi' relative to kappa > 0
_INNER_LABELS = ("-u", "-t", "-s", "s", "t", "u")
_INNER_SIGNS = (1, -1, -1, 1, 1, -1)
_OUTER_LABELS = ("-u", "u")
_OUTER_SIGNS = (1, -1)


def _families(labels, signs, regime: str, max_points: int) -> list[_Family]:
    fams = []
    for m in range(2, min(max_points, len(labels)) + 1):
        for combo in itertools.combinations(range(len(labels)), m):
            for starts_inside in (False, True):
                kap = []
                for i, lab in enumerate(combo):
                    is_left = (i % 2 == 0) != starts_inside
                    kap.append((-1 if is_left else 1) * signs[lab])
                if len(set(kap)) == 1:
                    name = ("~" if starts_inside else "") + ",".join(labels[j] for j in combo)
                    fams.append(_Family(name, combo, starts_inside, regime))
    return fams


INNER_FAMILIES = _families(_INNER_LABELS, _INNER_SIGNS, "inner", 6)
OUTER_FAMILIES = _families(_OUTER_LABELS, _OUTER_SIGNS, "outer", 2)


def _bisect_decreasing(fun, lo: np.ndarray, hi: np.ndarray, target: np.ndarray, iters: int = 80):
    # vectorised bisection for fun decreasing on [lo, hi]
    lo, hi = lo.copy(), hi.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = fun(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


class _SeedGeometry:
    """Level-set positions as functions of the seed, vectorised and scalar."""

    def __init__(self, d: DoubleGaussianDensity):
        self.d = d
        self.X = far_field(d)
        if d.variance < 1.0:
            self.c = inflection_point(d, verify=False)
            self.z = psi_prime_zero_right(d)
            kc = float(d.psi_prime(self.c))
            # outer regime starts where -psi'(u) exceeds psi'(c)
            self.u_c = brentq(lambda x: float(d.psi_prime(x)) + kc, self.z, self.X, xtol=ROOT_XTOL)
        else:
            self.c = 0.0
            self.z = 0.0
            self.u_c = 0.0

    def inner_positions(self, s):
        """Rows ``[-u, -t, -s, s, t, u]`` for seeds ``s`` in ``[0, c]``."""
        d = self.d
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = d.psi_prime(s)
        ones = np.ones_like(s)
        t = _bisect_decreasing(d.psi_prime, self.c * ones, self.z * ones, k)
        u = _bisect_decreasing(d.psi_prime, self.z * ones, self.X * ones, -k)
        return np.stack([-u, -t, -s, s, t, u], axis=-1)

    def inner_positions_scalar(self, s: float) -> np.ndarray:
        d = self.d
        k = float(d.psi_prime(s))
        if s >= self.c:
            t = self.c
        else:
            t = brentq(lambda x: float(d.psi_prime(x)) - k, self.c, self.z, xtol=ROOT_XTOL)
        if k == 0.0:
            u = self.z
        else:
            u = brentq(lambda x: float(d.psi_prime(x)) + k, self.z, self.X, xtol=ROOT_XTOL)
        return np.array([-u, -t, -s, s, t, u])

    def outer_positions(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return np.stack([-u, u], axis=-1)

    def outer_positions_scalar(self, u: float) -> np.ndarray:
        return np.array([-u, u])


@lru_cache(maxsize=64)
def _seed_table(variance: float, n_seeds: int):
    d = DoubleGaussianDensity(variance)
    geo = _SeedGeometry(d)
    tables = {}
    if d.variance < 1.0 and geo.c > 0.0:
        seeds = np.linspace(0.0, geo.c, n_seeds)
        tables["inner"] = (seeds, geo.inner_positions(seeds))
    lo = geo.u_c
    seeds = np.linspace(lo, geo.X, n_seeds)
    tables["outer"] = (seeds, geo.outer_positions(seeds))
    return geo, tables


def tag_configuration(points, region, c: float, tol: float = 1e-9) -> CandidateType:
    """Shape of a boundary, ``c`` being the inflection point (0 if none)."""
    pts = list(points)
    if len(pts) == 1:
        return CandidateType.SINGLE_RAY
    if not any(abs(p) <= c + tol for p in pts):
        return CandidateType.OTHER
    if len(pts) == 2 and len(region) == 1 and math.isfinite(region[0][0]) and math.isfinite(region[0][1]):
        lo, hi = region[0]
        return CandidateType.INTERVAL_STRADDLING if lo < 0.0 < hi else CandidateType.INTERVAL_RIGHT
    if len(pts) == 3:
        for p in pts:
            if abs(p) <= c + tol and any(abs(q + p) <= tol and q != p for q in pts):
                return CandidateType.THREE_POINT
    return CandidateType.OTHER


def _ray_candidate(d: DoubleGaussianDensity, A: float) -> CandidateClass:
    b = tail_quantile(d, A, xtol=ROOT_XTOL)
    return CandidateClass(
        tag=CandidateType.SINGLE_RAY,
        points=(b,),
        region=((b, math.inf),),
        mass=float(d.tail_mass(b)),
        kappa=-float(d.psi_prime(b)),
        family="ray",
        seed=b,
    )


def _family_candidates(
    d: DoubleGaussianDensity,
    A: float,
    geo: _SeedGeometry,
    seeds: np.ndarray,
    positions: np.ndarray,
    family: _Family,
    mass_tol: float,
    curvature_tol: float,
    rejected: list | None = None,
) -> list[CandidateClass]:
    cols = list(family.labels)
    masses = _alternating_tail(d, positions[:, cols], family.starts_inside)
    g = masses - A
    scalar = geo.inner_positions_scalar if family.regime == "inner" else geo.outer_positions_scalar

    def mass_at(sig: float) -> float:
        pts = scalar(sig)[cols]
        return float(_alternating_tail(d, pts[None, :], family.starts_inside)[0])

    roots = []
    for i in range(len(seeds) - 1):
        if g[i] == 0.0:
            roots.append(seeds[i])
        elif g[i] * g[i + 1] < 0.0:
            roots.append(brentq(lambda x: mass_at(x) - A, seeds[i], seeds[i + 1], xtol=ROOT_XTOL))
    if g[-1] == 0.0:
        roots.append(seeds[-1])

    out = []
    for sig in roots:
        pts = scalar(sig)[cols]
        if np.any(np.diff(pts) <= 1e-9):
            continue  # degenerate: coincident boundary points
        region = region_from_points(pts, family.starts_inside)
        mass = d.region_mass(region)
        kap = signed_curvatures(d, pts, family.starts_inside)
        if abs(mass - A) > mass_tol or max(kap) - min(kap) > curvature_tol:
            if rejected is not None:
                rejected.append(
                    {
                        "family": f"{family.regime}:{family.name}",
                        "points": [float(p) for p in pts],
                        "mass_residual": mass - A,
                        "curvature_spread": max(kap) - min(kap),
                    }
                )
            continue
        out.append(
            CandidateClass(
                tag=tag_configuration(pts, region, geo.c),
                points=tuple(float(p) for p in pts),
                region=region,
                mass=mass,
                kappa=float(np.mean(kap)),
                family=f"{family.regime}:{family.name}",
                seed=float(sig),
            )
        )
    return out


def _dedupe(cands: list[CandidateClass], tol: float = DEDUP_TOL) -> list[CandidateClass]:
    kept: list[CandidateClass] = []
    for cand in cands:
        dup = False
        for other in kept:
            if len(other.points) == len(cand.points) and other.starts_inside == cand.starts_inside:
                if all(abs(p - q) <= tol for p, q in zip(other.points, cand.points)):
                    dup = True
                    break
        if not dup:
            kept.append(cand)
    return kept


def stationary_configurations(
    d: DoubleGaussianDensity,
    A: float,
    *,
    n_seeds: int = N_SEEDS,
    mass_tol: float = MASS_TOL,
    curvature_tol: float = CURVATURE_TOL,
    rejected: list | None = None,
) -> list[CandidateClass]:
    """Every stationary boundary of mass ``A`` found by the seed sweeps.

    Includes the ray, the inner families (points from the six-point level
    sets, ``a**2 < 1``) and the outer two-point families ``{-u, u}`` whose
    level set misses ``[-c, c]``.  Sorted by (size, points).

    Roots whose configuration fails the mass or curvature re-check are left
    out; pass a list as ``rejected`` to collect them.
    """
    check_mass(A, open_half=True)
    geo, tables = _seed_table(d.variance, n_seeds)
    cands = [_ray_candidate(d, A)]
    for regime, fams in (("inner", INNER_FAMILIES), ("outer", OUTER_FAMILIES)):
        if regime not in tables:
            continue
        seeds, positions = tables[regime]
        for fam in fams:
            cands.extend(
                _family_candidates(
                    d, A, geo, seeds, positions, fam, mass_tol, curvature_tol, rejected
                )
            )
    cands.sort(key=lambda c: (len(c.points), c.points, c.starts_inside))
    return _dedupe(cands)


def classify_candidates(
    d: DoubleGaussianDensity,
    target_mass: float,
    *,
    include_anomalies: bool = False,
    n_seeds: int = N_SEEDS,
    mass_tol: float = MASS_TOL,
    curvature_tol: float = CURVATURE_TOL,
    rejected: list | None = None,
) -> list[CandidateClass]:
    """Stationary candidates of the four admissible shapes for ``a**2 <= 1``.

    The ray is always present.  Configurations of any other shape are
    dropped unless ``include_anomalies`` is set, in which case they come back
    tagged ``CandidateType.OTHER``.
    """
    if d.variance > 1.0:
        raise ValueError(f"candidate classification needs a^2 <= 1, got {d.variance}")
    cands = stationary_configurations(
        d,
        target_mass,
        n_seeds=n_seeds,
        mass_tol=mass_tol,
        curvature_tol=curvature_tol,
        rejected=rejected,
    )
    if include_anomalies:
        return cands
    return [c for c in cands if not c.is_anomaly]


def family_mass_range(d: DoubleGaussianDensity, tag: CandidateType, n_seeds: int = N_SEEDS) -> float:
    """Largest enclosed mass over the inner families producing shape ``tag``.

    Scans the seed grid only; degenerate seeds with coincident points are
    skipped.  Returns 0 when no family of that shape exists.
    """
    geo, tables = _seed_table(d.variance, n_seeds)
    if "inner" not in tables:
        return 0.0
    seeds, positions = tables["inner"]
    best = 0.0
    for fam in INNER_FAMILIES:
        pts = positions[:, list(fam.labels)]
        masses = np.asarray(_alternating_tail(d, pts, fam.starts_inside), dtype=float)
        valid = np.all(np.diff(pts, axis=1) > 1e-9, axis=1) & (masses > max(best, 0.0)) & (masses < 0.5)
        # heaviest first, so the first row with the right shape is this family's maximum
        for i in np.flatnonzero(valid)[np.argsort(-masses[valid], kind="stable")]:
            row = pts[i]
            if tag_configuration(row, region_from_points(row, fam.starts_inside), geo.c) is tag:
                best = float(masses[i])
                break
    return best


# ---------------------------------------------------------------------------
# Comparison lemma on the two flanks of the maximiser
# ---------------------------------------------------------------------------


def flank_comparison_check(d: DoubleGaussianDensity, n: int = 200) -> VerificationReport:
    """Compare psi's descent on either side of its positive maximiser ``z``.

    With ``p(x) = psi(z) - psi(z - x)`` and ``q(x) = psi(z) - psi(z + x)``,
    whenever ``p(alpha) = q(beta)`` for ``alpha`` in ``(0, z)`` we expect
    ``q'(beta) > p'(alpha)``.  Checked on ``n`` values of ``alpha``; gaps
    within rounding of zero are recomputed in extended precision.
    """
    z = psi_prime_zero_right(d)
    psi_z = float(d.log_pdf(z))
    worst = math.inf
    failures = []
    refined = 0
    for alpha in np.linspace(z / n, z * (1 - 1.0 / n), n):
        p_val = psi_z - float(d.log_pdf(z - alpha))
        hi = 1.0
        while psi_z - float(d.log_pdf(z + hi)) < p_val:
            hi *= 2.0
        beta = brentq(lambda x: psi_z - float(d.log_pdf(z + x)) - p_val, 0.0, hi, xtol=ROOT_XTOL)
        p_slope = float(d.psi_prime(z - alpha))
        q_slope = -float(d.psi_prime(z + beta))
        gap = q_slope - p_slope
        if gap <= 1e-9 * max(1.0, abs(p_slope), abs(q_slope)):
            gap = flank_slope_gap(d.variance, float(alpha))
            refined += 1
        worst = min(worst, gap)
        if not gap > 0.0:
            failures.append({"alpha": alpha, "beta": beta, "gap": gap})
    return VerificationReport(
        check="flank_comparison",
        parameters={"a2": d.variance, "n": n},
        passed=not failures,
        witnesses={
            "zero_of_psi_prime": z,
            "min_slope_gap": worst,
            "n_refined": refined,
            "failures": failures[:10],
        },
    )
