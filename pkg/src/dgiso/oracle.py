"""Brute-force minimiser over discretised k-point boundaries.

Boundary points live on a uniform grid over ``[-L, L]`` except the
rightmost one, which is solved for continuously so the region has the
requested mass exactly.  Only regions that start outside (``[p1, p2] U ...``)
are searched; their complements are covered by also searching for mass
``1 - A``, since complementing keeps the boundary and hence the perimeter.

Two search modes share the same snapping rule:

* a pruned depth-first search compiled with numba, used for real runs;
* a pruning-free numpy enumeration for small grids, used to validate it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import combinations

import numba
import numpy as np

from .density import DoubleGaussianDensity, check_mass
from .line import BoundaryConfiguration, ray_for_mass
from .stationary import inflection_point

EXHAUSTIVE_MAX_N = 401


@dataclass(frozen=True)
class OracleConfig:
    """Search space of the oracle.

    ``domain_halfwidth=None`` means ``1 + 8a`` for the density at hand.
    ``band`` is the allowed spread of ``|psi'|`` over the free points.
    """

    domain_halfwidth: float | None = None
    grid_points: int = 4001
    max_boundary_points: int = 4
    mass_tolerance: float = 5e-4
    band: float = 0.2

    def __post_init__(self) -> None:
        if self.grid_points < 3 or self.grid_points % 2 == 0:
            raise ValueError(f"grid_points must be odd and >= 3, got {self.grid_points}")
        if not 1 <= self.max_boundary_points <= 6:
            raise ValueError(f"max_boundary_points must be in 1..6, got {self.max_boundary_points}")
        if self.domain_halfwidth is not None and not self.domain_halfwidth > 0:
            raise ValueError(f"domain_halfwidth must be positive, got {self.domain_halfwidth}")
        if not self.mass_tolerance > 0:
            raise ValueError(f"mass_tolerance must be positive, got {self.mass_tolerance}")
        if not self.band > 0:
            raise ValueError(f"band must be positive, got {self.band}")

    def halfwidth(self, d: DoubleGaussianDensity) -> float:
        return self.domain_halfwidth if self.domain_halfwidth is not None else 1.0 + 8.0 * d.a

    def grid(self, d: DoubleGaussianDensity) -> np.ndarray:
        """Uniform grid on ``[-L, L]``, exactly symmetric with 0 as its middle node."""
        L = self.halfwidth(d)
        half = self.grid_points // 2
        pos = L * np.arange(1, half + 1) / half
        return np.concatenate([-pos[::-1], [0.0], pos])


class NoFeasibleConfiguration(RuntimeError):
    pass


# -- compiled kernel ---------------------------------------------------------


@numba.njit(cache=True)
def _tail(x, s2a):
    return 0.25 * (math.erfc((x - 1.0) / s2a) + math.erfc((x + 1.0) / s2a))


@numba.njit(cache=True)
def _dens(x, v, norm):
    return (math.exp(-((x - 1.0) ** 2) / (2.0 * v)) + math.exp(-((x + 1.0) ** 2) / (2.0 * v))) * norm


@numba.njit(cache=True)
def _head(x, s2a):
    # mass of (-inf, x], accurate in the left tail
    return 0.25 * (math.erfc(-(x - 1.0) / s2a) + math.erfc(-(x + 1.0) / s2a))


@numba.njit(cache=True)
def _invert_tail(tau, lo, hi, t_lo, t_hi, s2a, v, norm):
    """Solve tail(p) = tau on [lo, hi] where tail(lo) >= tau >= tail(hi).

    Newton on the log of whichever tail is the smaller one (upper tail for
    tau <= 1/2, lower tail otherwise), started from log-linear interpolation
    across the bracket and safeguarded by bisection.  Working with the small
    tail keeps full relative precision far out on either side.
    """
    upper = tau <= 0.5
    target = tau if upper else 1.0 - tau
    lt = math.log(target)
    e_lo = t_lo if upper else 1.0 - t_lo
    e_hi = t_hi if upper else 1.0 - t_hi
    if e_lo > 0.0 and e_hi > 0.0 and e_lo != e_hi:
        x = lo + (hi - lo) * (math.log(e_lo) - lt) / (math.log(e_lo) - math.log(e_hi))
        if not (lo <= x <= hi):
            x = 0.5 * (lo + hi)
    else:
        x = 0.5 * (lo + hi)
    for _ in range(200):
        mass = _tail(x, s2a) if upper else _head(x, s2a)
        fx = _dens(x, v, norm)
        if mass <= 0.0 or fx <= 0.0:
            if upper:
                hi = x
            else:
                lo = x
            nx = 0.5 * (lo + hi)
        else:
            r = math.log(mass) - lt
            # r > 0 means x lies left of the root for the upper tail and
            # right of it for the lower tail
            if (r > 0.0) == upper:
                lo = x
            else:
                hi = x
            nx = x + r * mass / fx if upper else x - r * mass / fx
            if not (lo <= nx <= hi):
                nx = 0.5 * (lo + hi)
        if abs(nx - x) <= 4e-16 * max(1.0, abs(x)):
            return nx
        x = nx
    return x


@numba.njit(cache=True)
def _cell_floor(f, crit, i):
    # lower bound on f over grid cell [i, i+1]; f is monotone there unless
    # the cell holds a zero of psi'
    lo = min(f[i], f[i + 1])
    return 0.99 * lo if crit[i] else lo * (1.0 - 1e-12)


@numba.njit(cache=True)
def _snap(tau, first, x, f, T, crit, s2a):
    """Bracket the solution of tail(p) = tau beyond grid index ``first - 1``.

    Returns (lo, hi, tail(lo), tail(hi), lower bound on f over the bracket);
    the bound lets callers skip the solve.
    """
    n = x.shape[0]
    if tau <= T[n - 1]:
        lo = x[n - 1]
        hi = lo + 1.0
        while _tail(hi, s2a) > tau:
            hi = lo + 2.0 * (hi - lo)
        return lo, hi, T[n - 1], _tail(hi, s2a), 0.0
    if tau > T[first]:
        if first == 0:
            lo = x[0] - 1.0
            while _tail(lo, s2a) < tau:
                lo = x[0] - 2.0 * (x[0] - lo)
            return lo, x[0], _tail(lo, s2a), T[0], 0.0
        return x[first - 1], x[first], T[first - 1], T[first], _cell_floor(f, crit, first - 1)
    lo_i, hi_i = first, n - 1
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if T[mid] >= tau:
            lo_i = mid
        else:
            hi_i = mid
    return x[lo_i], x[hi_i], T[lo_i], T[hi_i], _cell_floor(f, crit, lo_i)


@numba.njit(cache=True)
def _better(total, pts, k, best, best_pts):
    if total < best:
        return True
    if total > best or k > best_pts[0]:
        return False
    if k < best_pts[0]:
        return True
    for i in range(k):
        if pts[i] != best_pts[1 + i]:
            return pts[i] < best_pts[1 + i]
    return False


@numba.njit(cache=True)
def _upper_index(T, last, need):
    # largest index > last with T > need (T decreasing), or last if none
    lo_i, hi_i = last, T.shape[0]
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if T[mid] > need:
            lo_i = mid
        else:
            hi_i = mid
    return lo_i


@numba.njit(cache=True)
def _run_kernel(m, x, f, T, g, crit, s2a, v, norm, band, kmin, kmax, lo_lim, hi_lim, best_init):
    """Depth-first search over free-point tuples with an explicit stack.

    Node depth ``j`` holds ``j`` free grid points; every node is completed by
    snapping one more point, giving a ``j + 1`` point boundary.  Children of
    a node must keep the free points' ``|psi'|`` spread within ``band``, keep
    the partial perimeter below the best so far, and lie left of the
    node's own snapped point (otherwise the mass cannot come back to ``m``).
    """
    n = x.shape[0]
    order = np.argsort(g, kind="mergesort")
    gs = g[order]
    best = best_init
    best_pts = np.full(kmax + 1, np.nan)
    best_pts[0] = kmax + 1
    pts = np.zeros(kmax)

    idx = np.zeros(kmax + 1, dtype=np.int64)
    F = np.zeros(kmax + 1)
    S = np.zeros(kmax + 1)
    gmin = np.zeros(kmax + 1)
    gmax = np.zeros(kmax + 1)
    cur = np.zeros(kmax + 1, dtype=np.int64)
    end = np.zeros(kmax + 1, dtype=np.int64)
    by_index = np.zeros(kmax + 1, dtype=np.bool_)
    qmax = np.zeros(kmax + 1, dtype=np.int64)

    j = 0
    while True:
        # complete node j with a snapped point; when that is impossible no
        # extension of the node can reach mass m either
        k = j + 1
        tau = (m - S[j]) if j % 2 == 0 else (S[j] - m)
        upper = T[idx[j - 1]] if j > 0 else 1.0
        feasible = 0.0 < tau < upper
        if feasible and k >= kmin:
            first = idx[j - 1] + 1 if j > 0 else 0
            lo, hi, t_lo, t_hi, fbound = _snap(tau, first, x, f, T, crit, s2a)
            if F[j] + fbound < best:
                p = _invert_tail(tau, lo, hi, t_lo, t_hi, s2a, v, norm)
                if lo_lim < p < hi_lim and (j == 0 or p > x[idx[j - 1]]):
                    total = F[j] + _dens(p, v, norm)
                    for i in range(j):
                        pts[i] = x[idx[i]]
                    pts[j] = p
                    if _better(total, pts, k, best, best_pts):
                        best = total
                        best_pts[0] = k
                        for i in range(k):
                            best_pts[1 + i] = pts[i]
        # set up the children of node j
        if k < kmax and feasible:
            if j == 0:
                by_index[0] = True
                cur[0] = 0
                end[0] = n
                qmax[0] = n - 1
            else:
                last = idx[j - 1]
                q = _upper_index(T, last, tau)
                w_lo = np.searchsorted(gs, gmax[j] - band, side="left")
                w_hi = np.searchsorted(gs, gmin[j] + band, side="right")
                qmax[j] = q
                if q - last <= w_hi - w_lo:
                    by_index[j] = True
                    cur[j] = last + 1
                    end[j] = q + 1
                else:
                    by_index[j] = False
                    cur[j] = w_lo
                    end[j] = w_hi
            level = j
        else:
            level = j - 1
        # advance to the next child, backtracking as needed
        found = False
        while level >= 0 and not found:
            while cur[level] < end[level]:
                r = cur[level]
                cur[level] += 1
                i = r if by_index[level] else order[r]
                if level > 0:
                    if i <= idx[level - 1] or i > qmax[level]:
                        continue
                    if g[i] < gmax[level] - band or g[i] > gmin[level] + band:
                        continue
                elif not (lo_lim < x[i]):
                    continue
                if not (x[i] < hi_lim) or F[level] + f[i] >= best:
                    continue
                idx[level] = i
                F[level + 1] = F[level] + f[i]
                S[level + 1] = S[level] + (T[i] if level % 2 == 0 else -T[i])
                if level == 0:
                    gmin[1] = g[i]
                    gmax[1] = g[i]
                else:
                    gmin[level + 1] = min(gmin[level], g[i])
                    gmax[level + 1] = max(gmax[level], g[i])
                j = level + 1
                found = True
                break
            if not found:
                level -= 1
        if not found:
            break
    return best, best_pts


# -- driver ------------------------------------------------------------------


def _grid_data(d: DoubleGaussianDensity, cfg: OracleConfig):
    x = cfg.grid(d)
    dpsi = d.psi_prime(x)
    sg = np.sign(dpsi)
    crit = (sg[:-1] * sg[1:] <= 0.0)
    return x, d.pdf(x), d.tail_mass(x), np.abs(dpsi), crit


def _config_from_points(
    d: DoubleGaussianDensity, points, starts_inside: bool
) -> BoundaryConfiguration:
    edges = [-math.inf] + list(points) + [math.inf] if starts_inside else list(points) + [math.inf]
    region = list(zip(edges[0::2], edges[1::2]))
    return BoundaryConfiguration.from_region(d, region)


def _search(
    d: DoubleGaussianDensity,
    A: float,
    cfg: OracleConfig,
    *,
    k_min: int,
    k_max: int,
    window: tuple[float, float],
    best_init: float,
    exhaustive: bool,
):
    data = _grid_data(d, cfg)
    results = []
    for m, starts_inside in ((A, False), (1.0 - A, True)):
        if exhaustive:
            total, pts = _exhaustive(d, m, data, k_min, k_max, window, best_init)
        else:
            x, f, T, g, crit = data
            total, row = _run_kernel(
                m, x, f, T, g, crit, d.a * math.sqrt(2.0), d.variance,
                1.0 / (2.0 * d.a * math.sqrt(2.0 * math.pi)), cfg.band,
                k_min, k_max, window[0], window[1], best_init,
            )
            pts = tuple(row[1 : 1 + int(row[0])]) if math.isfinite(total) else ()
        if pts:
            results.append((total, len(pts), pts, starts_inside))
    if not results:
        return None
    total, _, pts, starts_inside = min(results, key=lambda r: (r[0], r[1], r[2]))
    if starts_inside and len(pts) % 2 == 1:
        # report the mirror image, which has the same mass and perimeter and
        # contains only the right-infinite end (e.g. [b, inf) rather than (-inf, -b])
        return _config_from_points(d, tuple(-p for p in reversed(pts)), False)
    return _config_from_points(d, pts, starts_inside)


def brute_force_minimum(
    d: DoubleGaussianDensity,
    A: float,
    cfg: OracleConfig = OracleConfig(),
    *,
    exhaustive: bool = False,
) -> BoundaryConfiguration:
    """Cheapest boundary of mass ``A`` with at most ``k_max`` points.

    The ray perimeter seeds the pruning bound, so the answer is the ray
    unless something strictly cheaper exists in the search space.
    """
    check_mass(A, open_half=True)
    if exhaustive and cfg.grid_points > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive mode needs grid_points <= {EXHAUSTIVE_MAX_N}")
    ray = ray_for_mass(d, A)
    found = _search(
        d, A, cfg, k_min=1, k_max=cfg.max_boundary_points,
        window=(-math.inf, math.inf), best_init=ray.perimeter * (1.0 + 1e-12), exhaustive=exhaustive,
    )
    if found is None:
        raise NoFeasibleConfiguration(f"no configuration of mass {A} found")
    if abs(found.mass - A) > cfg.mass_tolerance:
        raise NoFeasibleConfiguration(
            f"best configuration has mass {found.mass}, off target {A} by more than {cfg.mass_tolerance}"
        )
    return found


def best_with_exact_k(
    d: DoubleGaussianDensity,
    A: float,
    k: int,
    cfg: OracleConfig = OracleConfig(),
    *,
    window: tuple[float, float] = (-math.inf, math.inf),
    exhaustive: bool = False,
    band: float | None = None,
) -> BoundaryConfiguration | None:
    """Cheapest boundary with exactly ``k`` points, all inside ``window``.

    No ray bound is used for pruning.  ``None`` when nothing fits.
    """
    check_mass(A, open_half=True)
    if band is not None:
        cfg = OracleConfig(cfg.domain_halfwidth, cfg.grid_points, max(k, 1), cfg.mass_tolerance, band)
    return _search(d, A, cfg, k_min=k, k_max=k, window=window, best_init=math.inf, exhaustive=exhaustive)


def best_inside_inflection(d: DoubleGaussianDensity, A: float, cfg: OracleConfig = OracleConfig()):
    """Cheapest two-point boundary with both points in ``(-c, c)``."""
    c = inflection_point(d)
    return best_with_exact_k(d, A, 2, cfg, window=(-c, c), band=math.inf)


# -- exhaustive reference ----------------------------------------------------


def _invert_tail_vec(d: DoubleGaussianDensity, tau, x, T, lo) -> np.ndarray:
    # bracket each target between grid nodes, then safeguarded Newton
    n = len(x)
    pos = n - np.searchsorted(T[::-1], tau, side="left")
    hi = np.where(pos < n, x[np.minimum(pos, n - 1)], np.inf)
    left = np.where(pos > 0, x[np.maximum(pos - 1, 0)], -np.inf)
    lo = np.maximum(lo, left)
    far = x[-1] + 1.0
    while np.any(np.isinf(hi)) and not np.all(d.tail_mass(far) < tau[np.isinf(hi)]):
        far = x[-1] + 2.0 * (far - x[-1])
    hi = np.where(np.isinf(hi), far, hi)
    near = x[0] - 1.0
    while np.any(np.isinf(lo)) and not np.all(d.tail_mass(near) > tau[np.isinf(lo)]):
        near = x[0] - 2.0 * (x[0] - near)
    lo = np.where(np.isinf(lo), near, lo)
    p = 0.5 * (lo + hi)
    for _ in range(200):
        r = d.tail_mass(p) - tau
        lo = np.where(r > 0.0, p, lo)
        hi = np.where(r > 0.0, hi, p)
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = p + r / d.pdf(p)
        nxt = np.where((nxt > lo) & (nxt < hi), nxt, 0.5 * (lo + hi))
        done = np.abs(nxt - p) <= 1e-15 * np.maximum(1.0, np.abs(p))
        p = nxt
        if np.all(done):
            break
    return p


def _combos(first: int, n: int, size: int) -> np.ndarray:
    """All increasing index tuples of length ``size`` starting with ``first``."""
    if size == 1:
        return np.array([[first]], dtype=np.int64)
    rest = np.arange(first + 1, n)
    if size == 2:
        return np.column_stack([np.full(len(rest), first), rest])
    if size == 3:
        i, j = np.triu_indices(len(rest), k=1)
        return np.column_stack([np.full(len(i), first), rest[i], rest[j]])
    tails = np.array(list(combinations(rest, size - 1)), dtype=np.int64).reshape(-1, size - 1)
    return np.column_stack([np.full(len(tails), first), tails])


def _exhaustive(d, m, data, k_min, k_max, window, best_init):
    x, f, T, _, _ = data
    n = len(x)
    best_total, best_pts = best_init, ()
    for k in range(k_min, k_max + 1):
        j = k - 1
        signs = np.array([1.0 if i % 2 == 0 else -1.0 for i in range(j)])
        chunks = [np.zeros((1, 0), dtype=np.int64)] if j == 0 else (_combos(i0, n, j) for i0 in range(n))
        for combo in chunks:
            if combo.shape[0] == 0:
                continue
            S = (T[combo] * signs).sum(axis=1)
            F = f[combo].sum(axis=1)
            tau = (m - S) if j % 2 == 0 else (S - m)
            if j:
                upper, lo = T[combo[:, -1]], x[combo[:, -1]]
                inside = (x[combo[:, 0]] > window[0]) & (x[combo[:, -1]] < window[1])
            else:
                upper, lo, inside = np.ones(1), np.full(1, -np.inf), np.ones(1, dtype=bool)
            ok = (tau > 0.0) & (tau < upper) & inside & (F < best_total)
            if not ok.any():
                continue
            combo, tau, F, lo = combo[ok], tau[ok], F[ok], lo[ok]
            p = _invert_tail_vec(d, tau, x, T, lo)
            keep = (p > window[0]) & (p < window[1]) & (p > lo)
            if not keep.any():
                continue
            total = F[keep] + d.pdf(p[keep])
            i = int(np.argmin(total))
            if total[i] < best_total:
                best_total = float(total[i])
                best_pts = tuple(float(v) for v in x[combo[keep][i]]) + (float(p[keep][i]),)
    return best_total, best_pts


# -- tables ------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileRow:
    a2: float
    A: float
    ray_point: float
    ray_perimeter: float
    oracle: BoundaryConfiguration

    @property
    def gap(self) -> float:
        return self.oracle.perimeter - self.ray_perimeter


def profile_table(d: DoubleGaussianDensity, masses, cfg: OracleConfig = OracleConfig()) -> list[ProfileRow]:
    """Ray against oracle for each mass."""
    rows = []
    for A in masses:
        check_mass(A, open_half=True)
        ray = ray_for_mass(d, A)
        rows.append(ProfileRow(d.variance, float(A), ray.points[0], ray.perimeter, brute_force_minimum(d, A, cfg)))
    return rows


def profile_csv(rows, k_max: int) -> str:
    """CSV with columns a2, A, k, p1..p<k_max>, mass, perimeter, ray_perimeter, gap."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a2", "A", "k"] + [f"p{i + 1}" for i in range(k_max)] + ["mass", "perimeter", "ray_perimeter", "gap"])
    for r in rows:
        pts = list(r.oracle.points)
        cells = [format(p, ".17g") for p in pts] + [""] * (k_max - len(pts))
        w.writerow(
            [format(r.a2, ".17g"), format(r.A, ".17g"), len(pts)]
            + cells
            + [format(v, ".17g") for v in (r.oracle.mass, r.oracle.perimeter, r.ray_perimeter, r.gap)]
        )
    return buf.getvalue()
