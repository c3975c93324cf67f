"""Double-Gaussian density in the plane and its straight-line boundaries.

The density is centred at (+-1, 0) with common variance ``a**2``:

    f(x, y) = exp(-y**2 / 2a**2) (exp(-(x-1)**2 / 2a**2) + exp(-(x+1)**2 / 2a**2)) / (4 pi a**2)

It factors as the line density in ``x`` times a centred Gaussian in ``y``,
so vertical half-planes reduce to rays on the double-Gaussian line and
horizontal half-planes to rays on a single Gaussian.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .density import DoubleGaussianDensity, check_mass, gaussian_pdf, normal_sf, tail_quantile
from .quadrature import adaptive_simpson_2d
from .report import VerificationReport
from .stationary import ROOT_XTOL

QUAD_TOL = 1e-9


@dataclass(frozen=True)
class PlaneDensity:
    variance: float

    def __post_init__(self) -> None:
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise ValueError(f"variance must be positive and finite, got {self.variance!r}")

    @property
    def a(self) -> float:
        return math.sqrt(self.variance)

    @property
    def line(self) -> DoubleGaussianDensity:
        """The x-marginal: the double Gaussian on the line."""
        return DoubleGaussianDensity(self.variance)

    def pdf(self, x, y):
        v = self.variance
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (
            np.exp(-(y * y) / (2 * v))
            * (np.exp(-((x - 1.0) ** 2) / (2 * v)) + np.exp(-((x + 1.0) ** 2) / (2 * v)))
            / (4.0 * math.pi * v)
        )

    def pdf_scalar(self, x: float, y: float) -> float:
        """Same formula as ``pdf`` with ``math`` scalars; the quadrature integrand."""
        v = self.variance
        return (
            math.exp(-(y * y) / (2 * v))
            * (math.exp(-((x - 1.0) ** 2) / (2 * v)) + math.exp(-((x + 1.0) ** 2) / (2 * v)))
            / (4.0 * math.pi * v)
        )

    def grad_psi(self, x: float, y: float) -> tuple[float, float]:
        """Gradient of ``log f``: ``((-x + tanh(x/a^2)) / a^2, -y / a^2)``."""
        v = self.variance
        return (-x + math.tanh(x / v)) / v, -y / v

    def box(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Integration box outside which the mass is below ``1e-20``."""
        return (-(1.0 + 10.0 * self.a), 1.0 + 10.0 * self.a), (-10.0 * self.a, 10.0 * self.a)


class LineKind(str, enum.Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"
    SLOPED = "sloped"


@dataclass(frozen=True)
class PlaneLine:
    """``x = b`` (vertical), ``y = b`` (horizontal) or ``y = c x + b`` (sloped).

    Unit normals: ``(1, 0)`` for vertical lines and ``(-c, 1) / sqrt(1 + c^2)``
    otherwise, which is ``(0, 1)`` for horizontal ones.
    """

    kind: LineKind
    offset: float
    slope: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is LineKind.SLOPED:
            if not math.isfinite(self.slope) or self.slope == 0.0:
                raise ValueError(f"sloped line needs a finite nonzero slope, got {self.slope!r}")
        elif self.slope != 0.0:
            raise ValueError(f"{self.kind.value} line takes no slope")

    @classmethod
    def vertical(cls, b: float) -> "PlaneLine":
        return cls(LineKind.VERTICAL, float(b))

    @classmethod
    def horizontal(cls, b: float) -> "PlaneLine":
        return cls(LineKind.HORIZONTAL, float(b))

    @classmethod
    def sloped(cls, c: float, b: float) -> "PlaneLine":
        return cls(LineKind.SLOPED, float(b), float(c))

    def point(self, t: float) -> tuple[float, float]:
        """Point of the line with parameter ``t`` (y for vertical lines, x otherwise)."""
        if self.kind is LineKind.VERTICAL:
            return self.offset, t
        return t, self.slope * t + self.offset

    def normal(self) -> tuple[float, float]:
        if self.kind is LineKind.VERTICAL:
            return 1.0, 0.0
        r = math.hypot(1.0, self.slope)
        return -self.slope / r, 1.0 / r


def line_generalized_curvature(p: PlaneDensity, l: PlaneLine, at_x: float) -> float:
    """``-grad(psi) . n`` at the point of ``l`` with parameter ``at_x``.

    Straight lines have zero Euclidean curvature, so only the density term
    remains.
    """
    gx, gy = p.grad_psi(*l.point(at_x))
    nx, ny = l.normal()
    return -(gx * nx + gy * ny)


def sloped_curvature_difference(p: PlaneDensity, c: float) -> float:
    """Closed form of ``kappa(1, c + b) - kappa(0, b)`` on ``y = c x + b``.

    ``kappa(x, c x + b) = (b + c tanh(x/a^2)) / (a^2 sqrt(1 + c^2))``.
    """
    v = p.variance
    return c * math.tanh(1.0 / v) / (v * math.sqrt(1.0 + c * c))


def stationary_lines_check(
    p: PlaneDensity, n_lines: int = 20, n_samples: int = 100, seed: int = 0, tol: float = 1e-12
) -> VerificationReport:
    """Sloped lines have non-constant curvature; horizontal and vertical do not.

    For ``n_lines`` random slopes and intercepts, the curvature change from
    ``x = 0`` to ``x = 1`` must match its closed form and be nonzero.
    Horizontal and vertical lines must have constant curvature ``b/a^2`` and
    ``(b - tanh(b/a^2))/a^2`` along ``n_samples`` points each.
    """
    rng = np.random.default_rng(seed)
    v = p.variance
    slopes = rng.uniform(0.2, 3.0, n_lines) * rng.choice([-1.0, 1.0], n_lines)
    intercepts = rng.uniform(-2.0, 2.0, n_lines)
    worst_sloped, min_abs_diff = 0.0, math.inf
    for c, b in zip(slopes, intercepts):
        line = PlaneLine.sloped(c, b)
        diff = line_generalized_curvature(p, line, 1.0) - line_generalized_curvature(p, line, 0.0)
        expected = sloped_curvature_difference(p, c)
        worst_sloped = max(worst_sloped, abs(diff - expected))
        min_abs_diff = min(min_abs_diff, abs(diff))

    ts = np.linspace(-3.0, 3.0, n_samples)
    worst_h = worst_v = 0.0
    for b in np.linspace(-2.0, 2.0, 9):
        h = PlaneLine.horizontal(b)
        vert = PlaneLine.vertical(b)
        kh = np.array([line_generalized_curvature(p, h, t) for t in ts])
        kv = np.array([line_generalized_curvature(p, vert, t) for t in ts])
        worst_h = max(worst_h, float(np.abs(kh - b / v).max()))
        worst_v = max(worst_v, float(np.abs(kv - (b - math.tanh(b / v)) / v).max()))

    passed = worst_sloped <= tol and min_abs_diff > 0.0 and worst_h <= tol and worst_v <= tol
    return VerificationReport(
        check="stationary_lines",
        parameters={"a2": v, "n_lines": n_lines, "n_samples": n_samples, "seed": seed},
        passed=passed,
        witnesses={
            "sloped_difference_max_error": worst_sloped,
            "sloped_min_abs_difference": min_abs_diff,
            "horizontal_max_deviation": worst_h,
            "vertical_max_deviation": worst_v,
            "horizontal_curvature_at_b1": 1.0 / v,
            "vertical_curvature_at_b1": (1.0 - math.tanh(1.0 / v)) / v,
        },
        tolerances={"curvature": tol},
        notes=[
            "constant curvature of the stationary lines is b/a^2 (horizontal) and "
            "(b - tanh(b/a^2))/a^2 (vertical); it vanishes only for special offsets"
        ],
    )


# -- half-planes ----------------------------------------------------------------


def vertical_halfplane(p: PlaneDensity, b: float) -> tuple[float, float]:
    """(mass, perimeter) of ``{x > b}``: the ray ``[b, inf)`` on the line."""
    d = p.line
    return float(d.tail_mass(b)), float(d.pdf(b))


def horizontal_halfplane(p: PlaneDensity, c: float) -> tuple[float, float]:
    """(mass, perimeter) of ``{y > c}``: the ray ``[c, inf)`` for ``N(0, a^2)``."""
    return float(normal_sf(c / p.a)), float(gaussian_pdf(c, 0.0, p.a))


def halfplane_mass_quadrature(p: PlaneDensity, kind: LineKind, offset: float, tol: float = QUAD_TOL) -> float:
    """Mass of ``{x > offset}`` or ``{y > offset}`` by 2-D adaptive Simpson."""
    (x0, x1), (y0, y1) = p.box()
    if kind is LineKind.VERTICAL:
        x0 = max(x0, offset)
        if x0 >= x1:
            return 0.0
    elif kind is LineKind.HORIZONTAL:
        y0 = max(y0, offset)
        if y0 >= y1:
            return 0.0
    else:
        raise ValueError("quadrature is only set up for vertical and horizontal half-planes")
    return adaptive_simpson_2d(p.pdf_scalar, (x0, x1), (y0, y1), tol)


def total_mass_quadrature(p: PlaneDensity, tol: float = QUAD_TOL) -> float:
    return adaptive_simpson_2d(p.pdf_scalar, *p.box(), tol)


@dataclass(frozen=True)
class LineComparison:
    a2: float
    A: float
    b_vertical: float
    c_horizontal: float
    perim_vertical: float
    perim_horizontal: float

    @property
    def margin(self) -> float:
        return self.perim_horizontal - self.perim_vertical

    def row(self) -> dict[str, float]:
        return {
            "a2": self.a2,
            "A": self.A,
            "b_vertical": self.b_vertical,
            "c_horizontal": self.c_horizontal,
            "perim_vertical": self.perim_vertical,
            "perim_horizontal": self.perim_horizontal,
            "margin": self.margin,
        }


def line_comparison(p: PlaneDensity, A: float) -> LineComparison:
    """Vertical and horizontal half-planes of mass ``A`` and their perimeters."""
    check_mass(A, open_half=True)
    b = tail_quantile(p.line, A, xtol=ROOT_XTOL)
    hi = 1.0
    while normal_sf(hi / p.a) > A:
        hi *= 2.0
    c = brentq(lambda y: float(normal_sf(y / p.a)) - A, 0.0, hi, xtol=ROOT_XTOL)
    return LineComparison(
        p.variance, float(A), b, c, vertical_halfplane(p, b)[1], horizontal_halfplane(p, c)[1]
    )


def compare_lines(p: PlaneDensity, A: float) -> VerificationReport:
    """Vertical half-planes beat horizontal ones at equal mass."""
    cmp = line_comparison(p, A)
    return VerificationReport(
        check="compare_lines",
        parameters={"a2": p.variance, "A": float(A)},
        passed=cmp.margin > 0.0,
        witnesses=cmp.row(),
    )


def split_rays_check(p: PlaneDensity, A: float, n: int = 201) -> VerificationReport:
    """Two rays on two copies of the half-mass Gaussian ``g(.; 0, a)/2``.

    Splitting total mass ``A`` as ``(m, A - m)`` costs ``I(m) + I(A - m)``
    with ``I(m)`` the perimeter of a ray of mass ``m`` on one copy.  The
    minimum over ``m`` must sit at a single ray (``m`` in ``{0, A}``) and
    beat the symmetric split.
    """
    check_mass(A, open_half=True)
    a = p.a

    def ray_cost(m: float) -> float:
        if m <= 0.0:
            return 0.0
        # mass m on a copy of total mass 1/2: tail probability 2m
        z = brentq(lambda s: float(normal_sf(s / a)) - 2.0 * m, -40.0 * a, 40.0 * a, xtol=ROOT_XTOL)
        return 0.5 * float(gaussian_pdf(z, 0.0, a))

    ms = np.linspace(0.0, A, n)
    costs = np.array([ray_cost(m) + ray_cost(A - m) for m in ms])
    i = int(np.argmin(costs))
    symmetric = ray_cost(0.5 * A) * 2.0
    single = ray_cost(A)
    return VerificationReport(
        check="split_rays",
        parameters={"a2": p.variance, "A": float(A), "n": n},
        passed=i in (0, n - 1) and single < symmetric,
        witnesses={
            "best_split": float(ms[i]),
            "best_cost": float(costs[i]),
            "single_ray_cost": single,
            "symmetric_cost": symmetric,
        },
    )
