"""Double-Gaussian density on the line: values, log-derivatives and masses.

The density is the equal-weight mixture of two Gaussians with common
variance ``a**2`` centred at +1 and -1, normalised to total mass 1::

    f(x) = (exp(-(x-1)**2 / 2a**2) + exp(-(x+1)**2 / 2a**2)) / (2 a sqrt(2 pi))

Masses are evaluated through the standard normal CDF, which is built on
``erfc`` so that tails keep full absolute precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

Interval = tuple[float, float]


def normal_cdf(z):
    """Standard normal CDF; exact 0/1 at -inf/+inf."""
    return 0.5 * erfc(-np.asarray(z, dtype=float) / SQRT2)


def normal_sf(z):
    """Standard normal survival function 1 - Phi(z)."""
    return 0.5 * erfc(np.asarray(z, dtype=float) / SQRT2)


def _std_interval(lo: float, hi: float) -> float:
    # Phi(hi) - Phi(lo), evaluated on the side that avoids cancellation
    if lo >= 0.0:
        return float(normal_sf(lo) - normal_sf(hi))
    if hi <= 0.0:
        return float(normal_cdf(hi) - normal_cdf(lo))
    return float(1.0 - normal_sf(hi) - normal_cdf(lo))


def gaussian_pdf(x, mean: float, std: float):
    """Mass-1 Gaussian density with the given mean and standard deviation."""
    z = (np.asarray(x, dtype=float) - mean) / std
    return np.exp(-0.5 * z * z) / (std * SQRT2PI)


@dataclass(frozen=True)
class DoubleGaussianDensity:
    """Mixture ``(g(x; 1, a) + g(x; -1, a)) / 2`` with ``variance = a**2``."""

    variance: float

    def __post_init__(self) -> None:
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise ValueError(f"variance must be positive and finite, got {self.variance!r}")

    @property
    def a(self) -> float:
        return math.sqrt(self.variance)

    # -- pointwise ---------------------------------------------------------

    def pdf(self, x):
        """Density value; works elementwise on arrays."""
        a, v = self.a, self.variance
        x = np.asarray(x, dtype=float)
        return (np.exp(-((x - 1.0) ** 2) / (2 * v)) + np.exp(-((x + 1.0) ** 2) / (2 * v))) / (
            2.0 * a * SQRT2PI
        )

    def component_pdf(self, x, center: float):
        """Half-weight component ``g(x; center, a) / 2``; the two components sum to ``pdf``."""
        return 0.5 * gaussian_pdf(x, center, self.a)

    def log_pdf(self, x):
        """psi = log f, computed without underflow far in the tails."""
        v = self.variance
        x = np.asarray(x, dtype=float)
        return (
            -math.log(2.0 * self.a * SQRT2PI)
            - (x * x + 1.0) / (2 * v)
            + np.logaddexp(x / v, -x / v)
        )

    def psi_derivs(self, x):
        """Return (psi', psi'', psi''') at ``x``.

        psi'   = (-x + tanh(x/a^2)) / a^2
        psi''  = (-a^2 + sech^2(x/a^2)) / a^4
        psi''' = -2 sech^2(x/a^2) tanh(x/a^2) / a^6
        """
        v = self.variance
        x = np.asarray(x, dtype=float)
        th = np.tanh(x / v)
        sech2 = 1.0 / np.cosh(x / v) ** 2
        d1 = (-x + th) / v
        d2 = (-v + sech2) / (v * v)
        d3 = -2.0 * sech2 * th / (v * v * v)
        return d1, d2, d3

    def psi_prime(self, x):
        x = np.asarray(x, dtype=float)
        return (-x + np.tanh(x / self.variance)) / self.variance

    def psi_second(self, x):
        v = self.variance
        x = np.asarray(x, dtype=float)
        return (-v + 1.0 / np.cosh(x / v) ** 2) / (v * v)

    # -- masses ------------------------------------------------------------

    def tail_mass(self, x):
        """Mass of ``[x, inf)``; elementwise."""
        a = self.a
        x = np.asarray(x, dtype=float)
        return 0.5 * (normal_sf((x - 1.0) / a) + normal_sf((x + 1.0) / a))

    def interval_mass(self, s: float, t: float) -> float:
        """Mass of ``[s, t]``; either end may be infinite."""
        if math.isnan(s) or math.isnan(t):
            raise ValueError("interval endpoints must not be NaN")
        if s > t:
            raise ValueError(f"interval endpoints out of order: {s} > {t}")
        a = self.a
        return 0.5 * _std_interval((s - 1.0) / a, (t - 1.0) / a) + 0.5 * _std_interval(
            (s + 1.0) / a, (t + 1.0) / a
        )

    def region_mass(self, region: Iterable[Interval]) -> float:
        """Mass of a finite union of pairwise disjoint intervals."""
        return sum(self.interval_mass(s, t) for s, t in check_region(region))


def tail_quantile(d: DoubleGaussianDensity, A: float, xtol: float = 1e-14) -> float:
    """Point ``b`` with ``d.tail_mass(b) == A`` (monotone root solve).

    ``A = 1/2`` returns exactly 0 by symmetry.
    """
    if not (0.0 < A < 1.0):
        raise ValueError(f"tail mass must lie strictly inside (0, 1), got {A!r}")
    if A == 0.5:
        return 0.0
    half = 1.0 + 8.0 * d.a
    while not (float(d.tail_mass(-half)) > A > float(d.tail_mass(half))):
        half *= 2.0
    return brentq(lambda x: float(d.tail_mass(x)) - A, -half, half, xtol=xtol)


def check_region(region: Iterable[Interval]) -> list[Interval]:
    """Validate a union of intervals and return it sorted.

    Intervals may share an endpoint (a null set) but must not overlap.
    """
    ivs = sorted((float(s), float(t)) for s, t in region)
    for s, t in ivs:
        if math.isnan(s) or math.isnan(t) or s > t:
            raise ValueError(f"malformed interval ({s}, {t})")
    for (_, t0), (s1, _) in zip(ivs, ivs[1:]):
        if s1 < t0:
            raise ValueError(f"overlapping intervals: ... {t0}) and ({s1} ...")
    return ivs


def scaled_density_mass(b: float, d: DoubleGaussianDensity, region: Sequence[Interval]) -> float:
    """Mass of ``b * region`` under the mixture with centres +-b and std ``a*b``.

    Scaling the whole picture by ``b`` leaves masses unchanged, so this equals
    ``d.region_mass(region)`` up to rounding.
    """
    if not b > 0.0:
        raise ValueError(f"scale factor must be positive, got {b!r}")
    std = d.a * b
    total = 0.0
    for s, t in check_region(region):
        bs, bt = b * s, b * t
        for center in (b, -b):
            total += 0.5 * _std_interval((bs - center) / std, (bt - center) / std)
    return total


def check_mass(value: float, *, open_half: bool = False) -> float:
    """Validate a weighted measure: in (0, 1), or (0, 1/2) with ``open_half``."""
    hi = 0.5 if open_half else 1.0
    if not (0.0 < value < hi):
        raise ValueError(f"mass must lie strictly inside (0, {hi:g}), got {value!r}")
    return float(value)
