"""Extended-precision re-evaluation for gaps below double resolution.

For small ``a`` the far Gaussian contributes terms like ``exp(-2/a**2)``,
which vanish against 1 in double precision.  The checks below are used
only when a double-precision gap is too small to trust its sign.
"""

from __future__ import annotations

import mpmath

DIGITS = 60


def _psi(v, x):
    return mpmath.log(mpmath.exp(-((x - 1) ** 2) / (2 * v)) + mpmath.exp(-((x + 1) ** 2) / (2 * v)))


def _psi_prime(v, x):
    return (-x + mpmath.tanh(x / v)) / v


def flank_slope_gap(variance: float, alpha: float) -> float:
    """``q'(beta) - p'(alpha)`` for the flank comparison at ``DIGITS`` digits.

    ``z`` is the positive zero of psi', ``p(x) = psi(z) - psi(z - x)``,
    ``q(x) = psi(z) - psi(z + x)`` and ``beta`` solves ``q(beta) = p(alpha)``.
    """
    with mpmath.workdps(DIGITS):
        v = mpmath.mpf(variance)
        al = mpmath.mpf(alpha)
        z = mpmath.findroot(lambda x: x - mpmath.tanh(x / v), mpmath.mpf(1))
        psi_z = _psi(v, z)
        target = psi_z - _psi(v, z - al)
        beta = mpmath.findroot(lambda x: psi_z - _psi(v, z + x) - target, al)
        return float(-_psi_prime(v, z + beta) - _psi_prime(v, z - al))


def ray_shift_gap(variance: float, A: float) -> float:
    """``t - s`` at ``DIGITS`` digits, where ``[s, inf)`` holds mass ``A`` of
    ``g(.; 1, a)/2`` and ``[t, inf)`` holds mass ``A`` of the double Gaussian."""
    with mpmath.workdps(DIGITS):
        v = mpmath.mpf(variance)
        scale = mpmath.sqrt(2 * v)
        m = mpmath.mpf(A)
        s = 1 + scale * mpmath.erfinv(1 - 4 * m)

        def excess(x):
            return (mpmath.erfc((x - 1) / scale) + mpmath.erfc((x + 1) / scale)) / 4 - m

        t = mpmath.findroot(excess, s)
        return float(t - s)
