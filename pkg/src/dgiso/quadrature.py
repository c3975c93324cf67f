"""Adaptive Simpson quadrature in one and two dimensions.

Used as an independent check on the CDF-based mass formulas, so it touches
nothing but point evaluations of the integrand.
"""

from __future__ import annotations

from collections.abc import Callable


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_depth: int = 60,
    min_depth: int = 4,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Iterative (explicit stack) so deep refinement cannot hit the recursion
    limit.  Each accepted panel gets a Richardson correction.  Panels are
    split unconditionally down to ``min_depth`` so a narrow peak between
    the first five nodes is not mistaken for zero.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_depth, min_depth)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = left + right - s
        if depth >= max_depth or (depth >= min_depth and abs(err) <= 15.0 * eps):
            total += left + right + err / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return total


def adaptive_simpson_2d(
    f: Callable[[float, float], float],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    tol: float = 1e-9,
) -> float:
    """Tensor-product adaptive Simpson over a rectangle.

    The inner y-integral is itself adaptive at each outer abscissa.  Its
    tolerance is ``tol`` divided by the x-width, so that inner errors summed
    over the outer integral stay at the ``tol`` level.
    """
    y0, y1 = y_range
    inner_tol = tol / max(1.0, abs(x_range[1] - x_range[0]))

    def inner(x: float) -> float:
        return adaptive_simpson(lambda y: f(x, y), y0, y1, inner_tol)

    return adaptive_simpson(inner, x_range[0], x_range[1], tol)
