"""Adaptive Simpson quadrature over a list of breakpoints.

Simpson's rule is exact on quadratics, and surface volumes are quadratic on
each Zariski chamber, so with walls among the breakpoints the recursion stops
at the first level on every piece.
"""

from __future__ import annotations

from typing import Callable, Sequence


def _simpson(fa, fm, fb, a, b):
    return (b - a) * (fa + 4.0 * fm + fb) / 6.0


def _adapt(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(fa, flm, fm, a, m)
    right = _simpson(fm, frm, fb, m, b)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0, abs(err) / 15.0
    l_val, l_err = _adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
    r_val, r_err = _adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    return l_val + r_val, l_err + r_err


def integrate(
    f: Callable[[float], float],
    breakpoints: Sequence[float],
    tol: float = 1e-9,
    max_depth: int = 30,
) -> tuple:
    """Integrate ``f`` over ``[min(breakpoints), max(breakpoints)]``.

    Returns ``(value, error_estimate)``. The tolerance is split across the
    pieces proportionally to their length.
    """
    pts = sorted(set(float(p) for p in breakpoints))
    if len(pts) < 2:
        return 0.0, 0.0
    span = pts[-1] - pts[0]
    total, err = 0.0, 0.0
    for a, b in zip(pts, pts[1:]):
        if b <= a:
            continue
        fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
        whole = _simpson(fa, fm, fb, a, b)
        piece_tol = tol * (b - a) / span
        v, e = _adapt(f, a, b, fa, fm, fb, whole, piece_tol, max_depth)
        total += v
        err += e
    return total, err
