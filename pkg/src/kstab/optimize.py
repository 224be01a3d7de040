"""Derivative-free maximization of concave, piecewise-smooth objectives.

Coordinate ascent with golden-section line searches, plus an extrapolation
step along each sweep's net displacement (cheap pattern move that speeds up
the zig-zag along valleys).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
BRACKET_LIMIT = 1e9


class ConvergenceError(ArithmeticError):
    """Maximization did not converge; carries the best point found."""

    def __init__(self, msg, x=None, value=None):
        super().__init__(msg)
        self.x = x
        self.value = value


class UnboundedError(ArithmeticError):
    """The objective increases without bound along a search line."""


@dataclass
class OptResult:
    x: list
    value: float
    sweeps: int
    evaluations: int


def golden_max(fun: Callable[[float], float], a: float, c: float, tol: float):
    """Maximize a unimodal ``fun`` on ``[a, c]`` to abscissa tolerance ``tol``."""
    x1 = c - INVPHI * (c - a)
    x2 = a + INVPHI * (c - a)
    f1, f2 = fun(x1), fun(x2)
    while abs(c - a) > tol:
        if f1 >= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - INVPHI * (c - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INVPHI * (c - a)
            f2 = fun(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def bracket_max(fun, x0: float, f0: float, step: float):
    """Find ``a < c`` around a maximizer of a concave ``fun`` starting at ``x0``."""
    fp = fun(x0 + step)
    if fp > f0:
        lo, x, fx = x0, x0 + step, fp
        direction = 1.0
    else:
        fm = fun(x0 - step)
        if fm > f0:
            lo, x, fx = x0, x0 - step, fm
            direction = -1.0
        else:
            return x0 - step, x0 + step
    while True:
        step *= 2.0
        if step > BRACKET_LIMIT:
            raise UnboundedError("objective keeps increasing along a coordinate")
        nxt = x + direction * step
        fn = fun(nxt)
        if fn <= fx:
            return (lo, nxt) if direction > 0 else (nxt, lo)
        lo, x, fx = x, nxt, fn


def coordinate_ascent(
    fun: Callable[[Sequence[float]], float],
    x0: Sequence[float],
    free: Sequence[int],
    tol: float = 1e-7,
    max_iters: int = 200,
    callback: Callable[[list], bool] | None = None,
) -> OptResult:
    """Maximize ``fun`` over the coordinates in ``free``.

    Stops once a full sweep moves every coordinate by less than ``tol``.
    ``callback(x)`` runs after each sweep; returning True stops early.
    """
    x = [float(v) for v in x0]
    evals = 0

    def f_at(vec):
        nonlocal evals
        evals += 1
        return fun(vec)

    best = f_at(x)
    if not free:
        return OptResult(x, best, 0, evals)
    line_tol = tol / 4.0
    step = 0.5
    for sweep in range(1, max_iters + 1):
        start = list(x)
        for i in free:
            def along(v, i=i):
                y = list(x)
                y[i] = v
                return f_at(y)

            a, c = bracket_max(along, x[i], best, step)
            xi, fi = golden_max(along, a, c, line_tol)
            if fi >= best:
                x[i], best = xi, fi
        d = [xn - xs for xn, xs in zip(x, start)]
        move = max(abs(v) for v in d)
        if move > tol:
            base = list(x)

            def along_d(s):
                return f_at([b + s * di for b, di in zip(base, d)])

            a, c = bracket_max(along_d, 0.0, best, 0.5)
            s, fs = golden_max(along_d, a, c, line_tol / max(move, 1e-300))
            if fs > best:
                x, best = [b + s * di for b, di in zip(base, d)], fs
        step = max(min(0.5, 4.0 * move), 4.0 * tol)
        if callback is not None and callback(list(x)):
            return OptResult(x, best, sweep, evals)
        if move <= tol:
            return OptResult(x, best, sweep, evals)
    raise ConvergenceError(f"no convergence in {max_iters} sweeps", x=x, value=best)
