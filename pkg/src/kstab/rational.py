"""Exact rational helpers: parsing, serialization and small dense linear algebra."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence


class SingularSystemError(ArithmeticError):
    """Raised when an exact linear system has no unique solution."""


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions, floats and ``"p/q"`` strings to a Fraction.

    Floats are converted exactly (binary expansion), never rounded.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational string")
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def fmt(q) -> str:
    """Serialize a rational as ``"p/q"`` (``q > 0``, reduced; ``"p"`` never used)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def fmt_float(x) -> float:
    """Round to 12 significant digits for report output."""
    return float(f"{float(x):.12g}")


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def bilinear(form: Sequence[Sequence], u: Sequence, v: Sequence):
    total = Fraction(0)
    for i, ui in enumerate(u):
        if ui == 0:
            continue
        row = form[i]
        total += ui * sum((row[j] * vj for j, vj in enumerate(v) if vj != 0), Fraction(0))
    return total


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list:
    """Solve ``matrix @ x = rhs`` exactly by Gauss-Jordan elimination.

    Works for any field element type supporting exact division (Fraction, int
    promoted to Fraction). Raises SingularSystemError if the matrix is singular.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("solve expects a square system")
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularSystemError(f"singular matrix (column {col})")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        prow = [x / p for x in aug[col]]
        aug[col] = prow
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], prow)]
    return [aug[r][n] for r in range(n)]


def is_negative_definite(matrix: Sequence[Sequence]) -> bool:
    """Exact test via Gaussian elimination of ``-matrix`` (all pivots > 0)."""
    n = len(matrix)
    work = [[-Fraction(x) for x in row] for row in matrix]
    for k in range(n):
        p = work[k][k]
        if p <= 0:
            return False
        for i in range(k + 1, n):
            if work[i][k] != 0:
                f = work[i][k] / p
                work[i] = [a - f * b for a, b in zip(work[i], work[k])]
    return True


def is_symmetric(matrix: Sequence[Sequence]) -> bool:
    n = len(matrix)
    return all(matrix[i][j] == matrix[j][i] for i in range(n) for j in range(i + 1, n))


def as_fractions(values: Iterable) -> tuple:
    return tuple(to_fraction(v) for v in values)
