"""PL functions from vertical divisors, their psh envelopes and Monge-Ampere measures.

On a surface model the envelope is read off the Zariski decomposition of
``A + D``: the positive part is nef on the model, so it is itself a psh
competitor and the Lelong-number bound is attained at every vertex,

    P_A(f_D)(v_i) = f_D(v_i) - sigma_i / b_i.

Everything is exact. Classes are first translated by a multiple of the
fiber so that ``D >= X_0``; results are translated back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lattice import ZariskiResult, intersect, zariski
from .model import SncModel, divisorial_point, vertical_lattice
from .rational import fmt, to_fraction

__all__ = [
    "EnvelopeResult",
    "NAMeasure",
    "VerticalDivisor",
    "envelope",
    "ma_envelope",
    "mass_sum_check",
    "normalize_ge_fiber",
    "orthogonality_defect",
]


@dataclass(frozen=True)
class VerticalDivisor:
    model: SncModel
    coeffs: tuple

    def __init__(self, model: SncModel, coeffs: Sequence):
        coeffs = tuple(to_fraction(a) for a in coeffs)
        if len(coeffs) != len(model.components):
            raise ValueError(f"expected {len(model.components)} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "coeffs", coeffs)

    def values(self) -> tuple:
        """Vertex values ``f_D(v_i) = a_i / b_i``."""
        return tuple(a / b for a, b in zip(self.coeffs, self.model.multiplicities))

    def shifted(self, c) -> "VerticalDivisor":
        c = to_fraction(c)
        return VerticalDivisor(self.model, [a + c * b for a, b in zip(self.coeffs, self.model.multiplicities)])

    @classmethod
    def from_values(cls, model: SncModel, values: Sequence) -> "VerticalDivisor":
        """The divisor ``sum t_i b_i E_i`` whose PL function takes values ``t_i``."""
        return cls(model, [to_fraction(t) * b for t, b in zip(values, model.multiplicities)])


@dataclass(frozen=True)
class EnvelopeResult:
    divisor: VerticalDivisor
    shift: int
    values: tuple  # P_A(f_D)(v_i), de-shifted
    sigma: tuple  # negative-part coefficient on each component
    positive: object  # DivClass of the positive part of A + D'
    zariski: ZariskiResult

    @property
    def sup(self) -> Fraction:
        """Value at the trivial valuation, which is the sup of a psh function."""
        model = self.divisor.model
        return self.values[[c.is_strict for c in model.components].index(True)]


@dataclass(frozen=True)
class NAMeasure:
    """Finitely many atoms at model vertices with exact masses summing to 1."""

    model: SncModel
    masses: tuple

    def __post_init__(self):
        masses = tuple(to_fraction(m) for m in self.masses)
        if any(m < 0 for m in masses):
            raise ValueError("negative mass")
        object.__setattr__(self, "masses", masses)

    @property
    def total(self) -> Fraction:
        return sum(self.masses, Fraction(0))

    def atoms(self):
        return [(divisorial_point(self.model, i), m) for i, m in enumerate(self.masses) if m != 0]

    def entropy(self) -> Fraction:
        """``Ent = sum mass_i * (A_{X x P^1}(v_i) - 1)``."""
        return sum(
            (m * (ld - 1) for m, ld in zip(self.masses, self.model.log_discrepancies())),
            Fraction(0),
        )

    def to_json(self) -> dict:
        return {
            "atoms": [
                {"component": c.label, "mass": fmt(m)}
                for c, m in zip(self.model.components, self.masses)
                if m != 0
            ]
        }


def normalize_ge_fiber(D: VerticalDivisor) -> tuple:
    """Smallest integer ``c`` with ``D + c F >= F``; returns ``(D + cF, c)``."""
    c = max(math.ceil(1 - a / b) for a, b in zip(D.coeffs, D.model.multiplicities))
    return D.shifted(c), c


def _positive_class(D: VerticalDivisor):
    Dn, c = normalize_ge_fiber(D)
    model = D.model
    L = vertical_lattice(model, check=False)
    u = model.A_class() + model.vertical(Dn.coeffs)
    z = zariski(L, u)
    if not z.is_pseff or not z.is_big:
        raise ArithmeticError(f"A + D' is not big after normalization ({z.diagnostic})")
    return L, z, c


def envelope(D: VerticalDivisor) -> EnvelopeResult:
    model = D.model
    L, z, c = _positive_class(D)
    ncomp = len(model.components)
    sigma = [Fraction(0)] * ncomp
    for k, s in z.negative:
        i = k
        if not 0 <= i < ncomp:
            raise ArithmeticError(f"negative part charges non-vertical curve {L.test_curves[k][0]}")
        sigma[i] = s
    values = tuple(a / b - s / b for a, b, s in zip(D.coeffs, model.multiplicities, sigma))
    return EnvelopeResult(D, c, values, tuple(sigma), z.positive, z)


def _restricted(model: SncModel, env: EnvelopeResult) -> tuple:
    L = vertical_lattice(model, check=False)
    return tuple(
        intersect(L, env.positive, L.curve(model.curve_index(i))) for i in range(len(model.components))
    )


def ma_envelope(D: VerticalDivisor, env: EnvelopeResult | None = None) -> NAMeasure:
    """``MA_A(P_A(f_D)) = V^-1 sum_i b_i <(A+D)>_{X|E_i} delta_{v_i}``."""
    env = env or envelope(D)
    model = D.model
    rv = _restricted(model, env)
    return NAMeasure(model, tuple(b * r / model.V for b, r in zip(model.multiplicities, rv)))


def orthogonality_defect(D: VerticalDivisor) -> Fraction:
    """``sum_i (f_D - P_A f_D)(v_i) * mass_i``; identically 0."""
    env = envelope(D)
    mu = ma_envelope(D, env)
    return sum(
        ((f - p) * m for f, p, m in zip(D.values(), env.values, mu.masses)),
        Fraction(0),
    )


def mass_sum_check(D: VerticalDivisor) -> Fraction:
    """``sum_i b_i <(A+D)>_{X|E_i} - V``; identically 0."""
    env = envelope(D)
    rv = _restricted(D.model, env)
    return sum((b * r for b, r in zip(D.model.multiplicities, rv)), Fraction(0)) - D.model.V
