"""DF, Mabuchi and J invariants of big test configurations on surface models,
and the non-Archimedean functionals of the corresponding envelopes.

The functionals are evaluated at ``P_A(f_D)``; the intersection invariants are
computed on the normalized class ``A + D'`` (they are translation invariant).
``report`` cross-checks ``M_A = M^NA / V`` and ``J_A = J^NA / V`` exactly.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

from .lattice import intersect
from .model import vertical_lattice
from .plfun import VerticalDivisor, envelope
from .rational import fmt, fmt_float

__all__ = [
    "IdentityViolation",
    "InvariantReport",
    "energy",
    "entropy_envelope",
    "report",
    "twisted_energy",
]

DIM = 1  # dimension of the base; models are surfaces


class IdentityViolation(AssertionError):
    """An exact identity failed; this is a bug, not an input problem."""


@dataclass(frozen=True)
class InvariantReport:
    DF: Fraction
    M_NA: Fraction
    J_NA: Fraction
    E_A: Fraction
    E_K: Fraction
    H_A: Fraction
    M_A: Fraction
    J_A: Fraction
    sbar: Fraction
    volume: Fraction
    shift: int

    def to_json(self) -> dict:
        out = {}
        for key, val in asdict(self).items():
            if isinstance(val, Fraction):
                out[key] = {"exact": fmt(val), "value": fmt_float(val)}
            else:
                out[key] = val
        return out


class _Pieces:
    """Shared intersection numbers of one envelope."""

    def __init__(self, D: VerticalDivisor):
        model = D.model
        self.model = model
        self.env = envelope(D)
        self.L = vertical_lattice(model, check=False)
        P = self.env.positive
        self.P = P
        self.c = self.env.shift
        self.vol = intersect(self.L, P, P)
        self.V = model.V
        self.degK = model.curve.degree_K
        self.P_A = intersect(self.L, P, model.A_class())
        self.P_K = intersect(self.L, P, model.Kx_class())
        comps = model.components
        self.P_E = [intersect(self.L, P, self.L.curve(model.curve_index(i))) for i in range(len(comps))]

    def dot_vertical(self, coeffs) -> Fraction:
        return sum((a * pe for a, pe in zip(coeffs, self.P_E)), Fraction(0))


def energy(D: VerticalDivisor) -> Fraction:
    """``E_A(P_A f_D) = V^-1/(n+1) vol(A + D') - c``."""
    p = _Pieces(D)
    return p.vol / ((DIM + 1) * p.V) - p.c


def twisted_energy(D: VerticalDivisor) -> Fraction:
    """``E^{K_X}_A(P_A f_D) = V^-1 <A+D'>.K_X - c deg(K_X)/V``."""
    p = _Pieces(D)
    return (p.P_K - p.c * p.degK) / p.V


def entropy_envelope(D: VerticalDivisor) -> Fraction:
    """``H_A(P_A f_D) = V^-1 <A+D>.K^log``, ``K^log = sum (ordK_i + 1 - b_i) E_i``."""
    p = _Pieces(D)
    klog = [c.ordK + 1 - c.b for c in D.model.components]
    return p.dot_vertical(klog) / p.V


def report(D: VerticalDivisor) -> InvariantReport:
    p = _Pieces(D)
    comps = D.model.components
    V, n = p.V, DIM
    sbar = Fraction(-p.degK) / V
    K_rel = p.dot_vertical([c.ordK for c in comps]) + p.P_K  # K_{X'/P^1} . P
    DF = K_rel - Fraction(n * p.degK, (n + 1)) / V * p.vol
    M_NA = DF - p.dot_vertical([c.b - 1 for c in comps])
    J_NA = p.P_A - p.vol / (n + 1)

    E_A = p.vol / ((n + 1) * V) - p.c
    E_K = (p.P_K - p.c * p.degK) / V
    H_A = p.dot_vertical([c.ordK + 1 - c.b for c in comps]) / V
    M_A = sbar * E_A + E_K + H_A
    J_A = p.env.sup - E_A

    if M_A != M_NA / V:
        raise IdentityViolation(f"M_A = {M_A} but M_NA/V = {M_NA / V}")
    if J_A != J_NA / V:
        raise IdentityViolation(f"J_A = {J_A} but J_NA/V = {J_NA / V}")
    return InvariantReport(DF, M_NA, J_NA, E_A, E_K, H_A, M_A, J_A, sbar, p.vol, p.c)
