"""Exact intersection theory on a lattice of divisor classes on a surface.

Nefness and pseudoeffectivity are relative to the declared test curves: the
downstream invariants are only correct if that list contains every negative
curve met by the classes one feeds in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Sequence

from .rational import (
    SingularSystemError,
    bilinear,
    fmt,
    is_negative_definite,
    is_symmetric,
    solve,
    to_fraction,
)

__all__ = [
    "DivClass",
    "IntersectionLattice",
    "LatticeError",
    "NotPseudoeffectiveError",
    "ZariskiResult",
    "Chamber",
    "chamber_interval",
    "chamber_radius",
    "intersect",
    "is_nef",
    "restricted_volume",
    "volume",
    "zariski",
]


class LatticeError(ValueError):
    """Malformed lattice data or mismatched dimensions."""


class NotPseudoeffectiveError(LatticeError):
    """An operation requiring a pseudoeffective class got one outside the cone."""


@dataclass(frozen=True)
class DivClass:
    """A numerical class as an exact coefficient vector over the lattice basis."""

    coeffs: tuple

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", tuple(to_fraction(c) for c in coeffs))

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def _check(self, other: "DivClass") -> None:
        if len(other) != len(self):
            raise LatticeError(f"class lengths differ: {len(self)} vs {len(other)}")

    def __add__(self, other):
        other = as_class(other)
        self._check(other)
        return DivClass(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other):
        other = as_class(other)
        self._check(other)
        return DivClass(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __neg__(self):
        return DivClass(-a for a in self.coeffs)

    def __mul__(self, scalar):
        s = to_fraction(scalar)
        return DivClass(s * a for a in self.coeffs)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def to_json(self) -> list:
        return [fmt(c) for c in self.coeffs]


def as_class(u) -> DivClass:
    return u if isinstance(u, DivClass) else DivClass(u)


@dataclass(frozen=True)
class IntersectionLattice:
    """Basis labels, a symmetric rational intersection form and test curves.

    ``test_curves`` is a tuple of ``(label, DivClass)`` pairs. Every test curve
    must satisfy ``C.C >= -self_bound``.
    """

    labels: tuple
    form: tuple
    test_curves: tuple = ()
    self_bound: int = 10

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        form = tuple(tuple(to_fraction(x) for x in row) for row in self.form)
        n = len(labels)
        if n == 0:
            raise LatticeError("lattice must have positive rank")
        if len(set(labels)) != n:
            raise LatticeError("duplicate basis labels")
        if len(form) != n or any(len(row) != n for row in form):
            raise LatticeError(f"form must be {n}x{n}")
        if not is_symmetric(form):
            raise LatticeError("intersection form is not symmetric")
        curves = []
        for label, vec in self.test_curves:
            c = as_class(vec)
            if len(c) != n:
                raise LatticeError(f"test curve {label!r} has wrong length")
            curves.append((str(label), c))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "test_curves", tuple(curves))
        for label, c in curves:
            if bilinear(form, c, c) < -self.self_bound:
                raise LatticeError(
                    f"test curve {label!r} has self-intersection below -{self.self_bound}"
                )

    @property
    def rank(self) -> int:
        return len(self.labels)

    def basis(self, label: str) -> DivClass:
        try:
            i = self.labels.index(label)
        except ValueError:
            raise LatticeError(f"unknown basis label {label!r}") from None
        return DivClass(Fraction(int(j == i)) for j in range(self.rank))

    def cls(self, coeffs: Mapping[str, object] | None = None, **kw) -> DivClass:
        """Build a class from ``{label: coefficient}``."""
        merged = dict(coeffs or {})
        merged.update(kw)
        vec = [Fraction(0)] * self.rank
        for label, c in merged.items():
            try:
                vec[self.labels.index(label)] += to_fraction(c)
            except ValueError:
                raise LatticeError(f"unknown basis label {label!r}") from None
        return DivClass(vec)

    def zero(self) -> DivClass:
        return DivClass([0] * self.rank)

    def curve_index(self, label: str) -> int:
        for k, (name, _) in enumerate(self.test_curves):
            if name == label:
                return k
        raise LatticeError(f"unknown test curve {label!r}")

    def curve(self, k: int) -> DivClass:
        return self.test_curves[k][1]

    # -- JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "form": [[fmt(x) for x in row] for row in self.form],
            "test_curves": [{"label": lab, "class": c.to_json()} for lab, c in self.test_curves],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "IntersectionLattice":
        labels = list(doc["labels"])
        curves = []
        for entry in doc.get("test_curves", []):
            if isinstance(entry, str):
                vec = [int(lab == entry) for lab in labels]
                curves.append((entry, vec))
            elif isinstance(entry, Mapping):
                curves.append((entry["label"], entry["class"]))
            else:
                label, vec = entry
                curves.append((label, vec))
        return cls(
            labels=labels,
            form=doc["form"],
            test_curves=curves,
            self_bound=int(doc.get("self_bound", 10)),
        )


@dataclass(frozen=True)
class ZariskiResult:
    positive: Optional[DivClass]
    negative: tuple  # ((test-curve index, sigma), ...)
    is_pseff: bool
    is_big: bool = False
    steps: int = 0
    diagnostic: str = ""
    support_gram: tuple = field(default=(), repr=False)

    def sigma(self, k: int) -> Fraction:
        for j, s in self.negative:
            if j == k:
                return s
        return Fraction(0)

    @property
    def support(self) -> tuple:
        return tuple(j for j, _ in self.negative)


def _check_dims(L: IntersectionLattice, *classes) -> None:
    for u in classes:
        if len(u) != L.rank:
            raise LatticeError(f"class of length {len(u)} on a rank-{L.rank} lattice")


def intersect(L: IntersectionLattice, u, v) -> Fraction:
    """Exact intersection number ``u . v``."""
    u, v = as_class(u), as_class(v)
    _check_dims(L, u, v)
    return bilinear(L.form, u.coeffs, v.coeffs)


def is_nef(L: IntersectionLattice, u) -> bool:
    u = as_class(u)
    _check_dims(L, u)
    return all(intersect(L, u, c) >= 0 for _, c in L.test_curves)


def _negative_part(L, u, support):
    curves = [L.curve(k) for k in support]
    gram = [[intersect(L, a, b) for b in curves] for a in curves]
    rhs = [intersect(L, u, c) for c in curves]
    return gram, solve(gram, rhs)


def zariski(L: IntersectionLattice, u) -> ZariskiResult:
    """Zariski decomposition ``u = P + N`` relative to the test curves.

    The negative support grows monotonically: at each pass every test curve
    with ``P.C < 0`` is added and ``N`` is re-solved from ``(u - N).C_j = 0``.
    A support whose Gram matrix is not negative definite, a non-positive
    coefficient, or a nef-looking ``P`` with ``P^2 < 0`` marks ``u`` as not
    pseudoeffective.
    """
    u = as_class(u)
    _check_dims(L, u)
    support: list[int] = []
    sigma: list[Fraction] = []
    gram: list = []
    steps = 0

    def fail(msg):
        return ZariskiResult(None, (), False, False, steps, msg, tuple(map(tuple, gram)))

    while True:
        P = u
        if support:
            gram = [[intersect(L, L.curve(a), L.curve(b)) for b in support] for a in support]
            if not is_negative_definite(gram):
                labels = [L.test_curves[k][0] for k in support]
                return fail(f"support {labels} is not negative definite")
            try:
                gram, sigma = _negative_part(L, u, support)
            except SingularSystemError:  # pragma: no cover - excluded by definiteness
                return fail("singular Gram system")
            if any(s <= 0 for s in sigma):
                return fail("non-positive negative-part coefficient")
            for k, s in zip(support, sigma):
                P = P - s * L.curve(k)
        bad = [k for k, (_, c) in enumerate(L.test_curves) if k not in support and intersect(L, P, c) < 0]
        if not bad:
            break
        support.extend(bad)
        steps += 1
        if steps > len(L.test_curves):  # pragma: no cover - support strictly grows
            raise RuntimeError("Zariski iteration failed to terminate")

    square = intersect(L, P, P)
    if square < 0:
        return fail("positive part has negative self-intersection")
    order = sorted(range(len(support)), key=lambda i: support[i])
    negative = tuple((support[i], sigma[i]) for i in order)
    return ZariskiResult(P, negative, True, square > 0, steps, "", tuple(map(tuple, gram)))


def volume(L: IntersectionLattice, u) -> Fraction:
    """``vol(u) = P^2`` on a surface; 0 outside the pseudoeffective cone."""
    z = zariski(L, u)
    if not z.is_pseff:
        return Fraction(0)
    return intersect(L, z.positive, z.positive)


def restricted_volume(L: IntersectionLattice, u, k: int) -> Fraction:
    """Restricted volume along test curve ``k``: ``P.C_k`` (0 if ``C_k`` is in ``N``)."""
    z = zariski(L, u)
    if not z.is_pseff:
        raise NotPseudoeffectiveError(z.diagnostic or "class is not pseudoeffective")
    return intersect(L, z.positive, L.curve(k))


@dataclass(frozen=True)
class Chamber:
    """Zariski chamber of ``u`` along the line ``u + s*d``.

    For ``-back <= s <= fwd`` the positive part is ``positive + s*slope``
    (``None`` bounds are infinite).
    """

    positive: DivClass
    slope: DivClass
    support: tuple
    back: Optional[Fraction]
    fwd: Optional[Fraction]


def chamber_interval(L: IntersectionLattice, u, direction) -> Chamber:
    u, d = as_class(u), as_class(direction)
    z = zariski(L, u)
    if not z.is_pseff:
        raise NotPseudoeffectiveError(z.diagnostic)
    support = list(z.support)
    Pd = d
    rates: list[Fraction] = []
    if support:
        _, c = _negative_part(L, d, support)
        for k, ck in zip(support, c):
            Pd = Pd - ck * L.curve(k)
        rates = list(c)
    # sigma_j + s*rate_j >= 0 on the support, P.C + s*Pd.C >= 0 off it
    linear = [(s, r) for (_, s), r in zip(z.negative, rates)]
    for k, (_, C) in enumerate(L.test_curves):
        if k not in support:
            linear.append((intersect(L, z.positive, C), intersect(L, Pd, C)))
    back = fwd = None
    for a, b in linear:
        if b < 0:
            fwd = a / -b if fwd is None else min(fwd, a / -b)
        elif b > 0:
            back = a / b if back is None else min(back, a / b)
    return Chamber(z.positive, Pd, z.support, back, fwd)


def chamber_radius(L: IntersectionLattice, u, direction) -> Optional[Fraction]:
    """Largest ``h`` with ``u + s*direction`` in the closed Zariski chamber of ``u`` for ``|s| <= h``.

    On that segment the volume is one quadratic polynomial, so a centered
    difference of step ``h`` is exact. ``None`` means the whole line stays in
    the chamber.
    """
    ch = chamber_interval(L, u, direction)
    bounds = [h for h in (ch.back, ch.fwd) if h is not None]
    return min(bounds) if bounds else None
