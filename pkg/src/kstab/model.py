"""Blow-up models of X x P^1 over a base curve X.

A model is built from the trivial model by point blow-ups on the central
fiber. Besides the central-fiber components we track strict transforms
``H_x`` of the fibers ``{x} x P^1`` over named base points; divisorial
centers and scalings are then recovered by an exact Gram solve.

Only C*-fixed points are blown up: a point of ``E0`` lying on some ``H_x``,
or a node where two tracked curves meet. Every exceptional curve is a
toric P^1 whose fixed points are exactly its nodes, so a blow-up supported
on a single component is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .lattice import DivClass, IntersectionLattice, LatticeError
from .rational import SingularSystemError, is_negative_definite, solve, to_fraction

__all__ = [
    "Component",
    "CurveData",
    "DivisorialPoint",
    "ModelError",
    "SncModel",
    "blowup",
    "build_model",
    "divisorial_point",
    "trivial_model",
    "vertical_lattice",
]

STRICT_LABEL = "E0"
FIBER_PREFIX = "H_"


class ModelError(ValueError):
    """Invalid blow-up request or corrupted model data."""


@dataclass(frozen=True)
class CurveData:
    genus: int
    degree_alpha: Fraction

    def __post_init__(self):
        if int(self.genus) != self.genus or self.genus < 0:
            raise ModelError("genus must be a non-negative integer")
        V = to_fraction(self.degree_alpha)
        if V <= 0:
            raise ModelError("degree of alpha must be positive")
        object.__setattr__(self, "genus", int(self.genus))
        object.__setattr__(self, "degree_alpha", V)

    @property
    def V(self) -> Fraction:
        return self.degree_alpha

    @property
    def degree_K(self) -> int:
        return 2 * self.genus - 2


@dataclass(frozen=True)
class Component:
    label: str
    b: int
    ordK: int
    is_strict: bool = False
    center: Optional[str] = None  # base point the component lies over


@dataclass(frozen=True)
class DivisorialPoint:
    index: int
    label: str
    center: Optional[str]  # None for the trivial valuation
    b: int
    m: Fraction  # order of the pulled-back base point along the component
    scaling: Fraction  # r = m / b
    log_disc_XP1: Fraction  # (1 + ordK) / b

    @property
    def is_trivial(self) -> bool:
        return self.center is None


def _key(a: str, b: str) -> tuple:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class SncModel:
    """Immutable SNC model; intersection numbers among tracked curves live in ``products``."""

    curve: CurveData
    components: tuple
    fibers: tuple = ()  # base-point labels x, curve label "H_x"
    products: Mapping = field(default_factory=dict, repr=False)

    # -- labels and lookup -------------------------------------------------
    @property
    def component_labels(self) -> tuple:
        return tuple(c.label for c in self.components)

    @property
    def fiber_labels(self) -> tuple:
        return tuple(FIBER_PREFIX + x for x in self.fibers)

    @property
    def curve_labels(self) -> tuple:
        return self.component_labels + self.fiber_labels

    @property
    def basis(self) -> tuple:
        return ("A", "Kx") + self.curve_labels

    @property
    def multiplicities(self) -> tuple:
        return tuple(c.b for c in self.components)

    @property
    def V(self) -> Fraction:
        return self.curve.V

    def __len__(self) -> int:
        return len(self.components)

    def index(self, label: str) -> int:
        try:
            return self.component_labels.index(label)
        except ValueError:
            raise ModelError(f"unknown component {label!r}") from None

    def product(self, a: str, b: str) -> Fraction:
        """Intersection number of two tracked curves or of A/Kx with a tracked curve."""
        if a in ("A", "Kx") or b in ("A", "Kx"):
            if a in ("A", "Kx") and b in ("A", "Kx"):
                return Fraction(0)
            cls, other = (a, b) if a in ("A", "Kx") else (b, a)
            if other != STRICT_LABEL:
                return Fraction(0)
            return self.curve.V if cls == "A" else Fraction(self.curve.degree_K)
        return self.products.get(_key(a, b), Fraction(0))

    def dual_tree(self) -> tuple:
        """Edges ``(i, j)`` between components meeting with product 1."""
        labs = self.component_labels
        return tuple(
            (i, j)
            for i in range(len(labs))
            for j in range(i + 1, len(labs))
            if self.product(labs[i], labs[j]) == 1
        )

    def fiber_class(self) -> DivClass:
        """``F = sum b_i E_i`` in the exported lattice basis."""
        vec = [0, 0] + list(self.multiplicities) + [0] * len(self.fibers)
        return DivClass(vec)

    def vertical(self, coeffs: Sequence) -> DivClass:
        """Lattice class of the vertical divisor ``sum a_i E_i``."""
        if len(coeffs) != len(self.components):
            raise ModelError(f"expected {len(self.components)} coefficients, got {len(coeffs)}")
        return DivClass([0, 0] + list(coeffs) + [0] * len(self.fibers))

    def A_class(self) -> DivClass:
        return DivClass([1] + [0] * (len(self.basis) - 1))

    def Kx_class(self) -> DivClass:
        return DivClass([0, 1] + [0] * (len(self.basis) - 2))

    def lattice_index(self, i: int) -> int:
        """Position of component ``i`` in the exported basis."""
        return 2 + i

    def curve_index(self, i: int) -> int:
        """Position of component ``i`` in the exported test-curve list."""
        return i

    def log_discrepancies(self) -> tuple:
        return tuple(Fraction(1 + c.ordK, c.b) for c in self.components)

    def with_fiber(self, x: str) -> "SncModel":
        """Start tracking the strict transform of ``{x} x P^1``."""
        x = str(x)
        if x in self.fibers:
            raise ModelError(f"fiber over {x!r} already tracked")
        if any(c.center == x for c in self.components):
            raise ModelError(f"cannot track fiber over {x!r} after blowing up over it")
        prods = dict(self.products)
        prods[_key(FIBER_PREFIX + x, STRICT_LABEL)] = Fraction(1)
        return SncModel(self.curve, self.components, self.fibers + (x,), prods)

    # -- checks ------------------------------------------------------------
    def check(self) -> None:
        """Assert the structural invariants exactly; raises ModelError."""
        strict = [c for c in self.components if c.is_strict]
        if len(strict) != 1 or strict[0].b != 1 or strict[0].ordK != 0:
            raise ModelError("exactly one strict transform of X x {0} with b=1, ordK=0 required")
        labs = self.component_labels
        b = self.multiplicities
        for k in labs + self.fiber_labels:
            dot = sum(bi * self.product(li, k) for bi, li in zip(b, labs))
            want = 1 if k in self.fiber_labels else 0
            if dot != want:
                raise ModelError(f"fiber identity violated: F.{k} = {dot}")
        if sum(bi * self.product("A", li) for bi, li in zip(b, labs)) != self.V:
            raise ModelError("A.F != V")
        edges = self.dual_tree()
        if len(edges) != len(labs) - 1 or not _connected(len(labs), edges):
            raise ModelError("dual complex is not a tree")
        gram = [[self.product(a, c) for c in labs] for a in labs]
        for drop in range(len(labs)):
            keep = [i for i in range(len(labs)) if i != drop]
            sub = [[gram[i][j] for j in keep] for i in keep]
            if sub and not is_negative_definite(sub):
                raise ModelError("proper subset of fiber components is not negative definite")


def _connected(n: int, edges) -> bool:
    if n == 0:
        return False
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen, stack = {0}, [0]
    while stack:
        v = stack.pop()
        for w in adj[v] - seen:
            seen.add(w)
            stack.append(w)
    return len(seen) == n


def trivial_model(curve: CurveData, fibers: Iterable[str] = ()) -> SncModel:
    """``X x P^1`` with the single central component ``E0`` (``E0^2 = 0``)."""
    model = SncModel(curve, (Component(STRICT_LABEL, 1, 0, True, None),), (), {})
    for x in fibers:
        model = model.with_fiber(x)
    return model


def blowup(model: SncModel, support: Iterable[str], new_label: str) -> SncModel:
    """Blow up the point where the curves in ``support`` meet.

    ``support`` lists two tracked curves with product 1, at least one of them a
    central-fiber component. An unknown label ``H_x`` is declared on the fly
    when nothing has been blown up over ``x`` yet.
    """
    support = list(dict.fromkeys(str(s) for s in support))
    new_label = str(new_label)
    if new_label in model.curve_labels or new_label in ("A", "Kx") or new_label.startswith(FIBER_PREFIX):
        raise ModelError(f"label {new_label!r} is already in use or reserved")
    for lab in support:
        if lab not in model.curve_labels:
            if lab.startswith(FIBER_PREFIX) and len(lab) > len(FIBER_PREFIX):
                model = model.with_fiber(lab[len(FIBER_PREFIX):])
            else:
                raise ModelError(f"unknown label {lab!r}")
    if len(support) != 2:
        raise ModelError(
            "support must name two curves meeting at a C*-fixed point "
            "(single-component blow-ups are not equivariant)"
        )
    comps = {c.label: c for c in model.components}
    if not any(lab in comps for lab in support):
        raise ModelError("blow-up center must lie on the central fiber")
    a, c = support
    if model.product(a, c) != 1:
        raise ModelError(f"{a} and {c} do not meet transversally in one point")

    centers = set()
    for lab in support:
        if lab in comps:
            if comps[lab].center is not None:
                centers.add(comps[lab].center)
        else:
            centers.add(lab[len(FIBER_PREFIX):])
    if len(centers) != 1:  # pragma: no cover - excluded by the product check
        raise ModelError("blow-up center has no well-defined base point")
    center = centers.pop()

    b_new = sum(comps[lab].b for lab in support if lab in comps)
    ordK_new = sum(comps[lab].ordK for lab in support if lab in comps) + 1
    prods = dict(model.products)
    for lab in support:
        prods[_key(lab, lab)] = model.product(lab, lab) - 1
        prods[_key(lab, new_label)] = Fraction(1)
    prods[_key(a, c)] = Fraction(0)
    prods[_key(new_label, new_label)] = Fraction(-1)
    new = Component(new_label, b_new, ordK_new, False, center)
    return SncModel(model.curve, model.components + (new,), model.fibers, prods)


def divisorial_point(model: SncModel, i: int) -> DivisorialPoint:
    """Center, scaling and log discrepancy of the vertex ``v_{E_i}``.

    Solves ``(H_x + sum m_k E_k) . E_j = 0`` over the exceptional components
    for each tracked base point ``x``; the center is the unique ``x`` with
    ``m_i > 0``.
    """
    if not 0 <= i < len(model.components):
        raise ModelError(f"component index {i} out of range")
    comp = model.components[i]
    log_disc = Fraction(1 + comp.ordK, comp.b)
    exc = [k for k, c in enumerate(model.components) if not c.is_strict]
    center, m_i = None, Fraction(0)
    if exc and not comp.is_strict:
        labs = [model.components[k].label for k in exc]
        gram = [[model.product(p, q) for q in labs] for p in labs]
        hits = []
        for x, H in zip(model.fibers, model.fiber_labels):
            rhs = [-model.product(H, p) for p in labs]
            try:
                m = solve(gram, rhs)
            except SingularSystemError as exc_:
                raise ModelError("singular Gram system over exceptional components") from exc_
            mi = m[exc.index(i)]
            if mi > 0:
                hits.append((x, mi))
        if len(hits) != 1:
            raise ModelError(f"component {comp.label} has {len(hits)} candidate centers")
        center, m_i = hits[0]
    return DivisorialPoint(
        index=i,
        label=comp.label,
        center=center,
        b=comp.b,
        m=m_i,
        scaling=m_i / comp.b,
        log_disc_XP1=log_disc,
    )


def vertical_lattice(model: SncModel, check: bool = True) -> IntersectionLattice:
    """Export basis ``{A, Kx} + components + fiber curves``; every curve is a test curve."""
    if check:
        model.check()
    basis = model.basis
    form = [[model.product(a, c) for c in basis] for a in basis]
    n = len(basis)
    curves = [(lab, [int(j == 2 + k) for j in range(n)]) for k, lab in enumerate(model.curve_labels)]
    return IntersectionLattice(labels=basis, form=form, test_curves=curves)


def build_model(doc: Mapping) -> SncModel:
    """Run a JSON build script ``{curve: {genus, degree_alpha}, fibers?, steps}``."""
    try:
        curve = CurveData(int(doc["curve"]["genus"]), to_fraction(doc["curve"]["degree_alpha"]))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"bad curve data: {exc}") from exc
    model = trivial_model(curve, doc.get("fibers", ()))
    for step in doc.get("steps", []):
        model = blowup(model, step["support"], step["new_label"])
    model.check()
    return model


def model_to_json(model: SncModel) -> dict:
    from .rational import fmt

    return {
        "curve": {"genus": model.curve.genus, "degree_alpha": fmt(model.V)},
        "components": [
            {"label": c.label, "b": c.b, "ordK": c.ordK, "center": c.center, "strict": c.is_strict}
            for c in model.components
        ],
        "fibers": list(model.fibers),
        "dual_tree": [[model.components[i].label, model.components[j].label] for i, j in model.dual_tree()],
        "lattice": vertical_lattice(model).to_json(),
    }
