"""The beta-invariant of divisorial measures via volume profiles.

For ``mu = sum xi_i delta_{v_i}`` with ``v_i = r_i ord_{F_i}`` the energy of
the envelope ``phi_t = sup{phi : phi(v_i) <= t_i}`` is

    f(t) = lam0 + V^-1 int_{lam0}^{inf} vol(alpha - sum_F s_F(lam) F) dlam,
    s_F(lam) = max over atoms i on F of ((lam - t_i) / r_i)_+ ,

for any ``lam0 < min t``. The dual energy is the Legendre transform
``E^v(mu) = sup_t f(t) - xi.t`` and ``beta = Ent(mu) + d/ds E^v_{alpha + s K_X}(mu)``.

An atom at the trivial valuation (``divisor=None``) only bounds ``sup phi``;
it truncates the integral at its ``t_i`` and carries no entropy.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import quadrature
from .lattice import (
    DivClass,
    IntersectionLattice,
    as_class,
    chamber_interval,
    intersect,
    volume as lattice_volume,
)
from .model import SncModel, divisorial_point, vertical_lattice
from .optimize import ConvergenceError, coordinate_ascent
from .plfun import NAMeasure, VerticalDivisor, envelope, ma_envelope
from .rational import SingularSystemError, bilinear, fmt, fmt_float, solve, to_fraction

logger = logging.getLogger(__name__)

__all__ = [
    "BetaProblem",
    "BetaReport",
    "CurveOracle",
    "MeasureMismatchError",
    "NotBigError",
    "OptConfig",
    "QuadConfig",
    "SurfaceOracle",
    "Valuation",
    "beta",
    "f_profile",
    "grad_K",
    "legendre_energy",
    "problem_from_measure",
    "solve_ma_divisorial",
    "stability_scan",
]


class NotBigError(ArithmeticError):
    """The (twisted) class alpha + s K_X has zero volume."""


class MeasureMismatchError(ArithmeticError):
    """The solver's Monge-Ampere masses do not reproduce the target measure."""


@dataclass(frozen=True)
class QuadConfig:
    tol: float = 1e-9
    max_depth: int = 30


@dataclass(frozen=True)
class OptConfig:
    tol: float = 1e-7
    max_iters: int = 500


# -- volume oracles ---------------------------------------------------------


class CurveOracle:
    """Closed-form volumes on a curve: ``vol(alpha + sK K - sum s_x x) = (V + sK(2g-2) - sum s_x)_+``."""

    backend = "curve"
    n = 1

    def __init__(self, genus: int, V, divisors: Sequence[str] = ()):
        self.genus = int(genus)
        self.V = to_fraction(V)
        if self.V <= 0:
            raise ValueError("V must be positive")
        self.divisors = tuple(str(d) for d in divisors)

    def with_divisors(self, divisors) -> "CurveOracle":
        return CurveOracle(self.genus, self.V, divisors)

    def V_twisted(self, sK=0):
        return self.V + sK * (2 * self.genus - 2)

    def volume(self, s: Sequence, sK=0):
        v = self.V_twisted(sK) - sum(s)
        return v if v > 0 else 0 * v

    def to_json(self) -> dict:
        return {"backend": "curve", "curve": {"genus": self.genus, "V": fmt(self.V)}}


class SurfaceOracle:
    """Volumes ``vol(alpha + sK K - sum s_F F)`` from a surface lattice (exact Zariski)."""

    backend = "surface"
    n = 2

    def __init__(self, lattice: IntersectionLattice, alpha, K, F: Mapping[str, object]):
        self.lattice = lattice
        self.alpha = as_class(alpha)
        self.K = as_class(K)
        self.F = {str(k): as_class(v) for k, v in F.items()}
        self.divisors = tuple(self.F)
        self._cache: dict = {}

    def _cls(self, s, sK) -> DivClass:
        u = self.alpha + to_fraction(sK) * self.K
        for lab, sj in zip(self.divisors, s):
            if sj:
                u = u - to_fraction(sj) * self.F[lab]
        return u

    def V_twisted(self, sK=0):
        return self.volume([0] * len(self.divisors), sK)

    def volume(self, s: Sequence, sK=0):
        key = (tuple(to_fraction(x) for x in s), to_fraction(sK))
        hit = self._cache.get(key)
        if hit is None:
            hit = lattice_volume(self.lattice, self._cls(*key))
            self._cache[key] = hit
        if any(isinstance(x, float) for x in s) or isinstance(sK, float):
            return float(hit)
        return hit

    def to_json(self) -> dict:
        return {
            "backend": "surface",
            "surface": {
                "lattice": self.lattice.to_json(),
                "alpha": self.alpha.to_json(),
                "K": self.K.to_json(),
                "F": [{"label": k, "class": v.to_json()} for k, v in self.F.items()],
            },
        }


# -- problem data -------------------------------------------------------------


@dataclass(frozen=True)
class Valuation:
    """``r * ord_F`` for a prime divisor ``F`` over X; ``divisor=None`` is the trivial valuation."""

    label: str
    divisor: Optional[str]
    A_X: Fraction = Fraction(1)
    r: Fraction = Fraction(1)

    @property
    def is_trivial(self) -> bool:
        return self.divisor is None

    @property
    def log_discrepancy(self) -> Fraction:
        """``A_X(r ord_F) = r A_X(F)``; zero for the trivial valuation."""
        return Fraction(0) if self.is_trivial else self.r * self.A_X


@dataclass(frozen=True)
class BetaProblem:
    oracle: object
    valuations: tuple
    xi: tuple
    quad: QuadConfig = QuadConfig()
    opt: OptConfig = OptConfig()
    grad_step: Fraction = Fraction(1, 64)

    def __post_init__(self):
        vals = tuple(self.valuations)
        xi = tuple(to_fraction(x) if not isinstance(x, float) else x for x in self.xi)
        object.__setattr__(self, "valuations", vals)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "grad_step", to_fraction(self.grad_step))
        if not vals:
            raise ValueError("at least one valuation is required")
        if len(xi) != len(vals):
            raise ValueError(f"{len(xi)} masses for {len(vals)} valuations")
        if any(x < 0 for x in xi):
            raise ValueError("masses must be non-negative")
        if abs(float(sum(xi)) - 1.0) > 1e-12:
            raise ValueError("masses must sum to 1")
        known = set(self.oracle.divisors)
        for v in vals:
            if v.is_trivial:
                continue
            if v.divisor not in known:
                raise ValueError(f"valuation {v.label!r} refers to unknown divisor {v.divisor!r}")
            if v.r <= 0:
                raise ValueError(f"valuation {v.label!r} needs a positive scaling")
        if self.grad_step <= 0:
            raise ValueError("grad_step must be positive")

    def with_xi(self, xi) -> "BetaProblem":
        return replace(self, xi=tuple(xi))


@dataclass(frozen=True)
class BetaReport:
    entropy: float
    energy: float
    t_star: tuple
    grad_K: float
    grad_error: float
    beta: float
    ratio: Optional[float]
    exact: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "entropy": fmt_float(self.entropy),
            "energy": fmt_float(self.energy),
            "t_star": [fmt_float(t) for t in self.t_star],
            "grad_K": fmt_float(self.grad_K),
            "grad_error": fmt_float(self.grad_error),
            "beta": fmt_float(self.beta),
            "ratio": None if self.ratio is None else fmt_float(self.ratio),
        }
        if self.exact:
            out["exact"] = {k: fmt(v) for k, v in self.exact.items()}
        return out


# -- the volume profile -------------------------------------------------------


def _coefficient_fn(problem: BetaProblem, t: Sequence):
    """``lam -> [s_F(lam) for F in oracle.divisors]``."""
    groups: dict = {d: [] for d in problem.oracle.divisors}
    for v, ti in zip(problem.valuations, t):
        if not v.is_trivial:
            groups[v.divisor].append((ti, v.r))

    def coeffs(lam):
        out = []
        for d in problem.oracle.divisors:
            best = 0 * lam
            for ti, r in groups[d]:
                val = (lam - ti) / r
                if val > best:
                    best = val
            out.append(best)
        return out

    return groups, coeffs


def _cutoff(problem: BetaProblem, t: Sequence):
    cuts = [ti for v, ti in zip(problem.valuations, t) if v.is_trivial]
    return min(cuts) if cuts else None


def _kinks(groups, t_lo):
    pts = set()
    for atoms in groups.values():
        for k, (ti, ri) in enumerate(atoms):
            pts.add(ti)
            for tj, rj in atoms[k + 1:]:
                if ri != rj:
                    lam = (rj * ti - ri * tj) / (rj - ri)
                    if lam > t_lo:
                        pts.add(lam)
    return pts


def _curve_profile(problem: BetaProblem, t: Sequence, sK):
    oracle = problem.oracle
    Vs = oracle.V_twisted(sK)
    if Vs <= 0:
        raise NotBigError(f"alpha + {sK} K_X is not big (V = {Vs})")
    groups, coeffs = _coefficient_fn(problem, t)
    lam0 = min(t) - 1

    def h(lam):
        return Vs - sum(coeffs(lam))

    cut = _cutoff(problem, t)
    pts = sorted(p for p in _kinks(groups, lam0) if p > lam0)
    nontrivial = any(groups.values())
    last = pts[-1] if pts else min(t)
    if nontrivial:
        h_last = h(last)
        if h_last > 0:
            slope = h(last + 1) - h_last
            pts.append(last - h_last / slope)
    elif cut is None:
        raise ValueError("profile is unbounded without a nontrivial valuation or cutoff")
    if cut is not None:
        pts = [p for p in pts if p < cut] + [cut]
    grid = [lam0] + [p for p in pts if p > lam0]
    total = 0 * Vs
    for a, b in zip(grid, grid[1:]):
        ha, hb = h(a), h(b)
        if ha >= 0 and hb >= 0:
            total += (ha + hb) * (b - a) / 2
        elif ha > 0 > hb:
            root = a + ha * (b - a) / (ha - hb)
            total += ha * (root - a) / 2
        elif hb > 0 > ha:
            root = a + ha * (b - a) / (ha - hb)
            total += hb * (b - root) / 2
    return lam0 + total / Vs


def _sqrt_exact(q: Fraction):
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return Fraction(math.sqrt(q))


def _first_root(A, B, C):
    """Smallest ``x > 0`` with ``C + B x + A x^2 = 0`` (``C > 0``), or None."""
    if A == 0:
        return -C / B if B < 0 else None
    disc = B * B - 4 * A * C
    if disc < 0:
        return None
    r = _sqrt_exact(disc)
    roots = [x for x in ((-B - r) / (2 * A), (-B + r) / (2 * A)) if x > 0]
    return min(roots) if roots else None


@dataclass(frozen=True)
class _Piece:
    lo: Fraction
    hi: Fraction
    m: Fraction  # expansion point
    coeffs: tuple  # vol(lam) = C + B x + A x^2 with x = lam - m


def _surface_pieces(oracle, u_at, lo, hi, max_steps=10_000):
    """Split ``[lo, hi]`` (one kink-free piece) into Zariski chambers.

    Walls come from the exact chamber bounds of the midpoint of each
    unexplored interval. Returns chamber pieces (volume quadratic on each)
    and the first point where the volume vanishes, if any.
    """
    L = oracle.lattice
    d = (u_at(hi) - u_at(lo)) * (1 / (hi - lo))
    pieces, zero_from = [], None
    todo = [(lo, hi)]
    steps = 0
    while todo:
        a, b = todo.pop()
        if zero_from is not None and a >= zero_from:
            continue
        if zero_from is not None:
            b = min(b, zero_from)
        if b <= a:
            continue
        steps += 1
        if steps > max_steps:
            raise ArithmeticError("too many Zariski chambers along the profile")
        m = (a + b) / 2
        u = u_at(m)
        if lattice_volume(L, u) == 0:
            zero_from = m if zero_from is None else min(zero_from, m)
            todo.append((a, m))
            continue
        ch = chamber_interval(L, u, d)
        c0 = a if ch.back is None else max(a, m - ch.back)
        c1 = b if ch.fwd is None else min(b, m + ch.fwd)
        C = intersect(L, ch.positive, ch.positive)
        B = 2 * intersect(L, ch.positive, ch.slope)
        A = intersect(L, ch.slope, ch.slope)
        root = _first_root(A, B, C)
        if root is not None and m + root <= c1:
            c1 = m + root
            zero_from = c1 if zero_from is None else min(zero_from, c1)
        pieces.append(_Piece(c0, c1, m, (C, B, A)))
        todo.append((a, c0))
        todo.append((c1, b))
    return pieces, zero_from


def _piece_integral(p: _Piece, hi=None):
    C, B, A = p.coeffs
    top = p.hi if hi is None else min(hi, p.hi)
    if top <= p.lo:
        return Fraction(0)

    def prim(x):
        return C * x + B * x * x / 2 + A * x * x * x / 3

    return prim(top - p.m) - prim(p.lo - p.m)


def _surface_breaks(problem: BetaProblem, t: Sequence, sK):
    """Chamber pieces of the profile integrand on ``[min t, end]``."""
    oracle = problem.oracle
    groups, coeffs = _coefficient_fn(problem, t)
    lo = min(t)
    cut = _cutoff(problem, t)

    def u_at(lam):
        return oracle._cls(coeffs(lam), sK)

    kinks = sorted(p for p in _kinks(groups, lo) if p > lo)
    if any(groups.values()):
        last = kinks[-1] if kinks else lo
        hi = last + 1
        while lattice_volume(oracle.lattice, u_at(hi)) > 0:
            if cut is not None and hi >= cut:
                break
            hi = last + 2 * (hi - last)
            if hi - last > 10**9:
                raise ValueError("volume profile never vanishes")
        grid = [lo] + kinks + [hi]
    elif cut is None:
        raise ValueError("profile is unbounded without a nontrivial valuation or cutoff")
    else:
        grid = [lo, cut]
    if cut is not None:
        grid = [g for g in grid if g < cut] + [cut]
    pieces = []
    for a, b in zip(grid, grid[1:]):
        if b <= a:
            continue
        if lattice_volume(oracle.lattice, u_at(a)) == 0:
            break
        ps, zero = _surface_pieces(oracle, u_at, a, b)
        pieces.extend(ps)
        if zero is not None:
            break
    return sorted(pieces, key=lambda p: p.lo)


def _surface_profile(problem: BetaProblem, t: Sequence, sK, method: str = "exact"):
    oracle = problem.oracle
    exact = not any(isinstance(x, float) for x in list(t) + [sK])
    t = [Fraction(x) for x in t]
    sK = Fraction(sK)
    Vs = oracle.V_twisted(sK)
    if Vs <= 0:
        raise NotBigError(f"alpha + {sK} K_X is not big")
    pieces = _surface_breaks(problem, t, sK)
    lo = min(t)
    if method == "exact":
        total = sum((_piece_integral(p) for p in pieces), Fraction(0))
        value = lo + total / Vs
        return value if exact else float(value)
    if method != "quadrature":
        raise ValueError(f"unknown integration method {method!r}")
    _, coeffs = _coefficient_fn(problem, t)

    def vol(lam):
        return float(oracle.volume(coeffs(Fraction(lam)), sK))

    pts = sorted({float(p.lo) for p in pieces} | {float(p.hi) for p in pieces})
    value, _ = quadrature.integrate(vol, pts, problem.quad.tol, problem.quad.max_depth)
    return float(lo) + value / float(Vs)


def f_profile(problem: BetaProblem, t: Sequence, s_K=0, method: str = "exact"):
    """Energy ``f(t)`` of the envelope with vertex bounds ``t``.

    Exact (Fraction) when ``t`` and ``s_K`` are rational. On the surface
    backend ``method="quadrature"`` integrates numerically over the same
    chamber breakpoints instead (a cross-check of the exact path).
    """
    if len(t) != len(problem.valuations):
        raise ValueError(f"expected {len(problem.valuations)} values of t")
    if problem.oracle.backend == "curve":
        return _curve_profile(problem, list(t), s_K)
    return _surface_profile(problem, list(t), s_K, method)


# -- Legendre transform -------------------------------------------------------


@dataclass(frozen=True)
class LegendreResult:
    g: float
    t_star: tuple
    sweeps: int
    evaluations: int


def legendre_energy(problem: BetaProblem, s_K=0, start: Sequence | None = None) -> LegendreResult:
    """``g = sup_t f(t) - xi.t`` over the hyperplane ``t_0 = 0``."""
    xi = [float(x) for x in problem.xi]
    sK = float(s_K)
    ell = len(xi)

    def objective(t):
        return float(f_profile(problem, t, sK)) - sum(x * ti for x, ti in zip(xi, t))

    x0 = [0.0] * ell if start is None else [float(v) - float(start[0]) for v in start]
    res = coordinate_ascent(objective, x0, list(range(1, ell)), problem.opt.tol, problem.opt.max_iters)
    return LegendreResult(res.value, tuple(res.x), res.sweeps, res.evaluations)


@dataclass(frozen=True)
class GradResult:
    value: float
    error: float
    h: float


def grad_K(problem: BetaProblem, richardson: bool = True, start: Sequence | None = None) -> GradResult:
    """Central difference of ``s -> E^v_{alpha + s K_X}(mu)`` at 0.

    With ``richardson`` the step is halved once and extrapolated; the
    discrepancy between the two central differences is the error estimate.
    """
    h = float(problem.grad_step)
    oracle = problem.oracle
    for s in (h, -h):
        if float(oracle.V_twisted(s)) <= 0:
            raise NotBigError(f"alpha {s:+g} K_X is not big; use a smaller grad_step")
    if start is None:
        start = legendre_energy(problem, 0).t_star

    def central(step):
        gp = legendre_energy(problem, step, start).g
        gm = legendre_energy(problem, -step, start).g
        return (gp - gm) / (2.0 * step)

    d1 = central(h)
    if not richardson:
        return GradResult(d1, 0.0, h)
    d2 = central(h / 2.0)
    return GradResult(d2 + (d2 - d1) / 3.0, abs(d2 - d1), h)


def beta(problem: BetaProblem, richardson: bool = True) -> BetaReport:
    """``beta(mu_xi) = sum xi_i A_X(v_i) + grad_K g(xi)``."""
    entropy = sum((to_fraction(x) * v.log_discrepancy for x, v in zip(problem.xi, problem.valuations)), Fraction(0))
    leg = legendre_energy(problem, 0)
    grad = grad_K(problem, richardson, start=leg.t_star)
    value = float(entropy) + grad.value
    ratio = value / leg.g if leg.g > 0 else None
    return BetaReport(
        entropy=float(entropy),
        energy=leg.g,
        t_star=leg.t_star,
        grad_K=grad.value,
        grad_error=grad.error,
        beta=value,
        ratio=ratio,
        exact={"entropy": entropy},
    )


def problem_from_measure(
    mu: NAMeasure,
    quad: QuadConfig = QuadConfig(),
    opt: OptConfig = OptConfig(),
    grad_step=Fraction(1, 64),
) -> BetaProblem:
    """Curve-backend problem for a measure on model vertices (zero-mass atoms dropped)."""
    model = mu.model
    vals, xi = [], []
    for i, m in enumerate(mu.masses):
        if m == 0:
            continue
        p = divisorial_point(model, i)
        if p.is_trivial:
            vals.append(Valuation(p.label, None, Fraction(0), Fraction(0)))
        else:
            vals.append(Valuation(p.label, p.center, Fraction(1), p.scaling))
        xi.append(m)
    oracle = CurveOracle(model.curve.genus, model.V, sorted({v.divisor for v in vals if v.divisor}))
    return BetaProblem(oracle, tuple(vals), tuple(xi), quad, opt, grad_step)


# -- Monge-Ampere solver on a model ----------------------------------------------


def _model_masses_affine(model: SncModel, env, t_fixed: dict, unknowns: list):
    """Masses as affine functions of the unknown vertex values inside ``env``'s chamber."""
    L = vertical_lattice(model, check=False)
    support = list(env.zariski.support)
    curves = [L.curve(k) for k in support]
    gram = [[bilinear(L.form, a, b) for b in curves] for a in curves]

    def project(x: DivClass) -> DivClass:
        if not support:
            return x
        c = solve(gram, [bilinear(L.form, x, C) for C in curves])
        for ck, C in zip(c, curves):
            x = x - ck * C
        return x

    b = model.multiplicities
    E = [L.curve(model.curve_index(i)) for i in range(len(model.components))]
    base = model.A_class() + model.vertical([t_fixed.get(i, 0) * b[i] for i in range(len(b))])
    P0 = project(base)
    cols = [project(model.vertical([b[k] if j == k else 0 for j in range(len(b))])) for k in unknowns]
    V = model.V

    def mass_row(i):
        return (
            [b[i] * bilinear(L.form, col, E[i]) / V for col in cols],
            b[i] * bilinear(L.form, P0, E[i]) / V,
        )

    return mass_row


def _polish(model: SncModel, xi: Sequence[Fraction], t: Sequence):
    """Exact in-chamber solve of ``MA(P_A f) = xi``; None if the chamber guess is wrong."""
    t = [Fraction(v) for v in t]
    env = envelope(VerticalDivisor.from_values(model, t))
    S = list(env.zariski.support)
    if any(i < 0 or i >= len(model.components) for i in S) or any(xi[i] != 0 for i in S):
        return None
    free = [i for i in range(len(model.components)) if i not in S]
    ref = free[0]
    t = [v - t[ref] for v in t]
    unknowns = free[1:]
    fixed = {i: t[i] for i in range(len(t)) if i not in unknowns}
    row = _model_masses_affine(model, env, fixed, unknowns)
    if unknowns:
        mat, rhs = [], []
        for i in unknowns:
            coeffs, const = row(i)
            mat.append(coeffs)
            rhs.append(xi[i] - const)
        try:
            sol = solve(mat, rhs)
        except SingularSystemError:
            return None
        for i, v in zip(unknowns, sol):
            t[i] = v
    mu = ma_envelope(VerticalDivisor.from_values(model, t))
    if list(mu.masses) != list(xi):
        return None
    return t, mu


def solve_ma_divisorial(model: SncModel, xi: Sequence, opt: OptConfig = OptConfig()):
    """Find vertex values ``t*`` with ``MA_A(P_A f_{t*}) = mu_xi``.

    Maximizes ``E_A(P_A f_t) - xi.t`` (each energy evaluated exactly through
    the envelope) by coordinate ascent; after every sweep an exact in-chamber
    linear solve is attempted and accepted once it reproduces ``xi`` exactly.
    Returns ``(t_star, NAMeasure)``.
    """
    from .invariants import energy

    xi = [to_fraction(x) for x in xi]
    ncomp = len(model.components)
    if len(xi) != ncomp:
        raise ValueError(f"expected {ncomp} masses, got {len(xi)}")
    if any(x < 0 for x in xi) or sum(xi) != 1:
        raise ValueError("xi must be a probability vector")
    xf = [float(x) for x in xi]

    def objective(t):
        tf = [Fraction(v) for v in t]
        return float(energy(VerticalDivisor.from_values(model, tf))) - sum(a * b for a, b in zip(xf, t))

    found: dict = {}

    def try_polish(t):
        hit = _polish(model, xi, t)
        if hit is not None:
            found["t"], found["mu"] = hit
            return True
        return False

    if not try_polish([0.0] * ncomp):
        try:
            res = coordinate_ascent(objective, [0.0] * ncomp, list(range(1, ncomp)), opt.tol, opt.max_iters, try_polish)
        except ConvergenceError:
            raise
        if "t" not in found:
            t = [Fraction(v) for v in res.x]
            found["t"] = t
            found["mu"] = ma_envelope(VerticalDivisor.from_values(model, t))
    t_star, mu = found["t"], found["mu"]
    worst = max(abs(float(m - x)) for m, x in zip(mu.masses, xi))
    if worst > opt.tol:
        raise MeasureMismatchError(f"Monge-Ampere masses miss the target by {worst:.3g}")
    return tuple(t_star), mu


# -- stability scans ------------------------------------------------------------------


@dataclass(frozen=True)
class ScanReport:
    rows: tuple  # (xi, beta, energy, ratio)
    min_ratio: Optional[float]
    argmin: Optional[tuple]
    failures: tuple  # (xi, error message)
    note: str = "lower-bound heuristic: minimum over the sampled measures only"

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "xi": [fmt(x) if isinstance(x, Fraction) else fmt_float(x) for x in xi],
                    "beta": fmt_float(b),
                    "energy": fmt_float(e),
                    "ratio": fmt_float(r),
                }
                for xi, b, e, r in self.rows
            ],
            "min_ratio": None if self.min_ratio is None else fmt_float(self.min_ratio),
            "argmin": None if self.argmin is None else [fmt_float(x) for x in self.argmin],
            "failures": [{"xi": [fmt_float(x) for x in xi], "error": msg} for xi, msg in self.failures],
            "note": self.note,
        }


def _threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("KSTAB_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def stability_scan(problem: BetaProblem, grid: Sequence[Sequence], threads: Optional[int] = None) -> ScanReport:
    """Minimum of ``beta / E^v`` over a grid of interior mass vectors."""
    grid = [tuple(to_fraction(x) if not isinstance(x, float) else x for x in xi) for xi in grid]
    if not grid:
        raise ValueError("empty grid")

    def run(xi):
        if any(x <= 0 for x in xi):
            return xi, None, "grid point is not interior"
        try:
            rep = beta(problem.with_xi(xi))
        except (ArithmeticError, ValueError) as exc:
            return xi, None, f"{type(exc).__name__}: {exc}"
        if rep.ratio is None:
            return xi, None, "energy is not positive"
        return xi, rep, None

    n = _threads(threads)
    if n == 1:
        results = [run(xi) for xi in grid]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(run, grid))
    rows, failures = [], []
    for xi, rep, err in results:
        if err is not None:
            logger.warning("scan member %s failed: %s", xi, err)
            failures.append((xi, err))
        else:
            rows.append((xi, rep.beta, rep.energy, rep.ratio))
    if rows:
        best = min(rows, key=lambda r: r[3])
        return ScanReport(tuple(rows), best[3], tuple(best[0]), tuple(failures))
    return ScanReport((), None, None, tuple(failures))


# -- JSON ---------------------------------------------------------------------------------


def problem_from_json(doc: Mapping) -> BetaProblem:
    o = doc["oracle"]
    backend = o.get("backend")
    vals = []
    for v in doc["valuations"]:
        label = str(v["label"])
        trivial = v.get("trivial", False) or label == "trivial"
        divisor = None if trivial else str(v.get("divisor", label))
        vals.append(
            Valuation(
                label,
                divisor,
                to_fraction(v.get("A_X", 0 if trivial else 1)),
                to_fraction(v.get("r", 0 if trivial else 1)),
            )
        )
    divs = list(dict.fromkeys(v.divisor for v in vals if v.divisor is not None))
    if backend == "curve":
        c = o["curve"]
        oracle = CurveOracle(int(c["genus"]), to_fraction(c["V"]), divs)
    elif backend == "surface":
        s = o["surface"]
        L = IntersectionLattice.from_json(s["lattice"])
        F = {}
        for k, entry in enumerate(s["F"]):
            if isinstance(entry, Mapping):
                F[str(entry["label"])] = entry["class"]
            else:
                F[divs[k] if k < len(divs) else f"F{k + 1}"] = entry
        oracle = SurfaceOracle(L, s["alpha"], s["K"], F)
    else:
        raise ValueError(f"unknown oracle backend {backend!r}")
    quad = QuadConfig(**{k: doc.get("quad", {})[k] for k in ("tol", "max_depth") if k in doc.get("quad", {})})
    opt = OptConfig(**{k: doc.get("opt", {})[k] for k in ("tol", "max_iters") if k in doc.get("opt", {})})
    xi = [to_fraction(x) for x in doc["xi"]]
    return BetaProblem(oracle, tuple(vals), tuple(xi), quad, opt, to_fraction(doc.get("grad_step", "1/64")))
