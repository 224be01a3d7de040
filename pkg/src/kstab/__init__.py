"""Exact and numeric calculator for non-Archimedean K-stability invariants."""

from .lattice import (
    DivClass,
    IntersectionLattice,
    LatticeError,
    NotPseudoeffectiveError,
    ZariskiResult,
    chamber_radius,
    intersect,
    is_nef,
    restricted_volume,
    volume,
    zariski,
)
from .model import CurveData, ModelError, SncModel, blowup, build_model, divisorial_point, trivial_model, vertical_lattice
from .plfun import NAMeasure, VerticalDivisor, envelope, ma_envelope, mass_sum_check, normalize_ge_fiber, orthogonality_defect
from .invariants import IdentityViolation, InvariantReport, energy, entropy_envelope, report, twisted_energy
from .beta import (
    BetaProblem,
    BetaReport,
    CurveOracle,
    OptConfig,
    QuadConfig,
    SurfaceOracle,
    Valuation,
    f_profile,
    grad_K,
    legendre_energy,
    problem_from_measure,
    solve_ma_divisorial,
    stability_scan,
)

__version__ = "0.1.0"
