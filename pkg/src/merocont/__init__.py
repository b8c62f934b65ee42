"""Meromorphic continuation of perturbed Dirichlet series.

A series ``sum a_n (c_n**sigma (1 + h(c_n)))**s`` whose perturbation ``h``
has an asymptotic power expansion at 0 is continued past its abscissa of
convergence as head + finite combination of shifted base continuations +
holomorphic remainder, each piece with a certified error bound.
"""

__version__ = "0.1.0"

from .bases import (
    GeometricBase,
    HurwitzBase,
    ZetaBase,
    geometric_continuation,
    hurwitz_zeta_em,
    make_custom,
    make_flat_weierstrass,
    make_geometric_plus_b,
    make_multi_geometric,
    make_poly_reciprocal,
    make_zeta_beta,
)
from .boundary import (
    CounterexampleSeries,
    GapSequence,
    boundary_scan,
    decompose_counterexample,
)
from .config import build_series, load_config, series_config
from .engine import (
    ExtensionValue,
    TruncationPlan,
    consistency_check,
    evaluate_extension,
    evaluate_many,
    plan_truncation,
)
from .errors import (
    AccuracyUnreachable,
    BranchViolation,
    CapacityExceeded,
    DomainError,
    MeroContError,
    NearPole,
    TruncationUnavailable,
)
from .oracle import direct_sum, overlap_compare
from .poles import predicted_poles, residue_at, verify_pole
from .series import PerturbationExpansion, PerturbationFunction, PerturbedSeries

__all__ = [
    "AccuracyUnreachable",
    "BranchViolation",
    "CapacityExceeded",
    "CounterexampleSeries",
    "DomainError",
    "ExtensionValue",
    "GapSequence",
    "GeometricBase",
    "HurwitzBase",
    "MeroContError",
    "NearPole",
    "PerturbationExpansion",
    "PerturbationFunction",
    "PerturbedSeries",
    "TruncationPlan",
    "TruncationUnavailable",
    "ZetaBase",
    "boundary_scan",
    "build_series",
    "consistency_check",
    "decompose_counterexample",
    "direct_sum",
    "evaluate_extension",
    "evaluate_many",
    "geometric_continuation",
    "hurwitz_zeta_em",
    "load_config",
    "make_custom",
    "make_flat_weierstrass",
    "make_geometric_plus_b",
    "make_multi_geometric",
    "make_poly_reciprocal",
    "make_zeta_beta",
    "overlap_compare",
    "plan_truncation",
    "predicted_poles",
    "residue_at",
    "series_config",
    "verify_pole",
]
