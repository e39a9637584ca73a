"""Exact n-fold integer programming over Graver bases."""

from .core import INF, BoundsBox, DimensionError, IntMatrix, conformal_leq
from .graver import (
    Bimatrix, GraverBasis, extended_graver, graver_basis, graver_complexity_bound,
    nfold_graver, nfold_matrix,
)
from .objectives import (
    External, Linear, PiecewiseLinearConvex, PowerAbsDev, SeparableObjective, Shifted,
)
from .solver import (
    GeneralizedInstance, NFoldInstance, SolveResult, Status, augment_to_optimum,
    check_finiteness, find_feasible, maximize_composite, minimize_distance, minimize_linear,
    minimize_separable, minimize_weighted, solve_nfold_distance, solve_nfold_generalized,
    solve_nfold_linear, solve_nfold_max, solve_nfold_separable,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "BoundsBox",
    "DimensionError",
    "IntMatrix",
    "conformal_leq",
    "Bimatrix",
    "GraverBasis",
    "extended_graver",
    "graver_basis",
    "graver_complexity_bound",
    "nfold_graver",
    "nfold_matrix",
    "External",
    "Linear",
    "PiecewiseLinearConvex",
    "PowerAbsDev",
    "SeparableObjective",
    "Shifted",
    "GeneralizedInstance",
    "NFoldInstance",
    "SolveResult",
    "Status",
    "augment_to_optimum",
    "check_finiteness",
    "find_feasible",
    "maximize_composite",
    "minimize_distance",
    "minimize_linear",
    "minimize_separable",
    "minimize_weighted",
    "solve_nfold_distance",
    "solve_nfold_generalized",
    "solve_nfold_linear",
    "solve_nfold_max",
    "solve_nfold_separable",
]
