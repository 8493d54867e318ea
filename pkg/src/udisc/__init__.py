"""Optimal unambiguous discrimination of mixed quantum states."""

from .closed_form import PreconditionError, solve_orthogonal, solve_rank1_pair
from .ensemble import StateEnsemble, build_ensemble, check_feasibility, signal_spaces
from .solver import Measurement, Solution, solve, upper_bound, verify_optimality
from .symmetry import CGUEnsemble, GUEnsemble, solve_cgu, solve_gu, symmetrize, validate_group

__all__ = [
    "CGUEnsemble",
    "GUEnsemble",
    "Measurement",
    "PreconditionError",
    "Solution",
    "StateEnsemble",
    "build_ensemble",
    "check_feasibility",
    "signal_spaces",
    "solve",
    "solve_cgu",
    "solve_gu",
    "solve_orthogonal",
    "solve_rank1_pair",
    "symmetrize",
    "upper_bound",
    "validate_group",
    "verify_optimality",
]
