"""
Controllers Package
==================

Motori di ottimizzazione e controller degli esperimenti.
"""

from .base_controller import BaseController
from .energy_solver import SolverParams, minimize_energy, solve_weighted_lp
from .experiment_controller import ExperimentController, SweepSpec
from .feasibility import is_feasible, rate_balance, strict_start

__all__ = [
    "BaseController",
    "SolverParams",
    "minimize_energy",
    "solve_weighted_lp",
    "ExperimentController",
    "SweepSpec",
    "is_feasible",
    "rate_balance",
    "strict_start",
]
