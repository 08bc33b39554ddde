"""
Models Package
==============

Modelli di dominio (scenario, pattern, rate, allocazioni) e record di archivio.
"""

from .allocation import Allocation, BalanceResult, EnergyResult, WeightedSolution
from .patterns import PatternSet
from .rates import RateMode, RateTensor
from .records import BenchRecord, SolveRecord, SweepRecord
from .scenario import Scenario, build_scenario

__all__ = [
    "Allocation", "BalanceResult", "EnergyResult", "WeightedSolution",
    "PatternSet", "RateMode", "RateTensor",
    "SolveRecord", "SweepRecord", "BenchRecord",
    "Scenario", "build_scenario",
]
