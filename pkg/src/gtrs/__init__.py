"""Generalized trust-region subproblems via congruent canonical forms."""

from .problem import GtrsProblem, Kind, Tolerances, eq, ineq, interval, worked_example

__version__ = "0.1.0"

__all__ = [
    "GtrsProblem",
    "Kind",
    "Tolerances",
    "eq",
    "ineq",
    "interval",
    "worked_example",
]
