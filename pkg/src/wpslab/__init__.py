"""Exact and numerical tools for cubes of Piatetski-Shapiro primes."""
from .errors import BudgetError, ConsistencyError, PreconditionError, WpsLabError
from .ps_core import Exponent, parse_gamma

__version__ = "0.1.0"

__all__ = ["BudgetError", "ConsistencyError", "Exponent", "PreconditionError", "WpsLabError", "parse_gamma"]
