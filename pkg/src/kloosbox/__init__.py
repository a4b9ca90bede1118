"""Congruences q_1 ... q_t = c (mod q) in short intervals: counts, moments, exponential sums."""

from .errors import BudgetExceeded, NotCoprime
from .modarith import Modulus, factorize, gcd3, mod_inverse, units

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "Modulus",
    "NotCoprime",
    "factorize",
    "gcd3",
    "mod_inverse",
    "units",
]
