"""Exact modular and multiplicative arithmetic.

Residues returned by :func:`mod_inverse` and :func:`units` live in ``[1, q]``
so that sums over ``1..q`` translate without shifting.  Everything here is
pure and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotCoprime

MAX_MODULUS = 2**63 - 1
_TRIAL_LIMIT = 10**6


@dataclass(frozen=True)
class Modulus:
    """A modulus together with its factorization and arithmetic functions."""

    q: int
    factors: tuple[tuple[int, int], ...]
    phi: int
    d: int
    omega: int

    def c_parity_const(self, t: int) -> float:
        """Constant in the hyper-Kloosterman bound: 1 for odd q, 2^((t+1)/2) for even q."""
        return 1.0 if self.q % 2 else 2.0 ** ((t + 1) / 2)

    @property
    def is_prime(self) -> bool:
        return len(self.factors) == 1 and self.factors[0][1] == 1


def _trial_divide(n: int, limit: int) -> tuple[dict[int, int], int]:
    found: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
    p = 5
    while p <= limit and p * p <= n:
        for f in (p, p + 2):
            while n % f == 0:
                found[f] = found.get(f, 0) + 1
                n //= f
        p += 6
    return found, n


@lru_cache(maxsize=4096)
def factorize(q: int) -> Modulus:
    """Factor ``q`` and populate a :class:`Modulus`.

    Trial division handles everything up to 10^12 on its own; a cofactor
    surviving trial division by all primes below 10^6 is handed to sympy.
    """
    q = int(q)
    if q <= 0:
        raise ValueError(f"modulus must be positive, got {q}")
    if q > MAX_MODULUS:
        raise ValueError(f"modulus {q} exceeds 2^63 - 1")
    found, rest = _trial_divide(q, _TRIAL_LIMIT)
    if rest > 1:
        if rest < _TRIAL_LIMIT * _TRIAL_LIMIT:
            found[rest] = found.get(rest, 0) + 1
        else:
            from sympy import factorint

            for p, e in factorint(rest).items():
                found[int(p)] = found.get(int(p), 0) + int(e)
    factors = tuple(sorted(found.items()))
    phi = q
    d = 1
    for p, e in factors:
        phi = phi // p * (p - 1)
        d *= e + 1
    return Modulus(q=q, factors=factors, phi=phi, d=d, omega=len(factors))


def mod_inverse(n: int, q: int) -> int:
    """Inverse of ``n`` modulo ``q`` as a residue in ``[1, q]``."""
    if q <= 0:
        raise ValueError(f"modulus must be positive, got {q}")
    if math.gcd(n, q) != 1:
        raise NotCoprime(f"{n} is not invertible modulo {q}")
    r = pow(n % q, -1, q) if q > 1 else 0
    return r or q


def gcd3(a: int, b: int, q: int) -> int:
    """gcd(a mod q, b mod q, q); gcd(0, 0, q) is q."""
    return math.gcd(a % q, b % q, q)


@lru_cache(maxsize=256)
def _unit_array(q: int) -> np.ndarray:
    r = np.arange(1, q + 1, dtype=np.int64)
    arr = r[np.gcd(r, q) == 1]
    arr.setflags(write=False)
    return arr


def unit_array(q: int) -> np.ndarray:
    """Units of ``Z/qZ`` in ``[1, q]`` ascending, as a read-only int64 array."""
    if q <= 0:
        raise ValueError(f"modulus must be positive, got {q}")
    return _unit_array(int(q))


def units(q: int) -> list[int]:
    """Units of ``Z/qZ`` in ``[1, q]`` ascending; ``units(1) == [1]``."""
    return unit_array(q).tolist()


@lru_cache(maxsize=256)
def _inverse_table(q: int) -> np.ndarray:
    inv = np.zeros(q, dtype=np.int64)
    for u in _unit_array(q).tolist():
        inv[u % q] = pow(u, -1, q) if q > 1 else 0
    inv.setflags(write=False)
    return inv


def inverse_table(q: int) -> np.ndarray:
    """Array ``inv`` of length q with ``inv[r]`` the inverse of unit ``r`` in ``[0, q)``.

    Non-units map to 0.  For q = 1 the single entry is 0.
    """
    if q <= 0:
        raise ValueError(f"modulus must be positive, got {q}")
    return _inverse_table(int(q))


def unit_mask(q: int) -> np.ndarray:
    """Boolean mask over residues ``0..q-1`` marking units ."""
    return np.gcd(np.arange(q, dtype=np.int64), q) == 1
