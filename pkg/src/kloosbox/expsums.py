"""Kloosterman, Ramanujan and hyper-Kloosterman sums, Fejér kernels, bounds.

All sums are evaluated in double precision.  Phases are reduced to an integer
residue ``r`` modulo ``q`` before ``exp(2 pi i r / q)`` is taken, so the
rounding error per term does not grow with the size of the frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import NotCoprime, check_budget
from .modarith import factorize, gcd3, inverse_table, unit_array

HYPER_BUDGET = 10**8
TABLE_BUDGET = 4 * 10**7


@dataclass(frozen=True)
class ExpSumValue:
    value: complex
    kind: str  # "kloosterman" | "hyper_kloosterman" | "ramanujan"
    params: tuple
    bound: float

    @property
    def within_bound(self) -> bool:
        return abs(self.value) <= self.bound + 1e-6


def e_q(r, q: int):
    """``exp(2 pi i r / q)`` for integer ``r`` (scalar or array), reduced mod q first."""
    return np.exp(2j * np.pi * (np.mod(r, q) / q))


def weil_bound(a: int, b: int, q: int) -> float:
    """Constant-1 Weil bound for S(a, b; q); the trivial bound phi(q) when a = b = 0 mod q."""
    m = factorize(q)
    if a % q == 0 and b % q == 0:
        return float(m.phi)
    return math.sqrt(gcd3(a, b, q)) * math.sqrt(q) * m.d


def kloosterman(a: int, b: int, q: int) -> ExpSumValue:
    """S(a, b; q) by direct summation over the units of Z/qZ."""
    u = unit_array(q)
    inv = inverse_table(q)[u % q]
    phase = (a % q) * u + (b % q) * inv
    value = complex(e_q(phase, q).sum())
    return ExpSumValue(value, "kloosterman", (a, b, q), weil_bound(a, b, q))


def ramanujan(b: int, q: int) -> float:
    """Ramanujan sum c_q(b) = S(0, b; q)."""
    return kloosterman(0, b, q).value.real


@lru_cache(maxsize=64)
def _kloosterman_table(q: int) -> np.ndarray:
    u = unit_array(q)
    inv = inverse_table(q)[u % q]
    r = np.arange(q, dtype=np.int64)
    left = e_q(np.outer(r, u), q)
    right = e_q(np.outer(r, inv), q)
    table = (left @ right.T).real
    table.setflags(write=False)
    return table


def kloosterman_table(q: int, *, limit: int = TABLE_BUDGET) -> np.ndarray:
    """Real matrix ``K`` with ``K[a, b] = S(a, b; q)`` for ``a, b`` in ``[0, q)``.

    Evaluated as a product of two character matrices; cached per q.
    """
    check_budget("kloosterman_table", q * q * max(1, len(unit_array(q))), limit)
    return _kloosterman_table(int(q))


def weinstein_bound(ks: Sequence[int], q: int) -> float:
    t = len(ks)
    m = factorize(q)
    prod = 1.0
    for k in ks[:-1]:
        prod *= math.sqrt(gcd3(k, ks[-1], q))
    return m.c_parity_const(t) * q ** ((t - 1) / 2) * t**m.omega * prod


def hyper_kloosterman(
    ks: Sequence[int], c: int, q: int, *, limit: int = HYPER_BUDGET
) -> ExpSumValue:
    """Sum of e((k_1 q_1 + ... + k_t q_t)/q) over unit tuples with product c mod q.

    The first t-1 coordinates run lexicographically over the units and the
    last one is solved for.
    """
    ks = tuple(int(k) for k in ks)
    t = len(ks)
    if t < 2:
        raise ValueError("hyper-Kloosterman sums need t >= 2")
    if math.gcd(c, q) != 1:
        raise NotCoprime(f"c = {c} is not coprime to q = {q}")
    u = unit_array(q) % q
    inv = inverse_table(q)
    check_budget("hyper_kloosterman", len(u) ** (t - 1), limit)
    # phase and product over the free coordinates, built one axis at a time
    phase = np.zeros(1, dtype=np.int64)
    prod = np.ones(1, dtype=np.int64)
    for k in ks[:-1]:
        phase = (phase[:, None] + (k % q) * u[None, :]).ravel() % q
        prod = (prod[:, None] * u[None, :]).ravel() % q
    last = (c % q) * inv[prod] % q
    phase = (phase + (ks[-1] % q) * last) % q
    value = complex(e_q(phase, q).sum())
    return ExpSumValue(value, "hyper_kloosterman", (ks, c, q), weinstein_bound(ks, q))


def solution_indicator(q: int, c: int, t: int) -> np.ndarray:
    """0/1 array of shape (q,)*t marking unit tuples with product c mod q."""
    if math.gcd(c, q) != 1:
        raise NotCoprime(f"c = {c} is not coprime to q = {q}")
    u = unit_array(q) % q
    inv = inverse_table(q)
    ind = np.zeros((q,) * t, dtype=np.int64)
    grids = np.meshgrid(*([u] * (t - 1)), indexing="ij")
    prod = np.ones_like(grids[0]) if grids else np.ones(1, dtype=np.int64)
    for g in grids:
        prod = prod * g % q
    last = (c % q) * inv[prod] % q
    ind[tuple(grids) + (last,)] = 1
    return ind


def hyper_kloosterman_table(q: int, c: int, t: int, *, limit: int = 10**7) -> np.ndarray:
    """All hyper-Kloosterman sums at once, indexed by frequencies in ``[0, q)^t``.

    Uses the t-dimensional FFT of the solution indicator; validated against
    :func:`hyper_kloosterman` in the test suite.
    """
    check_budget("hyper_kloosterman_table", q**t, limit)
    ind = solution_indicator(q, c, t)
    # fftn uses exp(-2 pi i k x / q); the sum here has the opposite sign
    return np.conj(np.fft.fftn(ind.astype(float)))


def fejer(k: int, L: int, q: int) -> float:
    """(sin(pi L k / q) / sin(pi k / q))^2, equal to L^2 when k = 0 mod q."""
    k %= q
    if k == 0:
        return float(L * L)
    num = math.sin(math.pi * ((L * k) % (2 * q)) / q)
    den = math.sin(math.pi * k / q)
    return (num / den) ** 2


def fejer_array(L: int, q: int) -> np.ndarray:
    """Vector of ``fejer(k, L, q)`` for ``k`` in ``[0, q)`` (index 0 holds L^2)."""
    k = np.arange(q, dtype=np.int64)
    out = np.empty(q, dtype=float)
    out[0] = float(L * L)
    if q > 1:
        kk = k[1:]
        num = np.sin(np.pi * ((L * kk) % (2 * q)) / q)
        den = np.sin(np.pi * kk / q)
        out[1:] = (num / den) ** 2
    return out


def fejer_mass(L: int, q: int) -> float:
    """Sum of the Fejér kernel over k = 1..q-1; equals qL - L^2 for 0 <= L <= q."""
    return float(fejer_array(L, q)[1:].sum())


def fejer_gcd_sum(L: int, q: int) -> float:
    """Sum over k = 1..q-1 of fejer(k, L, q) * gcd(k, q); at most q L d(q)."""
    k = np.arange(1, q, dtype=np.int64)
    return float((fejer_array(L, q)[1:] * np.gcd(k, q)).sum())


def _window(b: int, L: int, q: int) -> np.ndarray:
    """Residues of the torus interval (b, b+L] in ``[0, q)``."""
    return (b + 1 + np.arange(L, dtype=np.int64)) % q


def incomplete_kloosterman(b: int, L: int, k: int, c: int, q: int) -> complex:
    """Sum of e(-k c n^{-1} / q) over units n in the torus interval (b, b+L]."""
    if math.gcd(c, q) != 1:
        raise NotCoprime(f"c = {c} is not coprime to q = {q}")
    m = _window(b, L, q)
    m = m[np.gcd(m, q) == 1]
    inv = inverse_table(q)[m]
    return complex(e_q(-(k % q) * (c % q) * inv, q).sum())


def complete_incomplete(b: int, L: int, k: int, c: int, q: int) -> complex:
    """The same incomplete sum rewritten through complete Kloosterman sums.

    (1/q) * sum_{l=1}^{q} [sum_{m in (b, b+L]} e(lm/q)] * S(-l, -kc; q)
    """
    if math.gcd(c, q) != 1:
        raise NotCoprime(f"c = {c} is not coprime to q = {q}")
    m = _window(b, L, q)
    l = np.arange(1, q + 1, dtype=np.int64)
    geom = e_q(np.outer(l, m), q).sum(axis=1)
    complete = kloosterman_table(q)[(-l) % q, (-k * c) % q]
    return complex(geom @ complete) / q
