"""Solution counts of q_1 ... q_t = c (mod q) in torus boxes and their moments.

Base points and residues are indexed by ``[0, q)``; the torus interval with
start ``a`` and length ``L`` is the wrapped window ``(a, a+L]``.  Because
``c`` is always a unit, every solution has unit coordinates, so the count in
a box does not depend on which coordinates are declared coprime.  The shapes
differ only in their main term:

* ``thm1``: t = 2, only the second coordinate restricted to units, main term
  ``L1 * Phi(b, L2) / q`` with ``Phi`` the number of units in ``(b, b+L2]``;
* ``thm3``: every coordinate restricted, main term ``(L/q)^t phi(q)^(t-1)``.

For t = 2 the second moment has denominator ``q^2`` and is carried as the
exact integer ``q^2 * S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .errors import NotCoprime, check_budget
from .expsums import fejer_array, hyper_kloosterman_table, kloosterman_table, solution_indicator
from .modarith import Modulus, factorize, inverse_table, unit_mask

GRID_BUDGET = 4000 * 4000
PAIRS_BUDGET = 10**8
SPECTRAL_BUDGET = 4 * 10**7
SPECTRAL_T_BUDGET = 10**7
SCAN_BUDGET = 10**7
COUNT_BUDGET = 10**8

# int64 accumulations below are guarded against this ceiling
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class TorusInterval:
    """The wrapped window ``(start, start + length]`` of residues mod q."""

    start: int
    length: int
    q: int

    def __post_init__(self):
        if not 0 <= self.length <= self.q:
            raise ValueError(f"interval length {self.length} outside [0, {self.q}]")
        object.__setattr__(self, "start", self.start % self.q)

    def __contains__(self, m: int) -> bool:
        return (m - self.start - 1) % self.q < self.length

    def residues(self) -> np.ndarray:
        return (self.start + 1 + np.arange(self.length, dtype=np.int64)) % self.q


@dataclass(frozen=True)
class BoxSpec:
    modulus: Modulus
    intervals: tuple[TorusInterval, ...]
    c: int
    coprime_flags: tuple[bool, ...]

    def __post_init__(self):
        q = self.modulus.q
        if len(self.intervals) < 2 or len(self.intervals) != len(self.coprime_flags):
            raise ValueError("a box needs t >= 2 intervals and one coprime flag per interval")
        if any(iv.q != q for iv in self.intervals):
            raise ValueError("all intervals must share the box modulus")
        if math.gcd(self.c, q) != 1:
            raise NotCoprime(f"c = {self.c} is not coprime to q = {q}")

    @property
    def t(self) -> int:
        return len(self.intervals)

    @property
    def shape(self) -> Optional[str]:
        if self.coprime_flags == (False, True):
            return "thm1"
        if all(self.coprime_flags):
            return "thm3"
        return None

    @classmethod
    def thm1(cls, q: int, c: int, a: int, b: int, L1: int, L2: int) -> "BoxSpec":
        return cls(
            factorize(q),
            (TorusInterval(a, L1, q), TorusInterval(b, L2, q)),
            c,
            (False, True),
        )

    @classmethod
    def thm3(cls, q: int, c: int, starts: Sequence[int], L: int) -> "BoxSpec":
        return cls(
            factorize(q),
            tuple(TorusInterval(a, L, q) for a in starts),
            c,
            (True,) * len(starts),
        )


@dataclass(frozen=True)
class MomentReport:
    q: int
    c: int
    t: int
    lengths: tuple[int, ...]
    k: int
    method: str  # "prefix" | "pairs" | "spectral"
    moment_value: float
    moment_exact_num: Optional[int]
    exact_den: Optional[int]
    main_term_kind: str  # "thm1" | "thm3"
    bound_kind: str  # "thm1" | "thm2" | "thm3" | "conj1"
    bound_value: float
    ratio: float

    @property
    def exact(self) -> Optional[Fraction]:
        if self.moment_exact_num is None:
            return None
        return Fraction(self.moment_exact_num, self.exact_den)


@dataclass(frozen=True)
class BadBoxReport:
    q: int
    c: int
    t: int
    L: int
    bad_count: int
    total: int
    fraction: float
    sample: tuple[tuple[int, ...], ...] = field(default=())


def _require_unit(c: int, q: int) -> None:
    if math.gcd(c, q) != 1:
        raise NotCoprime(f"c must be coprime to q (gcd({c}, {q}) = {math.gcd(c, q)})")


def _require_length(L: int, q: int) -> None:
    if not 0 <= L <= q:
        raise ValueError(f"L = {L} outside [0, {q}]")


# ---------------------------------------------------------------------------
# counting


def count_solutions(box: BoxSpec, *, limit: int = COUNT_BUDGET) -> int:
    """Exact number of solutions of the congruence inside ``box``.

    Enumerates every coordinate except the longest interval and solves for it.
    """
    q = box.modulus.q
    ivs = list(box.intervals)
    solve = max(range(box.t), key=lambda i: ivs[i].length)
    free = [iv for i, iv in enumerate(ivs) if i != solve]
    check_budget("count_solutions", math.prod(iv.length for iv in free), limit)
    if any(iv.length == 0 for iv in ivs):
        return 0
    mask = unit_mask(q)
    inv = inverse_table(q)
    prod = np.ones(1, dtype=np.int64)
    for iv in free:
        r = iv.residues()
        r = r[mask[r]]
        prod = (prod[:, None] * r[None, :]).ravel() % q
    need = (box.c % q) * inv[prod] % q
    target = ivs[solve]
    return int(np.count_nonzero((need - target.start - 1) % q < target.length))


def units_in_windows(q: int, L: int) -> np.ndarray:
    """``Phi[b]`` = number of units in ``(b, b+L]`` for each ``b`` in ``[0, q)``."""
    return window_sums(unit_mask(q).astype(np.int64), L, axis=0)


def main_term(box: BoxSpec) -> Fraction:
    q = box.modulus.q
    if box.shape == "thm1":
        first, second = box.intervals
        phi_b = int(np.count_nonzero(unit_mask(q)[second.residues()]))
        return Fraction(first.length * phi_b, q)
    if box.shape == "thm3":
        num = math.prod(iv.length for iv in box.intervals) * box.modulus.phi ** (box.t - 1)
        return Fraction(num, q**box.t)
    raise ValueError(f"no main term defined for coprime flags {box.coprime_flags}")


def window_sums(arr: np.ndarray, L: int, axis: int) -> np.ndarray:
    """Cyclic sums ``out[a] = arr[a+1] + ... + arr[a+L]`` (indices mod q) along ``axis``."""
    q = arr.shape[axis]
    _require_length(L, q)
    ext = np.concatenate([arr, np.take(arr, np.arange(L), axis=axis)], axis=axis)
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (1, 0)
    pre = np.pad(np.cumsum(ext, axis=axis), pad)
    hi = np.take(pre, np.arange(L + 1, L + 1 + q), axis=axis)
    lo = np.take(pre, np.arange(1, q + 1), axis=axis)
    return hi - lo


def box_counts(q: int, c: int, lengths: Sequence[int], *, limit: int = GRID_BUDGET) -> np.ndarray:
    """Counts ``N[a_1, ..., a_t]`` for every base tuple, via cyclic prefix sums."""
    _require_unit(c, q)
    t = len(lengths)
    check_budget("box_counts", q**t, limit)
    counts = solution_indicator(q, c, t)
    for axis, L in enumerate(lengths):
        counts = window_sums(counts, L, axis)
    return counts


# ---------------------------------------------------------------------------
# bounds


def thm1_bound(q: int, L1: int, L2: int) -> float:
    """``L1 L2 q d(q)^3`` (the two-sided bound with constant 1)."""
    return float(L1 * L2 * q * factorize(q).d ** 3)


def thm3_bound(q: int, L: int, t: int) -> float:
    m = factorize(q)
    cq = m.c_parity_const(t)
    return cq**2 * t ** (2 * m.omega) * q ** (t - 1) * L**t * m.d**t * (1 + t * (L + 1) ** (t - 1) / q)


def conjectured_envelope(q: int, L: int, k: int) -> float:
    """``L^k / q^(k/2 - 2)``: the conjectured k-th moment size with epsilon = 0."""
    return L**k / q ** (k / 2 - 2)


def _ratio(value: float, bound: float) -> float:
    return value / bound if bound > 0 else 0.0


def theorem_ratio(report: MomentReport) -> float:
    """Moment divided by the explicit right-hand side recorded in the report."""
    return _ratio(report.moment_value, report.bound_value)


def _report(q, c, t, lengths, k, method, exact, value, main_kind, bound_kind, bound):
    num = den = None
    if exact is not None:
        num, den = exact
        value = num / den
    return MomentReport(
        q=q,
        c=c,
        t=t,
        lengths=tuple(lengths),
        k=k,
        method=method,
        moment_value=float(value),
        moment_exact_num=num,
        exact_den=den,
        main_term_kind=main_kind,
        bound_kind=bound_kind,
        bound_value=float(bound),
        ratio=_ratio(float(value), float(bound)),
    )


def _power_sum(values: np.ndarray, k: int) -> int:
    """Exact ``sum |v|^k`` over an integer array, in Python integers."""
    vals, counts = np.unique(values, return_counts=True)
    return sum(int(n) * abs(int(v)) ** k for v, n in zip(vals.tolist(), counts.tolist()))


# ---------------------------------------------------------------------------
# second moment, t = 2


def _thm1_deviation(q: int, c: int, L1: int, L2: int, limit: int) -> np.ndarray:
    """``q * (N(a, b) - E(b))`` as an integer q x q array."""
    counts = box_counts(q, c, (L1, L2), limit=limit)
    phi_b = units_in_windows(q, L2)
    return q * counts - L1 * phi_b[None, :]


def second_moment_prefix(q: int, c: int, L1: int, L2: int, *, limit: int = GRID_BUDGET) -> MomentReport:
    """Exact second moment from the full table of box counts (cyclic 2-D prefix sums)."""
    _require_unit(c, q)
    _require_length(L1, q)
    _require_length(L2, q)
    dev = _thm1_deviation(q, c, L1, L2, limit)
    peak = int(np.abs(dev).max()) if dev.size else 0
    if peak * peak * q < _INT64_SAFE:
        rows = (dev * dev).sum(axis=1)
        num = sum(rows.tolist())
    else:
        num = _power_sum(dev, 2)
    kind = "thm1" if L1 == L2 else "thm2"
    return _report(q, c, 2, (L1, L2), 2, "prefix", (num, q * q), None, "thm1", kind, thm1_bound(q, L1, L2))


def overlap_weight(L: int, q: int) -> np.ndarray:
    """``w[d]`` = number of shifts ``a`` whose window ``(a, a+L]`` holds both ``x`` and ``x+d``.

    The complement of a window containing both points is an arc of ``q - L``
    residues fitting in one of the two gaps between them.
    """
    _require_length(L, q)
    d = np.arange(q, dtype=np.int64)
    w = np.maximum(0, L - d) + np.maximum(0, L - (q - d))
    w[0] = L
    return w


def _pair_weight_sum(xs: np.ndarray, ys: np.ndarray, wx: np.ndarray, wy: np.ndarray, q: int) -> int:
    total = 0
    step = max(1, 2**22 // max(1, len(xs)))
    for i in range(0, len(xs), step):
        dx = (xs[None, :] - xs[i : i + step, None]) % q
        dy = (ys[None, :] - ys[i : i + step, None]) % q
        total += int((wx[dx] * wy[dy]).sum())
    return total


def second_moment_pairs(q: int, c: int, L1: int, L2: int, *, limit: int = PAIRS_BUDGET) -> MomentReport:
    """Exact second moment in O(phi(q)^2) from pairs of solution points.

    ``sum_{a,b} N^2`` is a sum of overlap weights over ordered pairs of
    solution points, and ``sum_b Phi(b)^2`` one over ordered pairs of units.
    Since ``sum_a N(a, b) = L1 Phi(b)``, ``q^2 S = q^2 sum N^2 - q L1^2 sum Phi^2``.
    """
    _require_unit(c, q)
    _require_length(L1, q)
    _require_length(L2, q)
    mask = unit_mask(q)
    ys = np.flatnonzero(mask).astype(np.int64)
    check_budget("second_moment_pairs", len(ys) ** 2, limit)
    xs = (c % q) * inverse_table(q)[ys] % q
    w1 = overlap_weight(L1, q)
    w2 = overlap_weight(L2, q)
    sum_n2 = _pair_weight_sum(xs, ys, w1, w2, q)
    sum_phi2 = _pair_weight_sum(ys, ys, np.ones(q, dtype=np.int64), w2, q)
    num = q * q * sum_n2 - q * L1 * L1 * sum_phi2
    kind = "thm1" if L1 == L2 else "thm2"
    return _report(q, c, 2, (L1, L2), 2, "pairs", (num, q * q), None, "thm1", kind, thm1_bound(q, L1, L2))


def second_moment_spectral(q: int, c: int, L: int, *, limit: int = SPECTRAL_BUDGET) -> MomentReport:
    """Second moment (equal sides) from Kloosterman sums weighted by Fejér kernels.

    S = q^-2 sum_{k=1}^{q-1} F(k) sum_{l=0}^{q-1} F(l) S(-l, -kc; q)^2

    with ``F`` the Fejér kernel of length L and ``F(0) = L^2``; the ``l = 0``
    column is the Ramanujan-sum term.
    """
    _require_unit(c, q)
    _require_length(L, q)
    table = kloosterman_table(q, limit=limit)
    fej = fejer_array(L, q)
    r = np.arange(q, dtype=np.int64)
    # sq[l, k] = S(-l, -k c; q)^2
    sq = table[np.ix_((-r) % q, (-r * c) % q)] ** 2
    inner = fej @ sq
    value = float(fej[1:] @ inner[1:]) / (q * q)
    return _report(q, c, 2, (L, L), 2, "spectral", None, value, "thm1", "thm1", thm1_bound(q, L, L))


# ---------------------------------------------------------------------------
# t variables, all coordinates units


def second_moment_prefix_t(q: int, c: int, L: int, t: int, *, limit: int = SCAN_BUDGET) -> MomentReport:
    """Exact all-coprime second moment over every base tuple; carried as ``q^(2t) S``."""
    _require_unit(c, q)
    _require_length(L, q)
    counts = box_counts(q, c, (L,) * t, limit=limit)
    dev = q**t * counts.astype(object) - L**t * factorize(q).phi ** (t - 1)
    num = int(reduce(lambda acc, v: acc + v * v, dev.ravel().tolist(), 0))
    return _report(q, c, t, (L,) * t, 2, "prefix", (num, q ** (2 * t)), None, "thm3", "thm3", thm3_bound(q, L, t))


def second_moment_spectral_t(q: int, c: int, L: int, t: int, *, limit: int = SPECTRAL_T_BUDGET) -> MomentReport:
    """All-coprime second moment from hyper-Kloosterman sums and Fejér kernels.

    S = q^-t sum over frequency tuples except all-zero of prod F(k_i) |H(k)|^2
    """
    _require_unit(c, q)
    _require_length(L, q)
    if t < 2:
        raise ValueError("t must be at least 2")
    power = np.abs(hyper_kloosterman_table(q, c, t, limit=limit)) ** 2
    fej = fejer_array(L, q)
    weight = reduce(np.multiply.outer, [fej] * t)
    weight[(0,) * t] = 0.0
    value = float((weight * power).sum()) / q**t
    return _report(q, c, t, (L,) * t, 2, "spectral", None, value, "thm3", "thm3", thm3_bound(q, L, t))


# ---------------------------------------------------------------------------
# higher moments and bad boxes


def kth_moment(q: int, c: int, L: int, k: int, shape: str = "thm1", *, limit: int = GRID_BUDGET) -> MomentReport:
    """``sum_{a,b} |N(a, b) - main|^k`` for t = 2, computed exactly for every k."""
    _require_unit(c, q)
    _require_length(L, q)
    if k < 1:
        raise ValueError("moment order must be positive")
    if shape == "thm1":
        dev = _thm1_deviation(q, c, L, L, limit)
        den = q**k
    elif shape == "thm3":
        counts = box_counts(q, c, (L, L), limit=limit)
        dev = q * q * counts - L * L * factorize(q).phi
        den = q ** (2 * k)
    else:
        raise ValueError(f"unknown shape {shape!r}")
    num = _power_sum(dev, k)
    if k == 2:
        bound_kind = "thm1" if shape == "thm1" else "thm3"
        bound = thm1_bound(q, L, L) if shape == "thm1" else thm3_bound(q, L, 2)
    else:
        bound_kind, bound = "conj1", conjectured_envelope(q, L, k)
    return _report(q, c, 2, (L, L), k, "prefix", (num, den), None, shape, bound_kind, bound)


def bad_boxes(q: int, c: int, L: int, t: int = 2, *, sample_size: int = 16, limit: int = SCAN_BUDGET) -> BadBoxReport:
    """Count base tuples whose box holds no solution; sample the first few in lexicographic order."""
    _require_unit(c, q)
    _require_length(L, q)
    counts = box_counts(q, c, (L,) * t, limit=limit)
    empty = counts == 0
    bad = int(np.count_nonzero(empty))
    total = q**t
    sample = tuple(tuple(int(v) for v in row) for row in np.argwhere(empty)[:sample_size])
    return BadBoxReport(q=q, c=c, t=t, L=L, bad_count=bad, total=total, fraction=bad / total, sample=sample)
