"""Built-in identity and bound sweeps run by ``kloosbox verify``.

Each check walks a fixed parameter grid and returns how many cases it tried,
how many violated the tolerance, and the worst observed error or ratio.
Cases are mapped through an executor in order, so results do not depend on
the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import expsums, moments
from .modarith import factorize, units


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    violations: int
    worst: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


def sample_units(q: int, n: int = 3) -> list[int]:
    """``n`` evenly spaced units of Z/qZ (fewer if there are not enough)."""
    u = units(q)
    if len(u) <= n:
        return u
    idx = sorted({round(i * (len(u) - 1) / (n - 1)) for i in range(n)})
    return [u[i] for i in idx]


def lengths_for(q: int) -> list[int]:
    return sorted({1, math.isqrt(q), q // 2, q - 1, q} - {0})


def _run(name: str, cases: Iterable, fn: Callable, threads: int) -> CheckResult:
    cases = list(cases)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(fn, cases))
    else:
        out = [fn(c) for c in cases]
    bad = sum(1 for ok, _ in out if not ok)
    worst = max((w for _, w in out), default=0.0)
    return CheckResult(name, len(out), bad, float(worst))


def _moment_cases(q_lo: int, q_hi: int):
    for q in range(q_lo, q_hi + 1):
        for c in sample_units(q):
            for L in lengths_for(q):
                yield q, c, L


def spectral_case(case) -> tuple[bool, float]:
    q, c, L = case
    exact = moments.second_moment_prefix(q, c, L, L).moment_value
    spec = moments.second_moment_spectral(q, c, L).moment_value
    err = abs(spec - exact)
    return err <= max(1e-6 * exact, 1e-6 * q * L * L), err


def pairs_case(case) -> tuple[bool, float]:
    q, c, L = case
    a = moments.second_moment_prefix(q, c, L, L).moment_exact_num
    b = moments.second_moment_pairs(q, c, L, L).moment_exact_num
    return a == b, float(abs(a - b))


def envelope_case(case) -> tuple[bool, float]:
    q, c, L = case
    rep = moments.second_moment_prefix(q, c, L, L)
    r = rep.moment_value / (L * L * q * factorize(q).d ** 3)
    return r <= 2.0, r


def weil_case(q: int) -> tuple[bool, float]:
    table = expsums.kloosterman_table(q)
    r = np.arange(q)
    g = np.gcd(np.gcd(r[:, None], r[None, :]), q)
    bound = np.sqrt(g) * math.sqrt(q) * factorize(q).d
    ratio = np.abs(table) / bound
    ratio[0, 0] = 0.0
    excess = np.abs(table) - bound
    excess[0, 0] = -np.inf
    return bool(excess.max() <= 1e-6), float(ratio.max())


def frequency_sample(q: int, t: int = 3, n: int = 256, seed: int = 20070101) -> list[tuple[int, ...]]:
    """``n`` distinct frequency tuples in ``[1, q]^t``: a few structured ones, then seeded draws.

    Every tuple is returned when there are at most ``n`` of them.
    """
    total = q**t
    if total <= n:
        return [tuple(int(v) + 1 for v in idx) for idx in np.ndindex(*(q,) * t)]
    fixed = [(q,) * t, (1,) * t, tuple(range(1, t + 1)), (q,) * (t - 1) + (1,), (1,) + (q,) * (t - 1)]
    fixed = list(dict.fromkeys(tuple((k - 1) % q + 1 for k in ks) for ks in fixed))
    taken = set(fixed)
    rng = np.random.default_rng(seed + q)
    out = list(fixed)
    for flat in rng.permutation(total).tolist():
        if len(out) >= n:
            break
        ks = tuple(int(v) + 1 for v in np.unravel_index(flat, (q,) * t))
        if ks not in taken:
            taken.add(ks)
            out.append(ks)
    return out


def weinstein_case(case) -> tuple[bool, float]:
    q, c = case
    worst = 0.0
    ok = True
    for ks in frequency_sample(q):
        v = expsums.hyper_kloosterman(ks, c, q)
        ok &= abs(v.value) <= v.bound + 1e-6
        worst = max(worst, abs(v.value) / v.bound)
    return ok, worst


def fejer_case(q: int) -> tuple[bool, float]:
    worst = 0.0
    ok = True
    d = factorize(q).d
    for L in range(q + 1):
        err = abs(expsums.fejer_mass(L, q) - (q * L - L * L))
        ok &= err <= 1e-6 * q * max(L, 1)
        ok &= expsums.fejer_gcd_sum(L, q) <= q * L * d + 1e-6
        worst = max(worst, err)
    return ok, worst


def completion_case(case) -> tuple[bool, float]:
    q, c, L, k = case
    worst = 0.0
    for b in range(q):
        a = expsums.incomplete_kloosterman(b, L, k, c, q)
        z = expsums.complete_incomplete(b, L, k, c, q)
        worst = max(worst, abs(a - z))
    return worst <= 1e-6 * q, worst


def _completion_cases(q_hi: int):
    for q in range(2, q_hi + 1):
        for c in sorted({1, q - 1}):
            for L in sorted({0, 1, math.isqrt(q), q // 2, q}):
                for k in sorted({1, 2, q - 1}):
                    yield q, c, L, k


def mass_case(case) -> tuple[bool, float]:
    q, L = case
    total = int(moments.box_counts(q, 1, (L, L)).sum())
    expected = L * L * factorize(q).phi
    return total == expected, float(abs(total - expected))


def t_identity_case(case) -> tuple[bool, float]:
    q, c, L = case
    exact = moments.second_moment_prefix_t(q, c, L, 3).moment_value
    spec = moments.second_moment_spectral_t(q, c, L, 3).moment_value
    err = abs(spec - exact)
    return err <= max(1e-6 * exact, 1e-6 * q * q * L**3), err


def run_all(max_q: int = 50, threads: int = 1) -> list[CheckResult]:
    """The full identity and bound suite over ``q <= max_q``."""
    hi = max(3, max_q)
    results = [
        _run("spectral_identity", _moment_cases(3, hi), spectral_case, threads),
        _run("prefix_pairs_agreement", _moment_cases(3, hi), pairs_case, threads),
        _run("thm1_envelope", _moment_cases(3, hi), envelope_case, threads),
        _run("weil_bound", range(1, hi + 1), weil_case, threads),
        _run(
            "weinstein_bound",
            [(q, c) for q in range(3, min(hi, 40) + 1) for c in sorted({1, q - 1})],
            weinstein_case,
            threads,
        ),
        _run("fejer_mass_and_gcd_sum", range(1, hi + 1), fejer_case, threads),
        _run("completion_identity", _completion_cases(hi), completion_case, threads),
        _run(
            "mass_identity",
            [(q, L) for q in range(1, hi + 1) for L in sorted({1, math.isqrt(q), q})],
            mass_case,
            threads,
        ),
        _run(
            "t3_spectral_identity",
            [
                (q, c, L)
                for q in range(5, min(hi, 15) + 1, 2)
                for c in sorted({1, q - 1})
                for L in sorted({1, 2, q // 2, q})
            ],
            t_identity_case,
            threads,
        ),
    ]
    return results
