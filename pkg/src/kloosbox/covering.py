"""Covering the square [0, q]^2 by discs around the points of xy = 1 (mod q).

Samples sit on the grid ``(i h, j h)`` with ``h = q / M`` for an integer
number of divisions ``M``.  After scaling every coordinate by ``M`` both the
samples ``(i q, j q)`` and the points ``(M x, M y)`` are integers, so squared
distances are exact int64 values and no float ties can occur.

The distance field is computed column by column as the lower envelope of the
parabolas ``(j q - M y)^2 + (i q - M x)^2``, one per point; each unit ``y``
carries exactly one point, so the first pass of the usual separable distance
transform is a direct evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import check_budget
from .modarith import inverse_table, unit_array

DEFAULT_DIVISIONS = 2048
GRID_BUDGET = 25_000_000


@dataclass(frozen=True)
class SolutionPointSet:
    q: int
    points: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class CoveringReport:
    q: int
    divisions: int
    grid_step: float
    r_max: float
    error_bound: float  # true covering radius lies in [r_max, r_max + error_bound]
    curve: tuple[tuple[float, float], ...]
    theta: Optional[float] = None
    r_tilde_estimate: Optional[float] = None
    torus: bool = False


def solution_points(q: int) -> SolutionPointSet:
    """Points ``(x, y)`` with ``1 <= x, y <= q-1`` and ``xy = 1 (mod q)``."""
    if q < 2:
        raise ValueError("solution points need q >= 2")
    u = unit_array(q)
    u = u[u < q]
    inv = inverse_table(q)[u]
    return SolutionPointSet(q, tuple(zip(u.tolist(), inv.tolist())))


def divisions_for(q: int, grid_step=None) -> int:
    """Number of grid cells per side for a step that must divide ``q`` evenly."""
    if grid_step is None:
        return DEFAULT_DIVISIONS
    step = Fraction(grid_step).limit_denominator(10**9)
    if step <= 0:
        raise ValueError("grid_step must be positive")
    m = Fraction(q) / step
    if m.denominator != 1:
        raise ValueError(f"grid_step {grid_step} does not split [0, {q}] into whole cells")
    return int(m)


def _sites(q: int, torus: bool) -> tuple[np.ndarray, np.ndarray]:
    """Point coordinates ``(xs, ys)``, with periodic images when ``torus``."""
    pts = np.array(solution_points(q).points, dtype=np.int64).reshape(-1, 2)
    if not torus:
        return pts[:, 0], pts[:, 1]
    shifts = np.array([-q, 0, q], dtype=np.int64)
    xs = (pts[:, 0][:, None, None] + shifts[:, None]).repeat(3, axis=2).ravel()
    ys = (pts[:, 1][:, None, None] + shifts[None, :]).repeat(3, axis=1).ravel()
    return xs, ys


def _column_envelope(sites: list[int], vals: list[int], queries: np.ndarray) -> np.ndarray:
    """``min_p (Q - sites[p])^2 + vals[p]`` for every query ``Q``; sites strictly ascending.

    Breakpoints are kept as exact fractions ``num / den``.
    """
    n = len(sites)
    keep = [0]
    br_num = [None]  # breakpoint where keep[i] starts; None means -infinity
    br_den = [1]
    for p in range(1, n):
        sp, fp = sites[p], vals[p]
        while True:
            v = keep[-1]
            num = (fp + sp * sp) - (vals[v] + sites[v] * sites[v])
            den = 2 * (sp - sites[v])
            if br_num[-1] is not None and num * br_den[-1] <= br_num[-1] * den:
                keep.pop()
                br_num.pop()
                br_den.pop()
                continue
            break
        keep.append(p)
        br_num.append(num)
        br_den.append(den)
    s = np.array([sites[v] for v in keep], dtype=np.int64)
    f = np.array([vals[v] for v in keep], dtype=np.int64)
    bounds = np.array([nu / de for nu, de in zip(br_num[1:], br_den[1:])], dtype=float)
    piece = np.searchsorted(bounds, queries, side="right")
    best = (queries - s[piece]) ** 2 + f[piece]
    # float breakpoints can misplace a query lying within rounding of a boundary
    for shift in (-1, 1):
        alt = np.clip(piece + shift, 0, len(keep) - 1)
        best = np.minimum(best, (queries - s[alt]) ** 2 + f[alt])
    return best


@lru_cache(maxsize=8)
def _distance_field(q: int, m: int, torus: bool) -> np.ndarray:
    xs, ys = _sites(q, torus)
    order = np.argsort(ys, kind="stable")
    xs, ys = xs[order], ys[order]
    queries = np.arange(m + 1, dtype=np.int64) * q
    site_pos = (m * ys).tolist()
    field = np.empty((m + 1, m + 1), dtype=np.int64)
    if torus:
        # several x-images share each y-image; keep the nearest per column
        uniq, start = np.unique(ys, return_index=True)
        site_pos = (m * uniq).tolist()
    for i in range(m + 1):
        dx2 = (i * q - m * xs) ** 2
        if torus:
            vals = np.minimum.reduceat(dx2, start).tolist()
        else:
            vals = dx2.tolist()
        field[i] = _column_envelope(site_pos, vals, queries)
    field.setflags(write=False)
    return field


def distance_field(q: int, divisions: int = DEFAULT_DIVISIONS, *, torus: bool = False, limit: int = GRID_BUDGET) -> np.ndarray:
    """Squared distances, scaled by ``divisions^2``, from each grid sample to the nearest point.

    Entry ``[i, j]`` belongs to the sample ``(i h, j h)``.
    """
    if q < 2:
        raise ValueError("covering needs q >= 2")
    check_budget("covering grid", (divisions + 1) ** 2, limit)
    return _distance_field(int(q), int(divisions), bool(torus))


def distance_field_direct(q: int, divisions: int, *, limit: int = GRID_BUDGET) -> np.ndarray:
    """Brute-force oracle for :func:`distance_field` (flat square), O(samples x points)."""
    check_budget("covering grid", (divisions + 1) ** 2, limit)
    xs, ys = _sites(q, False)
    grid = np.arange(divisions + 1, dtype=np.int64) * q
    out = np.empty((divisions + 1, divisions + 1), dtype=np.int64)
    dy2 = (grid[:, None] - divisions * ys[None, :]) ** 2
    for i in range(divisions + 1):
        dx2 = (i * q - divisions * xs) ** 2
        out[i] = (dy2 + dx2[None, :]).min(axis=1)
    return out


def _max_radius(field: np.ndarray, m: int) -> float:
    return math.sqrt(int(field.max())) / m


def covering_radius_max(q: int, grid_step=None, *, torus: bool = False, curve_points: int = 65, limit: int = GRID_BUDGET) -> CoveringReport:
    """Largest sampled distance to the nearest point, with a coverage curve."""
    m = divisions_for(q, grid_step)
    field = distance_field(q, m, torus=torus, limit=limit)
    h = q / m
    r_max = _max_radius(field, m)
    err = h * math.sqrt(2) / 2
    return CoveringReport(
        q=q,
        divisions=m,
        grid_step=h,
        r_max=r_max,
        error_bound=err,
        curve=_curve(field, m, r_max + err, curve_points),
        torus=torus,
    )


def _fraction_within(field: np.ndarray, m: int, r: float) -> float:
    return float(np.count_nonzero(field <= (r * m) ** 2)) / field.size


def _curve(field: np.ndarray, m: int, r_top: float, n: int) -> tuple[tuple[float, float], ...]:
    flat = np.sort(field, axis=None)
    rs = np.linspace(0.0, r_top, n)
    hits = np.searchsorted(flat, (rs * m) ** 2, side="right")
    return tuple((float(r), float(k) / flat.size) for r, k in zip(rs, hits))


def coverage_fraction(q: int, r: float, grid_step=None, *, torus: bool = False, limit: int = GRID_BUDGET) -> float:
    """Fraction of grid samples within distance ``r`` of some point."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    m = divisions_for(q, grid_step)
    return _fraction_within(distance_field(q, m, torus=torus, limit=limit), m, r)


def r_tilde(q: int, theta: float = 0.99, grid_step=None, *, torus: bool = False, limit: int = GRID_BUDGET) -> CoveringReport:
    """Smallest radius whose discs cover at least a ``theta`` fraction of the samples.

    Read off exactly as an order statistic of the sampled distances.
    """
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    report = covering_radius_max(q, grid_step, torus=torus, limit=limit)
    m = report.divisions
    field = distance_field(q, m, torus=torus, limit=limit)
    idx = max(0, math.ceil(theta * field.size) - 1)
    r = math.sqrt(int(np.partition(field, idx, axis=None)[idx])) / m
    return CoveringReport(
        q=q,
        divisions=m,
        grid_step=report.grid_step,
        r_max=report.r_max,
        error_bound=report.error_bound,
        curve=report.curve,
        theta=theta,
        r_tilde_estimate=r,
        torus=torus,
    )
