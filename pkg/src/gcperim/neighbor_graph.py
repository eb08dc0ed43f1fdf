"""Crossing-edge counts and graph perimeter of the eps-neighbourhood graph."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numba
import numpy as np

from .sampling import LabeledCloud

__all__ = [
    "CutResult",
    "DegreeStats",
    "cut_count_naive",
    "cut_count_grid",
    "graph_perimeter",
    "degree_stats",
    "gper_from_count",
]

_NAIVE_BLOCK = 2048
# linear cell keys must fit comfortably in int64
_MAX_KEY_BITS = 62


@dataclass(frozen=True)
class CutResult:
    edge_count: int
    gper: float
    n: int
    eps: float


@dataclass(frozen=True)
class DegreeStats:
    mean_degree: float
    max_degree: int


def gper_from_count(edge_count: int, n: int, eps: float, d: int) -> float:
    """2 * cut / (n (n-1) eps^(d+1))."""
    return 2.0 * edge_count / (n * (n - 1) * eps ** (d + 1))


def cut_count_naive(cloud: LabeledCloud, eps: float) -> int:
    """Brute-force count of mixed-label pairs at distance <= eps."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    inside = cloud.points[cloud.labels]
    outside = cloud.points[~cloud.labels]
    eps2 = eps * eps
    total = 0
    for start in range(0, len(inside), _NAIVE_BLOCK):
        block = inside[start : start + _NAIVE_BLOCK]
        diff = block[:, None, :] - outside[None, :, :]
        total += int(np.count_nonzero(np.einsum("ijk,ijk->ij", diff, diff) <= eps2))
    return total


def _cells_per_axis(eps: float, d: int) -> int:
    # small margin keeps cell side strictly above eps despite rounding in x * m
    m = int(math.floor((1.0 - 1e-9) / eps))
    # fewer, larger cells stay correct (side >= eps); only the key range is capped
    return max(1, min(m, int(2 ** (_MAX_KEY_BITS / d))))


def _neighbour_offsets(d: int) -> np.ndarray:
    return np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)


def _bin_points(points: np.ndarray, labels: np.ndarray | None, m: int):
    """Sort points by linear cell key (and label within a cell).

    Returns sorted points, sorted labels, unique keys, cell start offsets,
    per-cell count of label-False points, and per-cell totals.
    """
    n, d = points.shape
    coords = np.minimum((points * m).astype(np.int64), m - 1)
    weights = m ** np.arange(d, dtype=np.int64)
    keys = coords @ weights
    if labels is None:
        order = np.argsort(keys, kind="stable")
    else:
        order = np.argsort(keys * 2 + labels, kind="stable")
    skeys = keys[order]
    uniq, starts, counts = np.unique(skeys, return_index=True, return_counts=True)
    spoints = np.ascontiguousarray(points[order])
    slabels = None if labels is None else np.ascontiguousarray(labels[order])
    return spoints, slabels, uniq, starts.astype(np.int64), counts.astype(np.int64)


@numba.njit(nogil=True, cache=True)
def _decode(key, m, d, out):
    for k in range(d):
        out[k] = key % m
        key //= m


@numba.njit(nogil=True, cache=True)
def _find(uniq, key):
    pos = np.searchsorted(uniq, key)
    if pos < uniq.shape[0] and uniq[pos] == key:
        return pos
    return -1


@numba.njit(nogil=True, cache=True)
def _cross_kernel(pts, uniq, starts, n_false, counts, offsets, m, eps2):
    d = pts.shape[1]
    total = np.int64(0)
    cell = np.empty(d, np.int64)
    for a in range(uniq.shape[0]):
        a_true = counts[a] - n_false[a]
        if a_true == 0:
            continue
        _decode(uniq[a], m, d, cell)
        t0 = starts[a] + n_false[a]
        t1 = starts[a] + counts[a]
        for o in range(offsets.shape[0]):
            key = np.int64(0)
            mult = np.int64(1)
            ok = True
            for k in range(d):
                c = cell[k] + offsets[o, k]
                if c < 0 or c >= m:
                    ok = False
                    break
                key += c * mult
                mult *= m
            if not ok:
                continue
            b = _find(uniq, key)
            if b < 0 or n_false[b] == 0:
                continue
            f0 = starts[b]
            f1 = starts[b] + n_false[b]
            for i in range(t0, t1):
                for j in range(f0, f1):
                    s = 0.0
                    for k in range(d):
                        diff = pts[i, k] - pts[j, k]
                        s += diff * diff
                    if s <= eps2:
                        total += 1
    return total


@numba.njit(nogil=True, cache=True)
def _degree_kernel(pts, uniq, starts, counts, offsets, m, eps2):
    n, d = pts.shape
    deg = np.zeros(n, np.int64)
    cell = np.empty(d, np.int64)
    for a in range(uniq.shape[0]):
        _decode(uniq[a], m, d, cell)
        for o in range(offsets.shape[0]):
            key = np.int64(0)
            mult = np.int64(1)
            ok = True
            for k in range(d):
                c = cell[k] + offsets[o, k]
                if c < 0 or c >= m:
                    ok = False
                    break
                key += c * mult
                mult *= m
            if not ok:
                continue
            b = _find(uniq, key)
            if b < 0:
                continue
            for i in range(starts[a], starts[a] + counts[a]):
                for j in range(starts[b], starts[b] + counts[b]):
                    if i == j:
                        continue
                    s = 0.0
                    for k in range(d):
                        diff = pts[i, k] - pts[j, k]
                        s += diff * diff
                    if s <= eps2:
                        deg[i] += 1
    return deg


def cut_count_grid(cloud: LabeledCloud, eps: float) -> int:
    """Same value as :func:`cut_count_naive`, via a cell grid of side >= eps.

    Each mixed pair is visited once, from the cell of its label-True end,
    and only cell pairs holding opposite labels are scanned.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if cloud.n == 0 or cloud.labels.all() or not cloud.labels.any():
        return 0
    m = _cells_per_axis(eps, cloud.d)
    if m < 3:
        return cut_count_naive(cloud, eps)
    pts, labels, uniq, starts, counts = _bin_points(cloud.points, cloud.labels, m)
    n_false = np.add.reduceat((~labels).astype(np.int64), starts)
    total = _cross_kernel(pts, uniq, starts, n_false, counts, _neighbour_offsets(cloud.d), m, eps * eps)
    return int(total)


def graph_perimeter(cloud: LabeledCloud, eps: float) -> CutResult:
    if cloud.n < 2:
        raise ValueError(f"graph perimeter needs n >= 2, got {cloud.n}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    count = cut_count_grid(cloud, eps)
    return CutResult(count, gper_from_count(count, cloud.n, eps, cloud.d), cloud.n, eps)


def degree_stats(cloud: LabeledCloud, eps: float) -> DegreeStats:
    """Mean and maximum vertex degree of the eps-graph (no self loops)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if cloud.n == 0:
        return DegreeStats(0.0, 0)
    m = _cells_per_axis(eps, cloud.d)
    # a single cell is a valid (if slow) grid, so no naive branch is needed here
    if m < 3:
        m = 1
    pts, _, uniq, starts, counts = _bin_points(cloud.points, None, m)
    deg = _degree_kernel(pts, uniq, starts, counts, _neighbour_offsets(cloud.d), m, eps * eps)
    return DegreeStats(float(deg.mean()), int(deg.max()))
