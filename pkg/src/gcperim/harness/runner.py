"""Seeded trial execution; results are independent of the worker count."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

from ..geometry import Shape
from ..neighbor_graph import cut_count_grid, gper_from_count
from ..sampling import make_cloud, spawn_trial_seed

__all__ = ["map_trials", "simulate_cuts", "cut_trial"]

T = TypeVar("T")


def map_trials(fn: Callable[[int], T], trials: int, workers: int = 1) -> list[T]:
    """Evaluate ``fn(0..trials-1)``; results come back in index order.

    Each trial derives its own generator from its index, so scheduling never
    touches the random streams. The heavy kernels release the GIL, which is
    what makes threads worthwhile here.
    """
    if workers <= 1 or trials <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def cut_trial(shape: Shape, n: int, eps: float, seed: int) -> tuple[int, float]:
    cloud = make_cloud(shape, n, seed)
    count = cut_count_grid(cloud, eps)
    return count, gper_from_count(count, n, eps, shape.d)


def simulate_cuts(
    shape: Shape, n: int, eps: float, cell_seed: int, trials: int, workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Edge counts and graph perimeters of ``trials`` independent clouds."""
    results = map_trials(lambda t: cut_trial(shape, n, eps, spawn_trial_seed(cell_seed, t)), trials, workers)
    edges = np.array([r[0] for r in results], dtype=np.int64)
    gper = np.array([r[1] for r in results], dtype=float)
    return edges, gper
