"""Seeded uniform point clouds on the open unit cube and their labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Shape

__all__ = ["SampleConfig", "LabeledCloud", "sample_uniform", "label_cloud", "spawn_trial_seed", "make_cloud"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    # bijective 64-bit finaliser
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def spawn_trial_seed(base_seed: int, trial_index: int) -> int:
    """Derive the seed of trial ``trial_index`` from ``base_seed``.

    base + golden * (index + 1) is injective in the index modulo 2^64 (the
    multiplier is odd) and the finaliser is a bijection, so distinct indices
    always give distinct seeds.
    """
    if trial_index < 0:
        raise ValueError(f"trial index must be >= 0, got {trial_index}")
    return _splitmix64((int(base_seed) + _GOLDEN * (int(trial_index) + 1)) & _MASK64)


@dataclass(frozen=True)
class SampleConfig:
    n: int
    d: int
    seed: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")


@dataclass(frozen=True)
class LabeledCloud:
    points: np.ndarray
    labels: np.ndarray
    seed: int | None = None
    d: int = field(init=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        labels = np.asarray(self.labels, dtype=bool)
        if points.ndim != 2:
            raise ValueError(f"points must be an (n, d) array, got shape {points.shape}")
        if labels.shape != (points.shape[0],):
            raise ValueError("labels must have one entry per point")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "d", points.shape[1])

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def complement(self) -> "LabeledCloud":
        return LabeledCloud(self.points, ~self.labels, self.seed)


def sample_uniform(config: SampleConfig) -> np.ndarray:
    """``n`` points with i.i.d. Uniform(0, 1) coordinates.

    Draws come from PCG64 seeded with ``config.seed``; the stream is
    platform independent. Exact zeros (probability 2^-53 per draw) are
    redrawn so every coordinate lies in the open interval.
    """
    rng = np.random.default_rng(config.seed)
    size = config.n * config.d
    try:
        flat = rng.random(size)
    except MemoryError as exc:
        raise MemoryError(f"cannot allocate {config.n} x {config.d} sample") from exc
    zeros = np.flatnonzero(flat == 0.0)
    while zeros.size:
        flat[zeros] = rng.random(zeros.size)
        zeros = zeros[flat[zeros] == 0.0]
    return flat.reshape(config.n, config.d)


def label_cloud(points, shape: Shape, seed: int | None = None) -> LabeledCloud:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        points = points.reshape(-1, shape.d)
    if points.shape[1] != shape.d:
        raise ValueError(f"points have d={points.shape[1]}, shape has d={shape.d}")
    return LabeledCloud(points, shape.contains(points), seed)


def make_cloud(shape: Shape, n: int, seed: int) -> LabeledCloud:
    """Sample and label in one step; a pure function of (shape, n, seed)."""
    return label_cloud(sample_uniform(SampleConfig(n, shape.d, seed)), shape, seed)
