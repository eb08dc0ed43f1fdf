"""Hoeffding decomposition GPer - P_eps = 2 U1 + U2 of the graph perimeter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Ball, EmptySet, Shape
from .neighbor_graph import cut_count_grid, gper_from_count
from .nonlocal_functional import TubeRegion, nonlocal_perimeter, phi_bar
from .sampling import LabeledCloud

__all__ = ["HoeffdingTerms", "g1", "g2", "phi_pair", "decompose", "g1_variance", "centering_constant"]

CENTERING_TOL = 1e-8


@dataclass(frozen=True)
class HoeffdingTerms:
    gper: float
    p_eps: float
    u1: float
    u2: float
    g1_samples: np.ndarray

    @property
    def identity_residual(self) -> float:
        return self.gper - self.p_eps - 2.0 * self.u1 - self.u2


def centering_constant(shape: Shape, eps: float) -> float:
    """P_eps at the tight tolerance the decomposition is built on."""
    return nonlocal_perimeter(shape, eps, tol=CENTERING_TOL).value


def phi_pair(x, y, shape: Shape, eps: float) -> np.ndarray:
    """eps^-(d+1) * 1{|x-y| <= eps} * |1_Omega(x) - 1_Omega(y)|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    close = np.einsum("...i,...i->...", diff, diff) <= eps * eps
    mixed = shape.contains(x) != shape.contains(y)
    return (close & mixed) / eps ** (shape.d + 1)


def g1(x, shape: Shape, eps: float, p_eps: float) -> np.ndarray:
    """phi_bar(x) - P_eps; points off the eps-tube get -P_eps without evaluating the profile."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, shape.d)
    out = np.full(len(flat), -float(p_eps))
    tube = np.abs(shape.signed_distance(flat)) <= eps
    if np.any(tube):
        out[tube] += phi_bar(shape, flat[tube], eps)
    return out.reshape(x.shape[:-1])


def g2(x, y, shape: Shape, eps: float, p_eps: float) -> np.ndarray:
    """phi(x, y) - phi_bar(x) - phi_bar(y) + P_eps."""
    return phi_pair(x, y, shape, eps) - g1(x, shape, eps, p_eps) - g1(y, shape, eps, p_eps) - p_eps


def decompose(cloud: LabeledCloud, shape: Shape, eps: float, p_eps: float | None = None) -> HoeffdingTerms:
    """First- and second-order canonical parts of the graph perimeter.

    The pair sum of g2 is rearranged into the crossing-edge count plus single
    sums over the profile, so the cost is that of one cut count.
    """
    n = cloud.n
    if n < 2:
        raise ValueError(f"decomposition needs n >= 2, got {n}")
    if p_eps is None:
        p_eps = centering_constant(shape, eps)
    count = cut_count_grid(cloud, eps)
    gper = gper_from_count(count, n, eps, cloud.d)
    g1_vals = g1(cloud.points, shape, eps, p_eps)
    u1 = math.fsum(g1_vals) / n
    phi_sum = math.fsum(g1_vals) + n * p_eps
    pair_sum = count / eps ** (cloud.d + 1)
    u2 = 2.0 * pair_sum / (n * (n - 1)) - 2.0 * phi_sum / n + p_eps
    return HoeffdingTerms(gper, float(p_eps), u1, u2, g1_vals)


def g1_variance(shape: Shape, eps: float, m: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Var(g1(X)) for uniform X, with standard error.

    Var = int_D phi_bar^2 - P_eps^2. The profile vanishes off the eps-tube, so
    X is drawn uniformly from the tube and weighted by its exact volume.
    """
    if isinstance(shape, EmptySet):
        return 0.0, 0.0
    if not isinstance(shape, Ball) or not eps < shape.dist_to_domain_boundary:
        raise ValueError("g1 variance needs an interior ball with eps below its distance to the cube boundary")
    p_eps = centering_constant(shape, eps)
    tube = TubeRegion(shape, eps, "both")
    volume = tube.volume
    rng = np.random.default_rng(seed)
    x = tube.sample(rng, m)
    sq = phi_bar(shape, x, eps) ** 2
    second = volume * math.fsum(sq) / m
    se = volume * float(np.std(sq, ddof=1)) / math.sqrt(m) if m > 1 else math.inf
    return second - p_eps**2, se
