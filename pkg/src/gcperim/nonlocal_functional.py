"""Non-local perimeter P_eps(Omega), the exact mean of the graph perimeter,
and the bias curve P_eps - sigma_d * Per as eps shrinks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import surface_tension, unit_ball_volume
from .geometry import AxisSlab, Ball, Box, CapabilityError, EmptySet, Shape, phi_bar_exact
from .quadrature import integrate_piecewise

__all__ = [
    "NonlocalEstimate",
    "TubeRegion",
    "BiasCurve",
    "InsufficientSignalError",
    "phi_bar_numeric",
    "phi_bar",
    "nonlocal_perimeter",
    "bias_curve",
    "uniform_in_ball",
]

DEFAULT_TOL = 1e-6
DEFAULT_SAMPLES = 4_000_000
_CHUNK = 500_000


class InsufficientSignalError(ValueError):
    """Too few bias values rise above their error bars to fit a slope."""


@dataclass(frozen=True)
class NonlocalEstimate:
    value: float
    error_bound: float
    method: str  # "exact_profile" or "monte_carlo"
    converged: bool = True


@dataclass(frozen=True)
class TubeRegion:
    """Points within ``eps`` of the relative boundary, on one or both sides."""

    shape: Shape
    eps: float
    side: str = "both"  # "inner", "outer" or "both"

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.side not in ("inner", "outer", "both"):
            raise ValueError(f"unknown tube side {self.side!r}")

    def contains(self, x) -> np.ndarray:
        sd = self.shape.signed_distance(x)
        if self.side == "inner":
            return (sd <= 0) & (sd >= -self.eps)
        if self.side == "outer":
            return (sd > 0) & (sd <= self.eps)
        return np.abs(sd) <= self.eps

    def radial_bounds(self) -> tuple[float, float]:
        """Radius range of the tube around a ball."""
        if not isinstance(self.shape, Ball):
            raise TypeError("radial bounds only exist for balls")
        r = self.shape.radius
        lo = max(0.0, r - self.eps) if self.side in ("inner", "both") else r
        hi = r + self.eps if self.side in ("outer", "both") else r
        return lo, hi

    @property
    def volume(self) -> float:
        """Exact volume inside the cube, for balls clear of the cube boundary and slabs."""
        shape, eps = self.shape, self.eps
        if isinstance(shape, Ball):
            if self.side != "inner" and eps > shape.dist_to_domain_boundary:
                raise CapabilityError("outer ball tube is clipped by the cube")
            lo, hi = self.radial_bounds()
            return unit_ball_volume(shape.d) * (hi**shape.d - lo**shape.d)
        if isinstance(shape, AxisSlab):
            inner = min(eps, shape.threshold)
            outer = min(eps, 1.0 - shape.threshold)
            return {"inner": inner, "outer": outer, "both": inner + outer}[self.side]
        if isinstance(shape, EmptySet):
            return 0.0
        raise CapabilityError(f"no closed-form tube volume for {type(shape).__name__}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform samples from the tube (balls and slabs)."""
        shape, eps = self.shape, self.eps
        if isinstance(shape, Ball):
            lo, hi = self.radial_bounds()
            d = shape.d
            radius = (lo**d + rng.random(size) * (hi**d - lo**d)) ** (1.0 / d)
            direction = rng.standard_normal((size, d))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            return np.asarray(shape.center) + radius[:, None] * direction
        if isinstance(shape, AxisSlab):
            if self.side != "inner":
                raise CapabilityError("slab tube sampling is implemented for the inner side")
            x = rng.random((size, shape.d))
            lo = max(0.0, shape.threshold - eps)
            x[:, shape.axis] = lo + (shape.threshold - lo) * x[:, shape.axis]
            return x
        raise CapabilityError(f"no tube sampler for {type(shape).__name__}")


def uniform_in_ball(rng: np.random.Generator, size: int, d: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal((size, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return direction * (radius * rng.random(size) ** (1.0 / d))[:, None]


def _in_cube(z: np.ndarray) -> np.ndarray:
    return np.all((z >= 0.0) & (z <= 1.0), axis=-1)


def phi_bar_numeric(shape: Shape, x, eps: float, m: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo profile at a single point ``x``; returns ``(value, standard_error)``.

    z is drawn uniformly from B(x, eps); the opposite-label indicator is
    zero whenever z falls outside the cube, which clips the ball to D.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if m < 1:
        raise ValueError(f"need at least one sample, got m={m}")
    x = np.asarray(x, dtype=float).reshape(shape.d)
    if abs(float(shape.signed_distance(x))) > eps:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    x_in = bool(shape.contains(x))
    hits = 0
    done = 0
    while done < m:
        k = min(_CHUNK, m - done)
        z = x + uniform_in_ball(rng, k, shape.d, eps)
        hits += int(np.count_nonzero(_in_cube(z) & (shape.contains(z) != x_in)))
        done += k
    scale = unit_ball_volume(shape.d) / eps
    p = hits / m
    se = scale * math.sqrt(p * (1.0 - p) / m) if m > 1 else scale
    return scale * p, se


def phi_bar(shape: Shape, x, eps: float, m: int = 20_000, seed: int = 0) -> np.ndarray:
    """Profile at many points: closed form when available, Monte Carlo per point otherwise."""
    x = np.asarray(x, dtype=float)
    try:
        return phi_bar_exact(shape, x, eps)
    except CapabilityError:
        pass
    flat = x.reshape(-1, shape.d)
    out = np.zeros(len(flat))
    tube = np.abs(shape.signed_distance(flat)) <= eps
    for i in np.flatnonzero(tube):
        out[i] = phi_bar_numeric(shape, flat[i], eps, m, seed + int(i))[0]
    return out.reshape(x.shape[:-1])


def _ball_exact(shape: Ball, eps: float, tol: float) -> NonlocalEstimate:
    d, r = shape.d, shape.radius
    layer = d * unit_ball_volume(d)
    center = np.asarray(shape.center)
    direction = np.zeros(d)
    direction[0] = 1.0

    def integrand(rho: float) -> float:
        x = center + rho * direction
        return layer * rho ** (d - 1) * float(phi_bar_exact(shape, x, eps))

    breaks = [max(0.0, r - eps), abs(r - eps), r, r + eps]
    value, err = integrate_piecewise(integrand, [b for b in breaks if b >= max(0.0, r - eps)], tol)
    return NonlocalEstimate(value, err, "exact_profile")


def _slab_exact(shape: AxisSlab, eps: float) -> NonlocalEstimate:
    # P = sum_j (-eps)^j C(d-1, j) * int_B |v_a| |v_1|..|v_j| dv, the j-th term
    # correcting for pairs cut off by the cube faces orthogonal to the slab
    d = shape.d
    terms = []
    for j in range(d):
        moment = math.gamma(0.5) ** (d - 1 - j) / math.gamma((d + j + 1) / 2 + 1)
        terms.append((-eps) ** j * math.comb(d - 1, j) * moment)
    value = math.fsum(terms)
    return NonlocalEstimate(value, 1e-14 * max(1.0, abs(value)) * d, "exact_profile")


def _monte_carlo(shape: Shape, eps: float, samples: int, seed: int, tol: float | None) -> NonlocalEstimate:
    """2 eps^-(d+1) * int_{inner tube} |B(x, eps) cap (D minus Omega)| dx by sampling."""
    d = shape.d
    rng = np.random.default_rng(seed)
    if isinstance(shape, (Ball, AxisSlab)):
        tube = TubeRegion(shape, eps, "inner")
        volume = tube.volume
        draw = lambda k: tube.sample(rng, k)  # noqa: E731
    elif isinstance(shape, Box):
        # the box itself encloses its inner tube; off-tube draws contribute zero
        lo, hi = np.asarray(shape.lo), np.asarray(shape.hi)
        volume = shape.volume
        draw = lambda k: lo + (hi - lo) * rng.random((k, d))  # noqa: E731
    else:
        raise CapabilityError(f"no sampler for {type(shape).__name__}")
    hits = 0
    done = 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        x = draw(k)
        y = x + uniform_in_ball(rng, k, d, eps)
        hits += int(np.count_nonzero(_in_cube(y) & ~shape.contains(y)))
        done += k
    scale = 2.0 * volume * unit_ball_volume(d) / eps
    p = hits / samples
    value = scale * p
    error_bound = 3.0 * scale * math.sqrt(max(p * (1.0 - p), 1.0 / samples) / samples)
    converged = tol is None or error_bound <= tol
    if not converged:
        warnings.warn(
            f"Monte Carlo budget of {samples} samples gives error bound {error_bound:.3g} > {tol:.3g}",
            RuntimeWarning,
            stacklevel=3,
        )
    return NonlocalEstimate(value, error_bound, "monte_carlo", converged)


def nonlocal_perimeter(
    shape: Shape,
    eps: float,
    tol: float = DEFAULT_TOL,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    method: str = "auto",
    mc_tol: float | None = None,
) -> NonlocalEstimate:
    """P_eps(Omega) = 2 eps^-(d+1) * int_Omega int_{D minus Omega} 1{|x-y| <= eps} dy dx.

    ``method="auto"`` uses the closed-form route for balls (d = 2, 3, eps
    below the distance to the cube boundary), slabs with eps at most the
    distance from the threshold to either cube face, and the empty set;
    everything else is sampled. ``tol`` is the absolute quadrature
    tolerance; ``mc_tol``, when given, is the error bound the sampled route
    must reach within ``samples`` draws before it warns.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if method not in ("auto", "exact_profile", "monte_carlo"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(shape, EmptySet):
        return NonlocalEstimate(0.0, 0.0, "exact_profile")
    if method != "monte_carlo":
        if isinstance(shape, Ball) and shape.d in (2, 3) and eps < shape.dist_to_domain_boundary:
            return _ball_exact(shape, eps, tol)
        if isinstance(shape, AxisSlab) and eps <= min(shape.threshold, 1.0 - shape.threshold):
            return _slab_exact(shape, eps)
        if method == "exact_profile":
            raise CapabilityError(f"no closed-form route for {shape!r} at eps={eps}")
    return _monte_carlo(shape, eps, samples, seed, mc_tol)


@dataclass(frozen=True)
class BiasCurve:
    eps: np.ndarray
    p_eps: np.ndarray
    bias: np.ndarray
    error_bound: np.ndarray
    used: np.ndarray  # rows entering the slope fit
    slope: float
    intercept: float
    estimates: tuple

    @property
    def abs_bias(self) -> np.ndarray:
        return np.abs(self.bias)


def bias_curve(
    shape: Shape,
    eps_list,
    tol: float = DEFAULT_TOL,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> BiasCurve:
    """Tabulate P_eps - sigma_d Per and fit log|bias| against log eps.

    Rows whose |bias| is within twice the error bound are left out of the fit.
    """
    eps_arr = np.asarray(sorted(set(float(e) for e in eps_list), reverse=True))
    if len(eps_arr) < 3:
        raise ValueError("bias curve needs at least three distinct eps values")
    target = surface_tension(shape.d) * shape.exact_perimeter
    estimates = tuple(nonlocal_perimeter(shape, e, tol, samples, seed + i) for i, e in enumerate(eps_arr))
    p = np.array([est.value for est in estimates])
    err = np.array([est.error_bound for est in estimates])
    bias = p - target
    used = np.abs(bias) > 2.0 * err
    if used.sum() < 2:
        raise InsufficientSignalError("fewer than two bias values exceed twice their error bound")
    slope, intercept = np.polyfit(np.log(eps_arr[used]), np.log(np.abs(bias[used])), 1)
    return BiasCurve(eps_arr, p, bias, err, used, float(slope), float(intercept), estimates)
