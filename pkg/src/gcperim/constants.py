"""Analytic constants: ball volumes, surface tension, cap volumes, C_d, rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.optimize import brentq

from .quadrature import adaptive_simpson

__all__ = [
    "RegimeClassification",
    "unit_ball_volume",
    "sphere_area",
    "surface_tension",
    "cap_volume",
    "variance_constant",
    "rate_f",
    "optimal_epsilon",
    "z_quantile",
    "normal_cdf",
]

CAP_TOL = 1e-12
VARIANCE_TOL = 1e-10
# relative slack when comparing eps against n**(-1/d) computed in floating point
_BOUNDARY_RTOL = 1e-12


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_area(k: int) -> float:
    """Surface area of the unit k-sphere (the boundary of the unit ball in R^(k+1))."""
    if k < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {k}")
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


@lru_cache(maxsize=None)
def surface_tension(d: int) -> float:
    """sigma_d = integral of |z_1| over the unit ball = 2 s_{d-2} / ((d+1)(d-1))."""
    if d < 2:
        raise ValueError(f"surface tension needs d >= 2, got {d}")
    return 2.0 * sphere_area(d - 2) / ((d + 1) * (d - 1))


def cap_volume(d: int, t: float) -> float:
    """Volume of the unit ball of R^d above the hyperplane x_d = t.

    Computed as alpha_{d-1} * int_t^1 (1 - s^2)^((d-1)/2) ds. With s = cos(theta)
    the integrand becomes sin(theta)^d on [0, arccos t], which is smooth at the
    pole, so the adaptive rule converges without endpoint refinement.
    """
    if d < 2:
        raise ValueError(f"cap volume needs d >= 2, got {d}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"cap height must lie in [0, 1], got {t}")
    if t == 1.0:
        return 0.0
    upper = math.acos(t)
    value, _ = adaptive_simpson(lambda th: math.sin(th) ** d, 0.0, upper, CAP_TOL)
    return unit_ball_volume(d - 1) * value


@lru_cache(maxsize=None)
def variance_constant(d: int) -> float:
    """C_d = 2 * int_0^1 cap_volume(d, t)^2 dt."""
    if d < 2:
        raise ValueError(f"variance constant needs d >= 2, got {d}")
    value, _ = adaptive_simpson(lambda t: cap_volume(d, t) ** 2, 0.0, 1.0, VARIANCE_TOL / 2)
    return 2.0 * value


@dataclass(frozen=True)
class RegimeClassification:
    regime: str  # "dense", "sparse" or "below_threshold"
    f_value: float


def rate_f(n: int, eps: float, d: int) -> RegimeClassification:
    """Deviation rate f(n, eps) and the regime it falls in.

    Dense when eps >= n^(-1/d) (ties included), sparse down to n^(-2/(d+1)).
    Below that threshold no convergence is guaranteed; the sparse formula is
    still reported so callers can tabulate it.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    dense_edge = n ** (-1.0 / d)
    sparse_edge = n ** (-2.0 / (d + 1))
    if eps >= dense_edge * (1.0 - _BOUNDARY_RTOL):
        return RegimeClassification("dense", 1.0 / math.sqrt(n * eps))
    f_sparse = 1.0 / (n * eps ** ((d + 1) / 2))
    if eps >= sparse_edge * (1.0 - _BOUNDARY_RTOL):
        return RegimeClassification("sparse", f_sparse)
    return RegimeClassification("below_threshold", f_sparse)


def optimal_epsilon(n: int, d: int, interior: bool) -> float:
    """Error-minimising connection radius with unit prefactor.

    Sets touching the cube boundary have bias of order eps, interior smooth
    sets order eps^2; balancing against f(n, eps) gives the exponents below.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if interior:
        exponent = 2.0 / 5.0 if d <= 5 else 4.0 / (d + 5)
    else:
        exponent = 1.0 / 3.0 if d <= 3 else 2.0 / (d + 3)
    return float(n) ** (-exponent)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def z_quantile(alpha: float) -> float:
    """Upper quantile Z with P(N(0,1) <= Z) = 1 - alpha, for alpha in (0, 0.5)."""
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    # the upper tail is evaluated with erfc so small alphas keep full precision
    return brentq(lambda z: 0.5 * math.erfc(z / math.sqrt(2.0)) - alpha, 0.0, 40.0, xtol=1e-14)
