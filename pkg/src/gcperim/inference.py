"""Perimeter estimates, asymptotic confidence intervals and the one-sided
perimeter test built on the graph perimeter."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import surface_tension, variance_constant, z_quantile
from .neighbor_graph import CutResult

__all__ = [
    "PerimeterEstimate",
    "ConfidenceInterval",
    "TestDecision",
    "WindowWarning",
    "estimate_from_cut",
    "confidence_interval",
    "test_statistic",
    "hypothesis_test",
    "in_clt_window",
]


class WindowWarning(UserWarning):
    """Parameters lie outside the range where the interval is guaranteed."""


@dataclass(frozen=True)
class PerimeterEstimate:
    gper: float
    n: int
    eps: float
    d: int

    def __post_init__(self):
        if self.gper < 0:
            raise ValueError(f"graph perimeter must be nonnegative, got {self.gper}")

    @property
    def per_hat(self) -> float:
        return self.gper / surface_tension(self.d)


@dataclass(frozen=True)
class ConfidenceInterval:
    a_minus: float
    a_plus: float
    clamped: bool
    width_mode: str  # "true" when the width uses a known perimeter, "plugin" otherwise

    def __iter__(self):
        return iter((self.a_minus, self.a_plus))

    def __contains__(self, value: float) -> bool:
        return self.a_minus < value < self.a_plus


@dataclass(frozen=True)
class TestDecision:
    __test__ = False  # keep pytest from collecting it

    l_n: float
    z_alpha: float
    accept: bool
    rho: float
    alpha: float


def estimate_from_cut(cut: CutResult, d: int) -> PerimeterEstimate:
    return PerimeterEstimate(cut.gper, cut.n, cut.eps, d)


def in_clt_window(n: int, eps: float, d: int) -> bool:
    """Crude check of n^(-1/d) << eps << n^(-1/5) for d in (2, 3, 4)."""
    return d in (2, 3, 4) and n ** (-1.0 / d) < eps < n ** (-1.0 / 5)


def _half_width(est: PerimeterEstimate, per: float, z: float) -> float:
    return math.sqrt(4.0 * variance_constant(est.d) * per / (est.n * est.eps)) * z


def confidence_interval(
    est: PerimeterEstimate, alpha: float = 0.05, per_for_width: float | None = None
) -> ConfidenceInterval:
    """(1/sigma_d) * (GPer -/+ sqrt(4 C_d Per / (n eps)) * Z_{alpha/2}), lower end clamped at 0.

    ``per_for_width`` is the perimeter used inside the width; leave it out to
    plug in the estimate itself.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    if per_for_width is None:
        per, mode = est.per_hat, "plugin"
    else:
        per, mode = float(per_for_width), "true"
        if not per > 0:
            raise ValueError(f"perimeter used for the width must be positive, got {per}")
    if not in_clt_window(est.n, est.eps, est.d):
        warnings.warn(
            f"n={est.n}, eps={est.eps:g}, d={est.d} is outside the asymptotic coverage window",
            WindowWarning,
            stacklevel=2,
        )
    sigma = surface_tension(est.d)
    half = _half_width(est, per, z_quantile(alpha / 2)) if per > 0 else 0.0
    lower = (est.gper - half) / sigma
    upper = (est.gper + half) / sigma
    return ConfidenceInterval(max(lower, 0.0), upper, lower < 0.0, mode)


def test_statistic(est: PerimeterEstimate, rho: float) -> float:
    """l_n = sqrt(n eps / (4 C_d rho)) * (GPer - sigma_d rho)."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    scale = math.sqrt(est.n * est.eps / (4.0 * variance_constant(est.d) * rho))
    return scale * (est.gper - surface_tension(est.d) * rho)


test_statistic.__test__ = False


def hypothesis_test(est: PerimeterEstimate, rho: float, alpha: float = 0.05) -> TestDecision:
    """Accept H0: Per <= rho when l_n <= Z_alpha."""
    l_n = test_statistic(est, rho)
    z = z_quantile(alpha)
    return TestDecision(l_n, z, l_n <= z, float(rho), float(alpha))
