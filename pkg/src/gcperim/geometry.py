"""Test sets inside the unit cube with exact geometric ground truth.

Every shape answers membership, signed distance to its relative boundary
(the part of the boundary inside the open cube) and its exact relative
perimeter. Balls and axis slabs additionally provide the closed-form
opposite-side volume profile used by the non-local perimeter and the
U-statistic diagnostics.

Points are arrays whose last axis has length ``d``; all shape methods are
vectorised over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import cap_volume, unit_ball_volume

__all__ = [
    "Domain",
    "Ball",
    "AxisSlab",
    "Box",
    "EmptySet",
    "Shape",
    "CapabilityError",
    "contains",
    "exact_perimeter",
    "signed_distance",
    "phi_bar_exact",
    "lens_volume",
    "parse_shape",
    "format_shape",
]


class CapabilityError(ValueError):
    """The closed-form profile is not available for this shape/dimension/radius."""


@dataclass(frozen=True)
class Domain:
    """The open unit cube (0, 1)^d."""

    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"domain dimension must be an integer >= 2, got {self.d}")


def _as_points(x, d: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != d:
        raise ValueError(f"expected points with last axis {d}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball; must lie inside the closed unit cube."""

    center: tuple
    radius: float

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        Domain(len(center))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        if any(c - self.radius < 0.0 or c + self.radius > 1.0 for c in center):
            raise ValueError("ball must lie inside the closed unit cube")

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def exact_perimeter(self) -> float:
        return self.d * unit_ball_volume(self.d) * self.radius ** (self.d - 1)

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.d) * self.radius**self.d

    @property
    def dist_to_domain_boundary(self) -> float:
        return min(min(c - self.radius, 1.0 - c - self.radius) for c in self.center)

    @property
    def has_exact_profile(self) -> bool:
        return self.d in (2, 3)

    def contains(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        diff = x - np.asarray(self.center)
        return np.einsum("...i,...i->...", diff, diff) <= self.radius**2

    def signed_distance(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        return np.linalg.norm(x - np.asarray(self.center), axis=-1) - self.radius


@dataclass(frozen=True)
class AxisSlab:
    """Half cube {x : x[axis] <= threshold}; ``axis`` is 0-based."""

    axis: int
    threshold: float
    d: int

    def __post_init__(self):
        Domain(self.d)
        if not 0 <= self.axis < self.d:
            raise ValueError(f"axis {self.axis} out of range for d={self.d}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"slab threshold must lie in (0, 1), got {self.threshold}")

    @property
    def exact_perimeter(self) -> float:
        return 1.0

    @property
    def volume(self) -> float:
        return self.threshold

    @property
    def dist_to_domain_boundary(self) -> float:
        return 0.0

    @property
    def has_exact_profile(self) -> bool:
        return True

    def contains(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        return x[..., self.axis] <= self.threshold

    def signed_distance(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        return x[..., self.axis] - self.threshold


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box [lo, hi] inside the closed cube."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ValueError("box corners differ in dimension")
        Domain(len(lo))
        if any(not 0.0 <= a < b <= 1.0 for a, b in zip(lo, hi)):
            raise ValueError("box needs 0 <= lo < hi <= 1 componentwise")

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def _sides(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self._sides))

    @property
    def exact_perimeter(self) -> float:
        sides = self._sides
        total = 0.0
        for k in range(self.d):
            face = float(np.prod(np.delete(sides, k)))
            total += face * ((self.lo[k] > 0.0) + (self.hi[k] < 1.0))
        return total

    @property
    def dist_to_domain_boundary(self) -> float:
        return min(min(a, 1.0 - b) for a, b in zip(self.lo, self.hi))

    @property
    def has_exact_profile(self) -> bool:
        return False

    def contains(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        return np.all((x >= np.asarray(self.lo)) & (x <= np.asarray(self.hi)), axis=-1)

    def signed_distance(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        outside = np.linalg.norm(np.maximum(np.maximum(lo - x, x - hi), 0.0), axis=-1)
        # inside: nearest face that is not glued to the cube boundary
        inner = np.full(x.shape[:-1], np.inf)
        for k in range(self.d):
            if lo[k] > 0.0:
                inner = np.minimum(inner, x[..., k] - lo[k])
            if hi[k] < 1.0:
                inner = np.minimum(inner, hi[k] - x[..., k])
        return np.where(self.contains(x), -inner, outside)


@dataclass(frozen=True)
class EmptySet:
    """Omega = empty set; zero perimeter, nothing is ever inside."""

    d: int

    def __post_init__(self):
        Domain(self.d)

    exact_perimeter = 0.0
    volume = 0.0
    dist_to_domain_boundary = math.inf
    has_exact_profile = True

    def contains(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        return np.zeros(x.shape[:-1], dtype=bool)

    def signed_distance(self, x) -> np.ndarray:
        x = _as_points(x, self.d)
        return np.full(x.shape[:-1], np.inf)


Shape = Union[Ball, AxisSlab, Box, EmptySet]


def contains(shape: Shape, x) -> np.ndarray:
    return shape.contains(x)


def signed_distance(shape: Shape, x) -> np.ndarray:
    return shape.signed_distance(x)


def exact_perimeter(shape: Shape, domain: Domain | None = None) -> float:
    """Relative perimeter of ``shape`` in the cube, from closed-form geometry."""
    if domain is not None and domain.d != shape.d:
        raise ValueError(f"shape has d={shape.d} but domain has d={domain.d}")
    return float(shape.exact_perimeter)


def lens_volume(d: int, big: float, small, dist) -> np.ndarray:
    """Volume of the intersection of balls of radii ``big`` and ``small`` at
    centre distance ``dist``; closed forms for d = 2 and d = 3 only."""
    if d not in (2, 3):
        raise CapabilityError(f"lens closed form only for d in (2, 3), got d={d}")
    R = float(big)
    e = np.broadcast_to(np.asarray(small, dtype=float), np.shape(dist)).astype(float)
    c = np.asarray(dist, dtype=float)
    out = np.zeros(np.broadcast(e, c).shape)
    e, c = np.broadcast_arrays(e, c)
    alpha = unit_ball_volume(d)
    nested = c <= np.abs(R - e)
    out[nested] = alpha * np.minimum(R, e[nested]) ** d
    partial = ~nested & (c < R + e)
    if np.any(partial):
        cp, ep = c[partial], e[partial]
        if d == 2:
            # chord distances from each centre in factored form, then segment areas
            # r^2 * theta - a * h with theta from atan2; arccos loses accuracy near tangency
            R_minus_a = (ep - cp + R) * (ep + cp - R) / (2 * cp)
            e_minus_b = (R - cp + ep) * (R + cp - ep) / (2 * cp)
            a = R - R_minus_a
            b = ep - e_minus_b
            h = np.sqrt(np.maximum(R_minus_a * (R + a), 0.0))
            out[partial] = R**2 * np.arctan2(h, a) - a * h + ep**2 * np.arctan2(h, b) - b * h
        else:
            out[partial] = (
                np.pi
                * (R + ep - cp) ** 2
                * (cp**2 + 2 * cp * ep - 3 * ep**2 + 2 * cp * R + 6 * ep * R - 3 * R**2)
                / (12 * cp)
            )
    return out


def _ball_phi_bar(shape: Ball, x: np.ndarray, eps: float) -> np.ndarray:
    if shape.d not in (2, 3):
        raise CapabilityError(f"ball profile closed form only for d in (2, 3), got d={shape.d}")
    if not eps < shape.dist_to_domain_boundary:
        raise CapabilityError("eps must be below the ball's distance to the cube boundary")
    dist = np.linalg.norm(x - np.asarray(shape.center), axis=-1)
    lens = lens_volume(shape.d, shape.radius, eps, dist)
    ball = unit_ball_volume(shape.d) * eps**shape.d
    opposite = np.where(dist <= shape.radius, ball - lens, lens)
    return np.maximum(opposite, 0.0) / eps ** (shape.d + 1)


def _slab_phi_bar(shape: AxisSlab, x: np.ndarray, eps: float) -> np.ndarray:
    t = np.abs(shape.signed_distance(x)) / eps
    out = np.zeros(x.shape[:-1])
    tube = t <= 1.0
    if not np.any(tube):
        return out
    xt = x[tube]
    if np.any(xt - eps < 0.0) or np.any(xt + eps > 1.0):
        raise CapabilityError("B(x, eps) leaves the cube; the slab profile needs clipping")
    # cap_volume is scalar quadrature; tube points share few distinct heights in tests
    caps = np.array([cap_volume(shape.d, float(v)) for v in t[tube]])
    out[tube] = caps / eps
    return out


def phi_bar_exact(shape: Shape, x, eps: float) -> np.ndarray:
    """Closed-form average kernel: |B(x,eps) intersect opposite side| / eps^(d+1).

    Raises CapabilityError where no closed form applies; callers then fall
    back to the Monte Carlo profile.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    x = _as_points(x, shape.d)
    if isinstance(shape, EmptySet):
        return np.zeros(x.shape[:-1])
    if isinstance(shape, Ball):
        return _ball_phi_bar(shape, x, eps)
    if isinstance(shape, AxisSlab):
        return _slab_phi_bar(shape, x, eps)
    raise CapabilityError(f"no closed-form profile for {type(shape).__name__}")


def parse_shape(text: str, d: int | None = None) -> Shape:
    """Parse ``ball cx cy [cz ...] r``, ``slab axis threshold``,
    ``box lo1..lod hi1..hid`` or ``empty``.

    Slabs and the empty set carry no coordinates, so they take ``d`` from the
    caller. Slab axes are 0-based.
    """
    fields = text.split()
    if not fields:
        raise ValueError("empty shape specification")
    kind, args = fields[0].lower(), fields[1:]
    try:
        values = [float(a) for a in args]
    except ValueError as exc:
        raise ValueError(f"non-numeric field in shape spec {text!r}") from exc
    if kind == "ball":
        if len(values) < 3:
            raise ValueError("ball needs at least two centre coordinates and a radius")
        shape = Ball(tuple(values[:-1]), values[-1])
    elif kind == "slab":
        if len(values) != 2 or d is None:
            raise ValueError("slab needs 'axis threshold' and an explicit dimension")
        if values[0] != int(values[0]):
            raise ValueError(f"slab axis must be an integer, got {args[0]}")
        shape = AxisSlab(int(values[0]), values[1], int(d))
    elif kind == "box":
        if len(values) < 4 or len(values) % 2:
            raise ValueError("box needs 2*d coordinates")
        half = len(values) // 2
        shape = Box(tuple(values[:half]), tuple(values[half:]))
    elif kind == "empty":
        if d is None:
            raise ValueError("empty set needs an explicit dimension")
        shape = EmptySet(int(d))
    else:
        raise ValueError(f"unknown shape kind {kind!r}")
    if d is not None and shape.d != int(d):
        raise ValueError(f"shape {text!r} has dimension {shape.d}, expected {d}")
    return shape


def format_shape(shape: Shape) -> str:
    """Inverse of :func:`parse_shape`."""
    if isinstance(shape, Ball):
        return " ".join(["ball", *map(repr, shape.center), repr(shape.radius)])
    if isinstance(shape, AxisSlab):
        return f"slab {shape.axis} {shape.threshold!r}"
    if isinstance(shape, Box):
        return " ".join(["box", *map(repr, shape.lo), *map(repr, shape.hi)])
    return "empty"
