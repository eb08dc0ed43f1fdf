"""Adaptive Simpson quadrature with absolute-tolerance stopping."""

from __future__ import annotations

import math
from typing import Callable, Sequence


class QuadratureError(RuntimeError):
    """Raised when the requested tolerance cannot be met within the depth limit."""


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
    min_depth: int = 4,
    max_evals: int = 2_000_000,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``.

    Returns ``(value, error_estimate)``. Intervals are bisected until the
    Richardson error estimate of each leaf is below its share of ``tol``.
    ``min_depth`` forces a few uniform splits first so that narrow features
    are not skipped by a lucky coarse estimate. ``max_evals`` bounds the work
    when noise in ``f`` keeps the error estimate from ever settling.
    """
    if b == a:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    parts: list[float] = []
    errors: list[float] = []
    evals = 3
    while stack:
        if evals > max_evals:
            raise QuadratureError(f"tolerance {tol:g} not reached within {max_evals} evaluations")
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - s
        if depth >= min_depth and (abs(delta) <= 15.0 * eps or depth >= max_depth):
            if depth >= max_depth and abs(delta) > 15.0 * eps:
                raise QuadratureError(
                    f"tolerance {tol:g} not reached on [{lo!r}, {hi!r}] at depth {depth}"
                )
            parts.append(left + right + delta / 15.0)
            errors.append(abs(delta) / 15.0)
            continue
        # right pushed first so the left half is processed first (stable order)
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return sign * math.fsum(parts), math.fsum(errors)


def integrate_piecewise(
    f: Callable[[float], float],
    breakpoints: Sequence[float],
    tol: float = 1e-10,
) -> tuple[float, float]:
    """Integrate over consecutive intervals of sorted ``breakpoints``.

    Placing breakpoints at kinks of the integrand keeps Simpson's rule in
    its fast-convergence regime. The tolerance is split evenly.
    """
    pts = sorted(set(float(p) for p in breakpoints))
    if len(pts) < 2:
        return 0.0, 0.0
    share = tol / (len(pts) - 1)
    values, errors = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = adaptive_simpson(f, lo, hi, share)
        values.append(v)
        errors.append(e)
    return math.fsum(values), math.fsum(errors)
