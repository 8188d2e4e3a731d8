"""Small deterministic search utilities: golden-section minimization and
bracketed bisection root finding.

These are intentionally simple and dependency-free so that the
characterization measures can document exactly how their optima are
located (coarse scan, then golden section; scan, then bisection).
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi, the golden-section ratio


def golden_section_min(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
) -> tuple[float, float]:
    """Minimize a unimodal scalar function on [lo, hi].

    Returns ``(x_min, f(x_min))`` with the abscissa located to within
    ``tol``.  Deterministic for a given bracket.
    """
    if hi < lo:
        lo, hi = hi, lo
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = func(d)
    x = c if fc < fd else d
    return x, min(fc, fd)


def golden_section_min_vec(
    func: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    tol: float = 1e-9,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section minimization over independent brackets.

    ``func`` must map an array of abscissas to an array of values
    elementwise.  All brackets are narrowed in lockstep for a fixed
    iteration count derived from the widest bracket.
    """
    a = np.asarray(lo, dtype=float).copy()
    b = np.asarray(hi, dtype=float).copy()
    width = float(np.max(b - a))
    if width <= tol:
        mid = 0.5 * (a + b)
        return mid, func(mid)
    n_iter = int(math.ceil(math.log(tol / width) / math.log(INV_PHI))) + 1
    for _ in range(n_iter):
        c = b - INV_PHI * (b - a)
        d = a + INV_PHI * (b - a)
        shrink_right = func(c) < func(d)
        b = np.where(shrink_right, d, b)
        a = np.where(shrink_right, a, c)
    mid = 0.5 * (a + b)
    return mid, func(mid)


def coarse_then_golden(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    n_coarse: int = 64,
    tol: float = 1e-8,
) -> tuple[float, float]:
    """Bracket the minimum with an n-point scan, then refine by golden section."""
    xs = np.linspace(lo, hi, n_coarse)
    values = [func(float(x)) for x in xs]
    i = int(np.argmin(values))
    left = xs[max(i - 1, 0)]
    right = xs[min(i + 1, n_coarse - 1)]
    return golden_section_min(func, float(left), float(right), tol=tol)


def scan_sign_changes(
    func: Callable[[float], float],
    grid: Sequence[float],
) -> list[tuple[float, float, float, float]]:
    """Evaluate ``func`` on a grid and return brackets where its sign flips.

    Each bracket is ``(a, b, fa, fb)`` with ``fa * fb <= 0`` and ``fa != fb``.
    Exact zeros on grid points are attached to the following interval.
    """
    brackets = []
    prev_x = float(grid[0])
    prev_f = func(prev_x)
    for x in grid[1:]:
        x = float(x)
        fx = func(x)
        if prev_f == 0.0 or (prev_f < 0.0) != (fx < 0.0):
            brackets.append((prev_x, x, prev_f, fx))
        prev_x, prev_f = x, fx
    return brackets


def bisect_root(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    f_lo: float,
    f_hi: float,
    tol: float = 1e-10,
) -> float:
    """Bisection on a sign-changing bracket to absolute tolerance ``tol``."""
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo < 0.0) == (f_hi < 0.0):
        raise ValueError("bisect_root requires a sign change on the bracket")
    a, b, fa = lo, hi, f_lo
    while (b - a) > tol:
        mid = 0.5 * (a + b)
        fm = func(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (fa < 0.0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)
