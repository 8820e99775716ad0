"""Closed-form constants of the p-norm toolkit.

Everything here is a pure double-precision formula: the summation constant
C(p, n) that plays the role of a quasi-norm modulus for n-term sums, the
two cost factors entering the dyadic decomposition bounds, the Lipschitz
sandwich of the cube retraction, and the resulting norming bound.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import chain, combinations
from math import comb

import numpy as np


def check_p(p: float) -> float:
    """Validate an exponent p with 0 < p <= 1."""
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"exponent p must satisfy 0 < p <= 1, got {p}")
    return p


def check_alpha(alpha: float, allow_one: bool = False) -> float:
    """Validate a distortion exponent alpha in (0, 1), or (0, 1] if allowed."""
    alpha = float(alpha)
    hi_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (0.0 < alpha and hi_ok):
        hi = "1]" if allow_one else "1)"
        raise ValueError(f"alpha must lie in (0, {hi}, got {alpha}")
    return alpha


def c_const(p: float, n: int) -> float:
    """The n-term summation constant n^(1/p - 1)."""
    p = check_p(p)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return float(n) ** (1.0 / p - 1.0)


@lru_cache(maxsize=8)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length `parts` summing to `total`,
    by differencing bar positions (stars and bars)."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    slots = total + parts - 1
    rows = comb(slots, parts - 1)
    bars = np.fromiter(
        chain.from_iterable(combinations(range(slots), parts - 1)),
        dtype=np.int64,
        count=rows * (parts - 1),
    ).reshape(rows, parts - 1)
    padded = np.hstack(
        [np.full((rows, 1), -1), bars, np.full((rows, 1), slots)]
    )
    return np.diff(padded, axis=1) - 1


def c_const_sup_oracle(
    p: float, n: int, grid_resolution: int, budget: int = 200_000
) -> float:
    """Numerically maximize (sum w_i^p)^(1/p) over the weight simplex.

    Independent check of `c_const`: evaluates the objective on a composition
    grid of the face sum(w) = 1 (the objective is nondecreasing in every
    coordinate, so the maximum sits on that face) together with the uniform
    analytic candidate w_i = 1/n, which attains the supremum. The grid
    resolution is lowered to the largest value whose composition count fits
    the evaluation budget; the uniform candidate is always evaluated at full
    precision, so the result never degrades with n.
    """
    p = check_p(p)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    g = int(grid_resolution)
    if g < 1:
        raise ValueError(f"grid_resolution must be >= 1, got {g}")

    while g > 1 and comb(g + n - 1, n - 1) > budget:
        g -= max(1, g // 8)
    grid = _compositions(g, n) / float(g)
    values = (grid**p).sum(axis=1) ** (1.0 / p)

    uniform = (n * (1.0 / n) ** p) ** (1.0 / p)
    return max(float(values.max()), uniform)


def rho(p: float, alpha: float) -> float:
    """Cost factor of one axis-step expansion in the dyadic hierarchy."""
    p = check_p(p)
    alpha = check_alpha(alpha)
    geom = 2.0 ** (-p * alpha) / (1.0 - 2.0 ** (-p * alpha))
    return (c_const(p, 2) ** p + (1.0 + 2.0 ** (1.0 - p)) * geom) ** (1.0 / p)


def tau(p: float, alpha: float, d: int) -> float:
    """Cost factor of one face-induction level in molecule decompositions."""
    p = check_p(p)
    alpha = check_alpha(alpha)
    d = int(d)
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    chain = c_const(p * alpha, d) ** alpha
    line = (1.0 / (1.0 - 2.0 ** (p * (alpha - 1.0)))) ** (1.0 / p)
    path = (1.0 / (1.0 - 2.0 ** (-p * alpha))) ** (1.0 / p)
    corner = (1.0 + float(d - 1) ** (p * alpha)) ** (1.0 / p)
    return chain * 2.0 ** (2.0 / p) * line * path * corner


def retraction_bounds(p: float, d: int) -> tuple[float, float]:
    """Certified (lower, upper) bounds on the Lipschitz constant of the
    vertex retraction of a d-dimensional cube complex."""
    p = check_p(p)
    d = int(d)
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    lower = c_const(p, 2 ** (d - 1))
    upper = lower * c_const(p, d) * c_const(p, 3)
    return lower, upper


def bm_bound(p: float, alpha: float, d: int) -> float:
    """Upper bound on the Banach-Mazur distance between the free p-space of
    the distorted d-cube and the sequence space with the same exponent."""
    d = int(d)
    return c_const(p, 2**d) * rho(p, alpha) ** d * tau(p, alpha, d) ** d
