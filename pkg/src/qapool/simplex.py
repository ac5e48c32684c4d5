"""Probability-simplex utilities: projection, sampling, canonicalization.

The Euclidean projection uses the sort-and-threshold construction
(Held, Wolfe & Crowder 1974; see also Wang & Carreira-Perpinan 2013):
sort the coordinates, find the largest support size rho for which the
water-filling threshold keeps all supported coordinates positive, then
clip.  It is exact up to floating-point rounding, O(m log m).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "canonicalize",
    "project_simplex",
    "project_simplex_floor",
    "random_simplex_point",
    "uniform_point",
]


def canonicalize(v: np.ndarray) -> np.ndarray:
    """Project onto the sum-zero hyperplane by subtracting the mean."""
    v = np.asarray(v, dtype=float)
    return v - v.mean()


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``y`` onto {x >= 0, sum x = 1}."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("expected a one-dimensional vector")
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, y.size + 1)
    # largest k with u_k + (1 - sum_{i<=k} u_i)/k > 0
    cond = u + (1.0 - css) / ks > 0
    rho = np.nonzero(cond)[0][-1]
    tau = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(y + tau, 0.0)


def project_simplex_floor(y: np.ndarray, floor: float) -> np.ndarray:
    """Projection onto the shrunken simplex {x >= floor, sum x = 1}.

    Requires n*floor < 1.  Substituting x = floor + z reduces to a
    standard simplex projection scaled by (1 - n*floor).
    """
    y = np.asarray(y, dtype=float)
    if floor <= 0.0:
        return project_simplex(y)
    slack = 1.0 - y.size * floor
    if slack <= 0.0:
        raise ValueError("floor too large for the dimension")
    z = project_simplex((y - floor) / slack)
    return floor + slack * z


def uniform_point(n: int) -> np.ndarray:
    """The barycenter (1/n, ..., 1/n)."""
    return np.full(n, 1.0 / n)


def random_simplex_point(
    rng: np.random.Generator, n: int, floor: float = 0.0
) -> np.ndarray:
    """Draw from Dirichlet(1, ..., 1), optionally resampling into the
    interior shell {p : min_j p_j >= floor}."""
    while True:
        p = rng.dirichlet(np.ones(n))
        if p.min() >= floor:
            return p
