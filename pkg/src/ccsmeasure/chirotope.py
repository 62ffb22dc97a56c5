"""Orientation signs of point triples and a Gaussian area transform.

A finite sequence of points traces a convex polygon exactly when every
triple ``i < j < k`` turns the same way. The second half of the module
estimates ``E exp(sum lambda_ijk A_ijk)`` for standard Gaussian points,
``A_ijk`` being signed triangle areas, and gives its closed form for
three points.
"""
from __future__ import annotations

import itertools
import math
from typing import Dict, Mapping, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .rng import stream

SIGN_TOL = 1e-12
EXP_LIMIT = 700.0
MC_CHUNK = 1 << 16


class LaplaceDivergenceError(ArithmeticError):
    """The exponential moment overflowed; lambda is outside the transform's domain."""


def _points(ps) -> np.ndarray:
    p = np.asarray(ps, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    return p


def signed_area(p, q, r):
    """Algebraic area of triangle ``pqr``; positive when counterclockwise.

    Broadcasts over leading axes.
    """
    p, q, r = np.asarray(p, float), np.asarray(q, float), np.asarray(r, float)
    return 0.5 * ((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                  - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))


def _triples(n: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), 3)), dtype=int).reshape(-1, 3)


def chirotope_signs(ps, tol: float = SIGN_TOL) -> Dict[Tuple[int, int, int], int]:
    """Sign of every triple ``i < j < k``; areas within ``tol`` count as 0."""
    p = _points(ps)
    if p.shape[0] < 3:
        raise ValueError("need at least three points")
    t = _triples(p.shape[0])
    area = signed_area(p[t[:, 0]], p[t[:, 1]], p[t[:, 2]])
    sign = np.where(np.abs(area) <= tol, 0, np.sign(area)).astype(int)
    return {tuple(map(int, tr)): int(s) for tr, s in zip(t, sign)}


def is_convex_position(ps, convention: str = "sequence", tol: float = SIGN_TOL) -> bool:
    """Whether the points are vertices of a convex polygon.

    ``"sequence"`` asks that they are so in the given order (all
    orientation signs equal and nonzero). ``"hull"`` ignores the order and
    asks only that every point is a strict vertex of the convex hull.
    """
    p = _points(ps)
    n = p.shape[0]
    if n < 3:
        raise ValueError("need at least three points")
    if convention == "sequence":
        signs = np.array(list(chirotope_signs(p, tol).values()))
        return bool(np.all(signs == 1) or np.all(signs == -1))
    if convention == "hull":
        try:
            hull = ConvexHull(p)
        except QhullError:
            return False
        return hull.vertices.size == n
    raise ValueError(f"unknown convention {convention!r}")


def _lambda_arrays(lambdas: Mapping, n: int) -> Tuple[np.ndarray, np.ndarray]:
    keys, vals = [], []
    for key, val in lambdas.items():
        tr = tuple(int(v) for v in (key.split(",") if isinstance(key, str) else key))
        if len(tr) != 3 or not (0 <= tr[0] < tr[1] < tr[2] < n):
            raise ValueError(f"bad triple {key!r} for n = {n}")
        keys.append(tr)
        vals.append(float(val))
    return np.array(keys, dtype=int).reshape(-1, 3), np.array(vals)


def mc_laplace(lambdas: Mapping, n: int, replicas: int, seed: int,
               shift=(0.0, 0.0)) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of ``exp(sum lambda A)``.

    Each replica draws ``n`` standard Gaussian points (shifted by
    ``shift``). Replicas come in chunks of 65536; chunk ``c`` uses
    ``stream(seed, c)`` and chunk sums are combined in chunk order.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    tri, lam = _lambda_arrays(lambdas, n)
    s1, s2 = [], []
    total = 0
    for c, start in enumerate(range(0, replicas, MC_CHUNK)):
        size = min(MC_CHUNK, replicas - start)
        pts = stream(seed, c).standard_normal((size, n, 2)) + np.asarray(shift, float)
        if tri.size:
            area = signed_area(pts[:, tri[:, 0]], pts[:, tri[:, 1]], pts[:, tri[:, 2]])
            expo = area @ lam
        else:
            expo = np.zeros(size)
        if expo.max() > EXP_LIMIT:
            raise LaplaceDivergenceError(
                f"exponent reached {expo.max():.1f}; the transform diverges at these lambdas")
        v = np.exp(expo)
        s1.append(math.fsum(v))
        s2.append(math.fsum(v * v))
        total += size
    mean = math.fsum(s1) / total
    var = max(math.fsum(s2) / total - mean * mean, 0.0) * total / (total - 1)
    return mean, math.sqrt(var / total)


def laplace_n3(lam: float) -> float:
    """``E exp(lam A)`` for a standard Gaussian triangle: ``1/(1 - 3 lam^2/4)``."""
    if abs(lam) >= 2.0 / math.sqrt(3.0):
        raise ValueError("|lambda| must be below 2/sqrt(3)")
    return 1.0 / (1.0 - 0.75 * lam * lam)
