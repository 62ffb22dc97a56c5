"""Operations on convex sets carried through their surface-area measures.

Mixtures of measures are Minkowski sums of the convex sets; circular
convolution of measures convolves radii of curvature. The two
symmetrisations and the stable-limit classifier are built on top.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .boundary import (
    ConvexBoundary,
    NotClosedError,
    area_exact,
    boundary_from_measure,
    canonical_edges,
    curve_point_complex,
    point_boundary,
    _as_points,
)
from .circle_measure import (
    TWO_PI,
    CircleMeasure,
    circ_convolve,
    fourier,
    is_closed,
    mixture,
    reflect,
    rotate,
)

DYADIC_GRID = 2 ** 14


def minkowski_sum(b1: ConvexBoundary, b2: ConvexBoundary) -> ConvexBoundary:
    """Minkowski sum of two convex polygons by merging edges by angle.

    Ties keep the edge of ``b1`` first. The result starts at the sum of the
    two start vertices, so sets are added as placed.
    """
    a1, s1 = canonical_edges(b1)
    a2, s2 = canonical_edges(b2)
    start = s1[0] + s2[0]
    e1 = _rolled(b1)
    e2 = _rolled(b2)
    angles = np.concatenate([a1, a2])
    if angles.size == 0:
        return point_boundary(start)
    edges = np.concatenate([e1[0], e2[0]])
    lengths = np.concatenate([e1[1], e2[1]])
    src = np.concatenate([np.zeros(a1.size), np.ones(a2.size)])
    order = np.lexsort((src, angles))
    edges, angles, lengths = edges[order], angles[order], lengths[order]
    z = start + np.concatenate([[0j], np.cumsum(edges)[:-1]])
    is_seg = b1.is_segment and (b2.n_edges == 0) or b2.is_segment and (b1.n_edges == 0)
    if not is_seg and angles.size >= 2:
        uniq = np.unique(np.round(angles, 12))
        is_seg = uniq.size == 2 and abs(uniq[1] - uniq[0] - math.pi) <= 1e-9
    return ConvexBoundary(_as_points(z), angles, lengths, bool(is_seg))


def _rolled(b: ConvexBoundary):
    if b.n_edges == 0:
        return np.empty(0, dtype=complex), np.empty(0)
    k = int(np.argmin(b.edge_angles))
    return np.roll(b.edges(), -k), np.roll(b.edge_lengths, -k)


def scale(b: ConvexBoundary, factor: float) -> ConvexBoundary:
    return b.scaled(factor)


def mixture_ccs(lam: float, m1: CircleMeasure, m2: CircleMeasure,
                arc_subdiv: int = 64) -> ConvexBoundary:
    """Boundary of the mixture ``lam m1 + (1 - lam) m2``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    if lam == 1.0:
        return boundary_from_measure(m1, arc_subdiv)
    if lam == 0.0:
        return boundary_from_measure(m2, arc_subdiv)
    return boundary_from_measure(mixture([(lam, m1), (1.0 - lam, m2)]), arc_subdiv)


def convolve_ccs(m1: CircleMeasure, m2: CircleMeasure, arc_subdiv: int = 64) -> ConvexBoundary:
    """Boundary of the circular convolution of the two measures."""
    conv = circ_convolve(m1, m2)
    if not is_closed(conv, 1e-9):
        raise NotClosedError("convolution is not closed; is either operand closed?")
    return boundary_from_measure(conv, arc_subdiv)


def minkowski_symmetrize(m: CircleMeasure, theta: float) -> CircleMeasure:
    """``(rotate(m, theta) + reflect(rotate(m, theta))) / 2``."""
    r = rotate(m, theta)
    return mixture([(0.5, r), (0.5, reflect(r))])


def circle_curve(t, mass: float = 1.0) -> np.ndarray:
    """Arc-length parametrisation of the circle of perimeter ``mass`` through 0."""
    t = np.asarray(t, dtype=float)
    return mass * (np.exp(1j * TWO_PI * t / mass) - 1.0) / (TWO_PI * 1j)


def iterate_dyadic_symmetrization(m: CircleMeasure, k: int,
                                  grid_points: int = DYADIC_GRID) -> Tuple[CircleMeasure, float]:
    """Apply ``k`` symmetrisations in directions ``2pi / 2^(j-1)``, ``j = 1..k``.

    Returns the final measure and ``sup_t |Z(t) - Z_circle(t)|`` over
    ``grid_points + 1`` equally spaced parameters.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not is_closed(m, 1e-9):
        raise NotClosedError("dyadic symmetrisation needs a closed measure")
    nu = m
    for j in range(1, k + 1):
        nu = minkowski_symmetrize(nu, TWO_PI / 2 ** (j - 1))
    return nu, dyadic_distance(nu, grid_points)


def dyadic_distance(m: CircleMeasure, grid_points: int = DYADIC_GRID) -> float:
    mass = m.total_mass
    t = np.linspace(0.0, mass, grid_points + 1)
    return float(np.abs(curve_point_complex(m, t) - circle_curve(t, mass)).max())


def convolution_symmetrize(m: CircleMeasure) -> CircleMeasure:
    """``m * reflect(m)``, a measure symmetric under reflection."""
    return circ_convolve(m, reflect(m))


@dataclass(frozen=True)
class StableLimit:
    """Limit of normalized self-convolutions, up to rotation.

    ``kind`` is ``"uniform"``, ``"mgon"``, ``"dirac"`` or ``"undecided"``;
    ``order`` is the polygon order (1 for the Dirac case, 0 otherwise) and
    ``centering`` the rotation that centres the limit on ``2pi j/order``.
    """

    kind: str
    order: int = 0
    centering: float = 0.0

    def __str__(self):
        return f"mgon({self.order})" if self.kind == "mgon" else self.kind


def classify_stable_limit(m: CircleMeasure, max_iter: int = 256,
                          tol: float = 1e-9) -> StableLimit:
    """Classify the 1-stable limit of ``sum (X_i - theta) mod 2pi``.

    The ``k``-th normalized coefficient of the ``n``-fold convolution is
    the ``n``-th power of that of ``m``, so it survives iff its modulus
    ``r_k`` is 1. The smallest such ``k`` fixes the polygon order; none
    means the limit is uniform. Moduli in ``[1 - sqrt(tol), 1 - tol)`` are
    too close to call and give ``"undecided"``.
    """
    fc = fourier(m, max_iter)
    an, bn = fc.normalized()
    c = an[1:] + 1j * bn[1:]
    r = np.abs(c)
    hits = np.nonzero(r >= 1 - tol)[0]
    if hits.size:
        k = int(hits[0]) + 1
        period = TWO_PI / k
        centering = float(np.mod(np.angle(c[k - 1]) / k, period))
        if period - centering < 1e-12:
            centering = 0.0
        if k == 1:
            return StableLimit("dirac", 1, centering)
        return StableLimit("mgon", k, centering)
    if np.any(r >= 1 - math.sqrt(tol)):
        return StableLimit("undecided")
    return StableLimit("uniform")


def brunn_minkowski_check(lam: float, m1: CircleMeasure, m2: CircleMeasure) -> Tuple[float, float]:
    """``(sqrt A(lam m1 + (1-lam) m2), lam sqrt A(m1) + (1-lam) sqrt A(m2))``."""
    mix = mixture([(lam, m1), (1.0 - lam, m2)]) if 0 < lam < 1 else (m1 if lam >= 1 else m2)
    lhs = math.sqrt(max(area_exact(mix), 0.0))
    rhs = lam * math.sqrt(max(area_exact(m1), 0.0)) + (1 - lam) * math.sqrt(max(area_exact(m2), 0.0))
    return lhs, rhs
