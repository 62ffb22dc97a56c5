"""Convex boundaries built from circle measures, and back.

The boundary of the convex set attached to a measure ``mu`` is the curve
``Z(t) = int_0^t exp(i F^{-1}(u)) du``: atoms become straight edges and
grid cells become circular arcs of radius equal to the local density.
Boundaries are stored as closed counterclockwise polylines starting at
the origin with the smallest edge angle first.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial import cKDTree

from .circle_measure import (
    ANGLE_TOL,
    TWO_PI,
    CircleMeasure,
    FourierCoeffs,
    is_closed,
    resultant,
    wrap_angle,
)

DEFAULT_ARC_SUBDIV = 64


class NotClosedError(ValueError):
    """The measure has a nonzero first Fourier coefficient."""


class NonConvexError(ValueError):
    """A vertex sequence turns clockwise somewhere."""


def _as_points(z) -> np.ndarray:
    z = np.asarray(z)
    if np.iscomplexobj(z):
        return np.column_stack([z.real, z.imag])
    z = np.asarray(z, dtype=float)
    if z.ndim == 1 and z.size == 2:
        z = z[None, :]
    return z.reshape(-1, 2)


def _as_complex(p) -> np.ndarray:
    p = np.asarray(p)
    if np.iscomplexobj(p):
        return p.ravel()
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    return p[:, 0] + 1j * p[:, 1]


@dataclass(frozen=True, eq=False)
class ConvexBoundary:
    """Closed counterclockwise polyline of a compact convex set.

    Edge ``j`` runs from ``vertices[j]`` to ``vertices[j + 1]`` (the last
    edge returns to ``vertices[0]``). ``edge_lengths`` hold curve lengths:
    for chords that approximate an arc they are the arc lengths, so the
    perimeter stays exact. A single point has one vertex and no edges.
    """

    vertices: np.ndarray
    edge_angles: np.ndarray
    edge_lengths: np.ndarray
    is_segment: bool = False

    def __post_init__(self):
        for name in ("vertices", "edge_angles", "edge_lengths"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("vertices must have shape (n, 2)")
        n_edges = self.edge_angles.size
        if n_edges and n_edges != self.vertices.shape[0]:
            raise ValueError("need one edge per vertex")
        if self.edge_lengths.size != n_edges:
            raise ValueError("edge_lengths must match edge_angles")

    @classmethod
    def from_vertices(cls, vertices, tol: float = 1e-12) -> "ConvexBoundary":
        """Build from a closed counterclockwise vertex loop, validating convexity.

        Consecutive duplicate vertices are dropped. Raises
        :class:`NonConvexError` naming the first offending vertex.
        """
        z = _as_complex(vertices)
        if z.size > 1 and abs(z[-1] - z[0]) <= tol * max(1.0, np.abs(z).max()):
            z = z[:-1]
        edges = np.roll(z, -1) - z
        scale = max(np.abs(edges).sum(), 1e-300)
        keep = np.abs(edges) > tol * scale
        if not keep.any():
            return point_boundary(z[0])
        z = z[keep]
        edges = np.roll(z, -1) - z
        angles = wrap_angle(np.angle(edges))
        _check_convex(z, edges, angles, tol)
        is_seg = edges.size == 2 and abs(edges[0] + edges[1]) <= 1e-9 * scale
        return cls(_as_points(z), angles, np.abs(edges), bool(is_seg))

    @property
    def n_edges(self) -> int:
        return int(self.edge_angles.size)

    @property
    def perimeter(self) -> float:
        return math.fsum(self.edge_lengths)

    def complex_vertices(self) -> np.ndarray:
        return _as_complex(self.vertices)

    def edges(self) -> np.ndarray:
        """Edge vectors as complex numbers."""
        z = self.complex_vertices()
        if self.n_edges == 0:
            return np.empty(0, dtype=complex)
        return np.roll(z, -1) - z

    def closed_polyline(self) -> np.ndarray:
        """Vertices with the first repeated at the end, shape ``(n + 1, 2)``."""
        return np.vstack([self.vertices, self.vertices[:1]])

    def scaled(self, factor: float) -> "ConvexBoundary":
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        if factor == 0 or self.n_edges == 0:
            return point_boundary(0j)
        return ConvexBoundary(factor * self.vertices, self.edge_angles,
                              factor * self.edge_lengths, self.is_segment)

    def translated(self, shift) -> "ConvexBoundary":
        d = _as_points(shift)[0]
        return ConvexBoundary(self.vertices + d, self.edge_angles, self.edge_lengths,
                              self.is_segment)


def point_boundary(z=0j) -> ConvexBoundary:
    z = complex(z)
    return ConvexBoundary(np.array([[z.real, z.imag]]), np.empty(0), np.empty(0))


def _check_convex(z, edges, angles, tol):
    n = edges.size
    if n <= 2:
        return
    cross = (np.conj(edges) * np.roll(edges, -1)).imag
    bad = np.nonzero(cross < -tol * np.abs(edges) * np.abs(np.roll(edges, -1)))[0]
    if bad.size:
        raise NonConvexError(f"boundary turns clockwise at vertex {int((bad[0] + 1) % n)}")
    descents = np.nonzero(np.diff(np.concatenate([angles, angles[:1]])) < -ANGLE_TOL)[0]
    if descents.size > 1:
        raise NonConvexError(
            f"edge directions wind more than once; second wrap at vertex {int((descents[1] + 1) % n)}")


def canonical_edges(b: ConvexBoundary) -> Tuple[np.ndarray, np.ndarray]:
    """Edges re-ordered to start at the smallest angle.

    Returns ``(angles, starts)`` where ``starts[j]`` is the complex start
    vertex of the ``j``-th edge in that order.
    """
    if b.n_edges == 0:
        return np.empty(0), b.complex_vertices()[:1]
    k = int(np.argmin(b.edge_angles))
    angles = np.roll(b.edge_angles, -k)
    starts = np.roll(b.complex_vertices(), -k)
    return angles, starts


# -- measure -> boundary --------------------------------------------------

def boundary_from_measure(m: CircleMeasure, arc_subdiv: int = DEFAULT_ARC_SUBDIV,
                          tol: float = 1e-9) -> ConvexBoundary:
    """Boundary ``B_mu`` of the convex set with surface-area measure ``m``.

    Atoms give exact edges ``w exp(i theta)``; each positive grid piece is
    drawn as ``arc_subdiv`` chords whose endpoints lie exactly on the arc.
    """
    if arc_subdiv < 1:
        raise ValueError("arc_subdiv must be >= 1")
    res = resultant(m)
    if abs(res) > tol * m.total_mass:
        raise NotClosedError(f"measure is not closed: |int exp(ix) dmu| = {abs(res):.3e}")
    p = m.pieces
    n_sub = np.where(p.atom, 1, arc_subdiv)
    idx = np.repeat(np.arange(p.mass.size), n_sub)
    offset = np.arange(idx.size) - np.repeat(np.cumsum(n_sub) - n_sub, n_sub)
    frac_w = p.width[idx] / n_sub[idx]
    lo = p.start[idx] + offset * frac_w
    hi = np.where(p.atom[idx], lo, lo + frac_w)
    mass = p.mass[idx] / n_sub[idx]
    atom = p.atom[idx]
    vec = np.where(atom, mass * np.exp(1j * lo),
                   mass * np.sinc(0.5 * (hi - lo) / math.pi) * np.exp(0.5j * (lo + hi)))
    angles = np.where(atom, lo, 0.5 * (lo + hi))
    z = np.concatenate([[0j], np.cumsum(vec)[:-1]])
    is_seg = bool(p.mass.size == 2 and p.atom.all()
                  and abs(abs(p.start[1] - p.start[0]) - math.pi) <= 1e-9)
    return ConvexBoundary(_as_points(z), angles, mass, is_seg)


def measure_from_boundary(b: ConvexBoundary) -> CircleMeasure:
    """Atomic measure with one atom per edge: direction and length."""
    if b.n_edges == 0:
        raise ValueError("a single point has no surface-area measure")
    edges = b.edges()
    _check_convex(b.complex_vertices(), edges, b.edge_angles, 1e-12)
    return CircleMeasure.from_atoms(b.edge_angles, b.edge_lengths)


# -- points on the curve -------------------------------------------------

def _piece_starts(m: CircleMeasure) -> np.ndarray:
    v = m.pieces.vectors()
    return np.concatenate([[0j], np.cumsum(v)])


def extremal_points_complex(m: CircleMeasure, thetas) -> np.ndarray:
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    p = m.pieces
    V = _piece_starts(m)
    full = thetas >= TWO_PI
    th = np.where(full, 0.0, np.mod(thetas, TWO_PI))
    j = np.searchsorted(p.start, th, side="right") - 1
    jj = np.clip(j, 0, None)
    hi = np.minimum(th, p.end[jj])
    dens = np.where(p.atom, 0.0, p.density)[jj]
    part = np.where(p.atom[jj], p.mass[jj] * np.exp(1j * p.start[jj]),
                    dens * (hi - p.start[jj]) * np.sinc(0.5 * (hi - p.start[jj]) / math.pi)
                    * np.exp(0.5j * (hi + p.start[jj])))
    out = np.where(j < 0, 0j, V[jj] + part)
    return np.where(full, V[-1], out)


def extremal_points(m: CircleMeasure, thetas) -> np.ndarray:
    """``Z(F(theta)) = E[1{X <= theta} exp(iX)]`` for each ``theta``.

    Returns an array of shape ``(len(thetas), 2)``.
    """
    return _as_points(extremal_points_complex(m, thetas))


def curve_point_complex(m: CircleMeasure, t) -> np.ndarray:
    """Arc-length parametrisation ``Z(t)``, ``0 <= t <= mass``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p = m.pieces
    V = _piece_starts(m)
    n = p.mass.size
    j = np.clip(np.searchsorted(p.cum[1:], t, side="left"), 0, n - 1)
    s = np.clip(t - p.cum[j], 0.0, p.mass[j])
    dens = np.where(p.atom, 1.0, p.density)[j]
    dtheta = np.where(p.atom[j], 0.0, s / dens)
    part = np.where(p.atom[j], s * np.exp(1j * p.start[j]),
                    s * np.sinc(0.5 * dtheta / math.pi) * np.exp(1j * (p.start[j] + 0.5 * dtheta)))
    return V[j] + part


def curve_point(m: CircleMeasure, t) -> np.ndarray:
    return _as_points(curve_point_complex(m, t))


class Curvature(enum.Enum):
    CORNER = "corner"
    FLAT = "flat"


def curvature_radius(m: CircleMeasure, theta: float):
    """Radius of curvature where the tangent has direction ``theta``.

    A grid cell of mass ``w`` and width ``h`` gives ``w / h``. An atom at
    ``theta`` is a corner and a massless direction is flat; both are
    reported as :class:`Curvature` flags rather than numbers.
    """
    theta = wrap_angle(theta)
    if m.angles.size:
        d = np.abs(m.angles - theta)
        if np.min(np.minimum(d, TWO_PI - d)) <= ANGLE_TOL:
            return Curvature.CORNER
    if m.grid is None:
        return Curvature.FLAT
    cell = min(int(theta / m.cell_width), m.cells - 1)
    w = m.grid[cell]
    return Curvature.FLAT if w == 0 else float(w / m.cell_width)


# -- areas ---------------------------------------------------------------

def area_fourier(fc: FourierCoeffs) -> Tuple[float, float]:
    """Area from Fourier coefficients, with a bound on the truncation error.

    ``A = L^2 (1/(4pi) - (pi/2) sum_{k>=2} (a_k^2 + b_k^2)/(k^2 - 1))``
    where ``a_k, b_k`` are the classical coefficients of the normalized
    measure and ``L`` is the mass. Since ``a_k^2 + b_k^2 <= 1/pi^2``, the
    neglected tail is at most ``L^2 (1/K + 1/(K+1)) / (4pi)``.
    """
    K = fc.order
    if K < 2:
        raise ValueError("area_fourier needs coefficients up to order K >= 2")
    a, b = fc.classical()
    k = np.arange(2, K + 1)
    series = math.fsum((a[2:] ** 2 + b[2:] ** 2) / (k * k - 1.0))
    L2 = fc.mass ** 2
    value = L2 * (1.0 / (4 * math.pi) - 0.5 * math.pi * series)
    bound = L2 * (1.0 / K + 1.0 / (K + 1)) / (4 * math.pi)
    return value, bound


def area_shoelace(b: ConvexBoundary) -> float:
    """Polygon area ``|sum x_i y_{i+1} - x_{i+1} y_i| / 2``."""
    if b.n_edges < 3:
        return 0.0
    x, y = b.vertices[:, 0], b.vertices[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * abs(math.fsum(x * y1 - x1 * y))


def area_pairs(m: CircleMeasure) -> float:
    """Area of an atomic closed measure from pairs of atoms.

    ``sum_{i<j} c_i s_j + (1/2) sum_i c_i s_i`` with ``c = w cos(theta)`` and
    ``s = w sin(theta)``, atoms sorted by angle. This is
    ``E[cos X sin X' (1{X < X'} + 1{X = X'}/2)]`` for independent copies,
    scaled by the squared mass. Ties carry half weight: counting them in
    full overstates the area by ``sum_i c_i s_i / 2``.
    """
    if not m.is_atomic:
        raise TypeError("area_pairs needs an atomic measure; use area_fourier or area_shoelace")
    c = m.weights * np.cos(m.angles)
    s = m.weights * np.sin(m.angles)
    below = np.cumsum(c) - 0.5 * c
    return math.fsum(s * below)


def area_exact(m: CircleMeasure) -> float:
    """Area enclosed by the exact curve: polygon of piece endpoints plus arc caps."""
    V = _piece_starts(m)[:-1]
    x, y = V.real, V.imag
    poly = 0.5 * math.fsum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    p = m.pieces
    arc = ~p.atom
    R = p.density[arc]
    phi = p.width[arc]
    caps = math.fsum(0.5 * R * R * (phi - np.sin(phi)))
    return poly + caps


# -- Hausdorff distances -------------------------------------------------

def support_function(b: ConvexBoundary, phi) -> np.ndarray:
    """``h(phi) = max_v <v, (cos phi, sin phi)>`` over the vertices."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    angles, starts = canonical_edges(b)
    v = starts[_active_vertex(angles, phi)]
    return v.real * np.cos(phi) + v.imag * np.sin(phi)


def _active_vertex(angles: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # vertex j (start of edge j) supports normals in [angles[j-1], angles[j]] - pi/2
    if angles.size == 0:
        return np.zeros(phi.shape, dtype=int)
    normals = angles - 0.5 * math.pi
    ph = np.mod(phi + 0.5 * math.pi, TWO_PI) - 0.5 * math.pi
    return np.searchsorted(normals, ph, side="left") % angles.size


def hausdorff(b1: ConvexBoundary, b2: ConvexBoundary) -> float:
    """Hausdorff distance of the convex bodies enclosed by ``b1`` and ``b2``.

    Computed as ``sup_phi |h1(phi) - h2(phi)|``. Between consecutive
    normal directions of either polygon the difference is a single
    sinusoid ``|d| cos(phi - arg d)``, maximized in closed form.
    """
    a1, _ = canonical_edges(b1)
    a2, _ = canonical_edges(b2)
    bp = np.mod(np.concatenate([a1, a2]) - 0.5 * math.pi, TWO_PI)
    bp = np.unique(np.concatenate([bp, [0.0, TWO_PI]]))
    lo, hi = bp[:-1], bp[1:]
    mid = 0.5 * (lo + hi)
    _, s1 = canonical_edges(b1)
    _, s2 = canonical_edges(b2)
    d = s1[_active_vertex(a1, mid)] - s2[_active_vertex(a2, mid)]
    r, psi = np.abs(d), np.angle(d)
    best = np.maximum(np.abs(r * np.cos(lo - psi)), np.abs(r * np.cos(hi - psi)))
    for shift in (0.0, math.pi):
        crit = np.mod(psi + shift - lo, TWO_PI) + lo
        inside = crit <= hi
        best = np.where(inside, r, best)
    return float(best.max()) if best.size else 0.0


def _directed_vertex_distance(src: np.ndarray, poly: np.ndarray) -> float:
    """Max over ``src`` points of the distance to the polyline ``poly``."""
    if poly.size == 1:
        return float(np.abs(src - poly[0]).max())
    a, b = poly[:-1], poly[1:]
    seg = b - a
    lengths = np.abs(seg)
    keep = lengths > 0
    if not keep.any():
        return float(np.abs(src - poly[0]).max())
    a, seg, lengths = a[keep], seg[keep], lengths[keep]
    # split long segments so that every segment is short relative to the median
    h = max(4.0 * float(np.median(lengths)), 1e-300)
    pieces = np.maximum(1, np.ceil(lengths / h).astype(int))
    if pieces.max() > 1:
        idx = np.repeat(np.arange(a.size), pieces)
        off = np.arange(idx.size) - np.repeat(np.cumsum(pieces) - pieces, pieces)
        step = seg[idx] / pieces[idx]
        a = a[idx] + off * step
        seg = step
        lengths = np.abs(seg)
    half_max = 0.5 * float(lengths.max())
    mids = a + 0.5 * seg
    tree = cKDTree(np.column_stack([mids.real, mids.imag]))
    pts = np.column_stack([src.real, src.imag])
    d = np.full(src.size, np.inf)
    todo = np.arange(src.size)
    k = 8
    while todo.size:
        k = min(k, a.size)
        dist_mid, nn = tree.query(pts[todo], k=k)
        dist_mid, nn = dist_mid.reshape(todo.size, k), nn.reshape(todo.size, k)
        p = src[todo][:, None]
        t = np.clip(((p - a[nn]) * np.conj(seg[nn])).real / lengths[nn] ** 2, 0.0, 1.0)
        d[todo] = np.abs(p - (a[nn] + t * seg[nn])).min(axis=1)
        if k == a.size:
            break
        # segments beyond the k nearest midpoints are at least this far away
        todo = todo[dist_mid[:, -1] - half_max < d[todo]]
        k *= 8
    return float(d.max())


def hausdorff_curves(pts1, pts2) -> float:
    """Symmetric Hausdorff distance between two polylines.

    Each vertex of one polyline is projected onto every segment of the
    other (nearest candidates found with a k-d tree); the result is the
    larger of the two directed maxima. Polylines may be open or
    self-intersecting.
    """
    z1, z2 = _as_complex(pts1), _as_complex(pts2)
    return max(_directed_vertex_distance(z1, z2), _directed_vertex_distance(z2, z1))
