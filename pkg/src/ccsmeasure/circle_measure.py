"""Finite positive measures on the circle R/2piZ.

A :class:`CircleMeasure` is a hybrid of exact atoms and a uniform grid of
cells carrying piecewise-constant density. Atoms reproduce polygons
exactly; grid cells give circular arcs whose Fourier integrals and arc
endpoints are available in closed form.

All values are immutable. Every operation in this module is a pure
function returning a new measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12
DEFAULT_CELLS = 4096
DEFAULT_K = 256
LCM_CAP = 2 ** 20


def wrap_angle(x):
    """Reduce angles to the canonical range ``[0, 2pi)``.

    Values within ``ANGLE_TOL`` below ``2pi`` are snapped to 0 so that
    rounding never produces an angle equal to (or just under) a full turn.
    """
    x = np.mod(np.asarray(x, dtype=float), TWO_PI)
    x = np.where(x >= TWO_PI - ANGLE_TOL, 0.0, x)
    return x if x.ndim else float(x)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _merge_atoms(angles, weights, tol=ANGLE_TOL):
    angles = wrap_angle(np.atleast_1d(np.asarray(angles, dtype=float)))
    weights = np.atleast_1d(np.asarray(weights, dtype=float))
    if angles.shape != weights.shape:
        raise ValueError("angles and weights must have the same length")
    keep = weights > 0
    angles, weights = angles[keep], weights[keep]
    if angles.size == 0:
        return np.empty(0), np.empty(0)
    order = np.argsort(angles, kind="stable")
    angles, weights = angles[order], weights[order]
    new_group = np.concatenate([[True], np.diff(angles) > tol])
    group = np.cumsum(new_group) - 1
    merged_w = np.bincount(group, weights=weights)
    merged_a = angles[new_group]
    return merged_a, merged_w


@dataclass(frozen=True, eq=False)
class CircleMeasure:
    """Finite positive measure on the circle.

    Parameters
    ----------
    angles : array_like
        Atom positions, strictly increasing in ``[0, 2pi)``.
    weights : array_like
        Positive atom masses.
    grid : array_like, optional
        Masses of ``M`` equal cells ``[2pi j/M, 2pi (j+1)/M)``; the mass of
        each cell is spread uniformly over it.

    Use :meth:`from_atoms` to build a measure from unsorted or
    duplicated angles; the plain constructor only validates.
    """

    angles: np.ndarray
    weights: np.ndarray
    grid: Optional[np.ndarray] = None

    def __post_init__(self):
        angles = _frozen(np.atleast_1d(self.angles))
        weights = _frozen(np.atleast_1d(self.weights))
        if angles.shape != weights.shape or angles.ndim != 1:
            raise ValueError("angles and weights must be 1-d arrays of equal length")
        if angles.size:
            if not np.all(np.isfinite(angles)) or angles.min() < 0 or angles.max() >= TWO_PI:
                raise ValueError("atom angles must lie in [0, 2pi)")
            if np.any(np.diff(angles) <= 0):
                raise ValueError("atom angles must be strictly increasing")
            if not np.all(weights > 0) or not np.all(np.isfinite(weights)):
                raise ValueError("atom weights must be positive and finite")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "weights", weights)
        if self.grid is not None:
            grid = _frozen(np.atleast_1d(self.grid))
            if grid.ndim != 1 or grid.size == 0:
                raise ValueError("grid must be a non-empty 1-d array of cell masses")
            if not np.all(np.isfinite(grid)) or grid.min() < 0:
                raise ValueError("grid masses must be nonnegative and finite")
            object.__setattr__(self, "grid", grid)
        if not self.total_mass > 0:
            raise ValueError("measure must have positive total mass")

    @classmethod
    def from_atoms(cls, angles, weights, grid=None, tol=ANGLE_TOL) -> "CircleMeasure":
        """Build a measure from arbitrary angles, merging those closer than ``tol``."""
        a, w = _merge_atoms(angles, weights, tol)
        if grid is not None and not np.any(np.asarray(grid) > 0):
            grid = None if a.size else grid
        return cls(a, w, grid)

    # -- basic properties -------------------------------------------------
    @property
    def cells(self) -> int:
        return 0 if self.grid is None else int(self.grid.size)

    @property
    def cell_width(self) -> float:
        return TWO_PI / self.cells if self.cells else float("nan")

    @cached_property
    def total_mass(self) -> float:
        grid_mass = 0.0 if self.grid is None else math.fsum(self.grid)
        return math.fsum(self.weights) + grid_mass

    @property
    def is_atomic(self) -> bool:
        return self.grid is None or not np.any(self.grid > 0)

    @property
    def kind(self) -> str:
        if self.grid is None:
            return "atomic"
        return "grid" if self.angles.size == 0 else "mixed"

    def __repr__(self):
        return (f"CircleMeasure(kind={self.kind!r}, atoms={self.angles.size}, "
                f"cells={self.cells}, mass={self.total_mass:.12g})")

    # -- piecewise description -------------------------------------------
    @cached_property
    def pieces(self) -> "Pieces":
        return _build_pieces(self)


@dataclass(frozen=True)
class Pieces:
    """Angle-ordered decomposition into atoms and constant-density arcs.

    ``start``/``end`` bound each piece (equal for atoms), ``mass`` is its
    measure and ``cum`` the cumulative mass before each piece (length
    ``n + 1``). At a shared start angle an atom precedes the arc.
    """

    start: np.ndarray
    end: np.ndarray
    mass: np.ndarray
    atom: np.ndarray
    cum: np.ndarray

    @property
    def density(self) -> np.ndarray:
        width = self.end - self.start
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.atom, np.inf, self.mass / np.where(width > 0, width, 1.0))

    @property
    def width(self) -> np.ndarray:
        return self.end - self.start

    def vectors(self) -> np.ndarray:
        """Complex displacement ``int exp(i x) dmu`` over each piece."""
        return _arc_vectors(self.start, self.end, self.mass, self.atom)


def _arc_vectors(start, end, mass, atom):
    half = 0.5 * (end - start)
    mid = 0.5 * (start + end)
    sinc = np.sinc(half / math.pi)  # sin(half)/half
    return np.where(atom, mass * np.exp(1j * start), mass * sinc * np.exp(1j * mid))


def _build_pieces(m: CircleMeasure) -> Pieces:
    starts = [m.angles]
    ends = [m.angles]
    masses = [m.weights]
    atoms = [np.ones(m.angles.size, dtype=bool)]
    if m.grid is not None and np.any(m.grid > 0):
        M = m.cells
        h = TWO_PI / M
        edges = np.arange(M + 1) * h
        edges[-1] = TWO_PI
        cuts = np.union1d(edges, m.angles)
        lo, hi = cuts[:-1], cuts[1:]
        keep = hi - lo > 0
        lo, hi = lo[keep], hi[keep]
        cell = np.minimum((0.5 * (lo + hi) / h).astype(int), M - 1)
        dens = m.grid[cell] / h
        mass = dens * (hi - lo)
        pos = mass > 0
        starts.append(lo[pos])
        ends.append(hi[pos])
        masses.append(mass[pos])
        atoms.append(np.zeros(int(pos.sum()), dtype=bool))
    start = np.concatenate(starts)
    end = np.concatenate(ends)
    mass = np.concatenate(masses)
    atom = np.concatenate(atoms)
    # atoms first among pieces sharing a start angle
    order = np.lexsort((~atom, start))
    start, end, mass, atom = start[order], end[order], mass[order], atom[order]
    cum = np.concatenate([[0.0], np.cumsum(mass)])
    for a in (start, end, mass, atom, cum):
        a.setflags(write=False)
    return Pieces(start, end, mass, atom, cum)


# -- constructors --------------------------------------------------------

def dirac(theta: float = 0.0, mass: float = 1.0) -> CircleMeasure:
    return CircleMeasure.from_atoms([theta], [mass])


def regular_polygon(m: int, mass: float = 1.0) -> CircleMeasure:
    """Uniform measure on the ``m``-th roots of unity (a regular ``m``-gon)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return CircleMeasure(TWO_PI * np.arange(m) / m, np.full(m, mass / m))


def segment(theta: float = math.pi / 2, mass: float = 1.0) -> CircleMeasure:
    """Two antipodal atoms of equal mass; the boundary is a two-sided segment."""
    return CircleMeasure.from_atoms([theta, theta + math.pi], [mass / 2, mass / 2])


def uniform(cells: int = DEFAULT_CELLS, mass: float = 1.0) -> CircleMeasure:
    return CircleMeasure(np.empty(0), np.empty(0), np.full(cells, mass / cells))


def from_grid(masses) -> CircleMeasure:
    return CircleMeasure(np.empty(0), np.empty(0), masses)


def half_disc(cells: int = DEFAULT_CELLS) -> CircleMeasure:
    """Surface-area measure of a half-disc of perimeter 1.

    An atom ``2r`` at angle 0 (the diameter) plus density ``r`` on
    ``(pi/2, 3pi/2)`` (the semicircle), ``r = 1/(2 + pi)``. ``cells`` must
    be a multiple of 4 so that the arc is cell-aligned.
    """
    if cells % 4:
        raise ValueError("cells must be a multiple of 4")
    r = 1.0 / (2.0 + math.pi)
    h = TWO_PI / cells
    grid = np.zeros(cells)
    grid[cells // 4: 3 * cells // 4] = r * h
    return CircleMeasure(np.array([0.0]), np.array([2.0 * r]), grid)


# -- CDF and quantile ----------------------------------------------------

def cdf(m: CircleMeasure, x):
    """``F(x) = mu([0, x])``; right-continuous, ``F(2pi) = mass``."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    full = x >= TWO_PI
    xw = np.where(full, 0.0, np.mod(x, TWO_PI))
    p = m.pieces
    j = np.searchsorted(p.start, xw, side="right") - 1
    jj = np.clip(j, 0, None)
    arc_density = np.where(p.atom, 0.0, p.density)[jj]
    part = np.where(p.atom[jj], p.mass[jj], np.minimum(xw - p.start[jj], p.width[jj]) * arc_density)
    val = np.where(j < 0, 0.0, p.cum[jj] + part)
    val = np.where(full, m.total_mass, np.minimum(val, m.total_mass))
    return float(val[0]) if scalar else val


def quantile(m: CircleMeasure, y):
    """Generalised inverse ``inf{x >= 0 : F(x) >= y}``.

    ``y = 0`` returns the smallest point of the support. Plateaus of ``F``
    resolve to their left end.
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    mass = m.total_mass
    if np.any(y < 0) or np.any(y > mass * (1 + 1e-12)) or not np.all(np.isfinite(y)):
        raise ValueError(f"quantile level must lie in [0, {mass!r}]")
    p = m.pieces
    n = p.mass.size
    j = np.clip(np.searchsorted(p.cum[1:], y, side="left"), 0, n - 1)
    dens = p.density[j]
    off = np.where(p.atom[j], 0.0, (y - p.cum[j]) / np.where(p.atom[j], 1.0, dens))
    x = np.clip(p.start[j] + np.clip(off, 0.0, None), p.start[j], p.end[j])
    x = np.where(y <= 0, p.start[0], x)
    x = np.minimum(x, np.nextafter(TWO_PI, 0.0))
    return float(x[0]) if scalar else x


# -- Fourier coefficients -----------------------------------------------

@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Coefficients ``alpha_k = int cos(kx) dmu``, ``beta_k = int sin(kx) dmu``.

    Both arrays have length ``K + 1``; ``beta[0]`` is always 0 and
    ``alpha[0]`` equals the mass. The classical series coefficients are
    ``a_k = alpha_k / pi`` and ``b_k = beta_k / pi`` for a probability
    measure.
    """

    mass: float
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def order(self) -> int:
        return self.alpha.size - 1

    def normalized(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.alpha / self.mass, self.beta / self.mass

    def classical(self) -> Tuple[np.ndarray, np.ndarray]:
        """Series coefficients ``(a_k, b_k)`` of the normalized measure."""
        an, bn = self.normalized()
        return an / math.pi, bn / math.pi

    def complex(self) -> np.ndarray:
        return self.alpha + 1j * self.beta


def fourier(m: CircleMeasure, K: int = DEFAULT_K) -> FourierCoeffs:
    """Exact Fourier coefficients up to order ``K``.

    Each grid cell ``[a, b)`` of mass ``w`` contributes
    ``w sinc(k(b-a)/2) (cos, sin)(k (a+b)/2)``, the closed form of the
    integral of the uniform density over the cell.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    k = np.arange(K + 1)[:, None]
    z = (m.weights[None, :] * np.exp(1j * k * m.angles[None, :])).sum(axis=1)
    if m.grid is not None:
        M = m.cells
        h = TWO_PI / M
        mid = (np.arange(M) + 0.5) * h
        sinc = np.sinc(k[:, 0] * h / TWO_PI)
        nz = np.nonzero(m.grid)[0]
        # chunk over k to bound memory for large grids
        acc = np.zeros(K + 1, dtype=complex)
        step = max(1, 2 ** 22 // max(nz.size, 1))
        for s in range(0, K + 1, step):
            kk = k[s:s + step]
            acc[s:s + step] = (m.grid[nz][None, :] * np.exp(1j * kk * mid[nz][None, :])).sum(axis=1)
        z = z + sinc * acc
    alpha = z.real.copy()
    beta = z.imag.copy()
    alpha[0] = m.total_mass
    beta[0] = 0.0
    return FourierCoeffs(m.total_mass, _frozen(alpha), _frozen(beta))


def resultant(m: CircleMeasure) -> complex:
    """First Fourier moment ``int exp(ix) dmu`` in closed form."""
    return complex(m.pieces.vectors().sum())


def is_closed(m: CircleMeasure, tol: float = 1e-9) -> bool:
    """Whether the first Fourier coefficient vanishes relative to the mass."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return abs(resultant(m)) <= tol * m.total_mass


# -- grid helpers --------------------------------------------------------

def _rebin(masses: np.ndarray, cells: int, shift: float = 0.0) -> np.ndarray:
    """Cell masses on ``cells`` equal cells of the density shifted by ``shift``.

    Integrates the piecewise-constant density exactly through its
    (periodically extended) CDF, so total mass is preserved.
    """
    M = masses.size
    h = TWO_PI / M
    total = masses.sum()
    if cells == M:
        q = shift / h
        qi = round(q)
        if abs(q - qi) <= ANGLE_TOL / h:
            return np.roll(masses, qi % M)
    knots = np.arange(M + 1) * h
    G = np.concatenate([[0.0], np.cumsum(masses)])
    x = np.arange(cells + 1) * (TWO_PI / cells) - shift
    turns = np.floor(x / TWO_PI)
    xr = x - turns * TWO_PI
    vals = np.interp(xr, knots, G) + turns * total
    out = np.diff(vals)
    return np.clip(out, 0.0, None)


def _common_cells(sizes: Sequence[int]) -> int:
    L = 1
    for s in sizes:
        L = math.lcm(L, s)
    return L if L <= LCM_CAP else max(sizes)


def _refine(masses: np.ndarray, cells: int) -> np.ndarray:
    M = masses.size
    if cells == M:
        return masses
    if cells % M == 0:
        return np.repeat(masses / (cells // M), cells // M)
    return _rebin(masses, cells)


def _cyclic_convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = x.size
    if n <= 64:
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return (x[None, :] * y[idx]).sum(axis=1)
    out = np.fft.irfft(np.fft.rfft(x) * np.fft.rfft(y), n)
    return np.clip(out, 0.0, None)


def _atoms_on_grid(angles, weights, cells) -> np.ndarray:
    """Split each atom between the two cells its shift straddles."""
    h = TWO_PI / cells
    q = angles / h
    qi = np.floor(q)
    f = q - qi
    up = f >= 1 - ANGLE_TOL / h
    qi = np.where(up, qi + 1, qi).astype(int) % cells
    f = np.where(up | (f <= ANGLE_TOL / h), 0.0, f)
    hist = np.bincount(qi, weights=weights * (1 - f), minlength=cells)
    hist += np.bincount((qi + 1) % cells, weights=weights * f, minlength=cells)
    return hist


# -- operations ----------------------------------------------------------

def mixture(items: Iterable[Tuple[float, CircleMeasure]]) -> CircleMeasure:
    """Weighted sum ``sum_i lambda_i mu_i`` of measures.

    Grids of different resolution are refined to the least common multiple
    of their cell counts (capped at ``2**20``; beyond the cap the finer
    grid is used with mass-preserving re-binning).
    """
    items = [(float(lam), m) for lam, m in items]
    if not items:
        raise ValueError("mixture needs at least one component")
    if any(lam < 0 for lam, _ in items) or not any(lam > 0 for lam, _ in items):
        raise ValueError("mixture weights must be nonnegative with at least one positive")
    items = [(lam, m) for lam, m in items if lam > 0]
    angles = np.concatenate([m.angles for _, m in items])
    weights = np.concatenate([lam * m.weights for lam, m in items])
    grids = [(lam, m.grid) for lam, m in items if m.grid is not None]
    grid = None
    if grids:
        cells = _common_cells([g.size for _, g in grids])
        grid = sum(lam * _refine(g, cells) for lam, g in grids)
    return CircleMeasure.from_atoms(angles, weights, grid)


def circ_convolve(a: CircleMeasure, b: CircleMeasure) -> CircleMeasure:
    """Circular convolution: the law of ``X + Y mod 2pi``, masses multiplying.

    Atom pairs are exact. Grid results are cell averages of the exact
    convolved density (error ``O(1/M)`` in shape, exact in mass).
    """
    angles = (a.angles[:, None] + b.angles[None, :]).ravel()
    weights = (a.weights[:, None] * b.weights[None, :]).ravel()
    grid = None
    if a.grid is not None or b.grid is not None:
        sizes = [g.size for g in (a.grid, b.grid) if g is not None]
        cells = _common_cells(sizes)
        ga = None if a.grid is None else _refine(a.grid, cells)
        gb = None if b.grid is None else _refine(b.grid, cells)
        grid = np.zeros(cells)
        if gb is not None and a.angles.size:
            grid += _cyclic_convolve(_atoms_on_grid(a.angles, a.weights, cells), gb)
        if ga is not None and b.angles.size:
            grid += _cyclic_convolve(_atoms_on_grid(b.angles, b.weights, cells), ga)
        if ga is not None and gb is not None:
            c = _cyclic_convolve(ga, gb)
            grid += 0.5 * (c + np.roll(c, 1))
    return CircleMeasure.from_atoms(angles, weights, grid)


def rotate(m: CircleMeasure, theta: float) -> CircleMeasure:
    """Law of ``X + theta mod 2pi``."""
    grid = None if m.grid is None else _rebin(m.grid, m.cells, shift=float(theta))
    return CircleMeasure.from_atoms(m.angles + theta, m.weights, grid)


def reflect(m: CircleMeasure) -> CircleMeasure:
    """Law of ``-X mod 2pi``."""
    grid = None if m.grid is None else m.grid[::-1].copy()
    return CircleMeasure.from_atoms(TWO_PI - m.angles, m.weights, grid)


def scale_mass(m: CircleMeasure, factor: float) -> CircleMeasure:
    if factor <= 0:
        raise ValueError("factor must be positive")
    grid = None if m.grid is None else factor * m.grid
    return CircleMeasure(m.angles, factor * m.weights, grid)
