"""Empirical curves, fluctuations and argument-sorted random walks.

Sorting an i.i.d. sample of directions and chaining unit steps of length
``1/n`` gives a polygon that converges to the boundary of the convex set
whose surface-area measure the sample was drawn from. This module
samples, builds those curves, measures their distance to the limit and
provides the Gaussian covariance of the rescaled fluctuations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .boundary import (
    boundary_from_measure,
    extremal_points_complex,
    hausdorff_curves,
    _as_points,
)
from .circle_measure import (
    ANGLE_TOL,
    TWO_PI,
    CircleMeasure,
    cdf,
    circ_convolve,
    from_grid,
    quantile,
    wrap_angle,
)
from .rng import as_generator, stream

ATOMIC_ARGUMENT_LIMIT = 64


# -- samples ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComplexSample:
    """Points of the plane stored as ``(modulus, argument)`` pairs."""

    moduli: np.ndarray
    arguments: np.ndarray

    def __post_init__(self):
        mod = np.asarray(self.moduli, dtype=float).ravel()
        arg = wrap_angle(np.asarray(self.arguments, dtype=float).ravel())
        if mod.shape != arg.shape:
            raise ValueError("moduli and arguments must have the same length")
        if not (np.all(np.isfinite(mod)) and np.all(np.isfinite(arg))):
            raise ValueError("sample values must be finite")
        if np.any(mod < 0):
            raise ValueError("moduli must be nonnegative")
        object.__setattr__(self, "moduli", mod)
        object.__setattr__(self, "arguments", np.atleast_1d(arg))

    @classmethod
    def from_complex(cls, z) -> "ComplexSample":
        z = np.asarray(z, dtype=complex).ravel()
        return cls(np.abs(z), np.angle(z))

    def __len__(self) -> int:
        return self.moduli.size

    def to_complex(self) -> np.ndarray:
        return self.moduli * np.exp(1j * self.arguments)


def sample_angles(m: CircleMeasure, n: int, seed: Optional[int] = None,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """``n`` i.i.d. draws from the normalised measure, by inverse CDF."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng, seed)
    u = gen.random(n)
    return quantile(m, u * m.total_mass)


# -- empirical curves ------------------------------------------------------

def _sorted_steps(angles) -> np.ndarray:
    a = np.sort(wrap_angle(np.atleast_1d(np.asarray(angles, dtype=float))))
    if a.size == 0:
        raise ValueError("at least one angle is required")
    return a


def _empirical_complex(angles) -> np.ndarray:
    a = _sorted_steps(angles)
    return np.concatenate([[0j], np.cumsum(np.exp(1j * a)) / a.size])


def empirical_curve(angles) -> np.ndarray:
    """Polyline ``Z_n(k/n)``, ``k = 0..n``, as an ``(n + 1, 2)`` array."""
    return _as_points(_empirical_complex(angles))


def fluctuation_process(m: CircleMeasure, angles, thetas) -> np.ndarray:
    """``sqrt(n) (Z_n(N_n(theta)/n) - Z(F(theta)))`` as plane points."""
    a = _sorted_steps(angles)
    n = a.size
    z = np.concatenate([[0j], np.cumsum(np.exp(1j * a)) / n])
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    counts = np.where(th >= TWO_PI, n, np.searchsorted(a, th, side="right"))
    w = math.sqrt(n) * (z[counts] - extremal_points_complex(m, th))
    return _as_points(w)


def max_theta_deviation(m: CircleMeasure, angles) -> float:
    """Exact ``sup_theta |Z_n(N_n(theta)/n) - Z(F(theta))|`` over ``[0, 2pi]``.

    Between consecutive jump points of either term the empirical part is
    constant and the limit moves along a circular arc (or stays put), so
    the supremum on each interval is reached at an end or at the single
    angle where the arc points away from the empirical value.
    """
    a = _sorted_steps(angles)
    n = a.size
    zs = np.concatenate([[0j], np.cumsum(np.exp(1j * a)) / n])
    p = m.pieces
    brk = np.union1d(np.concatenate([[0.0], a, p.start, p.end]), [TWO_PI])
    brk = brk[(brk >= 0) & (brk <= TWO_PI)]
    lo, hi = brk[:-1], brk[1:]
    w = zs[np.searchsorted(a, lo, side="right")]
    e_lo = extremal_points_complex(m, lo)
    # density of the arc piece covering each open interval
    mid = 0.5 * (lo + hi)
    j = np.searchsorted(p.start, mid, side="right") - 1
    jj = np.clip(j, 0, None)
    arc = (j >= 0) & ~p.atom[jj] & (mid < p.end[jj])
    rho = np.where(arc, np.where(p.atom, 0.0, p.density)[jj], 0.0)
    # on [lo, hi): Z(F(theta)) = e_lo + rho (exp(i theta) - exp(i lo)) / i
    c0 = e_lo + 1j * rho * np.exp(1j * lo)
    d = w - c0                                   # deviation = d + i rho exp(i theta)
    dev_lo = np.abs(w - e_lo)
    dev_hi = np.abs(d + 1j * rho * np.exp(1j * hi))
    star = np.mod(np.angle(d) - 0.5 * math.pi, TWO_PI)
    inside = (rho > 0) & (((star > lo) & (star < hi)) | ((star + TWO_PI > lo) & (star + TWO_PI < hi)))
    dev_star = np.where(inside, np.abs(d) + rho, 0.0)
    end = abs(zs[-1] - extremal_points_complex(m, [TWO_PI])[0])
    return float(max(dev_lo.max(), dev_hi.max(), dev_star.max(), end))


# -- Gaussian limit of the fluctuations ------------------------------------

def _partial_moment(m: CircleMeasure, thetas, k: int) -> np.ndarray:
    """``int_{[0, theta]} exp(i k x) dmu`` for each ``theta``."""
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    p = m.pieces
    dens = np.where(p.atom, 0.0, p.density)
    if k == 0:
        return cdf(m, th).astype(complex)
    full = np.where(p.atom, p.mass * np.exp(1j * k * p.start),
                    dens * (np.exp(1j * k * p.end) - np.exp(1j * k * p.start)) / (1j * k))
    V = np.concatenate([[0j], np.cumsum(full)])
    out = np.empty(th.size, dtype=complex)
    top = th >= TWO_PI
    out[top] = V[-1]
    t = th[~top]
    j = np.searchsorted(p.start, t, side="right") - 1
    jj = np.clip(j, 0, None)
    hi = np.minimum(t, p.end[jj])
    part = np.where(p.atom[jj], p.mass[jj] * np.exp(1j * k * p.start[jj]),
                    dens[jj] * (np.exp(1j * k * hi) - np.exp(1j * k * p.start[jj])) / (1j * k))
    out[~top] = np.where(j < 0, 0j, V[jj] + part)
    return out


@dataclass(frozen=True)
class IntervalStats:
    mass: float
    mean: np.ndarray          # E[(cos X, sin X) | X in I]
    cond_cov: np.ndarray      # Cov[(cos X, sin X) | X in I]


@dataclass(frozen=True)
class FddSpec:
    """Partition ``0 = theta_0 < ... < theta_kappa = 2pi`` and interval data.

    Interval 0 is the single point ``{0}``; interval ``j >= 1`` is
    ``(theta_{j-1}, theta_j]``.
    """

    partition: np.ndarray
    intervals: Tuple[IntervalStats, ...]


def _normalize_partition(partition) -> np.ndarray:
    part = np.asarray(partition, dtype=float).ravel()
    if part.size == 0:
        raise ValueError("partition must not be empty")
    if part[0] != 0.0:
        part = np.concatenate([[0.0], part])
    if np.any(np.diff(part) <= 0):
        raise ValueError("partition must be strictly increasing")
    if abs(part[-1] - TWO_PI) > 1e-12:
        raise ValueError("partition must end at 2pi")
    part[-1] = TWO_PI
    return part


def fdd_spec(m: CircleMeasure, partition) -> FddSpec:
    part = _normalize_partition(partition)
    mass = m.total_mass
    F = _partial_moment(m, part, 0).real / mass
    M1 = _partial_moment(m, part, 1) / mass
    M2 = _partial_moment(m, part, 2) / mass
    dF = np.diff(np.concatenate([[0.0], F]))
    d1 = np.diff(np.concatenate([[0j], M1]))
    d2 = np.diff(np.concatenate([[0j], M2]))
    stats = []
    for f, e1, e2 in zip(dF, d1, d2):
        if f <= 0:
            stats.append(IntervalStats(0.0, np.zeros(2), np.zeros((2, 2))))
            continue
        mean = np.array([e1.real, e1.imag]) / f
        ecc = 0.5 * (f + e2.real) / f
        ess = 0.5 * (f - e2.real) / f
        ecs = 0.5 * e2.imag / f
        second = np.array([[ecc, ecs], [ecs, ess]])
        cov = second - np.outer(mean, mean)
        stats.append(IntervalStats(float(f), mean, 0.5 * (cov + cov.T)))
    return FddSpec(part, tuple(stats))


def fdd_covariance(m: CircleMeasure, partition) -> np.ndarray:
    """Covariance of the stacked Gaussian increments ``(Delta W_j)_j``.

    Block ``(j, l)`` is ``delta_jl dF_j C_j + c_jl m_j m_l^T`` with the
    multinomial covariance ``c_jj = dF_j (1 - dF_j)`` and
    ``c_jl = -dF_j dF_l``; ``m_j`` and ``C_j`` are the conditional mean
    and covariance of ``(cos X, sin X)`` on interval ``j``.
    """
    spec = fdd_spec(m, partition)
    k = len(spec.intervals)
    dF = np.array([s.mass for s in spec.intervals])
    means = np.array([s.mean for s in spec.intervals])
    mult = np.diag(dF) - np.outer(dF, dF)
    cov = np.einsum("jl,ja,lb->jalb", mult, means, means)
    for j, s in enumerate(spec.intervals):
        cov[j, :, j, :] += s.mass * s.cond_cov
    return cov.reshape(2 * k, 2 * k)


def fluctuation_increments(m: CircleMeasure, angles, partition) -> np.ndarray:
    """Stacked ``Delta W_n(theta_j)``: ``W_n(0)`` then successive differences."""
    part = _normalize_partition(partition)
    w = fluctuation_process(m, angles, part)
    return np.concatenate([w[:1], np.diff(w, axis=0)]).ravel()


def fdd_monte_carlo(m: CircleMeasure, partition, n: int, replicas: int, seed: int) -> np.ndarray:
    """``(replicas, 2(kappa + 1))`` array of simulated increment vectors.

    Replica ``r`` uses ``stream(seed, r)``. Each increment is a sum over
    the points falling in one interval, so points are binned rather than
    sorted; the result equals :func:`fluctuation_increments`.
    """
    part = _normalize_partition(partition)
    k = part.size
    base = extremal_points_complex(m, part)
    expected = np.concatenate([base[:1], np.diff(base)])
    out = np.empty((replicas, 2 * k))
    for r in range(replicas):
        x = sample_angles(m, n, rng=stream(seed, r))
        # interval 0 is {0}; interval j >= 1 is (theta_{j-1}, theta_j]
        idx = np.searchsorted(part, x, side="left")
        sums = (np.bincount(idx, weights=np.cos(x), minlength=k)
                + 1j * np.bincount(idx, weights=np.sin(x), minlength=k))
        w = sums / math.sqrt(n) - math.sqrt(n) * expected
        out[r] = np.column_stack([w.real, w.imag]).ravel()
    return out


# -- convergence experiment ------------------------------------------------

def convergence_experiment(m: CircleMeasure, ns: Sequence[int], replicas: int, seed: int,
                           arc_subdiv: int = 1, with_max_theta: bool = False) -> List[tuple]:
    """Rows ``(n, replica, d_H)`` comparing empirical curves with ``B_mu``.

    Replica ``r`` at the ``i``-th sample size uses ``stream(seed, r, i)``.
    With ``with_max_theta`` each row also carries the exact max-theta
    deviation of the same sample.
    """
    ref = boundary_from_measure(m, arc_subdiv).closed_polyline()
    rows = []
    for i, n in enumerate(ns):
        for r in range(replicas):
            x = sample_angles(m, int(n), rng=stream(seed, r, i))
            d = hausdorff_curves(_empirical_complex(x), ref)
            if with_max_theta:
                rows.append((int(n), r, d, max_theta_deviation(m, x)))
            else:
                rows.append((int(n), r, d))
    return rows


def rate_slope(rows) -> float:
    """Least-squares slope of ``log median d_H`` against ``log n``."""
    ns = sorted({row[0] for row in rows})
    med = [np.median([row[2] for row in rows if row[0] == n]) for n in ns]
    return float(np.polyfit(np.log(ns), np.log(med), 1)[0])


# -- the K operator and reordered walks ------------------------------------

def _distinct(args: np.ndarray, tol: float = ANGLE_TOL) -> int:
    a = np.sort(args)
    count = 1 + int(np.count_nonzero(np.diff(a) > tol))
    if count > 1 and a[0] + TWO_PI - a[-1] <= tol:
        count -= 1
    return count


def k_operator(s: ComplexSample, cells: int = 4096) -> CircleMeasure:
    """Direction measure weighted by modulus, normalised to mass 1.

    Samples with at most 64 distinct arguments give exact atoms; larger
    ones are binned on a grid of ``cells`` cells.
    """
    total = math.fsum(s.moduli)
    if not total > 0:
        raise ValueError("all moduli are zero; the K operator is undefined")
    w = s.moduli / total
    keep = w > 0
    args, w = s.arguments[keep], w[keep]
    if _distinct(args) <= ATOMIC_ARGUMENT_LIMIT:
        return CircleMeasure.from_atoms(args, w)
    idx = np.minimum((args / (TWO_PI / cells)).astype(int), cells - 1)
    return from_grid(np.bincount(idx, weights=w, minlength=cells))


def _tie_order(args: np.ndarray, gen: np.random.Generator, tol: float = ANGLE_TOL) -> np.ndarray:
    order = np.argsort(args, kind="stable")
    a = args[order]
    group = np.concatenate([[0], np.cumsum(np.diff(a) > tol)])
    if group[-1] + 1 == a.size:
        return order
    keys = gen.random(a.size)
    return order[np.lexsort((keys, group))]


def reorder_complex(s: ComplexSample, seed: Optional[int] = None,
                    rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Partial sums of the argument-sorted sample, scaled by ``1/sum |W|``.

    Points whose arguments agree within ``1e-12`` are put in a uniformly
    random order, which needs a seed or a generator. Returns the
    ``(n + 1, 2)`` polyline starting at the origin.
    """
    if len(s) == 0:
        raise ValueError("sample must not be empty")
    total = math.fsum(s.moduli)
    if not total > 0:
        raise ValueError("all moduli are zero")
    if np.any(np.diff(np.sort(s.arguments)) <= ANGLE_TOL):
        order = _tie_order(s.arguments, as_generator(rng, seed))
    else:
        order = np.argsort(s.arguments, kind="stable")
    z = s.to_complex()[order]
    return _as_points(np.concatenate([[0j], np.cumsum(z)]) / total)


def polygon_differences(zs) -> ComplexSample:
    z = np.asarray(zs, dtype=float)
    z = z[:, 0] + 1j * z[:, 1] if z.ndim == 2 else np.asarray(zs, dtype=complex)
    return ComplexSample.from_complex(np.roll(z, -1) - z)


def reorder_polygon(zs, seed: Optional[int] = None,
                    rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Closed convex polygon from the sorted cyclic differences of ``zs``."""
    zs = np.asarray(zs)
    if len(zs) < 2:
        raise ValueError("at least two points are required")
    return reorder_complex(polygon_differences(zs), seed=seed, rng=rng)


def product_sample(s1: ComplexSample, s2: ComplexSample) -> ComplexSample:
    """All pairwise products: moduli multiply, arguments add mod 2pi."""
    mod = np.multiply.outer(s1.moduli, s2.moduli).ravel()
    arg = np.add.outer(s1.arguments, s2.arguments).ravel()
    return ComplexSample(mod, arg)


def prop_convol_check(s1: ComplexSample, s2: ComplexSample,
                      cells: int = 4096) -> Tuple[CircleMeasure, CircleMeasure]:
    """``(K(XY), K(X) * K(Y))`` for independent ``X``, ``Y`` given by samples."""
    lhs = k_operator(product_sample(s1, s2), cells)
    rhs = circ_convolve(k_operator(s1, cells), k_operator(s2, cells))
    return lhs, rhs
