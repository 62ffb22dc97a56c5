"""Random smooth convex sets from nonnegative trigonometric polynomials.

A density ``f(t) = a0 + sum_n A_n cos(nt) + B_n sin(nt)`` that is
nonnegative, has ``2 pi a0 = 1`` and ``A_1 = B_1 = 0`` is the radius of
curvature of a smooth convex curve of perimeter 1. Writing
``f = |D(e^{it})|^2`` for a polynomial ``D`` makes nonnegativity automatic;
the generators below pick ``D`` at random and then enforce the two
linear conditions. ``gen_fixed_area`` instead prescribes the area and
rejects candidates that go negative.

Coefficient conventions
-----------------------
The density coefficients ``(A_n, B_n)`` coincide with the classical
series coefficients ``a_n = alpha_n / pi`` of the measure, while the
constant term is ``a0 = alpha_0 / (2 pi)``. :meth:`TrigDensity.fourier`
is the one place where this conversion happens.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .circle_measure import TWO_PI, CircleMeasure, FourierCoeffs, from_grid
from .rng import stream

CHECK_GRID = 2 ** 16
COARSE_GRID = 2 ** 10


@dataclass(frozen=True)
class SzegoPolynomial:
    """``D(z) = sum_k rho_k exp(i theta_k) z^k``."""

    rho: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float).ravel()
        theta = np.asarray(self.theta, dtype=float).ravel()
        if rho.shape != theta.shape or rho.size == 0:
            raise ValueError("rho and theta must be nonempty and of equal length")
        if np.any(rho < 0):
            raise ValueError("rho must be nonnegative")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta", theta)

    @property
    def coefficients(self) -> np.ndarray:
        return self.rho * np.exp(1j * self.theta)

    def squared_modulus(self, t) -> np.ndarray:
        """``|D(exp(it))|^2`` evaluated directly."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.arange(self.rho.size)
        return np.abs(np.exp(1j * np.outer(t, k)) @ self.coefficients) ** 2

    def squared_modulus_grid(self, points: int) -> np.ndarray:
        """``|D|^2`` on ``t_j = 2 pi j / points`` through one FFT."""
        c = self.coefficients
        if c.size > points:
            raise ValueError("grid too coarse for the polynomial degree")
        return np.abs(points * np.fft.ifft(c, points)) ** 2


@dataclass(frozen=True)
class TrigDensity:
    """``f(t) = a0 + sum_{n=1}^{K} A_n cos(nt) + B_n sin(nt)``; ``A[0] = B[0] = 0``."""

    a0: float
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).ravel()
        B = np.asarray(self.B, dtype=float).ravel()
        if A.shape != B.shape or A.size == 0:
            raise ValueError("A and B must be nonempty and of equal length")
        A, B = A.copy(), B.copy()
        A[0] = B[0] = 0.0
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def degree(self) -> int:
        return self.A.size - 1

    @property
    def mass(self) -> float:
        return TWO_PI * self.a0

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n = np.arange(1, self.A.size)
        nt = np.outer(t, n)
        return self.a0 + np.cos(nt) @ self.A[1:] + np.sin(nt) @ self.B[1:]

    def on_grid(self, points: int) -> np.ndarray:
        """Values at ``t_j = 2 pi j / points`` through one inverse real FFT."""
        if self.degree >= points // 2:
            raise ValueError("grid too coarse for the polynomial degree")
        X = np.zeros(points // 2 + 1, dtype=complex)
        X[0] = points * self.a0
        X[1:self.A.size] = 0.5 * points * (self.A[1:] - 1j * self.B[1:])
        return np.fft.irfft(X, points)

    def lipschitz(self) -> float:
        """``sum n |(A_n, B_n)|``, a bound on ``|f'|``."""
        n = np.arange(self.A.size)
        return float(np.sum(n * np.hypot(self.A, self.B)))

    def curvature_bound(self) -> float:
        """``sum n^2 |(A_n, B_n)|``, a bound on ``|f''|``."""
        n = np.arange(self.A.size)
        return float(np.sum(n * n * np.hypot(self.A, self.B)))

    def antiderivative(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n = np.arange(1, self.A.size)
        nt = np.outer(t, n)
        return self.a0 * t + np.sin(nt) @ (self.A[1:] / n) - np.cos(nt) @ (self.B[1:] / n)

    def fourier(self) -> FourierCoeffs:
        """Measure coefficients ``alpha_n = pi A_n``, ``alpha_0 = 2 pi a0``."""
        alpha = math.pi * self.A
        beta = math.pi * self.B
        alpha[0] = self.mass
        return FourierCoeffs(self.mass, alpha, beta)

    def is_closed(self, tol: float = 1e-12) -> bool:
        return self.degree < 1 or math.hypot(self.A[1], self.B[1]) <= tol


def density_from_szego(p: SzegoPolynomial) -> TrigDensity:
    """Coefficients of ``|D(e^{it})|^2``.

    ``A_0 = sum rho_k^2`` and, for ``n >= 1``,
    ``A_n - i B_n = 2 sum_k rho_{k+n} rho_k exp(i(theta_{k+n} - theta_k))``.
    """
    c = p.coefficients
    K = c.size - 1
    A = np.zeros(K + 1)
    B = np.zeros(K + 1)
    for n in range(1, K + 1):
        s = 2.0 * np.sum(c[n:] * np.conj(c[:-n]))
        A[n], B[n] = s.real, -s.imag
    return TrigDensity(float(np.sum(p.rho ** 2)), A, B)


def _normalize(rho: np.ndarray) -> np.ndarray:
    return rho / math.sqrt(TWO_PI * float(np.sum(rho ** 2)))


def close_szego(rho, theta) -> SzegoPolynomial:
    """Choose ``(rho_0, theta_0)`` so that ``A_1 = B_1 = 0``, then normalise.

    Needs ``rho_1 > 0``.
    """
    rho = np.array(rho, dtype=float)
    theta = np.array(theta, dtype=float)
    if rho[1] <= 0:
        raise ValueError("rho_1 must be positive")
    c = rho * np.exp(1j * theta)
    # A_1 - i B_1 = 2 sum_k c_{k+1} conj(c_k); kill it with the k = 0 term
    rest = np.sum(c[2:] * np.conj(c[1:-1]))
    c0 = -np.conj(rest / c[1]) if rest != 0 else 0j
    rho[0], theta[0] = abs(c0), float(np.angle(c0)) if c0 != 0 else 0.0
    return SzegoPolynomial(_normalize(rho), theta)


def gen_closed_first(K: int, seed: int) -> TrigDensity:
    """Random ``rho_j ~ U[0,1]``, ``theta_j ~ U[0, 2pi)`` for ``j >= 1``;
    ``(rho_0, theta_0)`` solved for closure; unit mass."""
    if K < 2:
        raise ValueError("K must be >= 2")
    attempt = 0
    while True:
        gen = stream(seed, 0, attempt)
        rho = np.concatenate([[0.0], gen.random(K)])
        theta = np.concatenate([[0.0], gen.uniform(0.0, TWO_PI, K)])
        if rho[1] > 0:
            return density_from_szego(close_szego(rho, theta))
        attempt += 1


def stick_breaking(r) -> np.ndarray:
    """Fractions ``r_0..r_{K-1}`` to ``K + 1`` masses summing to one.

    Mass ``k`` is ``r_k prod_{j<k} (1 - r_j)``; the last takes the rest.
    """
    r = np.asarray(r, dtype=float)
    left = np.concatenate([[1.0], np.cumprod(1.0 - r)])
    w = np.concatenate([r * left[:-1], [0.0]])
    w[-1] = 1.0 - math.fsum(w[:-1])
    return np.maximum(w, 0.0)


def gen_mass_first(K: int, seed: Optional[int] = None, r=None) -> np.ndarray:
    """``rho_k`` with ``sum rho_k^2 = 1/(2 pi)`` by stick-breaking."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if r is None:
        if seed is None:
            raise ValueError("an explicit seed is required")
        r = stream(seed).random(K)
    r = np.asarray(r, dtype=float)
    if r.size != K or np.any((r < 0) | (r > 1)):
        raise ValueError("r must hold K fractions in [0, 1]")
    return np.sqrt(stick_breaking(r) / TWO_PI)


def sparse_support(K: int, gen: np.random.Generator) -> np.ndarray:
    """Indices in ``0..K`` chosen with probability 1/2 unless the previous one was."""
    chosen = []
    prev = False
    for i in range(K + 1):
        prev = (not prev) and gen.random() < 0.5
        if prev:
            chosen.append(i)
    return np.array(chosen, dtype=int)


def sparse_szego(support, seed: int) -> SzegoPolynomial:
    """Polynomial supported on ``support`` with stick-broken masses."""
    support = np.asarray(support, dtype=int)
    if support.size == 0 or np.any(np.diff(support) < 2):
        raise ValueError("support must be nonempty without adjacent indices")
    gen = stream(seed, 0, 1)
    w = stick_breaking(gen.random(support.size - 1))
    rho = np.zeros(support.max() + 1)
    theta = np.zeros(support.max() + 1)
    rho[support] = np.sqrt(w / TWO_PI)
    theta[support] = gen.uniform(0.0, TWO_PI, support.size)
    return SzegoPolynomial(rho, theta)


def gen_sparse(K: int, seed: int) -> TrigDensity:
    """Closed by construction: no two consecutive indices carry mass."""
    if K < 2:
        raise ValueError("K must be >= 2")
    attempt = 0
    while True:
        F = sparse_support(K, stream(seed, 0, 2 + attempt))
        if F.size:
            return density_from_szego(sparse_szego(F, seed ^ attempt))
        attempt += 1


# -- area-targeted generation -----------------------------------------------

def certified_minimum(d: TrigDensity, points: int = CHECK_GRID) -> float:
    """A lower bound on ``min f`` that is sharp up to ``1e-13``.

    Between two grid points ``f`` stays above its linear interpolant minus
    ``L2 h^2 / 8``, ``L2`` bounding ``|f''|``. When that does not settle
    the sign, each grid point whose value lies within the slack of zero
    is refined with a bounded scalar minimisation over its two cells.
    """
    vals = d.on_grid(points)
    h = TWO_PI / points
    slack = 0.125 * h * h * d.curvature_bound()
    low = float(vals.min())
    if low - slack >= 0 or low < 0:
        return low - slack
    best = low
    for i in np.nonzero(vals < slack)[0]:
        t = i * h
        res = minimize_scalar(lambda s: float(d(s)[0]), bounds=(t - h, t + h),
                              method="bounded", options={"xatol": 1e-13})
        best = min(best, float(res.fun))
    # refinement finds the true minimum of each suspect cell pair up to xatol
    return best - 1e-13 * d.lipschitz()


@dataclass(frozen=True)
class FixedAreaResult:
    density: Optional[TrigDensity]
    rejects: int

    @property
    def accepted(self) -> bool:
        return self.density is not None


def fixed_area_candidate(beta: float, K: int, gen: np.random.Generator) -> TrigDensity:
    """Coefficients with ``sum_{k>=2} (a_k^2 + b_k^2)/(k^2 - 1) = beta``."""
    k = np.arange(2, K + 1)
    w = stick_breaking(gen.random(K - 2))
    c = np.sqrt(beta * w * (k * k - 1.0))
    phase = gen.uniform(0.0, TWO_PI, K - 1)
    A = np.zeros(K + 1)
    B = np.zeros(K + 1)
    A[2:], B[2:] = c * np.cos(phase), c * np.sin(phase)
    return TrigDensity(1.0 / TWO_PI, A, B)


def gen_fixed_area(beta: float, K: int, seed: int, max_rejects: int = 10_000) -> FixedAreaResult:
    """First nonnegative candidate with prescribed area, or a rejection count."""
    if not 0.0 <= beta <= 1.0 / (2 * math.pi ** 2):
        raise ValueError("beta must lie in [0, 1/(2 pi^2)]")
    if K < 2:
        raise ValueError("K must be >= 2")
    gen = stream(seed)
    rejects = 0
    while rejects <= max_rejects:
        d = fixed_area_candidate(beta, K, gen)
        if d.on_grid(COARSE_GRID).min() >= 0 and certified_minimum(d) >= 0:
            return FixedAreaResult(d, rejects)
        rejects += 1
    return FixedAreaResult(None, max_rejects)


def measure_from_density(d: TrigDensity, M: int = 4096) -> CircleMeasure:
    """Grid measure with the exact integral of ``f`` over each cell."""
    edges = TWO_PI * np.arange(M + 1) / M
    edges[-1] = TWO_PI
    G = d.antiderivative(edges)
    masses = np.diff(G)
    tiny = 1e-12 * d.mass / M
    if masses.min() < -tiny:
        raise ValueError(f"density is negative: cell mass {masses.min():.3e}")
    return from_grid(np.maximum(masses, 0.0))
