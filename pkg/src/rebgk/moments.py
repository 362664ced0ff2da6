"""Grid moments, the Eckart decomposition and rest-frame Juttner functionals.

``M(beta) = int exp(-c beta p0) dp`` and ``Mt(beta) = int exp(-c beta p0) dp/p0``
are evaluated from Bessel closed forms (substitution p = m c sinh(theta)):

=========  ==============================  ==============================
dimension  M                               Mt
=========  ==============================  ==============================
1          2 m c K1(z)                     2 K0(z)
3          4 pi (m c)^2 K2(z) / (c beta)   4 pi m c K1(z) / (c beta)
=========  ==============================  ==============================

with ``z = m c^2 beta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bessel
from .core import MomentumGrid, PhysicalConstants, N_SPECIES


def quad(grid: MomentumGrid, values) -> float | np.ndarray:
    """Trapezoid sum over the last axis of ``values``."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != grid.n_nodes:
        raise ValueError(f"expected {grid.n_nodes} samples, got {values.shape[-1]}")
    out = values @ grid.weights
    return float(out) if np.ndim(out) == 0 else out


def minkowski(a, b) -> float:
    """a^mu b_mu with signature (+, -, ...)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(a[0] * b[0] - np.dot(a[1:], b[1:]))


@dataclass(frozen=True)
class SpeciesMoments:
    """Moments of one species on the grid.

    J0 = int f dp, J0t = int f dp/p0, J1t = int p f dp/p0,
    N = c (J0, J1t), n = sqrt(J0^2 - J1t^2), U = N / n.
    """

    J0: float
    J0t: float
    J1t: float
    N: np.ndarray
    n: float
    U: np.ndarray


class MomentError(ArithmeticError):
    pass


def species_moments(f_i, grid: MomentumGrid, index: int, constants=None) -> SpeciesMoments:
    """Eckart moments of species ``index`` (1-based) sampled on ``grid``."""
    c = (constants or grid.constants).c
    p0 = grid.energies[index - 1]
    f_i = np.asarray(f_i, dtype=float)
    J0 = quad(grid, f_i)
    J0t = quad(grid, f_i / p0)
    J1t = quad(grid, grid.nodes * f_i / p0)
    n2 = (J0 - J1t) * (J0 + J1t)
    if not n2 > 0:
        raise MomentError(f"species {index}: degenerate four-flow (n^2 = {n2:.3e})")
    n = float(np.sqrt(n2))
    N = c * np.array([J0, J1t])
    return SpeciesMoments(J0=J0, J0t=J0t, J1t=J1t, N=N, n=n, U=N / n)


def all_moments(f, grid: MomentumGrid, constants=None) -> tuple[SpeciesMoments, ...]:
    return tuple(species_moments(f[i], grid, i + 1, constants) for i in range(N_SPECIES))


# -- rest-frame Juttner functionals, vectorised over masses ------------------


def _z(beta, masses, c):
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be positive and finite, got {beta!r}")
    return np.asarray(masses, dtype=float) * c * c * beta


def log_M(beta, masses, c=1.0, dimension=1):
    m = np.asarray(masses, dtype=float)
    z = _z(beta, m, c)
    if dimension == 1:
        return np.log(2 * m * c) + bessel.log_besselK(1, z)
    if dimension == 3:
        return np.log(4 * np.pi * (m * c) ** 2 / (c * beta)) + bessel.log_besselK(2, z)
    raise ValueError(f"dimension must be 1 or 3, got {dimension}")


def log_Mt(beta, masses, c=1.0, dimension=1):
    m = np.asarray(masses, dtype=float)
    z = _z(beta, m, c)
    if dimension == 1:
        return np.log(2.0) + bessel.log_besselK(0, z)
    if dimension == 3:
        return np.log(4 * np.pi * m * c / (c * beta)) + bessel.log_besselK(1, z)
    raise ValueError(f"dimension must be 1 or 3, got {dimension}")


def ratio(beta, masses, c=1.0, dimension=1):
    """M / Mt, decreasing in beta towards c m."""
    m = np.asarray(masses, dtype=float)
    z = _z(beta, m, c)
    if dimension == 1:
        return m * c * bessel.ratio_K1_K0(z)
    if dimension == 3:
        return 2.0 / (c * beta) + m * c * bessel.ratio_K0_K1(z)
    raise ValueError(f"dimension must be 1 or 3, got {dimension}")


def d_ratio(beta, masses, c=1.0, dimension=1):
    """d(M/Mt)/d beta."""
    m = np.asarray(masses, dtype=float)
    z = _z(beta, m, c)
    dz = m * c * c
    if dimension == 1:
        return m * c * dz * bessel.d_ratio_K1_K0(z)
    if dimension == 3:
        return -2.0 / (c * beta * beta) + m * c * dz * bessel.d_ratio_K0_K1(z)
    raise ValueError(f"dimension must be 1 or 3, got {dimension}")


@dataclass(frozen=True)
class JuttnerMoments:
    dimension: int
    beta: float
    mass: float
    log_M: float
    log_Mt: float
    ratio: float

    @property
    def M(self) -> float:
        return float(np.exp(self.log_M))

    @property
    def Mt(self) -> float:
        return float(np.exp(self.log_Mt))


def juttner_M(beta, mass, constants=None, dimension=1) -> JuttnerMoments:
    c = (constants or PhysicalConstants()).c
    return JuttnerMoments(
        dimension=dimension,
        beta=float(beta),
        mass=float(mass),
        log_M=float(log_M(beta, mass, c, dimension)),
        log_Mt=float(log_Mt(beta, mass, c, dimension)),
        ratio=float(ratio(beta, mass, c, dimension)),
    )


# -- Juttner samples on the grid ---------------------------------------------


def juttner_log_values(log_A, beta, U, grid: MomentumGrid, index: int) -> np.ndarray:
    """ln of log_A-weighted exp(-beta U^mu p_mu) at the grid nodes."""
    p0 = grid.energies[index - 1]
    return log_A - beta * (U[0] * p0 - U[1] * grid.nodes)


def juttner_on_grid(log_A, beta, U, grid: MomentumGrid, index: int) -> np.ndarray:
    return np.exp(juttner_log_values(log_A, beta, U, grid, index))


def juttner_moments_lab(aux, grid: MomentumGrid) -> np.ndarray:
    """Quadratures of the attractor: rows (int J dp, int J dp/p0, int p J dp/p0)."""
    out = np.empty((N_SPECIES, 3))
    for i in range(N_SPECIES):
        J = juttner_on_grid(aux.log_A[i], aux.beta, aux.U, grid, i + 1)
        p0 = grid.energies[i]
        out[i] = quad(grid, np.stack([J, J / p0, grid.nodes * J / p0]))
    return out
