"""Constants, species data, momentum grid and distribution state."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

N_SPECIES = 4
REACTANTS = (1, 2)
PRODUCTS = (3, 4)


@dataclass(frozen=True)
class PhysicalConstants:
    """Speed of light, Planck constant and Boltzmann constant.

    Natural units (all ones) are the default.
    """

    c: float = 1.0
    h: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        for name in ("c", "h", "k"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class SpeciesParams:
    """Per-species data for the reaction G1 + G2 <-> G3 + G4.

    ``rate`` is the relaxation frequency nu = c m / tau.
    """

    index: int
    mass: float
    rate: float
    degeneracy: float = 1.0

    def __post_init__(self):
        if self.index not in (1, 2, 3, 4):
            raise ValueError(f"species index must be in 1..4, got {self.index}")
        for name in ("mass", "rate", "degeneracy"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"species {self.index}: {name} must be positive, got {value!r}")

    @property
    def is_reactant(self) -> bool:
        return self.index in REACTANTS

    @classmethod
    def from_relaxation_time(cls, index, mass, tau, degeneracy=1.0, constants=None):
        c = (constants or PhysicalConstants()).c
        return cls(index=index, mass=mass, rate=c * mass / tau, degeneracy=degeneracy)


def make_species(masses, rates, degeneracies=None) -> tuple[SpeciesParams, ...]:
    """Build the four species from per-species lists."""
    if len(masses) != N_SPECIES or len(rates) != N_SPECIES:
        raise ValueError("exactly four masses and four rates are required")
    if degeneracies is None:
        degeneracies = [1.0] * N_SPECIES
    return tuple(
        SpeciesParams(index=i + 1, mass=float(m), rate=float(r), degeneracy=float(g))
        for i, (m, r, g) in enumerate(zip(masses, rates, degeneracies))
    )


def check_species(species: Sequence[SpeciesParams]) -> None:
    if len(species) != N_SPECIES:
        raise ValueError(f"expected {N_SPECIES} species, got {len(species)}")
    for i, s in enumerate(species):
        if s.index != i + 1:
            raise ValueError(f"species out of order: position {i} holds index {s.index}")


def mass_defect(species: Sequence[SpeciesParams]) -> float:
    """m1 + m2 - m3 - m4."""
    check_species(species)
    m = [s.mass for s in species]
    return m[0] + m[1] - m[2] - m[3]


def degeneracy_ratio(species: Sequence[SpeciesParams]) -> float:
    """g1 g2 / (g3 g4), the mass-action target."""
    g = [s.degeneracy for s in species]
    return (g[0] * g[1]) / (g[2] * g[3])


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Uniform 1-D momentum grid with trapezoid weights.

    ``energies[i]`` holds p0 = sqrt((c m_i)^2 + p^2) for species i + 1.
    """

    p_min: float
    p_max: float
    n_nodes: int
    nodes: np.ndarray
    weights: np.ndarray
    energies: np.ndarray
    masses: tuple[float, ...]
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    @property
    def spacing(self) -> float:
        return (self.p_max - self.p_min) / (self.n_nodes - 1)

    def __len__(self):
        return self.n_nodes


def make_grid(p_min, p_max, n_nodes, species, constants=None) -> MomentumGrid:
    """Uniform grid on [p_min, p_max] including both endpoints.

    Examples
    --------
    >>> from rebgk.core import make_grid, make_species
    >>> g = make_grid(-1.0, 1.0, 3, make_species([1, 1, 1, 1], [1, 1, 1, 1]))
    >>> g.nodes.tolist(), g.weights.tolist()
    ([-1.0, 0.0, 1.0], [0.5, 1.0, 0.5])
    """
    constants = constants or PhysicalConstants()
    p_min = float(p_min)
    p_max = float(p_max)
    if not (np.isfinite(p_min) and np.isfinite(p_max)):
        raise ValueError("grid bounds must be finite")
    if not p_min < p_max:
        raise ValueError(f"need p_min < p_max, got [{p_min}, {p_max}]")
    if int(n_nodes) != n_nodes or n_nodes < 3:
        raise ValueError(f"need an integer n_nodes >= 3, got {n_nodes!r}")
    n_nodes = int(n_nodes)
    nodes = np.linspace(p_min, p_max, n_nodes)
    dp = (p_max - p_min) / (n_nodes - 1)
    weights = np.full(n_nodes, dp)
    weights[0] = weights[-1] = 0.5 * dp
    masses = tuple(float(s.mass) for s in species)
    rest = constants.c * np.asarray(masses)
    energies = np.sqrt(rest[:, None] ** 2 + nodes[None, :] ** 2)
    for arr in (nodes, weights, energies):
        arr.setflags(write=False)
    return MomentumGrid(p_min, p_max, n_nodes, nodes, weights, energies, masses, constants)


@dataclass(frozen=True, eq=False)
class DistributionState:
    """Grid samples of f1..f4 at time ``t``; ``f`` has shape (4, n_nodes)."""

    t: float
    f: np.ndarray

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        if f.ndim != 2 or f.shape[0] != N_SPECIES:
            raise ValueError(f"f must have shape (4, n_nodes), got {f.shape}")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "t", float(self.t))

    def with_f(self, f, t=None) -> "DistributionState":
        return DistributionState(self.t if t is None else t, f)


def validate_state(state: DistributionState, grid: MomentumGrid | None = None) -> list[str]:
    """Return every invariant violation of ``state``; an empty list means ok."""
    problems = []
    f = state.f
    if grid is not None and f.shape[1] != grid.n_nodes:
        problems.append(f"shape mismatch: {f.shape[1]} samples on a {grid.n_nodes}-node grid")
    if not np.isfinite(state.t):
        problems.append("non-finite time")
    for i, fi in enumerate(f, start=1):
        bad = ~np.isfinite(fi)
        if bad.any():
            problems.append(f"species {i}: {int(bad.sum())} non-finite values")
        neg = np.isfinite(fi) & (fi < 0)
        if neg.any():
            problems.append(f"species {i}: {int(neg.sum())} negative values (min {fi[neg].min():.3e})")
    if np.all(f[np.isfinite(f)] == 0):
        problems.append("all species identically zero")
    return problems
