"""Initial data for the two benchmark cases and for user-supplied snapshots."""
from __future__ import annotations

import numpy as np

from .config import ConfigError, RunConfig
from .core import DistributionState, MomentumGrid, make_grid
from .dynamics import RelaxationModel


def build_grid(cfg: RunConfig) -> MomentumGrid:
    g = cfg.grid
    return make_grid(g.p_min, g.p_max, g.n_nodes, cfg.species, cfg.constants)


def build_model(cfg: RunConfig, grid: MomentumGrid | None = None) -> RelaxationModel:
    grid = grid or build_grid(cfg)
    return RelaxationModel(grid, cfg.species, cfg.constants, cfg.solver, cfg.grid_consistent)


def juttner_initial(grid: MomentumGrid, species, constants, mu, U, beta) -> np.ndarray:
    """f_i = (g_i/h^3) exp(beta_i mu_i - beta_i U_i^mu p_mu), U_i^mu = (sqrt(c^2 + U_i^2), U_i)."""
    c, h = constants.c, constants.h
    out = np.empty((4, grid.n_nodes))
    for i, s in enumerate(species):
        u0 = np.sqrt(c * c + U[i] ** 2)
        phase = u0 * grid.energies[i] - U[i] * grid.nodes
        out[i] = (s.degeneracy / h**3) * np.exp(beta[i] * mu[i] - beta[i] * phase)
    return out


def triangle(nodes, a, b, height, apex=None) -> np.ndarray:
    """0 outside [a, b], linear up to ``height`` at ``apex``, linear back down."""
    apex = 0.5 * (a + b) if apex is None else apex
    return np.interp(nodes, [a, apex, b], [0.0, height, 0.0], left=0.0, right=0.0)


def init_case1(cfg: RunConfig, grid: MomentumGrid | None = None) -> DistributionState:
    if cfg.case1 is None:
        raise ConfigError("config has no [case1] table")
    grid = grid or build_grid(cfg)
    c1 = cfg.case1
    return DistributionState(0.0, juttner_initial(grid, cfg.species, cfg.constants, c1.mu, c1.U, c1.beta))


def init_case2(cfg: RunConfig, grid: MomentumGrid | None = None) -> DistributionState:
    if cfg.case2 is None:
        raise ConfigError("config has no [case2] table")
    grid = grid or build_grid(cfg)
    c2 = cfg.case2
    f = []
    for (a, b), height, apex in zip(c2.support, c2.height, c2.apexes()):
        if a < grid.p_min or b > grid.p_max:
            raise ConfigError(f"support [{a}, {b}] leaves the grid [{grid.p_min}, {grid.p_max}]")
        f.append(triangle(grid.nodes, a, b, height, apex))
    return DistributionState(0.0, np.array(f))


def init_custom(cfg: RunConfig, grid: MomentumGrid | None = None) -> DistributionState:
    from .output import read_snapshot

    grid = grid or build_grid(cfg)
    p, f, _ = read_snapshot(cfg.custom.file)
    return DistributionState(0.0, np.array([np.interp(grid.nodes, p, fi, left=0.0, right=0.0) for fi in f]))


def initial_state(cfg: RunConfig, grid: MomentumGrid | None = None) -> DistributionState:
    return {"case1": init_case1, "case2": init_case2, "custom": init_custom}[cfg.scenario](cfg, grid)
