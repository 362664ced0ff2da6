"""Spatially homogeneous relaxation  df_i/dt = (nu_i / p0) (J_i - f_i)  with RK4.

The attractor is re-solved from the stage state at every Runge-Kutta stage.
By default the analytic solution is then corrected against grid quadrature
(:func:`rebgk.auxsolver.refine_on_grid`), so each stage derivative satisfies
the discrete conservation identities to round-off even when the attractor
tails are cut off by the grid.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .auxsolver import (
    AuxiliaryState,
    SolverInputs,
    SolverOptions,
    evaluate_attractor,
    refine_on_grid,
    solve_parameters,
)
from .core import DistributionState, MomentumGrid, PhysicalConstants, SpeciesParams, check_species
from .moments import quad

log = logging.getLogger(__name__)

NEGATIVITY_THRESHOLD = -1e-13


class NegativityWarning(RuntimeWarning):
    pass


class RunAborted(RuntimeError):
    """A step failed; ``result`` holds everything computed before the failure."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True, eq=False)
class RelaxationModel:
    grid: MomentumGrid
    species: tuple[SpeciesParams, ...]
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    options: SolverOptions = field(default_factory=SolverOptions)
    # re-balance the attractor against grid quadrature (see refine_on_grid)
    grid_consistent: bool = True

    def __post_init__(self):
        check_species(self.species)
        object.__setattr__(self, "species", tuple(self.species))
        # rate / p0 per species and node
        nu = np.array([s.rate for s in self.species])
        object.__setattr__(self, "_rates", nu[:, None] / self.grid.energies)

    @property
    def rates(self) -> np.ndarray:
        return self._rates

    def solve(self, f) -> AuxiliaryState:
        inputs = SolverInputs.from_state(f, self.grid, self.species, self.constants)
        aux = solve_parameters(inputs, self.options)
        if self.grid_consistent:
            aux = refine_on_grid(aux, f, self.grid, self.species)
        return aux

    def attractor(self, f) -> tuple[np.ndarray, AuxiliaryState]:
        aux = self.solve(f)
        return evaluate_attractor(aux, self.grid), aux


def _f(state_or_array):
    return state_or_array.f if isinstance(state_or_array, DistributionState) else np.asarray(state_or_array)


def rhs(state, model: RelaxationModel, attractor=None) -> np.ndarray:
    """Time derivative (nu_i/p0)(J_i - f_i).

    ``attractor`` freezes J (an array of shape (4, n)) instead of re-solving it.
    """
    f = _f(state)
    J = model.attractor(f)[0] if attractor is None else attractor
    return model.rates * (J - f)


def entropy_production(state, model: RelaxationModel) -> float:
    """sum_i int rhs_i ln(h^3 f_i / g_i) dp; non-positive for admissible f."""
    f = _f(state)
    d = rhs(f, model)
    h3 = model.constants.h ** 3
    total = 0.0
    for i, s in enumerate(model.species):
        with np.errstate(divide="ignore"):
            lf = np.log(h3 * f[i] / s.degeneracy)
        # f = 0 nodes: rhs > 0 against ln f = -inf, i.e. a -inf contribution
        if np.any((f[i] == 0) & (d[i] > 0)):
            return -math.inf
        term = np.where(f[i] > 0, d[i] * lf, 0.0)
        total += quad(model.grid, term)
    return total


def rk4_step(state: DistributionState, dt: float, model: RelaxationModel, attractor=None) -> DistributionState:
    """Classical fourth-order Runge-Kutta step of length ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    f = state.f
    k1 = rhs(f, model, attractor)
    k2 = rhs(f + 0.5 * dt * k1, model, attractor)
    k3 = rhs(f + 0.5 * dt * k2, model, attractor)
    k4 = rhs(f + dt * k3, model, attractor)
    f_new = f + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    low = f_new.min()
    if low < NEGATIVITY_THRESHOLD:
        warnings.warn(f"t = {state.t + dt:.6g}: RK4 undershoot to {low:.3e}", NegativityWarning, stacklevel=2)
    return DistributionState(state.t + dt, f_new)


def entropy(state, grid: MomentumGrid, species, constants=None) -> float:
    """H = sum_i int f_i ln(h^3 f_i / g_i) dp with 0 ln 0 = 0.

    Negative undershoot values are treated as zero.
    """
    constants = constants or grid.constants
    f = np.maximum(_f(state), 0.0)
    h3 = constants.h ** 3
    return float(sum(quad(grid, xlogy(f[i], h3 * f[i] / s.degeneracy)) for i, s in enumerate(species)))


@dataclass(frozen=True)
class Diagnostics:
    t: float
    N: tuple[float, float, float, float]
    N13: float
    N14: float
    N24: float
    E: float
    P: float
    H: float
    distance: tuple[float, float, float, float]
    beta: float
    mu: tuple[float, float, float, float]
    U: tuple[float, float]
    min_f: float

    FIELDS = (
        "t", "N1", "N2", "N3", "N4", "N13", "N14", "N24", "E", "P", "H",
        "d1", "d2", "d3", "d4", "beta_tilde", "mu1", "mu2", "mu3", "mu4", "Ut0", "Ut1",
    )

    def row(self) -> list[float]:
        return [
            self.t, *self.N, self.N13, self.N14, self.N24, self.E, self.P, self.H,
            *self.distance, self.beta, *self.mu, *self.U,
        ]

    @classmethod
    def from_row(cls, row) -> "Diagnostics":
        v = [float(x) for x in row]
        return cls(
            t=v[0], N=tuple(v[1:5]), N13=v[5], N14=v[6], N24=v[7], E=v[8], P=v[9], H=v[10],
            distance=tuple(v[11:15]), beta=v[15], mu=tuple(v[16:20]), U=tuple(v[20:22]), min_f=math.nan,
        )


def diagnostics(state: DistributionState, model: RelaxationModel, aux=None, J=None) -> Diagnostics:
    grid = model.grid
    f = state.f
    if J is None:
        J, aux = model.attractor(f)
    N = quad(grid, f)
    E = float(np.sum(quad(grid, grid.energies * f)))
    P = float(np.sum(quad(grid, grid.nodes * f)))
    return Diagnostics(
        t=state.t,
        N=tuple(float(x) for x in N),
        N13=float(N[0] + N[2]),
        N14=float(N[0] + N[3]),
        N24=float(N[1] + N[3]),
        E=E,
        P=P,
        H=entropy(state, grid, model.species, model.constants),
        distance=tuple(float(x) for x in np.max(np.abs(f - J), axis=1)),
        beta=aux.beta,
        mu=tuple(float(x) for x in aux.mu),
        U=tuple(float(x) for x in aux.U),
        min_f=float(f.min()),
    )


@dataclass
class Snapshot:
    state: DistributionState
    attractor: np.ndarray
    aux: AuxiliaryState


@dataclass
class RunResult:
    series: list[Diagnostics] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    final: DistributionState | None = None
    negativity_events: int = 0

    def column(self, name) -> np.ndarray:
        idx = Diagnostics.FIELDS.index(name)
        return np.array([d.row()[idx] for d in self.series])


def run(
    initial: DistributionState,
    model: RelaxationModel,
    dt: float,
    t_end: float,
    stride: int = 10,
    snapshot_times=(),
    callback=None,
) -> RunResult:
    """Integrate from ``initial.t`` to ``t_end``.

    Diagnostics are recorded at the start, every ``stride`` steps and at the
    final step. ``snapshot_times`` are matched to the nearest step.
    ``callback(diag)`` is invoked for every recorded diagnostics row.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    n_steps = max(0, int(round((t_end - initial.t) / dt)))
    snap_steps = {int(round((ts - initial.t) / dt)) for ts in snapshot_times}
    result = RunResult()

    def record(state, k):
        J, aux = model.attractor(state.f)
        if k % stride == 0 or k == n_steps:
            d = diagnostics(state, model, aux, J)
            result.series.append(d)
            if callback is not None:
                callback(d)
        if k in snap_steps:
            result.snapshots.append(Snapshot(state, J, aux))

    state = initial
    try:
        record(state, 0)
        for k in range(1, n_steps + 1):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", NegativityWarning)
                state = rk4_step(state, dt, model)
            for w in caught:
                result.negativity_events += 1
                log.warning("%s", w.message)
            # accumulated round-off in t; pin to the step grid
            state = DistributionState(initial.t + k * dt, state.f)
            if k % stride == 0 or k == n_steps or k in snap_steps:
                record(state, k)
    except Exception as exc:
        result.final = state
        raise RunAborted(f"run aborted at t = {state.t:.6g}: {exc}", result) from exc
    result.final = state
    return result
