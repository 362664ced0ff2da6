"""Run configuration: TOML file format, presets and validation.

Layout of a config file::

    scenario = "case1"          # case1 | case2 | custom
    dt = 0.01
    t_end = 10.0
    stride = 10
    output_dir = "out/case1"
    snapshot_times = [0.0, 10.0]

    [constants]
    c = 1.0
    h = 1.0
    k = 1.0

    [grid]
    p_min = -30.0
    p_max = 30.0
    n_nodes = 1201

    [solver]
    beta_rtol = 1e-12
    residual_tol = 1e-10
    xi_eps_factor = 1e-10
    grid_consistent = true

    [[species]]                 # four entries, in reaction order
    mass = 2.0
    rate = 3.0
    degeneracy = 1.0

    [case1]
    mu = [1.8, 1.3, 1.0, 1.0]
    U = [0.5, -0.3, 1.0, 0.2]
    beta = [0.8, 1.1, 0.9, 1.2]
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import tomli
import tomli_w

from .auxsolver import SolverOptions
from .core import N_SPECIES, PhysicalConstants, SpeciesParams, make_species

SCENARIOS = ("case1", "case2", "custom")

CASE1_MASSES = (2.0, 1.0, 3.0, 1.0)
CASE1_RATES = (3.0, 2.0, 1.0, 4.0)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    p_min: float = -30.0
    p_max: float = 30.0
    n_nodes: int = 1201


@dataclass(frozen=True)
class Case1Params:
    """Juttner initial data; ``U`` is the spatial velocity component."""

    mu: tuple[float, ...] = (1.8, 1.3, 1.0, 1.0)
    U: tuple[float, ...] = (0.5, -0.3, 1.0, 0.2)
    beta: tuple[float, ...] = (0.8, 1.1, 0.9, 1.2)

    def __post_init__(self):
        for name in ("mu", "U", "beta"):
            if len(getattr(self, name)) != N_SPECIES:
                raise ConfigError(f"case1.{name} needs four values")
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if any(not b > 0 for b in self.beta):
            raise ConfigError("case1.beta must be positive")


@dataclass(frozen=True)
class Case2Params:
    """Triangular initial data; ``apex`` defaults to the support midpoint."""

    support: tuple[tuple[float, float], ...] = ((-9.0, -2.0), (-7.5, 3.0), (-3.0, 1.0), (-5.5, -5.0))
    height: tuple[float, ...] = (0.2, 0.38, 0.25, 0.28)
    apex: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.support) != N_SPECIES or len(self.height) != N_SPECIES:
            raise ConfigError("case2 needs four supports and four heights")
        if any(len(sup) != 2 for sup in self.support):
            raise ConfigError("each case2 support is a pair [a, b]")
        object.__setattr__(self, "support", tuple((float(a), float(b)) for a, b in self.support))
        object.__setattr__(self, "height", tuple(float(h) for h in self.height))
        if self.apex is not None:
            object.__setattr__(self, "apex", tuple(float(x) for x in self.apex))
        for (a, b), h in zip(self.support, self.height):
            if not a < b:
                raise ConfigError(f"case2 support [{a}, {b}] is empty")
            if not h > 0:
                raise ConfigError("case2 heights must be positive")
        if self.apex is not None:
            if len(self.apex) != N_SPECIES:
                raise ConfigError("case2.apex needs four values")
            for (a, b), x in zip(self.support, self.apex):
                if not a < x < b:
                    raise ConfigError(f"case2 apex {x} outside ({a}, {b})")

    def apexes(self) -> tuple[float, ...]:
        if self.apex is not None:
            return tuple(self.apex)
        return tuple(0.5 * (a + b) for a, b in self.support)


@dataclass(frozen=True)
class CustomParams:
    """Initial data read from a snapshot-format CSV (columns p, f1..f4)."""

    file: str = ""


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "case1"
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    species: tuple[SpeciesParams, ...] = field(default_factory=lambda: make_species(CASE1_MASSES, CASE1_RATES))
    grid: GridSpec = field(default_factory=GridSpec)
    case1: Case1Params | None = None
    case2: Case2Params | None = None
    custom: CustomParams | None = None
    dt: float = 0.01
    t_end: float = 10.0
    stride: int = 10
    output_dir: str = "out"
    snapshot_times: tuple[float, ...] = ()
    solver: SolverOptions = field(default_factory=SolverOptions)
    grid_consistent: bool = True

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if getattr(self, self.scenario) is None:
            raise ConfigError(f"scenario {self.scenario!r} needs a [{self.scenario}] table")
        if self.scenario == "custom" and not self.custom.file:
            raise ConfigError("custom scenario needs custom.file")
        if len(self.species) != N_SPECIES:
            raise ConfigError("exactly four [[species]] entries are required")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be positive")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be non-negative")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ConfigError("stride must be a positive integer")
        s = self.solver
        for name in ("beta_rtol", "residual_tol", "xi_eps_factor"):
            if not getattr(s, name) > 0:
                raise ConfigError(f"solver.{name} must be positive")

    def with_output_dir(self, path) -> "RunConfig":
        return replace(self, output_dir=str(path))


def case1_config(**overrides) -> RunConfig:
    base = dict(
        scenario="case1",
        case1=Case1Params(),
        dt=0.01,
        t_end=10.0,
        stride=10,
        output_dir="out/case1",
        snapshot_times=(0.0, 10.0),
    )
    base.update(overrides)
    return RunConfig(**base)


def case2_config(**overrides) -> RunConfig:
    base = dict(
        scenario="case2",
        case2=Case2Params(),
        dt=0.02,
        t_end=30.0,
        stride=10,
        output_dir="out/case2",
        snapshot_times=(0.0, 30.0),
    )
    base.update(overrides)
    return RunConfig(**base)


# -- (de)serialisation ---------------------------------------------------------


def to_dict(cfg: RunConfig) -> dict:
    d = {
        "scenario": cfg.scenario,
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "stride": cfg.stride,
        "output_dir": cfg.output_dir,
        "snapshot_times": list(cfg.snapshot_times),
        "constants": {"c": cfg.constants.c, "h": cfg.constants.h, "k": cfg.constants.k},
        "grid": {"p_min": cfg.grid.p_min, "p_max": cfg.grid.p_max, "n_nodes": cfg.grid.n_nodes},
        "solver": {
            "beta_rtol": cfg.solver.beta_rtol,
            "residual_tol": cfg.solver.residual_tol,
            "xi_eps_factor": cfg.solver.xi_eps_factor,
            "bracket": list(cfg.solver.bracket),
            "maxiter": cfg.solver.maxiter,
            "grid_consistent": cfg.grid_consistent,
        },
        "species": [{"mass": s.mass, "rate": s.rate, "degeneracy": s.degeneracy} for s in cfg.species],
    }
    if cfg.case1 is not None:
        d["case1"] = {"mu": list(cfg.case1.mu), "U": list(cfg.case1.U), "beta": list(cfg.case1.beta)}
    if cfg.case2 is not None:
        c2 = {"support": [list(s) for s in cfg.case2.support], "height": list(cfg.case2.height)}
        if cfg.case2.apex is not None:
            c2["apex"] = list(cfg.case2.apex)
        d["case2"] = c2
    if cfg.custom is not None:
        d["custom"] = {"file": cfg.custom.file}
    return d


def _floats(seq, name):
    try:
        return tuple(float(x) for x in seq)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected a list of numbers") from exc


def from_dict(d: dict) -> RunConfig:
    known = {
        "scenario", "dt", "t_end", "stride", "output_dir", "snapshot_times",
        "constants", "grid", "solver", "species", "case1", "case2", "custom",
    }
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        constants = PhysicalConstants(**d.get("constants", {}))
        grid = GridSpec(**d.get("grid", {}))
        solver_d = dict(d.get("solver", {}))
        grid_consistent = bool(solver_d.pop("grid_consistent", True))
        if "bracket" in solver_d:
            solver_d["bracket"] = tuple(float(x) for x in solver_d["bracket"])
        solver = SolverOptions(**solver_d)
        sp = d.get("species")
        species = (
            make_species(CASE1_MASSES, CASE1_RATES)
            if sp is None
            else tuple(SpeciesParams(index=i + 1, **entry) for i, entry in enumerate(sp))
        )
        case1 = case2 = custom = None
        if "case1" in d:
            c1 = d["case1"]
            case1 = Case1Params(**{k: _floats(v, f"case1.{k}") for k, v in c1.items()})
        if "case2" in d:
            c2 = d["case2"]
            case2 = Case2Params(
                support=tuple(_floats(s, "case2.support") for s in c2.get("support", Case2Params.support)),
                height=_floats(c2.get("height", Case2Params.height), "case2.height"),
                apex=_floats(c2["apex"], "case2.apex") if "apex" in c2 else None,
            )
        if "custom" in d:
            custom = CustomParams(**d["custom"])
        return RunConfig(
            scenario=d.get("scenario", "case1"),
            constants=constants,
            species=species,
            grid=grid,
            case1=case1,
            case2=case2,
            custom=custom,
            dt=float(d.get("dt", 0.01)),
            t_end=float(d.get("t_end", 10.0)),
            stride=int(d.get("stride", 10)),
            output_dir=str(d.get("output_dir", "out")),
            snapshot_times=_floats(d.get("snapshot_times", ()), "snapshot_times"),
            solver=solver,
            grid_consistent=grid_consistent,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config: {exc}") from exc


def dumps(cfg: RunConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def loads(text: str) -> RunConfig:
    try:
        return from_dict(tomli.loads(text))
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return loads(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dumps(cfg))
