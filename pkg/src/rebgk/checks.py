"""Property checks behind ``rebgk validate`` and the acceptance tests.

Each check returns a :class:`CheckResult`; the sample counts are arguments so
that the command line can run a quick version of the same code.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bessel
from . import moments as mom
from .auxsolver import ConstraintFunctions, SolverError, SolverInputs, solve_parameters
from .core import PhysicalConstants, make_grid, make_species
from .dynamics import RelaxationModel, entropy_production, rhs
from .oracles import besselK_quadrature

CASE1_MASSES = (2.0, 1.0, 3.0, 1.0)
CASE1_RATES = (3.0, 2.0, 1.0, 4.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    elapsed: float
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        msg = f"[{tag}] {self.name}: worst {self.worst:.3e} (tol {self.tolerance:.1e}), {self.elapsed:.2f} s"
        return msg + (f"; {self.detail}" if self.detail else "")


# -- random inputs -------------------------------------------------------------


def random_species(rng, degeneracies=False):
    masses = rng.uniform(0.5, 3.0, 4)
    rates = rng.uniform(0.5, 4.0, 4)
    g = rng.integers(1, 4, 4).astype(float) if degeneracies else None
    return make_species(masses, rates, g)


@dataclass(frozen=True)
class Equilibrium:
    """A common Juttner equilibrium: shared beta and velocity, mu's obeying mass action."""

    species: tuple
    beta: float
    U1: float
    mu: np.ndarray
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    @property
    def U(self) -> np.ndarray:
        c = self.constants.c
        return np.array([math.sqrt(c * c + self.U1**2), self.U1])

    @property
    def log_A(self) -> np.ndarray:
        g = np.array([s.degeneracy for s in self.species])
        return np.log(g / self.constants.h**3) + self.beta * self.mu

    def inputs(self) -> SolverInputs:
        """Exact moments: ``int f dp/p0 = A Mt`` is frame independent and ``n = A M``."""
        c = self.constants.c
        m = np.array([s.mass for s in self.species])
        A = np.exp(self.log_A)
        J0t = A * np.exp(mom.log_Mt(self.beta, m, c))
        n = A * np.exp(mom.log_M(self.beta, m, c))
        U = np.tile(self.U / c * c, (4, 1))
        return SolverInputs(J0t, n, U, self.species, self.constants)

    def grid(self, spacing=0.05, decay=40.0):
        """Symmetric grid wide enough that every species has decayed by ``e^-decay``."""
        c = self.constants.c
        u0 = self.U[0]
        m = max(s.mass for s in self.species)
        reach = decay / (self.beta * (u0 - abs(self.U1)))
        p_max = reach + m * c * abs(self.U1) / max(u0 - abs(self.U1), 1e-12)
        n = 2 * int(math.ceil(p_max / spacing)) + 1
        return make_grid(-p_max, p_max, n, self.species, self.constants)

    def sample(self, grid) -> np.ndarray:
        return np.stack([mom.juttner_on_grid(self.log_A[i], self.beta, self.U, grid, i + 1) for i in range(4)])


def random_equilibrium(rng, species=None, beta_range=(0.3, 3.0), u_max=0.9) -> Equilibrium:
    species = species or random_species(rng)
    beta = float(rng.uniform(*beta_range))
    U1 = float(rng.uniform(-u_max, u_max))
    mu = rng.uniform(-1.0, 1.0, 4)
    mu[3] = mu[0] + mu[1] - mu[2]
    return Equilibrium(species, beta, U1, mu)


def random_state(rng, grid) -> np.ndarray:
    """Positive non-equilibrium data: per-species boosted Juttners with their own
    temperature and velocity, plus a few Gaussian bumps."""
    p = grid.nodes
    f = np.empty((4, grid.n_nodes))
    for i in range(4):
        beta = rng.uniform(0.7, 2.5)
        u1 = rng.uniform(-0.8, 0.8)
        u0 = math.sqrt(grid.constants.c**2 + u1 * u1)
        f[i] = rng.uniform(0.2, 2.0) * np.exp(-beta * (u0 * grid.energies[i] - u1 * p - grid.masses[i]))
        for _ in range(rng.integers(0, 3)):
            centre = rng.uniform(-8.0, 8.0)
            width = rng.uniform(0.3, 2.0)
            f[i] += rng.uniform(0.05, 1.0) * np.exp(-0.5 * ((p - centre) / width) ** 2)
    return f


def perturbed_equilibrium(rng, grid, species, eps) -> np.ndarray:
    """Common equilibrium times (1 + eps * bump), still positive for eps < 1."""
    eq = random_equilibrium(rng, species, beta_range=(0.8, 3.0), u_max=0.5)
    f = eq.sample(grid)
    p = grid.nodes
    for i in range(4):
        centre = rng.uniform(-3.0, 3.0)
        width = rng.uniform(0.3, 2.0)
        f[i] *= 1.0 + eps * rng.uniform(-1.0, 1.0) * np.exp(-0.5 * ((p - centre) / width) ** 2)
    return f


# -- checks ----------------------------------------------------------------------


def check_bessel(n_points=50, z_range=(1e-3, 100.0), tol=1e-10) -> CheckResult:
    start = time.perf_counter()
    zs = np.logspace(np.log10(z_range[0]), np.log10(z_range[1]), n_points)
    worst_oracle = 0.0
    worst_rec = 0.0
    for z in zs:
        K = [bessel.besselK(n, z) for n in (0, 1, 2)]
        for n in (0, 1, 2):
            worst_oracle = max(worst_oracle, abs(K[n] - besselK_quadrature(n, z)) / K[n])
        worst_rec = max(worst_rec, abs(K[2] - K[0] - 2 * K[1] / z) / K[2])
    worst = max(worst_oracle, worst_rec)
    return CheckResult(
        "bessel vs quadrature", worst <= tol, worst, tol, time.perf_counter() - start,
        f"oracle {worst_oracle:.1e}, recurrence {worst_rec:.1e}",
    )


def check_roundtrip(n_samples=100, seed=1, tol=1e-8, rhs_tol=1e-9) -> CheckResult:
    """Recover a common equilibrium from exact moments, and from grid samples
    check that the relaxation right-hand side vanishes."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst_par = 0.0
    worst_rhs = 0.0
    failures = 0
    for _ in range(n_samples):
        eq = random_equilibrium(rng)
        try:
            aux = solve_parameters(eq.inputs())
        except SolverError:
            failures += 1
            continue
        err = max(
            abs(aux.beta - eq.beta) / eq.beta,
            float(np.max(np.abs(aux.U - eq.U))) / eq.U[0],
            float(np.max(np.abs(aux.mu - eq.mu) / np.maximum(np.abs(eq.mu), 1.0))),
        )
        worst_par = max(worst_par, err)
        grid = eq.grid()
        f = eq.sample(grid)
        model = RelaxationModel(grid, eq.species, eq.constants)
        try:
            r = rhs(f, model)
        except SolverError:
            failures += 1
            continue
        worst_rhs = max(worst_rhs, float(np.max(np.abs(r)) / np.max(model.rates * f)))
    passed = failures == 0 and worst_par <= tol and worst_rhs <= rhs_tol
    return CheckResult(
        "equilibrium round-trip", passed, worst_par, tol, time.perf_counter() - start,
        f"parameters {worst_par:.1e}, rhs {worst_rhs:.1e} (tol {rhs_tol:.0e}), {failures} failed solves",
        {"rhs": worst_rhs, "failures": failures},
    )


def count_crossings(fn: ConstraintFunctions, n_scan=4000, span=(1e-3, 1e3)) -> int:
    """Sign changes of ln Phi - ln(g1 g2/(g3 g4)) over a log-spaced scan of D_beta."""
    betas = np.geomspace(span[0], span[1], n_scan)
    vals = [fn.log_phi(b) - fn.log_target for b in betas if fn.in_feasible_domain(b)]
    s = np.sign(vals)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def check_residuals(n_samples=100, seed=2, tol=1e-10, grid=None) -> CheckResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    species = make_species(CASE1_MASSES, CASE1_RATES)
    grid = grid or make_grid(-30.0, 30.0, 1201, species)
    worst = 0.0
    failures = 0
    bad_crossings = 0
    for k in range(n_samples):
        if k % 2:
            species = random_species(rng)
            grid = make_grid(grid.p_min, grid.p_max, grid.n_nodes, species)
        f = random_state(rng, grid)
        inputs = SolverInputs.from_state(f, grid, species)
        try:
            aux = solve_parameters(inputs)
        except SolverError:
            failures += 1
            continue
        worst = max(worst, max(aux.residuals.values()))
        if aux.branch == "generic" and count_crossings(ConstraintFunctions(inputs)) != 1:
            bad_crossings += 1
    passed = worst <= tol and bad_crossings == 0
    return CheckResult(
        "constraint residuals", passed, worst, tol, time.perf_counter() - start,
        f"{failures} failed solves, {bad_crossings} scans without exactly one crossing",
        {"failures": failures, "bad_crossings": bad_crossings},
    )


def check_h_theorem(n_samples=1000, seed=3, tol=1e-12, n_nodes=401, p_max=25.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = -math.inf
    failures = 0
    for k in range(n_samples):
        species = random_species(rng, degeneracies=bool(k % 2))
        grid = make_grid(-p_max, p_max, n_nodes, species)
        model = RelaxationModel(grid, species)
        if k % 3 == 2:
            f = perturbed_equilibrium(rng, grid, species, 10.0 ** rng.uniform(-6, -1))
        else:
            f = random_state(rng, grid)
        try:
            sigma = entropy_production(f, model)
        except SolverError:
            failures += 1
            continue
        worst = max(worst, sigma)
    return CheckResult(
        "entropy production", worst <= tol, worst, tol, time.perf_counter() - start,
        f"{failures} failed solves", {"failures": failures},
    )


def check_limits(z=500.0, ratio_tol=1e-3, xi_tol=1e-2) -> CheckResult:
    """Heavy-particle limits: M/Mt -> c m and xi -> c (m1 + m2 - m3 - m4)."""
    start = time.perf_counter()
    c = 1.0
    m = np.array(CASE1_MASSES)
    out = {}
    for dim in (1, 3):
        beta = z / (m[0] * c * c)
        out[f"ratio_{dim}d"] = abs(float(mom.ratio(beta, m[0], c, dim)) / (c * m[0]) - 1.0)
        beta = z / (m.min() * c * c)
        xi = float(np.array([1, 1, -1, -1]) @ mom.ratio(beta, m, c, dim))
        dm = c * (m[0] + m[1] - m[2] - m[3])
        out[f"xi_{dim}d"] = abs(xi / dm - 1.0)
    passed = all(v <= (ratio_tol if k.startswith("ratio") else xi_tol) for k, v in out.items())
    worst = max(out["ratio_1d"], out["ratio_3d"])
    detail = ", ".join(f"{k} {v:.2e}" for k, v in out.items())
    return CheckResult("heavy-particle limits", passed, worst, ratio_tol, time.perf_counter() - start, detail, out)


def run_all(quick=True) -> list[CheckResult]:
    if quick:
        return [
            check_bessel(),
            check_roundtrip(n_samples=15),
            check_residuals(n_samples=15),
            check_h_theorem(n_samples=100),
            check_limits(),
        ]
    return [check_bessel(), check_roundtrip(), check_residuals(), check_h_theorem(), check_limits()]
