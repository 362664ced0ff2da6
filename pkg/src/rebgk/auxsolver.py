"""Attractor parameters (beta, mu_1..mu_4, U^mu) from the four species' moments.

The solve follows the reduction of the seven conservation constraints plus
the mass action law to scalar problems:

* ``U~`` is the normalised rate-weighted sum of Eckart four-flows; its norm is ``Z``.
* ``beta#`` is the unique zero of ``Z - Sigma(beta)``.
* generic branch (``xi(beta#) != 0``): ``beta~`` solves ``Phi(beta) = g1 g2/(g3 g4)``
  on the feasible interval ``D_beta`` by safeguarded Newton started at ``beta#``;
* non-generic branch: ``beta~ = beta#`` and ``mu~_1`` solves the mass action
  relation on ``D_mu``.

All species densities are carried as ``B_i = A_i Mt_i(beta)``; ``A_i`` and
``mu~_i`` are recovered in log space so that large ``beta`` never overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import moments as mom
from .core import (
    N_SPECIES,
    MomentumGrid,
    PhysicalConstants,
    SpeciesParams,
    check_species,
    degeneracy_ratio,
)
from .roots import RootFindingError, expand_increasing_bracket, newton_bisect

# Indices (0-based) of the pairwise number constraints (1,3), (1,4), (2,4).
PAIRS = ((0, 2), (0, 3), (1, 3))
# +1 for reactants, -1 for products.
SIGNS = np.array([1.0, 1.0, -1.0, -1.0])

DEGENERATE_DENSITY = 1e-300


class SolverError(RuntimeError):
    """Raised when the attractor parameters cannot be determined.

    ``diagnostics`` carries whatever was known at the point of failure.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class SolverOptions:
    beta_rtol: float = 1e-12
    bracket: tuple[float, float] = (1e-3, 1e3)
    xi_eps_factor: float = 1e-10
    residual_tol: float = 1e-10
    maxiter: int = 200


@dataclass(frozen=True, eq=False)
class SolverInputs:
    """Moment data of the four species.

    ``U`` rows are Eckart four-velocities (2 components in 1-D, 4 in 3-D).
    """

    J0t: np.ndarray
    n: np.ndarray
    U: np.ndarray
    species: tuple[SpeciesParams, ...]
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    dimension: int = 1

    def __post_init__(self):
        check_species(self.species)
        J0t = np.asarray(self.J0t, dtype=float)
        if J0t.shape != (N_SPECIES,):
            raise ValueError("J0t must hold one value per species")
        if not np.all(np.isfinite(J0t)) or np.any(J0t < DEGENERATE_DENSITY):
            raise SolverError(
                "degenerate input: every species needs a positive, finite int f dp/p0",
                {"J0t": J0t.tolist()},
            )
        object.__setattr__(self, "J0t", J0t)
        object.__setattr__(self, "n", np.asarray(self.n, dtype=float))
        object.__setattr__(self, "U", np.asarray(self.U, dtype=float))

    @property
    def nu(self) -> np.ndarray:
        return np.array([s.rate for s in self.species])

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.species])

    @classmethod
    def from_moments(cls, moments: Sequence[mom.SpeciesMoments], species, constants=None, dimension=1):
        constants = constants or PhysicalConstants()
        return cls(
            J0t=[m.J0t for m in moments],
            n=[m.n for m in moments],
            U=np.array([m.U for m in moments]),
            species=tuple(species),
            constants=constants,
            dimension=dimension,
        )

    @classmethod
    def from_four_flows(cls, J0t, N, species, constants=None, dimension=1):
        """Build from ``int f dp/p0`` and the particle four-flows ``N_i^mu``."""
        constants = constants or PhysicalConstants()
        N = np.asarray(N, dtype=float)
        n2 = (N[:, 0] ** 2 - np.sum(N[:, 1:] ** 2, axis=1)) / constants.c**2
        if np.any(n2 <= 0):
            raise SolverError("four-flow is not time-like", {"n2": n2.tolist()})
        n = np.sqrt(n2)
        return cls(J0t=J0t, n=n, U=N / n[:, None], species=tuple(species), constants=constants, dimension=dimension)

    @classmethod
    def from_state(cls, f, grid: MomentumGrid, species, constants=None):
        constants = constants or grid.constants
        try:
            moments = mom.all_moments(f, grid, constants)
        except mom.MomentError as exc:
            raise SolverError(f"degenerate input: {exc}") from exc
        return cls.from_moments(moments, species, constants, dimension=1)


def compute_U_tilde(inputs: SolverInputs) -> tuple[float, np.ndarray]:
    """``Z`` and ``U~ = sum(nu_i n_i U_i) / Z``."""
    c = inputs.constants.c
    flow = (inputs.nu * inputs.n) @ inputs.U
    norm2 = flow[0] ** 2 - np.sum(flow[1:] ** 2)
    if not (norm2 > 0 and flow[0] > 0):
        raise SolverError("rate-weighted four-flow is not future time-like", {"flow": flow.tolist()})
    Z = math.sqrt(norm2) / c
    return Z, flow / Z


class ConstraintFunctions:
    """Sigma, xi, Z, (Z - Sigma)/xi, the densities B_i and Phi for one input set."""

    def __init__(self, inputs: SolverInputs):
        self.inputs = inputs
        self.c = inputs.constants.c
        self.dimension = inputs.dimension
        self.masses = inputs.masses
        self.nu = inputs.nu
        self.J0t = inputs.J0t
        self.nuJ = self.nu * self.J0t
        self.Z, self.U_tilde = compute_U_tilde(inputs)
        self.log_target = math.log(degeneracy_ratio(inputs.species))
        self.lower = max(-self.nuJ[0], -self.nuJ[1])
        self.upper = min(self.nuJ[2], self.nuJ[3])

    def ratios(self, beta):
        return mom.ratio(beta, self.masses, self.c, self.dimension)

    def d_ratios(self, beta):
        return mom.d_ratio(beta, self.masses, self.c, self.dimension)

    def sigma(self, beta) -> float:
        return float(self.ratios(beta) @ self.nuJ)

    def xi(self, beta) -> float:
        return float(SIGNS @ self.ratios(beta))

    def gap(self, beta) -> float:
        """Z - Sigma(beta); increasing in beta."""
        return self.Z - self.sigma(beta)

    def d_gap(self, beta) -> float:
        return -float(self.d_ratios(beta) @ self.nuJ)

    def reduced_gap(self, beta) -> float:
        """(Z - Sigma) / xi."""
        return self.gap(beta) / self.xi(beta)

    def densities(self, beta) -> np.ndarray:
        """B_i = J0t_i +- (Z - Sigma) / (nu_i xi); equals A_i Mt_i on the solution."""
        return self.J0t + SIGNS * self.reduced_gap(beta) / self.nu

    def in_feasible_domain(self, beta) -> bool:
        xi = self.xi(beta)
        if xi == 0.0 or not math.isfinite(xi):
            return False
        r = self.gap(beta) / xi
        return self.lower < r < self.upper and bool(np.all(self.densities(beta) > 0))

    def log_Mt(self, beta):
        return mom.log_Mt(beta, self.masses, self.c, self.dimension)

    def log_phi(self, beta) -> float:
        lm = self.log_Mt(beta)
        B = self.densities(beta)
        if np.any(B <= 0):
            raise ValueError(f"beta = {beta!r} lies outside the feasible domain")
        return float(SIGNS @ (np.log(B) - lm))

    def phi(self, beta) -> float:
        return math.exp(self.log_phi(beta))

    def d_log_phi(self, beta) -> float:
        """d ln(Phi)/d beta = c xi + R' sum 1/(nu_i B_i), using dMt/dbeta = -c M."""
        r = self.ratios(beta)
        dr = self.d_ratios(beta)
        xi = float(SIGNS @ r)
        dxi = float(SIGNS @ dr)
        R = self.gap(beta) / xi
        dR = (self.d_gap(beta) - R * dxi) / xi
        B = self.J0t + SIGNS * R / self.nu
        return self.c * xi + dR * float(np.sum(1.0 / (self.nu * B)))


def find_beta_sharp(inputs_or_funcs, options: SolverOptions | None = None) -> float:
    """Unique zero of Z - Sigma(beta) on (0, inf)."""
    options = options or SolverOptions()
    fn = inputs_or_funcs if isinstance(inputs_or_funcs, ConstraintFunctions) else ConstraintFunctions(inputs_or_funcs)
    try:
        lo, hi, g_lo, g_hi = expand_increasing_bracket(fn.gap, *options.bracket)
        res = newton_bisect(
            lambda b: (fn.gap(b), fn.d_gap(b)),
            lo,
            hi,
            x0=math.sqrt(lo * hi),
            xtol_rel=options.beta_rtol,
            maxiter=options.maxiter,
            f_lo=g_lo,
            f_hi=g_hi,
        )
    except (RootFindingError, FloatingPointError) as exc:
        raise SolverError(f"beta# root search failed: {exc}", {"Z": fn.Z}) from exc
    if not res.converged:
        raise SolverError("beta# root search did not converge", {"beta": res.root, "gap": res.value})
    return res.root


@dataclass(frozen=True, eq=False)
class AuxiliaryState:
    """Solved attractor parameters.

    ``log_A[i] = ln(g_i/h^3) + beta mu_i``; ``branch`` is "generic" or "non-generic".
    """

    beta: float
    mu: np.ndarray
    U: np.ndarray
    log_A: np.ndarray
    branch: str
    beta_sharp: float
    residuals: dict
    iterations: int = 0
    grid_refined: bool = False

    @property
    def A(self) -> np.ndarray:
        return np.exp(self.log_A)

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta


def _log_prefactor(inputs: SolverInputs) -> np.ndarray:
    h = inputs.constants.h
    return np.log(np.array([s.degeneracy for s in inputs.species]) / h**3)


def constraint_residuals(fn: ConstraintFunctions, beta, log_A) -> dict:
    """Relative residuals of the pair number constraints, the energy-momentum
    constraints and the mass action law, using the analytic moment functionals."""
    inputs = fn.inputs
    lMt = fn.log_Mt(beta)
    AMt = np.exp(log_A + lMt)
    res = {}
    for i, j in PAIRS:
        num = fn.nu[i] * (AMt[i] - fn.J0t[i]) + fn.nu[j] * (AMt[j] - fn.J0t[j])
        res[f"number_{i + 1}{j + 1}"] = abs(num) / (fn.nuJ[i] + fn.nuJ[j])
    # sum nu_i A_i M_i U~ / c - sum nu_i n_i U_i / c, with A_i M_i = A_i Mt_i (M_i/Mt_i)
    flow_j = float(fn.nu @ (AMt * fn.ratios(beta))) * fn.U_tilde
    flow_f = (fn.nu * inputs.n) @ inputs.U
    scale = abs(flow_f[0])
    for mu_idx in range(len(flow_f)):
        res[f"energy_momentum_{mu_idx}"] = abs(flow_j[mu_idx] - flow_f[mu_idx]) / scale
    res["mass_action"] = abs(float(SIGNS @ log_A) - fn.log_target) / max(1.0, float(np.sum(np.abs(log_A))))
    return res


def _finish(fn, beta, B, branch, beta_sharp, iterations, options) -> AuxiliaryState:
    lMt = fn.log_Mt(beta)
    log_A = np.log(B) - lMt
    mu = (log_A - _log_prefactor(fn.inputs)) / beta
    residuals = constraint_residuals(fn, beta, log_A)
    aux = AuxiliaryState(
        beta=float(beta),
        mu=mu,
        U=fn.U_tilde.copy(),
        log_A=log_A,
        branch=branch,
        beta_sharp=float(beta_sharp),
        residuals=residuals,
        iterations=iterations,
    )
    worst = max(residuals.values())
    if not worst <= options.residual_tol:
        raise SolverError(
            f"constraint residual {worst:.3e} exceeds {options.residual_tol:.1e}",
            {"beta": beta, "branch": branch, "residuals": residuals},
        )
    return aux


def _solve_generic(fn: ConstraintFunctions, beta_sharp: float, options: SolverOptions):
    def F(b):
        return fn.log_phi(b) - fn.log_target

    if not fn.in_feasible_domain(beta_sharp):
        # round-off at the root of Z - Sigma; nudge inside before giving up
        for b in (beta_sharp * (1 + 1e-8), beta_sharp * (1 - 1e-8)):
            if fn.in_feasible_domain(b):
                beta_sharp = b
                break
        else:
            raise SolverError("beta# is not inside D_beta", {"beta_sharp": beta_sharp})

    F0 = F(beta_sharp)
    if F0 == 0.0:
        return beta_sharp, 0
    s0 = 1.0 if F0 > 0 else -1.0
    # Phi increases with beta when xi > 0; walk towards the side where F changes sign
    up = (F0 < 0) == (fn.xi(beta_sharp) > 0)
    step = 2.0 if up else 0.5
    a, b = beta_sharp, None
    for _ in range(options.maxiter):
        trial = a * step
        if not (1e-300 < trial < 1e300):
            break
        if fn.in_feasible_domain(trial):
            if F(trial) * s0 < 0:
                b = trial
                break
            a = trial
        else:
            b = trial
            break
    if b is None:
        raise SolverError("could not bracket Phi = g-ratio inside D_beta", {"beta_sharp": beta_sharp})

    def func(x):
        # D_beta is an interval containing a, so infeasible points lie beyond the root
        if not fn.in_feasible_domain(x):
            return -s0 * math.inf, math.nan
        return F(x), fn.d_log_phi(x)

    lo, hi = (a, b) if a < b else (b, a)
    f_a = F(a)
    f_b = func(b)[0]
    res = newton_bisect(
        func,
        lo,
        hi,
        x0=a,
        xtol_rel=options.beta_rtol,
        maxiter=options.maxiter,
        ftol=0.1 * options.residual_tol,
        f_lo=f_a if lo == a else f_b,
        f_hi=f_b if lo == a else f_a,
    )
    if not res.converged or not fn.in_feasible_domain(res.root):
        raise SolverError(
            "Newton iteration for beta~ failed inside D_beta",
            {"beta_sharp": beta_sharp, "beta": res.root, "F": res.value},
        )
    return res.root, res.iterations


def _mass_action_densities(fn: ConstraintFunctions, beta: float, options: SolverOptions, x0=None):
    """Densities B_i at fixed beta from the pair constraints and the mass action
    relation, solved for x = B_1 = A_1 Mt_1.

    This is the non-generic branch at beta#. On the generic branch it
    re-derives the densities at beta~: when Z and Sigma nearly cancel, the
    ratio (Z - Sigma)/xi carries relative noise that a small density cannot
    absorb, whereas this parametrisation keeps mass action exact.
    """
    nu, J = fn.nu, fn.J0t
    lMt = fn.log_Mt(beta)
    log_mt_ratio = float(SIGNS @ (-lMt))
    lo = max(0.0, J[0] - nu[1] * J[1] / nu[0])
    hi = min(J[0] + nu[2] * J[2] / nu[0], J[0] + nu[3] * J[3] / nu[0])

    def dens(x):
        d = nu[0] * (x - J[0])
        return np.array([x, J[1] + d / nu[1], J[2] - d / nu[2], J[3] - d / nu[3]])

    def func(x):
        B = dens(x)
        if np.any(B <= 0):
            return (-math.inf if x <= lo else math.inf), math.nan
        val = float(SIGNS @ np.log(B)) + log_mt_ratio - fn.log_target
        deriv = 1.0 / B[0] + (nu[0] / nu[1]) / B[1] + (nu[0] / nu[2]) / B[2] + (nu[0] / nu[3]) / B[3]
        return val, deriv

    if x0 is None or not lo < x0 < hi:
        x0 = J[0] if lo < J[0] < hi else None
    try:
        res = newton_bisect(
            func, lo, hi, x0=x0,
            xtol_rel=1e-15, maxiter=options.maxiter, f_lo=-math.inf, f_hi=math.inf,
        )
    except RootFindingError as exc:
        raise SolverError(f"mass action solve at beta = {beta:.6g} failed: {exc}") from exc
    return dens(res.root), res.iterations


def solve_parameters(inputs: SolverInputs, options: SolverOptions | None = None) -> AuxiliaryState:
    """Determine (beta~, mu~_1..mu~_4, U~) satisfying the conservation constraints
    and the mass action law."""
    options = options or SolverOptions()
    fn = ConstraintFunctions(inputs)
    beta_sharp = find_beta_sharp(fn, options)
    eps_xi = options.xi_eps_factor * fn.c * float(np.max(fn.masses))
    if abs(fn.xi(beta_sharp)) <= eps_xi:
        B, iters = _mass_action_densities(fn, beta_sharp, options)
        return _finish(fn, beta_sharp, B, "non-generic", beta_sharp, iters, options)
    beta, iters = _solve_generic(fn, beta_sharp, options)
    B, _ = _mass_action_densities(fn, beta, options, x0=fn.densities(beta)[0])
    return _finish(fn, beta, B, "generic", beta_sharp, iters, options)


def phi(beta, inputs: SolverInputs) -> float:
    fn = ConstraintFunctions(inputs)
    if not fn.in_feasible_domain(beta):
        raise ValueError(f"beta = {beta!r} lies outside D_beta")
    return fn.phi(beta)


def in_feasible_domain(beta, inputs: SolverInputs) -> bool:
    return ConstraintFunctions(inputs).in_feasible_domain(beta)


def evaluate_attractor(aux: AuxiliaryState, grid: MomentumGrid) -> np.ndarray:
    """Juttner attractor J_i = (g_i/h^3) exp(beta mu_i - beta U~^mu p_mu) on the grid."""
    if len(aux.U) != 2:
        raise ValueError("grid evaluation needs a 1-D (two-component) four-velocity")
    return np.stack([mom.juttner_on_grid(aux.log_A[i], aux.beta, aux.U, grid, i + 1) for i in range(N_SPECIES)])


def grid_residuals(aux: AuxiliaryState, f, grid: MomentumGrid, species) -> dict:
    """Relative residuals of the conservation constraints with every integral,
    including those of the attractor, taken by grid quadrature."""
    J = evaluate_attractor(aux, grid)
    nu = np.array([s.rate for s in species])
    p0 = grid.energies
    dn = nu * mom.quad(grid, (J - f) / p0)
    scale_n = nu * mom.quad(grid, f / p0)
    res = {}
    for i, j in PAIRS:
        res[f"number_{i + 1}{j + 1}"] = abs(dn[i] + dn[j]) / (scale_n[i] + scale_n[j])
    dE = float(nu @ mom.quad(grid, J - f))
    dP = float(nu @ mom.quad(grid, grid.nodes * (J - f) / p0))
    scale = float(nu @ mom.quad(grid, f))
    res["energy_momentum_0"] = abs(dE) / scale
    res["energy_momentum_1"] = abs(dP) / scale
    res["mass_action"] = abs(float(SIGNS @ aux.log_A) - math.log(degeneracy_ratio(species)))
    return res


def refine_on_grid(
    aux: AuxiliaryState, f, grid: MomentumGrid, species, tol: float = 0.0, maxiter: int = 8
) -> AuxiliaryState:
    """Newton-correct (beta, U~^1, ln A_1, ln A_2, ln A_3) so that the three pair
    number constraints and the energy and momentum constraints hold exactly for
    grid quadratures of the attractor; ln A_4 follows from the mass action law.

    The analytic solution differs from this one only by the attractor mass
    beyond the truncated grid, so a few iterations suffice. By default Newton
    runs until the residual stops decreasing (round-off level); if it does not
    contract at all, the analytic state is returned unchanged.
    """
    if len(aux.U) != 2:
        raise ValueError("grid refinement is defined for 1-D grids only")
    c = grid.constants.c
    h3 = grid.constants.h ** 3
    nu = np.array([s.rate for s in species])
    log_g = np.log(np.array([s.degeneracy for s in species]) / h3)
    log_target = math.log(degeneracy_ratio(species))
    p, p0 = grid.nodes, grid.energies
    fq = np.stack([mom.quad(grid, f / p0), mom.quad(grid, f), mom.quad(grid, p * f / p0)])  # (3, 4)
    scale = np.array([
        nu[0] * fq[0, 0] + nu[2] * fq[0, 2],
        nu[0] * fq[0, 0] + nu[3] * fq[0, 3],
        nu[1] * fq[0, 1] + nu[3] * fq[0, 3],
        float(nu @ fq[1]),
        float(nu @ fq[1]),
    ])

    def unpack(x):
        beta, u1, l1, l2, l3 = x
        return beta, u1, np.array([l1, l2, l3, l1 + l2 - l3 - log_target])

    def system(x):
        beta, u1, logA = unpack(x)
        u0 = math.sqrt(c * c + u1 * u1)
        phase = u0 * p0 - u1 * p  # (4, n)
        J = np.exp(logA[:, None] - beta * phase)
        kernels = (1.0 / p0, np.ones_like(p0), p / p0)
        q = np.stack([mom.quad(grid, J * k) for k in kernels])  # (3, 4)
        dJ_db = -phase * J
        dJ_du = -beta * (u1 / u0 * p0 - p) * J
        qb = np.stack([mom.quad(grid, dJ_db * k) for k in kernels])
        qu = np.stack([mom.quad(grid, dJ_du * k) for k in kernels])
        d = nu * (q - fq)  # (3, 4): per-kernel, per-species rate-weighted defect
        r = np.array([d[0, 0] + d[0, 2], d[0, 0] + d[0, 3], d[0, 1] + d[0, 3], d[1].sum(), d[2].sum()])
        # d ln A_4 / d (l1, l2, l3) = (1, 1, -1)
        dl = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, -1]], dtype=float)  # (4 species, 3)
        rows = []
        for k, species_sel in ((0, (0, 2)), (0, (0, 3)), (0, (1, 3)), (1, (0, 1, 2, 3)), (2, (0, 1, 2, 3))):
            sel = list(species_sel)
            w = nu[sel]
            row_b = float(w @ qb[k, sel])
            row_u = float(w @ qu[k, sel])
            row_l = (w * q[k, sel]) @ dl[sel]
            rows.append([row_b, row_u, *row_l])
        return r / scale, np.array(rows) / scale[:, None]

    x = np.array([aux.beta, aux.U[1], *aux.log_A[:3]])
    r, jac = system(x)
    norm0 = np.max(np.abs(r))
    for _ in range(maxiter):
        if np.max(np.abs(r)) <= tol:
            break
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            return aux
        x_new = x + step
        if not x_new[0] > 0:
            return aux
        r_new, jac_new = system(x_new)
        if not np.max(np.abs(r_new)) < np.max(np.abs(r)):
            break
        x, r, jac = x_new, r_new, jac_new
    if not np.max(np.abs(r)) < norm0 and norm0 > tol:
        return aux
    beta, u1, logA = unpack(x)
    U = np.array([math.sqrt(c * c + u1 * u1), u1])
    refined = AuxiliaryState(
        beta=float(beta),
        mu=(logA - log_g) / beta,
        U=U,
        log_A=logA,
        branch=aux.branch,
        beta_sharp=aux.beta_sharp,
        residuals=aux.residuals,
        iterations=aux.iterations,
        grid_refined=True,
    )
    return refined
