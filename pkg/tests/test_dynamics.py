import math
import warnings

import numpy as np
import pytest

from rebgk.checks import perturbed_equilibrium, random_equilibrium, random_state
from rebgk.config import case1_config, case2_config
from rebgk.core import DistributionState, make_grid, make_species
from rebgk.dynamics import (
    Diagnostics,
    NegativityWarning,
    RelaxationModel,
    RunAborted,
    diagnostics,
    entropy,
    entropy_production,
    rhs,
    rk4_step,
    run,
)
from rebgk.moments import quad
from rebgk.scenarios import init_case1, init_case2


@pytest.fixture(scope="module")
def model(grid, species):
    return RelaxationModel(grid, species)


@pytest.fixture(scope="module")
def case1_state(grid):
    return init_case1(case1_config(), grid)


def test_rhs_vanishes_at_equilibrium(rng):
    eq = random_equilibrium(rng, beta_range=(0.5, 2.0), u_max=0.6)
    g = eq.grid()
    f = eq.sample(g)
    m = RelaxationModel(g, eq.species)
    assert np.max(np.abs(rhs(f, m))) <= 1e-10 * np.max(m.rates * f)


@pytest.mark.parametrize("seed", range(5))
def test_rhs_discrete_conservation(grid, species, model, seed):
    rng = np.random.default_rng(seed)
    f = random_state(rng, grid)
    d = rhs(f, model)
    q = quad(grid, d)
    scale = float(np.max(np.abs(q)))
    for i, j in ((0, 2), (0, 3), (1, 3)):
        assert abs(q[i] + q[j]) <= 1e-9 * scale
    assert abs(float(np.sum(quad(grid, grid.energies * d)))) <= 1e-12 * float(np.sum(np.abs(quad(grid, grid.energies * d))))
    assert abs(float(np.sum(quad(grid, grid.nodes * d)))) <= 1e-12 * float(np.sum(np.abs(quad(grid, grid.energies * d))))


@pytest.mark.parametrize("seed", range(10))
def test_entropy_production_sign(seed):
    rng = np.random.default_rng(100 + seed)
    species = make_species(rng.uniform(0.5, 3, 4), rng.uniform(0.5, 4, 4), rng.integers(1, 4, 4))
    g = make_grid(-25, 25, 401, species)
    m = RelaxationModel(g, species)
    f = random_state(rng, g) if seed % 2 else perturbed_equilibrium(rng, g, species, 1e-4)
    assert entropy_production(f, m) <= 1e-12


def test_entropy_production_zero_region(grid, species, model):
    f = init_case2(case2_config(), grid).f
    assert entropy_production(f, model) == -math.inf


def test_rk4_frozen_attractor_exact_solution(case1_state, model):
    J, _ = model.attractor(case1_state.f)
    f0 = case1_state.f

    def defect(dt):
        exact = J + (f0 - J) * np.exp(-model.rates * dt)
        return np.max(np.abs(rk4_step(case1_state, dt, model, attractor=J).f - exact))

    e1, e2 = defect(0.1), defect(0.05)
    # local error ~ (rate dt)^5 / 120 with rates up to 4
    assert e1 < 1e-4
    assert e1 / e2 == pytest.approx(32.0, rel=0.1)


def test_rk4_richardson_against_fine_steps(case1_state, model):
    def advance(dt, n):
        s = case1_state
        for _ in range(n):
            s = rk4_step(s, dt, model)
        return s.f

    ref = advance(0.02, 10)  # dt/10 reference for dt = 0.2
    e1 = np.max(np.abs(advance(0.2, 1) - ref))
    e2 = np.max(np.abs(advance(0.1, 1) - advance(0.01, 10)))
    assert e1 / e2 == pytest.approx(32.0, rel=0.25)


def test_rk4_keeps_equilibrium(rng):
    eq = random_equilibrium(rng, beta_range=(0.5, 2.0), u_max=0.6)
    g = eq.grid()
    s = DistributionState(0.0, eq.sample(g))
    out = rk4_step(s, 0.1, RelaxationModel(g, eq.species))
    np.testing.assert_allclose(out.f, s.f, rtol=1e-10, atol=1e-14 * s.f.max())
    assert out.t == pytest.approx(0.1)


def test_rk4_rejects_bad_dt(case1_state, model):
    with pytest.raises(ValueError):
        rk4_step(case1_state, 0.0, model)


def test_undershoot_warns(grid, species, model):
    # frozen attractor: at rate*dt = 4 the RK4 amplification factor is 5, so
    # nodes with f = 0 < J overshoot to -4 J
    s = init_case2(case2_config(), grid)
    J, _ = model.attractor(s.f)
    with pytest.warns(NegativityWarning):
        rk4_step(s, 1.0, model, attractor=J)


def test_entropy_conventions(species):
    g = make_grid(0.0, 1.0, 11, species)
    assert entropy(DistributionState(0.0, np.ones((4, 11))), g, species) == 0.0
    f = np.zeros((4, 11))
    f[0, 3:6] = 0.5
    expected = quad(g, np.where(f[0] > 0, f[0] * np.log(0.5), 0.0))
    assert entropy(DistributionState(0.0, f), g, species) == pytest.approx(expected)


def test_entropy_uses_degeneracy_and_h(species):
    from rebgk.core import PhysicalConstants

    sp = make_species([1, 1, 1, 1], [1, 1, 1, 1], [2, 2, 2, 2])
    const = PhysicalConstants(h=2.0)
    g = make_grid(0.0, 1.0, 5, sp, const)
    f = np.full((4, 5), 2.0 / 8.0)  # f = g/h^3
    assert entropy(DistributionState(0.0, f), g, sp, const) == pytest.approx(0.0, abs=1e-16)


def test_case1_entropy_resolution(species, case1_state, grid):
    fine = make_grid(-30.0, 30.0, 9601, species)
    h_fine = entropy(init_case1(case1_config(), fine), fine, species)
    # slow tails at the domain edge leave an O(h^2) endpoint term
    assert entropy(case1_state, grid, species) == pytest.approx(h_fine, rel=1e-8)


def test_diagnostics_row_roundtrip(case1_state, model):
    d = diagnostics(case1_state, model)
    back = Diagnostics.from_row(d.row())
    assert back.row() == d.row()
    assert len(d.row()) == len(Diagnostics.FIELDS)
    assert d.N13 == d.N[0] + d.N[2]


def test_run_zero_length(case1_state, model):
    res = run(case1_state, model, dt=0.01, t_end=0.0)
    assert len(res.series) == 1 and res.series[0].t == 0.0
    assert res.final is case1_state


def test_run_stride_and_snapshots(case1_state, model):
    seen = []
    res = run(case1_state, model, dt=0.01, t_end=0.25, stride=10, snapshot_times=(0.0, 0.13, 0.25), callback=seen.append)
    assert [d.t for d in res.series] == pytest.approx([0.0, 0.1, 0.2, 0.25])
    assert [s.state.t for s in res.snapshots] == pytest.approx([0.0, 0.13, 0.25])
    assert seen == res.series
    assert res.final.t == pytest.approx(0.25)
    np.testing.assert_allclose(res.column("N13"), res.column("N13")[0], rtol=1e-13)
    assert np.all(np.diff(res.column("H")) <= 0)


def test_run_abort_keeps_partial(grid, species):
    class Failing(RelaxationModel):
        calls = 0

        def attractor(self, f):
            Failing.calls += 1
            if Failing.calls > 6:
                raise RuntimeError("boom")
            return super().attractor(f)

    m = Failing(grid, species)
    with pytest.raises(RunAborted) as info:
        run(init_case1(case1_config(), grid), m, dt=0.01, t_end=1.0, stride=1)
    partial = info.value.result
    assert len(partial.series) >= 1 and partial.final is not None


def test_reactive_exchange_and_decay(grid, species, model):
    s0 = init_case2(case2_config(), grid)
    res = run(s0, model, dt=0.02, t_end=1.0, stride=10)
    N = np.array([d.N for d in res.series])
    dN = N - N[0]
    # 1 + 2 <-> 3 + 4: what species 1 loses, 3 and 4 gain, and 2 loses too
    np.testing.assert_allclose(dN[:, 0], -dN[:, 2], atol=1e-13)
    np.testing.assert_allclose(dN[:, 0], -dN[:, 3], atol=1e-13)
    np.testing.assert_allclose(dN[:, 1], dN[:, 0], atol=1e-13)
    assert np.all(np.array(res.series[-1].distance) < np.array(res.series[0].distance))
