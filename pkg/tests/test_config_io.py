import math
from dataclasses import replace

import numpy as np
import pytest

from rebgk.config import (
    Case1Params,
    Case2Params,
    ConfigError,
    CustomParams,
    GridSpec,
    RunConfig,
    case1_config,
    case2_config,
    dumps,
    load_config,
    loads,
    save_config,
)
from rebgk.core import make_grid, make_species
from rebgk.dynamics import Diagnostics, RunAborted
from rebgk.moments import quad
from rebgk.output import (
    SNAPSHOT_HEADER,
    TIMESERIES_HEADER,
    OutputError,
    emit_snapshot,
    emit_timeseries,
    read_snapshot,
    read_timeseries,
    resolve_output_dir,
    run_config,
)
from rebgk.scenarios import build_grid, init_case1, init_case2, initial_state, triangle


def test_case1_defaults():
    cfg = case1_config()
    assert cfg.case1.mu == (1.8, 1.3, 1.0, 1.0)
    assert cfg.case1.U == (0.5, -0.3, 1.0, 0.2)
    assert cfg.case1.beta == (0.8, 1.1, 0.9, 1.2)
    assert [s.rate for s in cfg.species] == [3.0, 2.0, 1.0, 4.0]
    assert [s.mass for s in cfg.species] == [2.0, 1.0, 3.0, 1.0]
    assert cfg.t_end == 10.0 and cfg.snapshot_times == (0.0, 10.0) and cfg.stride == 10


def test_case2_defaults():
    cfg = case2_config()
    assert cfg.case2.support == ((-9.0, -2.0), (-7.5, 3.0), (-3.0, 1.0), (-5.5, -5.0))
    assert cfg.case2.height == (0.2, 0.38, 0.25, 0.28)
    assert cfg.t_end == 30.0 and cfg.snapshot_times == (0.0, 30.0)
    assert cfg.species == case1_config().species


def test_case1_trivial_substitution():
    cfg = case1_config(case1=Case1Params(mu=(0,) * 4, U=(0,) * 4, beta=(1,) * 4))
    g = build_grid(cfg)
    f = init_case1(cfg, g).f
    mid = g.n_nodes // 2
    assert g.nodes[mid] == 0.0
    np.testing.assert_allclose(f[:, mid], np.exp(-np.array([2.0, 1.0, 3.0, 1.0])), rtol=1e-15)


def test_case1_boosted_profile():
    cfg = case1_config()
    g = build_grid(cfg)
    f = init_case1(cfg, g).f
    u0 = math.sqrt(1 + 0.25)
    expected = np.exp(0.8 * 1.8 - 0.8 * (u0 * g.energies[0] - 0.5 * g.nodes))
    np.testing.assert_allclose(f[0], expected, rtol=1e-14)


def test_case2_triangles():
    cfg = case2_config()
    g = build_grid(cfg)
    f = init_case2(cfg, g).f
    p = g.nodes
    i = np.flatnonzero(np.isclose(p, -5.25))[0]
    assert f[3, i] == pytest.approx(0.28, rel=1e-14)
    for x in (-5.5, -5.0):
        assert f[3, np.flatnonzero(np.isclose(p, x))[0]] == 0.0
    assert quad(g, f[3]) == pytest.approx(0.07, abs=1e-12)
    for k, ((a, b), h) in enumerate(zip(cfg.case2.support, cfg.case2.height)):
        assert f[k].max() == pytest.approx(h)
        assert np.all(f[k][(p < a) | (p > b)] == 0.0)


def test_triangle_apex_override():
    x = np.linspace(0, 4, 5)
    np.testing.assert_allclose(triangle(x, 0, 4, 1.0, apex=1.0), [0, 1, 2 / 3, 1 / 3, 0])


def test_case2_support_off_grid():
    cfg = case2_config(grid=GridSpec(-4.0, 4.0, 161))
    with pytest.raises(ConfigError):
        init_case2(cfg)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(scenario="case3"),
        dict(scenario="case2"),
        dict(dt=0.0),
        dict(dt=math.inf),
        dict(t_end=-1.0),
        dict(stride=0),
    ],
)
def test_invalid_configs(kwargs):
    base = dict(scenario="case1", case1=Case1Params())
    base.update(kwargs)
    with pytest.raises(ConfigError):
        RunConfig(**base)


def test_invalid_scenario_params():
    with pytest.raises(ConfigError):
        Case1Params(beta=(1, 1, 0, 1))
    with pytest.raises(ConfigError):
        Case2Params(support=((0, 1), (1, 0), (0, 1), (0, 1)))
    with pytest.raises(ConfigError):
        Case2Params(height=(1, 1, -1, 1))
    with pytest.raises(ConfigError):
        Case2Params(apex=(5, 0, 0, 0))
    with pytest.raises(ConfigError):
        RunConfig(scenario="custom", custom=CustomParams(""))


@pytest.mark.parametrize("cfg", [case1_config(), case2_config(), case2_config(case2=Case2Params(apex=(-8, 0, -1, -5.4)))])
def test_config_roundtrip(cfg):
    text = dumps(cfg)
    back = loads(text)
    assert dumps(back) == text
    assert back.species == cfg.species and back.case1 == cfg.case1 and back.case2 == cfg.case2
    assert back.solver == cfg.solver and back.grid == cfg.grid and back.constants == cfg.constants
    assert (back.dt, back.t_end, back.stride, back.snapshot_times) == (cfg.dt, cfg.t_end, cfg.stride, cfg.snapshot_times)


def test_config_file_roundtrip(tmp_path):
    cfg = replace(case1_config(), grid_consistent=False, output_dir=str(tmp_path / "o"))
    save_config(cfg, tmp_path / "c.toml")
    assert load_config(tmp_path / "c.toml") == cfg


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        loads("scenario = 'case1'\nbogus = 1\n[case1]\n")
    with pytest.raises(ConfigError):
        loads("scenario = [")
    with pytest.raises(ConfigError):
        loads("scenario = 'case1'\n[case1]\nmu = 'x'\n")
    with pytest.raises(ConfigError):
        loads("scenario = 'case1'\n[case1]\n[solver]\nresidual_tol = -1.0\n")
    with pytest.raises(ConfigError) as info:
        load_config(tmp_path / "missing.toml")
    assert "missing.toml" in str(info.value)


def test_minimal_config_file():
    cfg = loads('scenario = "case2"\n[case2]\n')
    assert cfg.case2 == Case2Params()
    assert cfg.species == case1_config().species


def _diag(t):
    return Diagnostics(
        t=t, N=(1.0, 2.0, 3.0, 1 / 3), N13=4.0, N14=4 / 3, N24=7 / 3, E=math.pi, P=-1e-300, H=-0.1,
        distance=(1e-17, 2.0, 3.0, 4.0), beta=0.1 + 0.2, mu=(1.0, 2.0, 3.0, 0.0), U=(1.25, 0.75), min_f=0.0,
    )


def test_empty_series_is_header_only(tmp_path):
    path = emit_timeseries([], tmp_path / "ts.csv")
    assert path.read_bytes() == (",".join(TIMESERIES_HEADER) + "\r\n").encode()
    assert read_timeseries(path) == []


def test_one_record_roundtrips_bit_exactly(tmp_path):
    d = _diag(0.1)
    path = emit_timeseries([d], tmp_path / "ts.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == "t,N1,N2,N3,N4,N13,N14,N24,E,P,H,d1,d2,d3,d4,beta_tilde,mu1,mu2,mu3,mu4,Ut0,Ut1"
    back = read_timeseries(path)[0]
    assert back.row() == d.row()


def test_snapshot_roundtrip(tmp_path, grid):
    from rebgk.core import DistributionState

    rng = np.random.default_rng(0)
    f = rng.random((4, grid.n_nodes))
    J = rng.random((4, grid.n_nodes))
    path = emit_snapshot(DistributionState(1.0, f), tmp_path / "s.csv", grid, J)
    assert path.read_text().splitlines()[0] == ",".join(SNAPSHOT_HEADER)
    p, f2, J2 = read_snapshot(path)
    assert np.array_equal(p, grid.nodes) and np.array_equal(f2, f) and np.array_equal(J2, J)
    _, _, J3 = read_snapshot(emit_snapshot(DistributionState(1.0, f), tmp_path / "n.csv", grid))
    assert np.all(np.isnan(J3))


def test_io_errors_name_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError) as info:
        emit_timeseries([], blocker / "ts.csv")
    assert str(blocker) in str(info.value)
    with pytest.raises(OutputError):
        read_timeseries(tmp_path / "nope.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\r\n1,2\r\n")
    with pytest.raises(OutputError):
        read_timeseries(bad)


def test_output_dir_precedence(tmp_path, monkeypatch):
    cfg = case1_config(output_dir="from-config")
    monkeypatch.delenv("REBGK_OUT", raising=False)
    assert str(resolve_output_dir(cfg)) == "from-config"
    monkeypatch.setenv("REBGK_OUT", str(tmp_path / "env"))
    assert resolve_output_dir(cfg) == tmp_path / "env"
    assert resolve_output_dir(cfg, tmp_path / "cli") == tmp_path / "cli"


def _short(cfg, tmp_path, name):
    return replace(cfg, t_end=0.1, snapshot_times=(0.0, 0.1), stride=5, output_dir=str(tmp_path / name))


def test_run_config_outputs_and_determinism(tmp_path):
    cfg = _short(case1_config(), tmp_path, "a")
    res = run_config(cfg)
    out = tmp_path / "a"
    assert sorted(x.name for x in out.iterdir()) == ["config.toml", "snapshot_t0.1.csv", "snapshot_t0.csv", "timeseries.csv"]
    assert load_config(out / "config.toml") == cfg
    assert len(read_timeseries(out / "timeseries.csv")) == len(res.series) == 3
    run_config(cfg, tmp_path / "b")
    for name in ("timeseries.csv", "snapshot_t0.csv", "snapshot_t0.1.csv"):
        assert (out / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_custom_scenario_from_snapshot(tmp_path):
    cfg = _short(case2_config(), tmp_path, "c2")
    run_config(cfg)
    custom = RunConfig(scenario="custom", custom=CustomParams(str(tmp_path / "c2" / "snapshot_t0.1.csv")), t_end=0.1)
    g = build_grid(custom)
    _, f_snap, _ = read_snapshot(tmp_path / "c2" / "snapshot_t0.1.csv")
    np.testing.assert_array_equal(initial_state(custom, g).f, f_snap)


def test_abort_flushes_partial_output(tmp_path, monkeypatch):
    import rebgk.output as output

    real = output.run

    def failing(*args, **kwargs):
        from rebgk.dynamics import RunResult

        res = RunResult(series=[_diag(0.0)])
        raise RunAborted("boom", res)

    monkeypatch.setattr(output, "run", failing)
    with pytest.raises(RunAborted):
        run_config(_short(case1_config(), tmp_path, "ab"))
    assert len(read_timeseries(tmp_path / "ab" / "timeseries.csv")) == 1
    monkeypatch.setattr(output, "run", real)


def test_malformed_values():
    with pytest.raises(ConfigError):
        loads("scenario = 'case2'\n[case2]\nsupport = [[0, 1, 2], [0, 1], [0, 1], [0, 1]]\n")
    with pytest.raises(ConfigError):
        loads("scenario = 'case1'\n[case1]\n[[species]]\nmass = -1.0\nrate = 1.0\n")
    with pytest.raises(ConfigError):
        loads("dt = 'fast'\n[case1]\n")
