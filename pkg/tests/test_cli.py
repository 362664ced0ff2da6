import pytest

from rebgk.cli import cli_main
from rebgk.config import dumps, case2_config
from rebgk.oracles import besselK_quadrature
from rebgk.output import read_timeseries


def test_bessel_table(capsys):
    assert cli_main(["bessel", "1", "--oracle"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "z,K0,K1,K2,K0_quad,K1_quad,K2_quad"
    vals = [float(x) for x in lines[1].split(",")]
    assert vals[0] == 1.0
    for n in range(3):
        assert vals[1 + n] == pytest.approx(besselK_quadrature(n, 1.0), rel=1e-14)
        assert vals[1 + n] == pytest.approx(vals[4 + n], rel=1e-14)


def test_bessel_underflow_reports_nan(capsys):
    assert cli_main(["bessel", "900"]) == 0
    assert capsys.readouterr().out.strip().splitlines()[1] == "900,nan,nan,nan"


@pytest.mark.parametrize("argv", [["--bogus"], ["case1", "--bogus"], [], ["bessel"], ["bessel", "-1"], ["case1", "--dt", "0"]])
def test_usage_errors(argv, capsys):
    assert cli_main(argv) != 0
    assert "usage" in capsys.readouterr().err


def test_case1_short(tmp_path, capsys):
    out = tmp_path / "c1"
    assert cli_main(["case1", "--out", str(out), "--t-end", "0.05", "--stride", "2"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["config.toml", "snapshot_t0.05.csv", "snapshot_t0.csv", "timeseries.csv"]
    ts = read_timeseries(out / "timeseries.csv")
    assert [d.t for d in ts] == pytest.approx([0.0, 0.02, 0.04, 0.05])


def test_env_var_sets_output(tmp_path, monkeypatch):
    monkeypatch.setenv("REBGK_OUT", str(tmp_path / "env"))
    assert cli_main(["case2", "--t-end", "0.04"]) == 0
    assert (tmp_path / "env" / "timeseries.csv").exists()


def test_run_config_file(tmp_path, monkeypatch):
    monkeypatch.delenv("REBGK_OUT", raising=False)
    cfg = case2_config(t_end=0.04, snapshot_times=(0.04,), output_dir=str(tmp_path / "from-config"))
    path = tmp_path / "c.toml"
    path.write_text(dumps(cfg))
    assert cli_main(["run", str(path)]) == 0
    assert (tmp_path / "from-config" / "snapshot_t0.04.csv").exists()
    assert cli_main(["run", str(path), "--out", str(tmp_path / "x")]) == 0
    assert (tmp_path / "x" / "timeseries.csv").exists()


def test_run_missing_config(tmp_path, capsys):
    assert cli_main(["run", str(tmp_path / "none.toml")]) == 2
    assert "none.toml" in capsys.readouterr().err


def test_validate_reports_every_check(capsys):
    code = cli_main(["validate"])
    out = capsys.readouterr().out.strip().splitlines()
    checks = [line for line in out if line.startswith("[")]
    assert len(checks) == 5
    n_fail = sum(line.startswith("[FAIL]") for line in checks)
    assert out[-1] == f"{5 - n_fail}/5 checks passed"
    assert code == (1 if n_fail else 0)
