"""CSV output of diagnostics time series and distribution snapshots."""
from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .config import RunConfig, save_config
from .dynamics import Diagnostics, RunAborted, RunResult, Snapshot, run
from .scenarios import build_grid, build_model, initial_state

TIMESERIES_HEADER = Diagnostics.FIELDS
SNAPSHOT_HEADER = ("p", "f1", "f2", "f3", "f4", "J1", "J2", "J3", "J4")
OUT_ENV = "REBGK_OUT"


class OutputError(OSError):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def _write_rows(path, header, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _read_rows(path, header):
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            got = next(r, None)
            if got is None or tuple(got) != tuple(header):
                raise OutputError(f"{path}: unexpected header {got}")
            return [[float(x) for x in row] for row in r if row]
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


def emit_timeseries(series, path) -> Path:
    _write_rows(path, TIMESERIES_HEADER, (d.row() for d in series))
    return Path(path)


def read_timeseries(path) -> list[Diagnostics]:
    return [Diagnostics.from_row(row) for row in _read_rows(path, TIMESERIES_HEADER)]


def emit_snapshot(state, path, grid, attractor=None) -> Path:
    """Columns p, f1..f4, J1..J4; J columns are nan when no attractor is given."""
    J = np.full_like(state.f, np.nan) if attractor is None else attractor
    _write_rows(path, SNAPSHOT_HEADER, np.column_stack([grid.nodes, state.f.T, J.T]))
    return Path(path)


def read_snapshot(path):
    data = np.array(_read_rows(path, SNAPSHOT_HEADER))
    if data.size == 0:
        raise OutputError(f"{path}: no rows")
    return data[:, 0], data[:, 1:5].T, data[:, 5:9].T


def snapshot_name(t) -> str:
    return f"snapshot_t{float(t):g}.csv"


def resolve_output_dir(cfg: RunConfig, explicit=None) -> Path:
    """Explicit argument, then $REBGK_OUT, then the config's output_dir."""
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(OUT_ENV)
    return Path(env) if env else Path(cfg.output_dir)


def run_config(cfg: RunConfig, out_dir=None) -> RunResult:
    """Run a configured scenario and write config.toml, timeseries.csv and snapshots."""
    out = resolve_output_dir(cfg, out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        save_config(cfg.with_output_dir(out), out / "config.toml")
    except OSError as exc:
        raise OutputError(f"cannot prepare {out}: {exc}") from exc
    grid = build_grid(cfg)
    model = build_model(cfg, grid)
    state = initial_state(cfg, grid)

    def flush(result):
        emit_timeseries(result.series, out / "timeseries.csv")
        for snap in result.snapshots:
            _emit(snap, out, grid)

    try:
        result = run(state, model, cfg.dt, cfg.t_end, cfg.stride, cfg.snapshot_times)
    except RunAborted as exc:
        flush(exc.result)
        raise
    flush(result)
    return result


def _emit(snap: Snapshot, out: Path, grid):
    emit_snapshot(snap.state, out / snapshot_name(snap.state.t), grid, snap.attractor)
