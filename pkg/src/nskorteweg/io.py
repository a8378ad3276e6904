"""File emission: 17-digit JSON, diagnostics CSV, raw float64 snapshots.

Snapshot layout: ``snap_<index>.bin`` holds the fields rho, u_0, ..., u_{dim-1}
back to back, each as little-endian float64 in C (row-major) order over the
grid. The sidecar ``snap_<index>.txt`` has one ``key = value`` per line:
dim, n, length, t, fields, dtype (<f8) and order (C).
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .grid import Grid, State, build_grid

CSV_BASE_COLUMNS = (
    "t",
    "energy_gamma",
    "dissipation_cum",
    "budget_drift",
    "min_rho",
    "sup_inv_rho",
    "h1_deviation",
    "orlicz_dev",
    "j_gamma_mass",
)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_header(s_values: Sequence[float]) -> list[str]:
    return list(CSV_BASE_COLUMNS) + [f"gain_s{float(s)!r}" for s in s_values]


def write_diagnostics_csv(path, records, s_values: Sequence[float]) -> None:
    lines = [",".join(csv_header(s_values))]
    for r in records:
        row = [r.t, r.energy_gamma, r.dissipation_cum, r.budget_drift, r.min_rho, r.sup_inv_rho,
               r.h1_deviation, r.orlicz_dev, r.j_gamma_mass]
        row += [r.gain_samples[float(s)] for s in s_values]
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = lines[0].split(",")
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, rows.reshape(-1, len(header))


def write_snapshot(directory, index: int, state: State) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = state.grid
    stem = directory / f"snap_{index:06d}"
    data = np.concatenate([state.rho[None], state.u]).astype("<f8", copy=False)
    stem.with_suffix(".bin").write_bytes(np.ascontiguousarray(data).tobytes(order="C"))
    names = ["rho"] + [f"u_{i}" for i in range(grid.dim)]
    meta = {
        "dim": str(grid.dim),
        "n": str(grid.n),
        "length": fmt(grid.length),
        "t": fmt(state.t),
        "fields": ",".join(names),
        "dtype": "<f8",
        "order": "C",
    }
    stem.with_suffix(".txt").write_text("".join(f"{k} = {v}\n" for k, v in meta.items()), encoding="utf-8")
    return stem.with_suffix(".bin")


def read_snapshot(path) -> State:
    path = Path(path)
    meta = {}
    for line in path.with_suffix(".txt").read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    grid: Grid = build_grid(int(meta["dim"]), int(meta["n"]), float(meta["length"]))
    nfields = len(meta["fields"].split(","))
    data = np.frombuffer(path.read_bytes(), dtype=meta["dtype"]).reshape((nfields,) + grid.shape)
    return State(grid, data[0].copy(), data[1:].copy(), float(meta["t"]))
