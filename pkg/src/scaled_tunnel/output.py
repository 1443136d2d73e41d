"""CSV and JSON writers with an embedded metadata header.

CSV files start with ``#`` comment lines carrying the run metadata as JSON,
followed by a header row and data rows; floats are written with 17
significant digits so files round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_csv(path, header, columns, metadata: dict | None = None) -> Path:
    """Write equal-length ``columns`` under ``header``; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("header and columns differ in length")
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    with path.open("w", newline="") as fh:
        if metadata is not None:
            fh.write("# " + json.dumps(_jsonable(metadata), separators=(",", ":")) + "\r\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(n):
            writer.writerow([fmt(c[i]) for c in cols])
    return path


def read_csv(path):
    """Read a file written by :func:`write_csv`: ``(metadata, header, data)``."""
    meta = None
    with Path(path).open(newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            meta = json.loads(line[1:].strip())
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    header, data = rows[0], np.array([[float(v) for v in r] for r in rows[1:]])
    return meta, header, data


def write_json(path, payload: dict) -> Path:
    """Write ``payload`` as JSON, preserving key order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2) + "\n")
    return path


def write_trajectories_csv(path, times, paths, center, sigma, metadata=None) -> Path:
    """Trajectory fan: ``t, x_traj_0 .. x_traj_{n-1}, x_center, sigma``."""
    paths = np.atleast_2d(paths)
    header = ["t"] + [f"x_traj_{i}" for i in range(paths.shape[0])] + ["x_center", "sigma"]
    return write_csv(path, header, [times, *paths, center, sigma], metadata)


def write_snapshot_csv(path, snapshot, metadata=None) -> Path:
    """Grid wavefunction dump: ``x, re(psi), im(psi), density``."""
    psi = snapshot.psi
    return write_csv(path, ["x", "re(psi)", "im(psi)", "density"],
                     [snapshot.grid.x, psi.real, psi.imag, snapshot.density()], metadata)


def write_observables_csv(path, observables: dict, metadata=None) -> Path:
    """Grid observable series: ``t, x_mean, sigma, T_grid``."""
    keys = ["t", "x_mean", "sigma", "T_grid"]
    return write_csv(path, keys, [observables[k] for k in keys], metadata)


def write_sweep_csv(path, result, metadata=None) -> Path:
    """Sweep table: ``param_value, T_stationary, t_plateau``."""
    return write_csv(path, ["param_value", "T_stationary", "t_plateau"],
                     [result.values, result.T, result.t_plateau], metadata)


def extremum_summary(param: str, argmax: float, T_max: float, refined: bool) -> dict:
    return {"param": param, "argmax": float(argmax), "T_max": float(T_max),
            "refined": bool(refined)}
