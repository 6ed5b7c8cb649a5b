"""Field and table serialization: raw float64 + JSON sidecar, CSV, gnuplot data."""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import Grid, SpaceTimeField


def fmt(x):
    return format(float(x), ".17g")


def dump_json(obj, path=None):
    """Deterministic JSON (sorted keys, fixed separators, trailing newline)."""
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def write_field(stem, field, meta=None):
    """Write ``stem.bin`` (little-endian float64, time-major) and ``stem.json``."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    data = np.ascontiguousarray(field.values, dtype="<f8")
    stem.with_suffix(".bin").write_bytes(data.tobytes())
    sidecar = {"grid": field.grid.to_dict(), "shape": list(data.shape), "dtype": "float64",
               "byte_order": "little", "layout": "time-major, then space axes"}
    if meta:
        sidecar["meta"] = meta
    dump_json(sidecar, stem.with_suffix(".json"))
    return stem.with_suffix(".bin"), stem.with_suffix(".json")


def read_field(stem):
    stem = Path(stem)
    side = json.loads(stem.with_suffix(".json").read_text())
    g = side["grid"]
    grid = Grid(g["dim"], g["L"], g["M"], g["k"], g["steps"])
    raw = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype="<f8")
    return SpaceTimeField(raw.reshape(side["shape"]).astype(float), grid)


def write_field_csv(path, field):
    """Long-format CSV (step, t, x, u) for one-dimensional fields."""
    if field.grid.dim != 1:
        raise ConfigurationError("CSV export is only defined for n = 1")
    x = np.arange(field.grid.M) * field.grid.h
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t", "x", "u"])
        for i, row in enumerate(field.values):
            t = fmt(i * field.grid.k)
            for xj, v in zip(x, row):
                w.writerow([i, t, fmt(xj), fmt(v)])


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, float) else ("" if v is None else v) for v in row])


def write_columns(path, names, *columns):
    """gnuplot-friendly whitespace-separated columns with a commented header."""
    with open(path, "w") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for vals in zip(*columns):
            fh.write(" ".join(fmt(v) for v in vals) + "\n")
