import csv
import json

import numpy as np
import pytest

from ctrw_heat.config import GridConfig, RunConfig, load_config
from ctrw_heat.errors import ConfigurationError
from ctrw_heat.fieldio import (dump_json, fmt, read_field, write_columns, write_field,
                               write_field_csv, write_table)
from ctrw_heat.grid import Grid, SpaceTimeField


def _field(dim, rng):
    g = Grid(dim, 1.0, 8, 0.01, 3)
    return SpaceTimeField(rng.standard_normal((4,) + g.shape), g)


@pytest.mark.parametrize("dim", [1, 2])
def test_binary_round_trip_is_exact(tmp_path, rng, dim):
    f = _field(dim, rng)
    bin_path, side = write_field(tmp_path / "sub" / "u", f, {"note": "x"})
    assert bin_path.stat().st_size == f.values.size * 8
    back = read_field(tmp_path / "sub" / "u")
    assert np.array_equal(back.values, f.values)
    assert back.grid.to_dict() == f.grid.to_dict()
    meta = json.loads(side.read_text())
    assert meta["byte_order"] == "little" and meta["meta"] == {"note": "x"}


def test_csv_long_format(tmp_path, rng):
    f = _field(1, rng)
    write_field_csv(tmp_path / "u.csv", f)
    rows = list(csv.reader(open(tmp_path / "u.csv")))
    assert rows[0] == ["step", "t", "x", "u"]
    assert len(rows) == 1 + f.values.size
    assert float(rows[-1][3]) == f.values[-1, -1]
    with pytest.raises(ConfigurationError):
        write_field_csv(tmp_path / "v.csv", _field(2, rng))


def test_tables_and_columns(tmp_path):
    write_table(tmp_path / "t.csv", ["a", "b"], [(0.1, None), (2, "x")])
    assert (tmp_path / "t.csv").read_text() == "a,b\n0.10000000000000001,\n2,x\n"
    write_columns(tmp_path / "c.dat", ["x", "y"], [1.0, 2.0], [3.0, 4.0])
    lines = (tmp_path / "c.dat").read_text().splitlines()
    assert lines[0] == "# x y" and lines[2] == "2 4"


def test_json_is_deterministic():
    a = dump_json({"b": 1, "a": [fmt(0.1)]})
    assert a == dump_json({"a": [fmt(0.1)], "b": 1}) and a.endswith("\n")
    assert float(fmt(1 / 3)) == 1 / 3


def test_config_merge(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kernel": {"dim": 2}, "grid": {"M": 64}, "datum": "cosine"}))
    cfg = load_config(p, {"grid.M": 128, "kernel.r": 0.5, "engine": None})
    assert cfg.kernel.dim == 2 and cfg.kernel.r == 0.5
    assert cfg.grid.M == 128 and cfg.datum == "cosine" and cfg.engine == "strip"
    assert RunConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


@pytest.mark.parametrize("payload", ['{"nope": 1}', '{"grid": {"Q": 1}}', "[1]", "{bad"])
def test_config_errors(tmp_path, payload):
    p = tmp_path / "c.json"
    p.write_text(payload)
    with pytest.raises(ConfigurationError):
        load_config(p)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.json")


def test_grid_config_defaults():
    g = GridConfig(M=64).build(1, 0.08)
    assert g.k == pytest.approx(0.08 / 16)
    assert g.steps * g.k == pytest.approx(0.32, rel=0.01)
