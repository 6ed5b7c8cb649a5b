#!/usr/bin/env python3
"""Sup-norm error of the heat-ball solution against the temperature, for shrinking r.

    python scripts/rate_study.py --datum triangle-wave --r 0.25 0.125 0.0625 --out out/rate
"""

import argparse
from pathlib import Path

from ctrw_heat.analysis import GridPolicy, rate_study
from ctrw_heat.datum import parse_datum
from ctrw_heat.fieldio import dump_json, write_columns


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--datum", default="triangle-wave")
    p.add_argument("--r", type=float, nargs="+", default=[0.25, 0.125, 0.0625])
    p.add_argument("--cells-per-radius", type=float, default=32.0)
    p.add_argument("--strip-lags", type=int, default=32)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="out/rate")
    a = p.parse_args()

    policy = GridPolicy(cells_per_radius=a.cells_per_radius, strip_lags=a.strip_lags)
    study = rate_study(parse_datum(a.datum, policy.L), a.r, policy=policy, workers=a.workers)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(study.to_dict(), out / "rate.json")
    ok = [row for row in study.rows if "error" in row]
    write_columns(out / "rate.dat", ["r", "error"], [r["r"] for r in ok], [r["error"] for r in ok])
    for row in study.rows:
        print(f"r={row['r']:<8g} M={row['M']:<6d} error={row.get('error', float('nan')):.4e}")
    print(f"slope={study.slope}  monotone={study.monotone}")


if __name__ == "__main__":
    main()
