#!/usr/bin/env python3
"""Print (or with matplotlib, plot) a field written by `ctrw-heat solve`."""

import argparse

import numpy as np

from ctrw_heat.fieldio import read_field


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("stem", help="path without suffix, e.g. out/field")
    p.add_argument("--png", help="write a plot here (needs matplotlib)")
    a = p.parse_args()

    u = read_field(a.stem)
    if u.grid.dim != 1:
        raise SystemExit("only one-dimensional fields are supported")
    t = u.grid.times()
    for i in np.linspace(0, len(t) - 1, 5).astype(int):
        print(f"t={t[i]:.5f}  min={u.values[i].min():+.6f}  max={u.values[i].max():+.6f}")
    if a.png:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        x = np.arange(u.grid.M) * u.grid.h
        for i in np.linspace(0, len(t) - 1, 5).astype(int):
            plt.plot(x, u.values[i], label=f"t={t[i]:.4f}")
        plt.legend()
        plt.xlabel("x")
        plt.savefig(a.png, dpi=120)


if __name__ == "__main__":
    main()
