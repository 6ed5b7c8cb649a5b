#!/usr/bin/env python3
"""Residual of r^-2 (J_r * phi - phi) against mu phi_t + nu Lap phi for a list of r."""

import argparse

from ctrw_heat.analysis import TEST_FUNCTIONS, weak_limit_study
from ctrw_heat.kernels import make_kernel


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--kernel", default="heatball", choices=["heatball", "bump-product"])
    p.add_argument("--dim", type=int, default=1, choices=[1, 2])
    p.add_argument("--testfn", default="gaussian", choices=sorted(TEST_FUNCTIONS))
    p.add_argument("--r", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05, 0.025])
    a = p.parse_args()

    kernel = make_kernel({"type": a.kernel, "dim": a.dim})
    s = weak_limit_study(kernel, TEST_FUNCTIONS[a.testfn](), a.r)
    print(f"mu={s['mu']:.8g} nu={s['nu']:.8g}")
    print(f"{'r':>8} {'residual':>12} {'ratio':>8}")
    for i, (r, res) in enumerate(zip(s["r"], s["residual"])):
        ratio = f"{s['ratios'][i - 1]:8.3f}" if i else " " * 8
        print(f"{r:8.4g} {res:12.4e} {ratio}")


if __name__ == "__main__":
    main()
