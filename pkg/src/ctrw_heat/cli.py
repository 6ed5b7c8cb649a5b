"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.  Errors are written to stderr as one JSON record.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import acceptance
from .analysis import (TEST_FUNCTIONS, GridPolicy, max_principle_audit, rate_study,
                       scaling_identity_check, weak_limit_study)
from .config import load_config
from .datum import parse_datum
from .errors import ConfigurationError, CTRWError, VerificationFailure
from .fieldio import dump_json, write_columns, write_field, write_field_csv, write_table
from .heat_ref import heat_solve
from .kernels import compute_moments, heatball, kernel_alpha, rescale
from .solver import prepare, solve

log = logging.getLogger("ctrw_heat")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _kv(text):
    key, eq, val = text.partition("=")
    if not eq:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, float(val)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--workers", type=int, help="worker count (default: all CPUs)")
    common.add_argument("--picard-tol", type=float, dest="picard_tol")
    common.add_argument("--quad-tol", type=float, dest="quad_tol")
    common.add_argument("-v", "--verbose", action="store_true")

    kern = argparse.ArgumentParser(add_help=False)
    kern.add_argument("--kernel", choices=["heatball", "bump-product"])
    kern.add_argument("--dim", type=int, choices=[1, 2])
    kern.add_argument("--r", type=float, help="parabolic scaling factor")
    kern.add_argument("--kernel-param", type=_kv, action="append", default=[],
                      metavar="KEY=VAL", help="extra kernel parameter, e.g. rho=0.25")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--L", type=float)
    grid.add_argument("--M", type=int)
    grid.add_argument("--k", type=float, help="requested time step (rounded down)")
    grid.add_argument("--T", type=float, help="horizon")
    grid.add_argument("--T-alphas", type=float, dest="T_alphas", help="horizon in units of alpha")
    grid.add_argument("--strip-lags", type=int, dest="strip_lags")
    grid.add_argument("--cells-per-radius", type=float, dest="cells_per_radius")
    grid.add_argument("--datum", help="preset, e.g. constant:1 or gaussian-bump:width=0.05")

    p = argparse.ArgumentParser(prog="ctrw-heat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common, kern, grid], help="solve the Cauchy problem")
    s.add_argument("--engine", choices=["strip", "neumann"])
    s.add_argument("--start", choices=["warm", "datum", "zero"])
    s.add_argument("--csv", action="store_true", default=None, help="also write CSV (n=1)")
    h = sub.add_parser("heat", parents=[common, kern, grid], help="reference temperature")
    h.add_argument("--csv", action="store_true", default=None)
    sub.add_parser("moments", parents=[common, kern], help="kernel moments, alpha, contraction")
    w = sub.add_parser("weaklimit", parents=[common, kern], help="weak-limit residuals")
    w.add_argument("--testfn", choices=sorted(TEST_FUNCTIONS))
    w.add_argument("--r-list", type=_float_list, dest="r_list")
    rs = sub.add_parser("rate-study", parents=[common, kern, grid], help="rate against the temperature")
    rs.add_argument("--r-list", type=_float_list, dest="r_list")
    sub.add_parser("maxprinciple", parents=[common, kern, grid], help="maximum-principle audit")
    sub.add_parser("scaling-check", parents=[common, kern, grid], help="rescaling identity")
    sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    return p


def _config(args):
    over = {
        "kernel.type": getattr(args, "kernel", None), "kernel.dim": getattr(args, "dim", None),
        "kernel.r": getattr(args, "r", None),
        "picard_tol": args.picard_tol, "quad_tol": args.quad_tol, "workers": args.workers,
    }
    for key in ("L", "M", "k", "T", "T_alphas", "strip_lags", "cells_per_radius"):
        over[f"grid.{key}"] = getattr(args, key, None)
    for key in ("datum", "engine", "start", "csv", "testfn", "r_list"):
        over[key] = getattr(args, key, None)
    for key, val in getattr(args, "kernel_param", []):
        over[f"kernel.params.{key}"] = val
    cfg = load_config(args.config, over)
    if cfg.workers is None:
        cfg.workers = os.cpu_count() or 1
    return cfg


def _datum(cfg):
    return parse_datum(cfg.datum, cfg.grid.L)


def cmd_moments(cfg, out):
    kernel = cfg.kernel.build()
    rep = compute_moments(kernel, quad_tol=cfg.quad_tol)
    data = {"kernel": kernel.params_dict(), **rep.to_dict()}
    dump_json(data, out / "moments.json")
    return data


def cmd_solve(cfg, out):
    kernel = cfg.kernel.build()
    alpha = kernel_alpha(kernel)
    grid = cfg.grid.build(kernel.dim, alpha)
    disc = prepare(kernel, grid, strip_lags=cfg.grid.strip_lags, alpha=alpha)
    datum = _datum(cfg)
    u, rep = solve(kernel, datum, disc.grid, cfg.picard_tol, disc=disc, engine=cfg.engine,
                   start_guess=cfg.start)
    meta = {"kernel": kernel.params_dict(), "datum": datum.describe(), "engine": cfg.engine}
    write_field(out / "field", u, meta)
    if cfg.csv and kernel.dim == 1:
        write_field_csv(out / "field.csv", u)
    report = {**meta, "grid": disc.grid.to_dict(), **rep.to_dict()}
    dump_json(report, out / "report.json")
    if not (datum.inf_f - 1e-12 <= rep.u_min and rep.u_max <= datum.sup_f + 1e-12):
        raise VerificationFailure("solution left [inf f, sup f]", u_min=rep.u_min, u_max=rep.u_max)
    if rep.mass_drift > 1e-10:
        raise VerificationFailure("mass drift above 1e-10", drift=rep.mass_drift)
    return {"mass_drift": rep.mass_drift, "u_min": rep.u_min, "u_max": rep.u_max,
            "steps": rep.steps, "iterations": sum(rep.strip_iterations)}


def cmd_heat(cfg, out):
    kernel = cfg.kernel.build()
    alpha = kernel_alpha(kernel)
    grid = cfg.grid.build(kernel.dim, alpha)
    datum = _datum(cfg)
    u = heat_solve(datum, grid)
    write_field(out / "heat", u, {"datum": datum.describe()})
    if cfg.csv and grid.dim == 1:
        write_field_csv(out / "heat.csv", u)
    masses = u.masses()
    scale = max(abs(masses[0]), float(np.sum(np.abs(u.values[0]))) * grid.cell_volume) or 1.0
    drift = float(np.max(np.abs(masses - masses[0])) / scale)
    dump_json({"grid": grid.to_dict(), "datum": datum.describe(), "mass_drift": drift,
               "masses": masses.tolist()}, out / "heat_report.json")
    return {"mass_drift": drift, "steps": grid.steps}


def cmd_weaklimit(cfg, out):
    kernel = cfg.kernel.build()
    testfn = TEST_FUNCTIONS[cfg.testfn]()
    r_list = cfg.r_list or [0.2, 0.1, 0.05]
    study = weak_limit_study(kernel, testfn, r_list)
    ratios = [None] + study["ratios"]
    write_table(out / "weaklimit.csv", ["r", "residual", "ratio"],
                zip(study["r"], study["residual"], ratios))
    write_columns(out / "weaklimit.dat", ["r", "residual"], study["r"], study["residual"])
    dump_json(study, out / "weaklimit.json")
    return {"residual": study["residual"], "ratios": study["ratios"]}


def _policy(cfg):
    return GridPolicy(L=cfg.grid.L, cells_per_radius=cfg.grid.cells_per_radius,
                      strip_lags=cfg.grid.strip_lags or 32,
                      horizon_alphas=cfg.grid.T_alphas)


def cmd_rate_study(cfg, out):
    datum = _datum(cfg)
    base = heatball(cfg.kernel.dim)
    study = rate_study(datum, cfg.r_list or [0.25, 0.125, 0.0625], policy=_policy(cfg), base=base,
                       picard_tol=cfg.picard_tol, workers=cfg.workers)
    rows = [(row["r"], row.get("error"), study.slope) for row in study.rows]
    write_table(out / "rate.csv", ["r", "error", "slope"], rows)
    write_columns(out / "rate.dat", ["r", "error"], *zip(*[(r, e) for r, e, _ in rows if e is not None]))
    dump_json(study.to_dict(), out / "rate.json")
    summary = {"slope": study.slope, "monotone": study.monotone, "errors": study.errors}
    failures = [row for row in study.rows if "failure" in row]
    if failures:
        raise VerificationFailure("rate study rows failed", rows=failures)
    gamma = datum.holder_exponent or 1.0
    if study.slope is not None and (study.slope < 0.8 * gamma or not study.monotone):
        raise VerificationFailure("rate below 0.8 gamma or errors not monotone", **summary)
    return summary


def cmd_maxprinciple(cfg, out):
    datum = _datum(cfg)
    kernel = rescale(heatball(cfg.kernel.dim), cfg.kernel.r)
    alpha = kernel_alpha(kernel)
    policy = _policy(cfg)
    disc = prepare(kernel, policy.grid_for(kernel, alpha), strip_lags=policy.strip_lags, alpha=alpha)
    u, _ = solve(kernel, datum, disc.grid, cfg.picard_tol, disc=disc)
    audit = max_principle_audit(u - heat_solve(datum, disc.grid), disc.K, disc.alpha_index)
    data = {"r": cfg.kernel.r, "grid": disc.grid.to_dict(), **audit.to_dict()}
    dump_json(data, out / "maxprinciple.json")
    if not audit.holds:
        raise VerificationFailure("future sup exceeds initial-strip sup", **audit.to_dict())
    return {"initial_sup": audit.initial_sup, "future_sup": audit.future_sup,
            "precondition": data["precondition"]}


def cmd_scaling_check(cfg, out):
    r = cfg.kernel.r
    base = replace(cfg.kernel, r=1.0).build()
    alpha = kernel_alpha(base) * r * r
    grid = cfg.grid.build(base.dim, alpha)
    datum = _datum(cfg)
    disc, info = scaling_identity_check(base, datum, r, grid=grid, picard_tol=cfg.picard_tol,
                                        strip_lags=cfg.grid.strip_lags)
    data = {"discrepancy": disc, "bound": 5 * cfg.picard_tol, **info}
    dump_json(data, out / "scaling.json")
    if disc > 5 * cfg.picard_tol:
        raise VerificationFailure("scaling identity violated", discrepancy=disc)
    return {"discrepancy": disc}


def cmd_selftest(cfg, out):
    suite = acceptance.Suite(workers=cfg.workers, picard_tol=cfg.picard_tol)
    results = acceptance.run_all(suite, log=lambda line: print(line, file=sys.stderr))
    dump_json([r.to_dict() for r in results], out / "acceptance.json")
    study = suite.rate()
    write_table(out / "rate.csv", ["r", "error", "slope"],
                [(row["r"], row.get("error"), study.slope) for row in study.rows])
    # determinism sub-check: a cheap criterion recomputed from scratch
    again = acceptance.run_criterion(acceptance.Suite(workers=1), 8)
    first = next(r for r in results if r.number == 8)
    same = dump_json(again.to_dict()) == dump_json(first.to_dict())
    failed = [r.number for r in results if not r.passed]
    if not same:
        failed.append(13)
    summary = {"passed": len(results) - len([f for f in failed if f != 13]),
               "total": len(results), "failed": failed, "repeatable": same}
    if failed:
        raise VerificationFailure("acceptance criteria failed", **summary)
    return summary


COMMANDS = {
    "solve": cmd_solve, "heat": cmd_heat, "moments": cmd_moments, "weaklimit": cmd_weaklimit,
    "rate-study": cmd_rate_study, "maxprinciple": cmd_maxprinciple,
    "scaling-check": cmd_scaling_check, "selftest": cmd_selftest,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = _config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        log.info("running %s", args.command)
        summary = COMMANDS[args.command](cfg, out)
    except CTRWError as exc:
        print(json.dumps(exc.record(), sort_keys=True, default=str), file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        err = ConfigurationError(str(exc))
        print(json.dumps(err.record(), sort_keys=True), file=sys.stderr)
        return err.exit_code
    print(json.dumps({"command": args.command, "status": "ok", **summary},
                     sort_keys=True, default=float))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
