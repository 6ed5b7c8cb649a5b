"""The acceptance suite: one check per criterion, with pinned tolerances and budgets.

Each check returns a :class:`Criterion`; wall-clock time is kept apart from
the measured data so that serialized results are reproducible.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import gaussian_test, rate_study, scaling_identity_check, weak_limit_study
from .datum import InitialDatum, constant, cosine, gaussian_bump, sqrt_sine, triangle_wave
from .grid import Grid, convolve_slice
from .heat_ref import lemma_constant, lipschitz_rate_check
from .kernels import closed_form_moment, compute_moments, heatball, kernel_alpha
from .oracle import direct_convolve
from .solver import iteration_bound, prepare, solve

PICARD_TOL = 1e-10
BOUND_SLACK = 1e-12  # FFT round-off allowance in pointwise comparisons


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    budget: float = None
    seconds: float = 0.0

    @property
    def within_budget(self):
        return self.budget is None or self.seconds < self.budget

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        budget = "" if self.budget is None else f" (budget {self.budget:g}s)"
        return f"[{status}] criterion {self.number:2d}: {self.title}  {self.seconds:.2f}s{budget}"

    def to_dict(self):
        return {"number": self.number, "title": self.title, "passed": bool(self.passed),
                "measured": self.measured}


class Suite:
    """Runs criteria on demand and caches the shared runs (5 -> 7, 10 -> 9)."""

    def __init__(self, workers=1, picard_tol=PICARD_TOL):
        self.workers = workers
        self.picard_tol = picard_tol
        self._cache = {}

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # 1
    def heatball_mass(self):
        out = {}
        for n in (1, 2):
            out[f"mass_n{n}"] = self.cached(("moments", n), lambda n=n: compute_moments(heatball(n))).mass
        ok = all(abs(v - 1) <= 1e-6 for v in out.values())
        return ok, out

    # 2
    def moment_lemma(self):
        out, ok = {}, True
        for n in (1, 2):
            mom = self.cached(("moments", n), lambda n=n: compute_moments(heatball(n)))
            closed = closed_form_moment(n)
            rel = abs(-mom.mu - closed) / closed
            out[f"n{n}"] = {"mu": mom.mu, "nu": mom.nu, "mu_plus_nu": mom.mu + mom.nu,
                            "closed_form": closed, "relative_error": rel}
            ok &= abs(mom.mu + mom.nu) <= 1e-5 and rel <= 1e-4
        return ok, out

    # 3
    def weak_limit(self):
        study = weak_limit_study(heatball(1), gaussian_test(), [0.2, 0.1, 0.05])
        return all(r >= 1.8 for r in study["ratios"]), study

    # 4
    def constants(self):
        H = heatball(1)
        alpha = self.alpha(1)
        grid = Grid.from_horizon(1, 1.0, 256, alpha / 16, 4 * alpha)
        u, rep = solve(H, constant(1.0), grid, self.picard_tol, short_circuit=False)
        dev = float(np.max(np.abs(u.values - 1.0)))
        return dev <= 1e-12, {"sup_deviation": dev, "steps": u.grid.steps,
                              "mass_drift": rep.mass_drift}

    def alpha(self, n):
        return self.cached(("alpha", n), lambda: kernel_alpha(heatball(n)))

    def mass_run(self):
        def run():
            H = heatball(1)
            alpha = self.alpha(1)
            grid = Grid.from_horizon(1, 1.0, 1024, alpha / 16, 4 * alpha)
            return solve(H, gaussian_bump(1.0), grid, self.picard_tol)
        return self.cached("mass_run", run)

    # 5
    def mass(self):
        u, rep = self.mass_run()
        return rep.mass_drift <= 1e-10, {"max_relative_drift": rep.mass_drift,
                                         "steps": rep.steps, "M": u.grid.M}

    # 6
    def bounds(self):
        alpha = self.alpha(1)
        H = heatball(1)
        grid = Grid.from_horizon(1, 1.0, 512, alpha / 16, 4 * alpha)
        disc = prepare(H, grid)
        f = gaussian_bump(1.0)
        bump, cos = f.func, cosine(1.0).func
        g = InitialDatum(lambda x: bump(x) + 0.1 * (1 + cos(x)), 0.0, 1.2, name="bump+cos")
        uf, rf = solve(H, f, grid, self.picard_tol, disc=disc)
        ug, rg = solve(H, g, grid, self.picard_tol, disc=disc)
        vf, vg = f.sample(disc.grid), g.sample(disc.grid)
        out = {
            "f_range": [float(vf.min()), float(vf.max())], "u_f_range": [rf.u_min, rf.u_max],
            "g_range": [float(vg.min()), float(vg.max())], "u_g_range": [rg.u_min, rg.u_max],
            "min_u_g_minus_u_f": float(np.min(ug.values - uf.values)),
        }
        ok = (vf.min() - BOUND_SLACK <= rf.u_min and rf.u_max <= vf.max() + BOUND_SLACK
              and vg.min() - BOUND_SLACK <= rg.u_min and rg.u_max <= vg.max() + BOUND_SLACK
              and out["min_u_g_minus_u_f"] >= -BOUND_SLACK)
        # a two-dimensional bounds check on a small lattice
        H2 = heatball(2)
        a2 = self.alpha(2)
        g2 = Grid.from_horizon(2, 1.0, 64, a2 / 16, 2 * a2)
        u2, r2 = solve(H2, f, g2, self.picard_tol)
        v2 = f.sample(u2.grid)
        out["n2_f_range"] = [float(v2.min()), float(v2.max())]
        out["n2_u_range"] = [r2.u_min, r2.u_max]
        out["n2_mass_drift"] = r2.mass_drift
        ok &= v2.min() - BOUND_SLACK <= r2.u_min and r2.u_max <= v2.max() + BOUND_SLACK
        return bool(ok), out

    # 7
    def contraction(self):
        u, rep = self.mass_run()
        bound = iteration_bound(rep.picard_tol, rep.contraction)
        ok = rep.max_ratio <= rep.contraction + 0.02 and max(rep.strip_iterations) <= bound
        return ok, {"max_ratio": rep.max_ratio, "contraction": rep.contraction,
                    "iterations": rep.strip_iterations, "iteration_bound": bound}

    # 8
    def oracles(self):
        H = heatball(1)
        alpha = self.alpha(1)
        grid = Grid.from_horizon(1, 1.0, 256, alpha / 16, 2 * alpha)
        disc = prepare(H, grid)
        f = gaussian_bump(1.0)
        us, _ = solve(H, f, grid, self.picard_tol, disc=disc)
        un, rn = solve(H, f, grid, self.picard_tol, disc=disc, engine="neumann")
        gap = float(np.max(np.abs(us.values - un.values)))
        rng = np.random.default_rng(20240601)
        worst = 0.0
        for trial in range(100):
            shape = (128,) if trial % 2 == 0 else (32, 32)
            h = 1.0 / shape[0]
            a = rng.standard_normal(shape)
            w = rng.random(shape)
            ref = direct_convolve(a, w, h)
            fast = convolve_slice(a, w, h)
            worst = max(worst, float(np.max(np.abs(fast - ref)) / np.max(np.abs(ref))))
        ok = gap <= 1e-8 + 2 * self.picard_tol and worst <= 1e-10
        return ok, {"solver_vs_neumann": gap, "neumann_terms": rn.strip_iterations[0],
                    "fft_vs_direct_relative": worst}

    def rate(self):
        return self.cached("rate", lambda: rate_study(
            triangle_wave(1.0), [0.25, 0.125, 0.0625], picard_tol=self.picard_tol,
            workers=self.workers))

    # 9
    def max_principle(self):
        study = self.rate()
        audits = [row.get("max_principle") for row in study.rows]
        ok = all(a is not None and a["future_sup"] <= a["initial_sup"] + 1e-6 for a in audits)
        return ok, {"audits": audits}

    # 10
    def rate_slope(self):
        study = self.rate()
        ok = study.slope is not None and study.slope >= 0.8 and bool(study.monotone)
        return ok, {"r": [row["r"] for row in study.rows], "errors": study.errors,
                    "slope": study.slope, "monotone": study.monotone}

    # 11
    def scaling(self):
        alpha = self.alpha(1) * 0.25
        grid = Grid.from_horizon(1, 1.0, 256, alpha / 16, 4 * alpha)
        disc, info = scaling_identity_check(heatball(1), cosine(1.0), 0.5, grid=grid,
                                            picard_tol=self.picard_tol)
        return disc <= 5 * self.picard_tol, {"discrepancy": disc, **info}

    # 12
    def lemma(self):
        grid = Grid(1, 1.0, 4096, 1e-3, 1)
        times = np.geomspace(1e-5, 0.1, 41)
        out, ok = {}, True
        for d in (cosine(1.0), triangle_wave(1.0), sqrt_sine(1.0)):
            ratio, _ = lipschitz_rate_check(d, grid, times)
            c = lemma_constant(1, d.holder_exponent, "printed")
            out[d.name] = {"ratio": ratio, "printed_constant": c,
                           "corrected_constant": lemma_constant(1, d.holder_exponent)}
            ok &= ratio <= 2 * c
        return ok, out


CRITERIA = [
    (1, "heat-ball normalization", "heatball_mass", 5),
    (2, "moment lemma mu = -nu and closed form", "moment_lemma", 10),
    (3, "weak-limit residual order", "weak_limit", 30),
    (4, "solver exact on constants", "constants", 5),
    (5, "mass conservation", "mass", 60),
    (6, "bounds and comparison", "bounds", 60),
    (7, "contraction certificate", "contraction", None),
    (8, "oracle equivalence", "oracles", 60),
    (9, "maximum principle", "max_principle", None),
    (10, "rate of convergence to the temperature", "rate_slope", 600),
    (11, "scaling identity", "scaling", 120),
    (12, "initial-layer constant", "lemma", 10),
]


def run_criterion(suite, number):
    for num, title, method, budget in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            passed, measured = getattr(suite, method)()
            return Criterion(num, title, bool(passed), measured, budget,
                             time.perf_counter() - t0)
    raise KeyError(number)


def run_all(suite=None, numbers=None, log=None):
    suite = Suite() if suite is None else suite
    order = [c[0] for c in CRITERIA]
    # run the rate study under criterion 10 so its cost is charged there
    order.remove(10)
    order.insert(order.index(9), 10)
    results = []
    for num in order:
        if numbers is None or num in numbers:
            res = run_criterion(suite, num)
            if log is not None:
                log(res.line())
            results.append(res)
    return sorted(results, key=lambda r: r.number)
