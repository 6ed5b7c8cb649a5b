"""Weak-limit residuals, maximum-principle audits, rate studies, scaling checks."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil, log2
from typing import Callable

import numpy as np

from .errors import ConfigurationError, CTRWError
from .grid import Grid, SpaceTimeField
from .heat_ref import heat_solve
from .kernels import (compute_moments, heatball, kernel_alpha, rescale, sphere_area,
                      time_edges, _box_rule)
from .quadrature import interval_rule, panel_rule
from .solver import prepare, solve


# --- test functions ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Smooth phi(x, t) with exact d/dt and spatial Laplacian (x: trailing axis)."""

    name: str
    value: Callable
    dt: Callable
    laplacian: Callable

    __test__ = False  # not a pytest class


def gaussian_test(center=0.0, t0=0.0, width=0.3, t_width=0.3):
    a2, b2 = width**2, t_width**2

    def g(x, t):
        d = x - center
        return np.exp(-np.sum(d * d, axis=-1) / (2 * a2) - (t - t0) ** 2 / (2 * b2))

    def dt(x, t):
        return -(t - t0) / b2 * g(x, t)

    def lap(x, t):
        d = x - center
        n = x.shape[-1]
        return (np.sum(d * d, axis=-1) / a2**2 - n / a2) * g(x, t)

    return TestFunction("gaussian", g, dt, lap)


def poly_gaussian_test(width=0.5, t_width=0.5):
    """x_1 t exp(-|x|^2/2a^2 - t^2/2b^2)."""
    a2, b2 = width**2, t_width**2

    def G(x, t):
        return np.exp(-np.sum(x * x, axis=-1) / (2 * a2) - t * t / (2 * b2))

    def phi(x, t):
        return x[..., 0] * t * G(x, t)

    def dt(x, t):
        return x[..., 0] * G(x, t) * (1 - t * t / b2)

    def lap(x, t):
        n = x.shape[-1]
        r2 = np.sum(x * x, axis=-1)
        return t * x[..., 0] * G(x, t) * (r2 / a2**2 - (n + 2) / a2)

    return TestFunction("poly-gaussian", phi, dt, lap)


def affine_test(slope=1.0, offset=0.5):
    return TestFunction(
        "affine",
        lambda x, t: offset + slope * np.sum(x, axis=-1) + 0 * t,
        lambda x, t: np.zeros(np.broadcast_shapes(x.shape[:-1], np.shape(t))),
        lambda x, t: np.zeros(np.broadcast_shapes(x.shape[:-1], np.shape(t))))


def linear_time_test():
    return TestFunction(
        "linear-t",
        lambda x, t: t + 0 * x[..., 0],
        lambda x, t: np.ones(np.broadcast_shapes(x.shape[:-1], np.shape(t))),
        lambda x, t: np.zeros(np.broadcast_shapes(x.shape[:-1], np.shape(t))))


TEST_FUNCTIONS = {
    "gaussian": gaussian_test,
    "poly-gaussian": poly_gaussian_test,
    "affine": affine_test,
    "linear-t": linear_time_test,
}


def check_derivatives(tf, points, eps=1e-4):
    """Largest gap between the analytic and central-difference d/dt and Laplacian."""
    worst = 0.0
    for x, t in points:
        x = np.asarray(x, dtype=float)
        ft = (tf.value(x, t + eps) - tf.value(x, t - eps)) / (2 * eps)
        lap = 0.0
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = eps
            lap += (tf.value(x + e, t) - 2 * tf.value(x, t) + tf.value(x - e, t)) / eps**2
        worst = max(worst, abs(ft - tf.dt(x, t)), abs(lap - tf.laplacian(x, t)))
    return float(worst)


# --- weak limit --------------------------------------------------------------


def kernel_rule(kernel, time_order=8, radial_order=32, angles=32):
    """Nodes (z, zeta) and weights integrating against J over its support."""
    t_nodes, t_w = panel_rule(time_edges(kernel), time_order)
    if not kernel.radial:
        pts, w = _box_rule(kernel, radial_order)
        vals = kernel(pts[None], t_nodes[:, None]) * w * t_w[:, None]
        z = np.broadcast_to(pts, (t_nodes.size,) + pts.shape).reshape(-1, kernel.dim)
        return z, np.repeat(t_nodes, pts.shape[0]), vals.ravel()
    R = kernel.radius_at(t_nodes)
    rho, w = interval_rule(0.0, R, radial_order)
    dens = kernel.profile(rho, t_nodes[:, None]) * w * t_w[:, None]
    zeta = np.broadcast_to(t_nodes[:, None], rho.shape).ravel()
    rho, dens = rho.ravel(), dens.ravel()
    if kernel.dim == 1:
        z = np.concatenate([rho, -rho])[:, None]
        return z, np.concatenate([zeta, zeta]), np.concatenate([dens, dens])
    th = 2 * np.pi * np.arange(angles) / angles
    z = np.stack([np.outer(rho, np.cos(th)).ravel(), np.outer(rho, np.sin(th)).ravel()], -1)
    wts = np.outer(dens * rho, np.full(angles, 2 * np.pi / angles)).ravel()
    return z, np.repeat(zeta, angles), wts


def weak_limit_residual(kernel, testfn, r, sample_points, moments=None, rule=None):
    """sup over samples of |r^-2 [(J_r * phi) - phi] - (mu phi_t + nu Lap phi)|."""
    if not r > 0:
        raise ConfigurationError("r must be positive")
    moments = compute_moments(kernel) if moments is None else moments
    z, zeta, w = kernel_rule(kernel) if rule is None else rule
    worst = 0.0
    for x, t in sample_points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        phi0 = testfn.value(x, t)
        shifted = testfn.value(x[None, :] - r * z, t - r * r * zeta)
        A = float(np.sum(w * (shifted - phi0))) / (r * r)
        limit = moments.mu * testfn.dt(x, t) + moments.nu * testfn.laplacian(x, t)
        worst = max(worst, abs(A - float(limit)))
    return worst


def default_samples(dim, count=5):
    xs = np.linspace(-0.3, 0.3, count)
    ts = np.linspace(-0.2, 0.2, count)
    if dim == 1:
        return [(np.array([x]), t) for x, t in zip(xs, ts)]
    return [(np.array([x, -0.5 * x]), t) for x, t in zip(xs, ts)]


def weak_limit_study(kernel, testfn, r_list, sample_points=None):
    rule = kernel_rule(kernel)
    moments = compute_moments(kernel)
    pts = default_samples(kernel.dim) if sample_points is None else sample_points
    res = [weak_limit_residual(kernel, testfn, r, pts, moments, rule) for r in r_list]
    ratios = [a / b if b > 0 else float("inf") for a, b in zip(res, res[1:])]
    return {"r": list(map(float, r_list)), "residual": res, "ratios": ratios,
            "mu": moments.mu, "nu": moments.nu, "testfn": testfn.name}


# --- maximum principle -------------------------------------------------------


@dataclass
class MaxPrincipleReport:
    initial_sup: float
    future_sup: float
    tolerance: float
    mean_value_defect: float
    defect_tolerance: float
    allowance: float

    @property
    def holds(self):
        return self.future_sup <= self.initial_sup + self.tolerance

    @property
    def precondition_ok(self):
        return self.mean_value_defect <= self.defect_tolerance

    def to_dict(self):
        return {"initial_sup": self.initial_sup, "future_sup": self.future_sup,
                "tolerance": self.tolerance, "holds": self.holds,
                "mean_value_defect": self.mean_value_defect,
                "defect_tolerance": self.defect_tolerance,
                "precondition": "ok" if self.precondition_ok else "violated",
                "allowance": self.allowance}


def mean_value_defect(values, K, first):
    """Per-slice sup of w(i) - sum_q K_q * w(i - q) k for i >= first."""
    dim = K.grid.dim
    axes = tuple(range(1, dim + 1))
    w_hat = np.fft.rfftn(values, axes=axes)
    Q = K.alpha_lag
    K_hat = K.hat[:Q + 1]
    out = []
    for i in range(first, values.shape[0]):
        conv = np.einsum("q...,q...->...", K_hat[1:], w_hat[i - np.arange(1, Q + 1)])
        pred = np.fft.irfftn(conv, s=K.grid.shape, axes=tuple(range(K.grid.dim)))
        out.append(float(np.max(np.abs(values[i] - pred))))
    return np.array(out)


def max_principle_audit(field, K, alpha_lag, tol=1e-6, defect_tol=None):
    """Compare sup |w| after alpha with sup |w| on [0, alpha].

    The mean-value identity is checked on slices whose whole past lies in
    the field; each step can add at most its defect to the running sup, so
    ``allowance`` is the sum of defects (a crude but honest bound).
    """
    values = field.values if isinstance(field, SpaceTimeField) else np.asarray(field)
    alpha_lag = int(alpha_lag)
    initial = float(np.max(np.abs(values[:alpha_lag + 1])))
    future = float(np.max(np.abs(values[alpha_lag + 1:]))) if values.shape[0] > alpha_lag + 1 else 0.0
    first = max(alpha_lag + 1, K.alpha_lag)
    defects = mean_value_defect(values, K, first) if values.shape[0] > first else np.zeros(0)
    defect = float(defects.max()) if defects.size else 0.0
    defect_tol = tol if defect_tol is None else defect_tol
    return MaxPrincipleReport(initial, future, tol, defect, defect_tol, float(defects.sum()))


# --- rate study --------------------------------------------------------------


@dataclass(frozen=True)
class GridPolicy:
    """Parabolic refinement: h tracks the kernel radius, k tracks alpha = r^2 alpha_1."""

    L: float = 1.0
    cells_per_radius: float = 32.0
    strip_lags: int = 32
    horizon_alphas: float = 4.0

    def grid_for(self, kernel, alpha):
        M = 2 ** ceil(log2(self.L * self.cells_per_radius / kernel.space_radius - 1e-9))
        k = alpha / (2 * self.strip_lags)
        return Grid.from_horizon(kernel.dim, self.L, M, k, self.horizon_alphas * alpha)


def _rate_row(base, datum, r, policy, picard_tol, tol):
    kernel = rescale(base, r)
    alpha = kernel_alpha(kernel)
    grid = policy.grid_for(kernel, alpha)
    row = {"r": float(r), "M": grid.M, "k": grid.k, "steps": grid.steps}
    try:
        disc = prepare(kernel, grid, strip_lags=policy.strip_lags, alpha=alpha)
        u, rep = solve(kernel, datum, disc.grid, picard_tol=picard_tol, disc=disc)
        heat = heat_solve(datum, disc.grid)
        w = u - heat
        audit = max_principle_audit(w, disc.K, disc.alpha_index, tol=tol)
    except CTRWError as exc:
        row["failure"] = exc.record()
        return row
    row.update(error=float(np.max(np.abs(w.values))), alpha=alpha,
               max_principle=audit.to_dict(),
               iterations=sum(rep.strip_iterations), mass_drift=rep.mass_drift)
    return row


@dataclass
class RateStudy:
    rows: list
    slope: float = None
    monotone: bool = None
    gamma: float = None
    extra: dict = field(default_factory=dict)

    @property
    def errors(self):
        return [row.get("error") for row in self.rows]

    def to_dict(self):
        return {"rows": self.rows, "slope": self.slope, "monotone": self.monotone,
                "gamma": self.gamma, **self.extra}


def rate_study(datum, r_list, policy=None, base=None, picard_tol=1e-10, workers=1,
               slack=0.05, tol=1e-6):
    """Sup-norm error of u(H_r, f) against the temperature for each r, with slope fit."""
    r_list = [float(r) for r in r_list]
    if len(r_list) < 3:
        raise ConfigurationError("rate study needs at least three values of r")
    if any(b >= a for a, b in zip(r_list, r_list[1:])):
        raise ConfigurationError("r values must decrease")
    policy = GridPolicy() if policy is None else policy
    base = heatball(1) if base is None else base
    args = [(base, datum, r, policy, picard_tol, tol) for r in r_list]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _rate_row(*a), args))
    else:
        rows = [_rate_row(*a) for a in args]
    study = RateStudy(rows, gamma=datum.holder_exponent)
    if any("failure" in row for row in rows):
        return study
    errs = np.array([row["error"] for row in rows])
    study.monotone = bool(all(b <= a * (1 + slack) for a, b in zip(errs, errs[1:])))
    if datum.is_constant or np.any(errs <= 0):
        study.extra["degenerate"] = True
        return study
    study.slope = float(np.polyfit(np.log(r_list), np.log(errs), 1)[0])
    return study


# --- scaling identity --------------------------------------------------------


def matched_grid(grid, r):
    """Grid for the unscaled problem matched to ``grid`` of the r-scaled one."""
    return Grid(grid.dim, grid.L / r, grid.M, grid.k / r**2, grid.steps)


def scaling_identity_check(kernel, datum, r, grids=None, picard_tol=1e-10, strip_lags=None,
                           grid=None):
    """sup |u(J_r, f)(x, t) - u(J, f(r .))(x / r, t / r^2)| over shared lattice points."""
    if grids is None:
        if grid is None:
            raise ConfigurationError("scaling check needs a grid")
        grids = (grid, matched_grid(grid, r))
    ga, gb = grids
    ok = (ga.dim == gb.dim and ga.M == gb.M and ga.steps == gb.steps
          and np.isclose(gb.L * r, ga.L, rtol=1e-12, atol=0)
          and np.isclose(gb.k * r * r, ga.k, rtol=1e-12, atol=0))
    if not ok:
        raise ConfigurationError("grids are not parabolically matched",
                                 scaled=ga.to_dict(), unscaled=gb.to_dict(), r=r)
    kr = rescale(kernel, r)
    alpha_b = kernel_alpha(kernel)
    alpha_a = alpha_b * r * r
    m = strip_lags or max(8, ceil(alpha_a / (2 * ga.k) - 1e-9))
    da = prepare(kr, ga, strip_lags=m, alpha=alpha_a)
    db = prepare(kernel, gb, strip_lags=m, alpha=alpha_b)
    ua, ra = solve(kr, datum, da.grid, picard_tol, disc=da)
    ub, rb = solve(kernel, datum.scaled(r), db.grid, picard_tol, disc=db)
    n = min(ua.values.shape[0], ub.values.shape[0])
    disc = float(np.max(np.abs(ua.values[:n] - ub.values[:n])))
    return disc, {"r": r, "strip_lags": m, "steps": n - 1, "M": ga.M,
                  "scaled_grid": da.grid.to_dict(), "unscaled_grid": db.grid.to_dict()}
