"""Strip-wise fixed-point solution of u = J * u_bar with u_bar = f before t = 0.

Time is cut into strips of ``m`` steps (``m k = alpha / 2``).  On each strip
the operator T (tail term Lambda_t * f plus the causal sum over earlier
slices) is a contraction with constant I(alpha/2), so Picard iteration with
an a posteriori stopping rule gives a certified sup-norm error.
"""

from dataclasses import dataclass, field
from math import ceil, log

import numpy as np

from .datum import InitialDatum
from .errors import ConfigurationError, ConvergenceFailure, InvalidParameter, InvalidState
from .grid import DiscreteKernel, Grid, SpaceTimeField, discretize_kernel
from .kernels import KernelSpec, kernel_alpha

MIN_STRIP_LAGS = 8
MAX_ITERATIONS = 200


@dataclass(frozen=True, eq=False)
class Discretization:
    """A kernel sampled on a grid whose step divides alpha/2."""

    kernel: KernelSpec
    grid: Grid
    K: DiscreteKernel
    strip_lags: int
    alpha: float

    @property
    def contraction(self):
        """Discrete I(alpha/2): mass of lags 1..m."""
        return float(np.sum(self.K.lag_mass[1:self.strip_lags + 1]))

    @property
    def alpha_index(self):
        return 2 * self.strip_lags


def prepare(kernel, grid, strip_lags=None, min_strip_lags=MIN_STRIP_LAGS, alpha=None):
    """Round ``grid.k`` down so alpha/2 = m k, then discretize the kernel.

    ``strip_lags`` forces m; otherwise m is the smallest integer >= the
    requested alpha/(2k) and >= ``min_strip_lags``.  The horizon is kept.
    """
    if kernel.dim != grid.dim:
        raise ConfigurationError("kernel and grid dimensions differ")
    alpha = kernel_alpha(kernel) if alpha is None else float(alpha)
    if strip_lags is None:
        m = max(int(min_strip_lags), ceil(alpha / (2 * grid.k) - 1e-9))
    else:
        m = int(strip_lags)
        if m < 1:
            raise ConfigurationError("strip_lags must be positive")
    k = alpha / (2 * m)
    steps = max(0, ceil(grid.T / k - 1e-9))
    g = Grid(grid.dim, grid.L, grid.M, k, steps)
    K = discretize_kernel(kernel, g)
    return Discretization(kernel, g, K, m, alpha)


def _flat_hat(values, dim):
    axes = tuple(range(values.ndim - dim, values.ndim))
    h = np.fft.rfftn(values, axes=axes)
    lead = h.shape[:values.ndim - dim]
    return h.reshape(lead + (int(np.prod(h.shape[values.ndim - dim:])),))


class StripOperator:
    """Fourier-space form of T for one discrete kernel and datum."""

    def __init__(self, K, f, steps):
        grid = K.grid
        self.grid = grid
        self.dim = grid.dim
        self.M = grid.M
        self.Q = K.lags
        self.K_hat = K.hat.reshape(K.hat.shape[0], -1)
        self.tails_hat = K.tails_hat(steps).reshape(steps + 1, -1)
        f = np.asarray(f, dtype=float)
        self.f_hat = _flat_hat(f, self.dim)
        self.spectral_shape = np.fft.rfftn(np.zeros(grid.shape)).shape

    def to_hat(self, values):
        return _flat_hat(np.asarray(values, dtype=float), self.dim)

    def from_hat(self, hat):
        lead = hat.shape[:-1]
        spectrum = hat.reshape(lead + self.spectral_shape)
        axes = tuple(range(len(lead), len(lead) + self.dim))
        return np.fft.irfftn(spectrum, s=self.grid.shape, axes=axes)

    def fixed_part(self, start, stop, history_hat):
        """Tail term plus contributions of slices before ``start`` for a in [start, stop)."""
        out = self.tails_hat[start:stop] * self.f_hat
        for a in range(start, stop):
            q_lo = a - start + 1
            q_hi = min(self.Q, a)
            if q_lo > q_hi:
                continue
            q = np.arange(q_lo, q_hi + 1)
            out[a - start] += np.einsum("qf,qf->f", self.K_hat[q], history_hat[a - q])
        return out

    def inner_matrix(self, n):
        """W[a, b] = K_hat[a - b] for 1 <= a - b <= Q (within-strip lags)."""
        d = np.subtract.outer(np.arange(n), np.arange(n))
        mask = (d >= 1) & (d <= self.Q)
        return self.K_hat[np.clip(d, 0, self.Q)] * mask[..., None]

    def apply(self, v, fixed, W):
        v_hat = self.to_hat(v)
        return self.from_hat(fixed + np.einsum("abf,bf->af", W, v_hat))


def apply_T(strip_values, history, datum, K, tails=None, start=None):
    """One application of the strip operator.

    ``history`` holds slices 0..start-1 (start = its length unless given),
    ``strip_values`` the current guess on slices start..start+n-1.  Output is
    (Lambda_t * f) + sum over 0 < s <= t of K(t - s) * u_bar(s) k.
    """
    if history is None:
        raise InvalidState("strip operator needs the history up to the strip start")
    history = np.asarray(history, dtype=float)
    v = np.asarray(strip_values, dtype=float)
    grid = K.grid
    if history.ndim != grid.dim + 1 or history.shape[1:] != grid.shape:
        history = history.reshape((-1,) + grid.shape)
    start = history.shape[0] if start is None else int(start)
    if history.shape[0] < start:
        raise InvalidState("history is missing slices before the strip start",
                           have=history.shape[0], need=start)
    if not np.all(np.isfinite(history[:start])):
        raise InvalidState("history contains non-finite values")
    if v.shape[1:] != grid.shape:
        raise InvalidParameter("strip values do not match the grid", shape=v.shape)
    f = datum.sample(grid) if isinstance(datum, InitialDatum) else np.asarray(datum, dtype=float)
    stop = start + v.shape[0]
    op = StripOperator(K, f, max(stop - 1, 0))
    if tails is not None:
        tails = np.asarray(tails, dtype=float)
        th = np.zeros_like(op.tails_hat)
        n = min(tails.shape[0], th.shape[0])
        th[:n] = op.to_hat(tails[:n]) * grid.cell_volume
        op.tails_hat = th
    fixed = op.fixed_part(start, stop, op.to_hat(history[:start]))
    return op.apply(v, fixed, op.inner_matrix(v.shape[0]))


def strip_bounds(j, m, steps):
    """Slice range [start, stop) of strip j; strip 0 also owns slice 0."""
    start = 0 if j == 0 else j * m + 1
    stop = min((j + 1) * m, steps) + 1
    return start, stop


def iteration_bound(picard_tol, contraction):
    """Geometric-series bound ceil(log(tol (1 - c)) / log c) + 2."""
    if contraction <= 0:
        return 2
    return ceil(log(picard_tol * (1 - contraction)) / log(contraction)) + 2


@dataclass
class StripStats:
    iterations: int
    ratios: list
    last_difference: float


def solve_strip(op, j, m, u, u_hat, f, picard_tol, contraction, start_guess="warm",
                max_iterations=MAX_ITERATIONS):
    """Picard-iterate T on strip ``j`` in place of ``u`` (slices after it untouched)."""
    steps = u.shape[0] - 1
    start, stop = strip_bounds(j, m, steps)
    n = stop - start
    if start > 0 and not np.all(np.isfinite(u[start - 1])):
        raise InvalidState("history incomplete before strip", strip=j)
    if start_guess == "zero":
        v = np.zeros((n,) + u.shape[1:])
    elif start_guess == "datum" or j == 0:
        v = np.broadcast_to(f, (n,) + f.shape).copy()
    elif start_guess == "warm":
        v = np.broadcast_to(u[start - 1], (n,) + f.shape).copy()
    else:
        raise ConfigurationError(f"unknown starting guess {start_guess!r}")
    fixed = op.fixed_part(start, stop, u_hat)
    W = op.inner_matrix(n)
    threshold = picard_tol * (1 - contraction) / contraction if contraction > 0 else np.inf
    ratios = []
    prev = None
    for it in range(1, max_iterations + 1):
        new = op.apply(v, fixed, W)
        diff = float(np.max(np.abs(new - v)))
        if prev is not None and prev > 0:
            ratios.append(diff / prev)
        v, prev = new, diff
        if diff <= threshold:
            break
    else:
        raise ConvergenceFailure("Picard iteration cap reached", strip=j,
                                 iterations=max_iterations, difference=prev,
                                 last_ratio=ratios[-1] if ratios else None)
    u[start:stop] = v
    u_hat[start:stop] = op.to_hat(v)
    return StripStats(it, ratios, prev)


@dataclass
class SolveReport:
    masses: list
    mass_drift: float
    u_min: float
    u_max: float
    strip_iterations: list
    strip_ratios: list
    initial_layer: float
    contraction: float
    strip_lags: int
    alpha: float
    k: float
    steps: int
    picard_tol: float
    engine: str = "strip"
    iteration_bound: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def max_ratio(self):
        flat = [r for rs in self.strip_ratios for r in rs]
        return max(flat) if flat else 0.0

    def to_dict(self):
        return {
            "engine": self.engine, "alpha": self.alpha, "k": self.k, "steps": self.steps,
            "strip_lags": self.strip_lags, "contraction": self.contraction,
            "picard_tol": self.picard_tol, "iteration_bound": self.iteration_bound,
            "mass_drift": self.mass_drift, "u_min": self.u_min, "u_max": self.u_max,
            "initial_layer": self.initial_layer, "max_ratio": self.max_ratio,
            "strip_iterations": list(self.strip_iterations),
            "strip_ratios": [list(r) for r in self.strip_ratios],
            "masses": list(self.masses), **self.extra,
        }


def _report(values, disc, f, picard_tol, engine, iters, ratios, extra=None):
    grid = disc.grid
    masses = values.reshape(values.shape[0], -1).sum(axis=1) * grid.cell_volume
    m0 = masses[0]
    # zero-mean data: measure drift against the mass of |f| instead
    scale = max(abs(m0), float(np.sum(np.abs(f))) * grid.cell_volume)
    scale = scale if scale > 0 else 1.0
    drift = float(np.max(np.abs(masses - m0)) / scale)
    layer = float(np.max(np.abs(values[:disc.alpha_index + 1] - f)))
    return SolveReport(
        masses=[float(x) for x in masses], mass_drift=drift,
        u_min=float(values.min()), u_max=float(values.max()),
        strip_iterations=iters, strip_ratios=ratios, initial_layer=layer,
        contraction=disc.contraction, strip_lags=disc.strip_lags, alpha=disc.alpha,
        k=grid.k, steps=grid.steps, picard_tol=picard_tol, engine=engine,
        iteration_bound=iteration_bound(picard_tol, disc.contraction),
        extra=extra or {})


def solve(kernel, datum, grid, picard_tol=1e-10, disc=None, strip_lags=None,
          start_guess="warm", short_circuit=True, engine="strip", series_tol=None,
          max_iterations=MAX_ITERATIONS):
    """Solve the Cauchy problem on ``grid`` (k is rounded down to divide alpha/2).

    Returns ``(SpaceTimeField, SolveReport)``.  ``engine="neumann"`` uses the
    series oracle instead of strip iteration.
    """
    if not picard_tol > 0:
        raise InvalidParameter("picard_tol must be positive")
    if disc is None:
        disc = prepare(kernel, grid, strip_lags=strip_lags)
    g = disc.grid
    f = datum.sample(g) if isinstance(datum, InitialDatum) else np.asarray(datum, dtype=float)
    if f.shape != g.shape:
        raise InvalidParameter("datum does not match the grid", shape=f.shape)
    const = isinstance(datum, InitialDatum) and datum.is_constant
    if short_circuit and const and engine == "strip":
        values = np.broadcast_to(f, (g.steps + 1,) + g.shape).copy()
        n_strips = ceil(g.steps / disc.strip_lags) if g.steps else 1
        return (SpaceTimeField(values, g),
                _report(values, disc, f, picard_tol, engine, [0] * n_strips,
                        [[] for _ in range(n_strips)], {"short_circuit": True}))
    if engine == "neumann":
        from .oracle import neumann_solve
        tol = picard_tol if series_tol is None else series_tol
        values, terms = neumann_solve(disc.K, disc.K.tails(g.steps), f, g, tol,
                                      return_terms=True)
        return (SpaceTimeField(values, g),
                _report(values, disc, f, picard_tol, engine, [terms], [[]]))
    if engine != "strip":
        raise ConfigurationError(f"unknown engine {engine!r}")

    op = StripOperator(disc.K, f, g.steps)
    u = np.full((g.steps + 1,) + g.shape, np.nan)
    u_hat = np.zeros((g.steps + 1, op.K_hat.shape[1]), dtype=complex)
    m = disc.strip_lags
    n_strips = max(1, ceil(g.steps / m))
    iters, ratios = [], []
    for j in range(n_strips):
        stats = solve_strip(op, j, m, u, u_hat, f, picard_tol, disc.contraction,
                            start_guess=start_guess, max_iterations=max_iterations)
        iters.append(stats.iterations)
        ratios.append(stats.ratios)
    return SpaceTimeField(u, g), _report(u, disc, f, picard_tol, engine, iters, ratios)
