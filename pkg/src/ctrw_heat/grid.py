"""Periodic lattice x uniform time lattice, discrete kernels and convolution.

Time slice ``i`` of a field stands for the interval ``[i k, (i+1) k)``; lag
``q >= 1`` of a discrete kernel collects the kernel mass with waiting time
in ``((q-1) k, q k]``.  With this bookkeeping lag 0 is empty, the scheme is
strictly causal, and the tail weights Lambda_i (mass with waiting time
beyond ``i k``) are exactly the reverse cumulative sums of the lag weights.
"""

from dataclasses import dataclass
from functools import cached_property
from math import ceil

import numpy as np

from .errors import ConfigurationError, InvalidParameter
from .kernels import KernelSpec
from .quadrature import gauss_legendre, interval_rule, panel_rule, piecewise_edges

MIN_RESOLUTION = 8.0


def _is_pow2(m):
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Torus [0, L)^dim with M points per axis and ``steps`` time steps of size k."""

    dim: int
    L: float
    M: int
    k: float
    steps: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"grid dimension must be 1 or 2, got {self.dim}")
        if not (self.L > 0 and self.k > 0):
            raise ConfigurationError("grid needs L > 0 and k > 0", L=self.L, k=self.k)
        if not _is_pow2(int(self.M)):
            raise ConfigurationError(f"M must be a power of two, got {self.M}")
        if int(self.steps) < 0:
            raise ConfigurationError("steps must be non-negative")

    @classmethod
    def from_horizon(cls, dim, L, M, k, T):
        """Grid whose horizon covers T (rounded up to a whole number of steps)."""
        steps = max(0, ceil(T / k - 1e-9))
        return cls(dim, float(L), int(M), float(k), int(steps))

    @property
    def h(self):
        return self.L / self.M

    @property
    def T(self):
        return self.steps * self.k

    @property
    def shape(self):
        return (self.M,) * self.dim

    @property
    def cell_volume(self):
        return self.h**self.dim

    def coords(self):
        """Lattice points, shape ``shape + (dim,)``."""
        ax = np.arange(self.M) * self.h
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    def times(self):
        return np.arange(self.steps + 1) * self.k

    def check_resolvable(self, kernel):
        ratio_x = kernel.space_radius / self.h
        ratio_t = kernel.t_max / self.k
        if ratio_x < MIN_RESOLUTION:
            raise ConfigurationError(
                f"kernel unresolved in space: space_radius/h = {ratio_x:.3g} < {MIN_RESOLUTION:g}",
                ratio="space_radius/h", value=ratio_x)
        if ratio_t < MIN_RESOLUTION:
            raise ConfigurationError(
                f"kernel unresolved in time: t_max/k = {ratio_t:.3g} < {MIN_RESOLUTION:g}",
                ratio="t_max/k", value=ratio_t)
        width = 2 * ceil(kernel.space_radius / self.h + 0.5) + 1
        if width > self.M:
            raise ConfigurationError(
                f"kernel support ({width} cells) does not fit on the torus (M = {self.M})",
                ratio="support/M", value=width / self.M)

    def to_dict(self):
        return {"dim": self.dim, "L": self.L, "M": self.M, "k": self.k,
                "steps": self.steps, "T": self.T, "h": self.h}


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Lattice weights ``weights[q]`` (q = 0..Q) with unit discrete mass."""

    weights: np.ndarray
    grid: Grid
    raw_mass: float

    @property
    def lags(self):
        return self.weights.shape[0] - 1

    @cached_property
    def lag_mass(self):
        axes = tuple(range(1, self.weights.ndim))
        return self.weights.sum(axis=axes) * self.grid.cell_volume * self.grid.k

    @cached_property
    def alpha_lag(self):
        """Last lag carrying mass: cumulative mass is < 1 strictly before it."""
        nz = np.nonzero(self.lag_mass > 0)[0]
        return int(nz[-1]) if nz.size else 0

    @property
    def strip_lags(self):
        return self.alpha_lag // 2

    @cached_property
    def contraction(self):
        return float(np.sum(self.lag_mass[1:self.strip_lags + 1]))

    @cached_property
    def hat(self):
        """Spatial transforms scaled so a product is a lag term of J * u."""
        axes = tuple(range(1, self.weights.ndim))
        return np.fft.rfftn(self.weights, axes=axes) * (self.grid.cell_volume * self.grid.k)

    def tails(self, steps=None):
        """Lambda_i = sum over q > i of weights[q] * k, for i = 0..steps."""
        steps = self.grid.steps if steps is None else steps
        rev = np.cumsum(self.weights[::-1], axis=0)[::-1] * self.grid.k
        out = np.zeros((steps + 1,) + self.weights.shape[1:])
        n = min(steps + 1, self.lags)
        out[:n] = rev[1:n + 1]
        return out

    def tails_hat(self, steps=None):
        """Transforms of :meth:`tails`, scaled like :attr:`hat`."""
        steps = self.grid.steps if steps is None else steps
        rev = np.cumsum(self.hat[::-1], axis=0)[::-1]
        out = np.zeros((steps + 1,) + self.hat.shape[1:], dtype=complex)
        n = min(steps + 1, self.lags)
        out[:n] = rev[1:n + 1]
        return out


def _lag_count(kernel, k):
    return max(1, ceil(kernel.t_max / k - 1e-9))


def _time_panels(kernel, k, extra_breaks=(), sub=1):
    Q = _lag_count(kernel, k)
    t_max = kernel.t_max
    lag_edges = [q * k / sub for q in range(1, Q * sub) if q * k / sub < t_max]
    breaks = list(lag_edges) + list(extra_breaks) + list(kernel.time_breaks)
    return piecewise_edges(0.0, t_max, breaks, grade_lo=100, grade_hi=40, grade_breaks=0), Q


def _radial_cells_1d(kernel, h, Ne, sigma, order):
    """Cell integrals for cells j = 0..Ne at each time in ``sigma`` (n = 1)."""
    j = np.arange(Ne + 1)
    lo = np.maximum((j - 0.5) * h, 0.0)
    hi = (j + 0.5) * h
    R = kernel.radius_at(sigma)[:, None]
    top = np.minimum(hi[None, :], R)
    rho, w = interval_rule(lo[None, :], top, order)
    vals = np.sum(kernel.profile(rho, sigma[:, None, None]) * w, axis=-1)
    vals[:, 0] *= 2.0
    return vals


def _radial_cells_2d(kernel, h, Ne, sigma, order):
    """Cell integrals for the quadrant cells (j1, j2) in 0..Ne (n = 2)."""
    j = np.arange(Ne + 1)
    lo = np.maximum((j - 0.5) * h, 0.0)
    hi = (j + 0.5) * h
    R = kernel.radius_at(sigma)
    S = sigma.size
    out = np.zeros((S, Ne + 1, Ne + 1))
    xg, xw = interval_rule(lo[None, :], np.minimum(hi[None, :], R[:, None]), order)
    # xg: (S, Ne+1, order); inner y range clipped to the disk
    ylim = np.sqrt(np.clip(R[:, None, None] ** 2 - xg**2, 0.0, None))
    ylo = np.minimum(lo[None, None, None, :], ylim[..., None])
    yhi = np.minimum(hi[None, None, None, :], ylim[..., None])
    yg, yw = interval_rule(ylo, yhi, order)
    rho = np.sqrt(xg[..., None, None] ** 2 + yg**2)
    vals = kernel.profile(rho, sigma[:, None, None, None, None])
    inner = np.sum(vals * yw, axis=-1)           # (S, Ne+1, order, Ne+1)
    out = np.einsum("sxgy,sxg->sxy", inner, xw)
    out[:, 0, :] *= 2.0
    out[:, :, 0] *= 2.0
    # the nested rule is not exactly symmetric in (x, y); the kernel is
    return 0.5 * (out + out.transpose(0, 2, 1))


def _box_cells(kernel, h, Ne, sigma, order):
    """Generic fallback: tensor Gauss over each full cell."""
    x, w = gauss_legendre(order)
    j = np.arange(-Ne, Ne + 1)
    pts = (j[:, None] + 0.5 * x[None, :]) * h
    wts = 0.5 * h * w
    if kernel.dim == 1:
        vals = kernel(pts[None, :, :, None], sigma[:, None, None])
        return np.sum(vals * wts, axis=-1)
    X = pts[:, None, :, None]
    Y = pts[None, :, None, :]
    P = np.stack(np.broadcast_arrays(X, Y), axis=-1)
    vals = kernel(P[None], sigma[:, None, None, None, None])
    return np.einsum("sabgl,g,l->sab", vals, wts, wts)


def discretize_kernel(kernel: KernelSpec, grid: Grid, quad_order=8, time_order=16, chunk=256):
    """Cell- and lag-averaged weights of ``kernel``, renormalized to unit mass."""
    grid.check_resolvable(kernel)
    h, k, n = grid.h, grid.k, grid.dim
    if kernel.dim != n:
        raise ConfigurationError("kernel and grid dimensions differ",
                                 kernel_dim=kernel.dim, grid_dim=n)
    Ne = ceil(kernel.space_radius / h + 0.5)
    use_radial = kernel.radial and kernel.base_section is not None
    if use_radial and n == 1 and kernel.base_window is not None:
        breaks = []
        for e in range(Ne + 1):
            lo, hi = kernel.window((e + 0.5) * h)
            breaks += [lo, hi]
        edges, Q = _time_panels(kernel, k, breaks)
    else:
        edges, Q = _time_panels(kernel, k, sub=4)
    mids = 0.5 * (edges[1:] + edges[:-1])
    panel_lag = np.minimum(np.floor(mids / k).astype(int) + 1, Q)
    nodes, wts = panel_rule(edges, time_order)
    lag = np.repeat(panel_lag, time_order)

    if use_radial and n == 1:
        cells = _radial_cells_1d
        part_shape = (Ne + 1,)
    elif use_radial:
        cells = _radial_cells_2d
        part_shape = (Ne + 1, Ne + 1)
    else:
        cells = _box_cells
        part_shape = (2 * Ne + 1,) * n
    acc = np.zeros((Q + 1,) + part_shape)
    for s in range(0, nodes.size, chunk):
        sl = slice(s, s + chunk)
        vals = cells(kernel, h, Ne, nodes[sl], quad_order) * wts[sl].reshape((-1,) + (1,) * n)
        np.add.at(acc, lag[sl], vals)
    acc /= grid.cell_volume * k

    weights = np.zeros((Q + 1,) + grid.shape)
    if use_radial:
        # mirror the non-negative offsets onto the full torus
        idx = np.arange(-Ne, Ne + 1)
        src = np.abs(idx)
        if n == 1:
            weights[:, idx % grid.M] = acc[:, src]
        else:
            weights[np.ix_(range(Q + 1), idx % grid.M, idx % grid.M)] = acc[:, src][:, :, src]
    else:
        idx = np.arange(-Ne, Ne + 1) % grid.M
        if n == 1:
            weights[:, idx] = acc
        else:
            weights[np.ix_(range(Q + 1), idx, idx)] = acc
    weights[0] = 0.0
    raw = float(weights.sum() * grid.cell_volume * k)
    if not raw > 0:
        raise ConfigurationError("kernel has no mass on this grid")
    weights /= raw
    return DiscreteKernel(weights=weights, grid=grid, raw_mass=raw)


def tail_weights(kernel, grid=None):
    """Lambda_i(z): kernel mass at offset z with waiting time beyond ``i k``."""
    if isinstance(kernel, DiscreteKernel):
        return kernel.tails(kernel.grid.steps if grid is None else grid.steps)
    return discretize_kernel(kernel, grid).tails(grid.steps)


def convolve_slice(field_slice, kernel_slice, h):
    """Periodic convolution sum_z K(z) f(x - z) h^n via the FFT."""
    f = np.asarray(field_slice, dtype=float)
    w = np.asarray(kernel_slice, dtype=float)
    if f.shape != w.shape:
        raise InvalidParameter("field and kernel slices differ in shape",
                               field=f.shape, kernel=w.shape)
    axes = tuple(range(f.ndim))
    out = np.fft.irfftn(np.fft.rfftn(f) * np.fft.rfftn(w), s=f.shape, axes=axes)
    return out * h**f.ndim


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Values on the lattice at time indices 0..steps (time-major)."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        expected = (self.grid.steps + 1,) + self.grid.shape
        if self.values.shape != expected:
            raise InvalidParameter("field shape does not match grid",
                                   shape=self.values.shape, expected=expected)

    def masses(self):
        axes = tuple(range(1, self.values.ndim))
        return self.values.sum(axis=axes) * self.grid.cell_volume

    def sup(self, start=0, stop=None):
        return float(np.max(np.abs(self.values[start:stop])))

    def __sub__(self, other):
        return SpaceTimeField(self.values - other.values, self.grid)
