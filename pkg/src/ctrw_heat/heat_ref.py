"""Reference temperatures on the torus and the initial-layer rate check."""

from math import gamma, pi

import numpy as np

from .datum import InitialDatum
from .errors import ConfigurationError
from .grid import SpaceTimeField


def weierstrass(x, t):
    """(4 pi t)^(-n/2) exp(-|x|^2 / 4t) for t > 0 (0 otherwise); trailing axis = dim."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    n = x.shape[-1]
    r2 = np.sum(x * x, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = (4 * pi * t) ** (-n / 2) * np.exp(-r2 / (4 * t))
    return np.where(t > 0, val, 0.0)


def heat_multiplier(grid, t):
    """exp(-|2 pi xi / L|^2 t) on the rfftn frequency lattice."""
    freqs = [np.fft.fftfreq(grid.M, d=grid.h)] * (grid.dim - 1) + [np.fft.rfftfreq(grid.M, d=grid.h)]
    mesh = np.meshgrid(*freqs, indexing="ij")
    xi2 = sum((2 * pi * m) ** 2 for m in mesh)
    return np.exp(-xi2 * t)


def heat_evolve(values, grid, t):
    """Advance a lattice function by the periodic heat semigroup for time t."""
    values = np.asarray(values, dtype=float)
    if t == 0:
        return values.copy()
    return np.fft.irfftn(np.fft.rfftn(values) * heat_multiplier(grid, t), s=grid.shape,
                          axes=tuple(range(grid.dim)))


def heat_solve(datum, grid, times=None):
    """Temperature with initial value f on grid times (or ``times``); t = 0 gives f."""
    f = datum.sample(grid) if isinstance(datum, InitialDatum) else np.asarray(datum, dtype=float)
    ts = grid.times() if times is None else np.asarray(times, dtype=float)
    f_hat = np.fft.rfftn(f)
    out = np.empty((ts.size,) + grid.shape)
    for i, t in enumerate(ts):
        out[i] = f if t == 0 else np.fft.irfftn(f_hat * heat_multiplier(grid, t), s=grid.shape,
                                                  axes=tuple(range(grid.dim)))
    if times is None:
        return SpaceTimeField(out, grid)
    return out


def lemma_constant(n, gamma_=1.0, form="corrected"):
    """Constant C in |u(x,t) - f(x)| <= C [f]_gamma t^(gamma/2).

    ``corrected``: 2^gamma Gamma((n+gamma)/2) / Gamma(n/2), the value of
    integral of W(z, 1)|z|^gamma.  ``printed``: pi^(-n/2) times the integral
    of exp(-|z|)|z|^gamma, evaluated by 1-D quadrature.
    """
    if form == "corrected":
        return 2**gamma_ * gamma((n + gamma_) / 2) / gamma(n / 2)
    if form == "printed":
        from scipy import integrate
        from .kernels import sphere_area
        val = integrate.quad(lambda r: np.exp(-r) * r ** (gamma_ + n - 1), 0, np.inf,
                             epsabs=0, epsrel=1e-13)[0]
        return sphere_area(n) * val / pi ** (n / 2)
    raise ConfigurationError(f"unknown lemma constant form {form!r}")


def lipschitz_rate_check(datum, grid, times=None):
    """max over t of ||u(t) - f||_inf / ([f]_gamma t^(gamma/2)), with per-time ratios."""
    if not datum.has_holder:
        raise ConfigurationError("rate check needs Hoelder metadata", datum=datum.name)
    ts = np.geomspace(1e-4, 0.1, 16) if times is None else np.asarray(times, dtype=float)
    f = datum.sample(grid)
    u = heat_solve(f, grid, ts)
    dev = np.max(np.abs(u - f).reshape(ts.size, -1), axis=1)
    if datum.holder_seminorm == 0:
        ratios = np.where(dev == 0, 0.0, np.inf)
    else:
        ratios = dev / (datum.holder_seminorm * ts ** (datum.holder_exponent / 2))
    return float(np.max(ratios)), {"times": ts.tolist(), "ratios": ratios.tolist(),
                                   "deviation": dev.tolist()}
