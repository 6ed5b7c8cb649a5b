"""Slow, deliberately simple references for the solver and the FFT path."""

import numpy as np

from .errors import ConfigurationError, ConvergenceFailure, InvalidParameter
from .grid import convolve_slice

DIRECT_CAP = {1: 128, 2: 64}


def neumann_solve(K, tails, f, grid, series_tol=1e-12, max_terms=10000, return_terms=False,
                  on_cap="raise"):
    """Partial sums of u = sum_m (J *+)^m g with g(t) = Lambda_t * f, in real space.

    ``J *+`` only sees strictly earlier slices, so on a finite horizon the
    series terminates; truncation uses a ratio test with safety factor 2.
    ``max_terms`` counts the terms after g; ``on_cap="return"`` hands back the
    partial sum instead of raising when the cap is hit.
    """
    f = np.asarray(f, dtype=float)
    steps = grid.steps
    h, k = grid.h, grid.k
    tails = np.asarray(tails, dtype=float)
    if tails.shape[0] < steps + 1:
        pad = np.zeros((steps + 1 - tails.shape[0],) + tails.shape[1:])
        tails = np.concatenate([tails, pad])
    g = np.stack([convolve_slice(f, tails[i], h) for i in range(steps + 1)])
    total = g.copy()
    term = g
    prev_norm = float(np.max(np.abs(term)))
    Q = K.lags
    live = [q for q in range(1, Q + 1) if np.any(K.weights[q])]
    count = 0
    for count in range(1, max_terms + 1):
        new = np.zeros_like(term)
        for i in range(1, steps + 1):
            for q in live:
                if q > i:
                    break
                new[i] += convolve_slice(term[i - q], K.weights[q], h) * k
        norm = float(np.max(np.abs(new)))
        total += new
        term = new
        if norm == 0.0:
            break
        c = 2.0 * norm / prev_norm if prev_norm > 0 else 1.0
        if c < 1.0 and norm <= series_tol * (1.0 - c):
            break
        prev_norm = norm
    else:
        if on_cap != "return":
            raise ConvergenceFailure("Neumann series term cap reached", terms=max_terms)
    return (total, count) if return_terms else total


def direct_convolve(field_slice, kernel_slice, h):
    """Periodic convolution sum_z K(z) f(x - z) h^n by explicit summation."""
    f = np.asarray(field_slice, dtype=float)
    w = np.asarray(kernel_slice, dtype=float)
    if f.shape != w.shape:
        raise InvalidParameter("field and kernel slices differ in shape")
    n = f.ndim
    if n not in DIRECT_CAP or any(s > DIRECT_CAP[n] for s in f.shape):
        raise ConfigurationError("direct convolution refused: lattice too large",
                                 shape=f.shape, cap=DIRECT_CAP.get(n))
    if n == 1:
        M = f.shape[0]
        idx = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
        return (f[idx] @ w) * h
    out = np.zeros_like(f)
    for a, b in zip(*np.nonzero(w)):
        out += w[a, b] * np.roll(f, (a, b), axis=(0, 1))
    return out * h**2
