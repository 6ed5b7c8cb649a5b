import numpy as np
import pytest

from ctrw_heat.datum import constant, gaussian_bump
from ctrw_heat.errors import ConfigurationError, ConvergenceFailure, InvalidParameter
from ctrw_heat.grid import Grid, convolve_slice, discretize_kernel
from ctrw_heat.kernels import bump_product
from ctrw_heat.oracle import direct_convolve, neumann_solve


@pytest.fixture(scope="module")
def small(disc256):
    d = disc256
    g = Grid(1, 1.0, 256, d.grid.k, 32)
    from ctrw_heat.grid import DiscreteKernel
    K = DiscreteKernel(d.K.weights, g, d.K.raw_mass)
    return K, g


def test_direct_convolve_basics(rng):
    h = 1 / 64
    f = rng.standard_normal(64)
    delta = np.zeros(64)
    delta[0] = 1 / h
    assert np.allclose(direct_convolve(f, delta, h), f, atol=1e-14)
    w = rng.random(64)
    assert np.allclose(direct_convolve(np.full(64, 2.0), w, h), 2 * w.sum() * h)
    d2 = np.zeros((16, 16))
    d2[0, 0] = 1 / h**2
    f2 = rng.standard_normal((16, 16))
    assert np.allclose(direct_convolve(f2, d2, h), f2, atol=1e-14)


def test_direct_convolve_refuses_large_lattices():
    with pytest.raises(ConfigurationError):
        direct_convolve(np.zeros(256), np.zeros(256), 1.0)
    with pytest.raises(ConfigurationError):
        direct_convolve(np.zeros((128, 128)), np.zeros((128, 128)), 1.0)
    with pytest.raises(InvalidParameter):
        direct_convolve(np.zeros(8), np.zeros(16), 1.0)


def test_direct_convolve_agrees_with_fft(rng):
    for trial in range(100):
        shape = (128,) if trial % 2 else (24, 24)
        h = 1 / shape[0]
        f = rng.standard_normal(shape)
        w = rng.random(shape)
        ref = direct_convolve(f, w, h)
        assert np.max(np.abs(convolve_slice(f, w, h) - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_neumann_constants(small):
    K, g = small
    u = neumann_solve(K, K.tails(g.steps), np.full(g.shape, 3.0), g, 1e-13)
    assert np.allclose(u, 3.0, atol=1e-12)


def test_neumann_partial_sums_increase_for_nonnegative_data(small):
    K, g = small
    f = gaussian_bump(1.0).sample(g)
    prev = None
    for terms in (1, 2, 4, 8):
        s = neumann_solve(K, K.tails(g.steps), f, g, 0.0, max_terms=terms, on_cap="return")
        if prev is not None:
            assert np.all(s >= prev - 1e-15)
        prev = s
    with pytest.raises(ConvergenceFailure):
        neumann_solve(K, K.tails(g.steps), f, g, 0.0, max_terms=3)


def test_neumann_terminates_on_finite_horizon(small):
    K, g = small
    f = gaussian_bump(1.0).sample(g)
    _, terms = neumann_solve(K, K.tails(g.steps), f, g, 0.0, return_terms=True)
    # each term moves at least one step into the future
    assert terms <= g.steps + 1


def test_neumann_first_term_before_first_lag():
    K0 = bump_product(1)
    g = Grid(1, 1.0, 256, 0.002, 20)
    K = discretize_kernel(K0, g)
    first = int(np.nonzero(K.lag_mass)[0][0])
    f = gaussian_bump(1.0).sample(g)
    u = neumann_solve(K, K.tails(g.steps), f, g, 1e-14)
    for i in range(first):
        assert np.allclose(u[i], convolve_slice(f, K.tails(g.steps)[i], g.h), atol=0, rtol=0)
