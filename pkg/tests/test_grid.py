import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctrw_heat.errors import ConfigurationError, InvalidParameter
from ctrw_heat.grid import (Grid, SpaceTimeField, convolve_slice, discretize_kernel,
                            tail_weights)
from ctrw_heat.kernels import bump_product, compute_moments, heatball, time_mass
from ctrw_heat.oracle import direct_convolve


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        Grid(1, 1.0, 100, 0.01, 4)
    with pytest.raises(ConfigurationError):
        Grid(3, 1.0, 64, 0.01, 4)
    with pytest.raises(ConfigurationError):
        Grid(1, -1.0, 64, 0.01, 4)
    g = Grid.from_horizon(2, 2.0, 64, 0.01, 0.1)
    assert g.steps == 10 and g.h == pytest.approx(2 / 64) and g.shape == (64, 64)
    assert g.coords().shape == (64, 64, 2)
    assert g.times()[-1] == pytest.approx(0.1)


def test_resolvability_errors_name_the_ratio(H1):
    with pytest.raises(ConfigurationError) as info:
        discretize_kernel(H1, Grid(1, 1.0, 16, 0.001, 4))
    assert info.value.details["ratio"] == "space_radius/h"
    with pytest.raises(ConfigurationError) as info:
        discretize_kernel(H1, Grid(1, 1.0, 256, 0.05, 4))
    assert info.value.details["ratio"] == "t_max/k"
    with pytest.raises(ConfigurationError) as info:
        discretize_kernel(H1, Grid(1, 0.26, 256, 0.001, 4))
    assert info.value.details["ratio"] == "support/M"


@pytest.mark.parametrize("kernel,M", [(heatball(1), 256), (bump_product(1), 256),
                                      (heatball(2), 64)], ids=["H1", "bump1", "H2"])
def test_discrete_mass_exact_and_lag_zero_empty(kernel, M):
    g = Grid(kernel.dim, 1.0, M, kernel.t_max / 16, 8)
    K = discretize_kernel(kernel, g)
    assert np.all(K.weights >= 0)
    assert np.all(K.weights[0] == 0)
    assert K.weights.sum() * g.cell_volume * g.k == pytest.approx(1.0, abs=1e-13)
    assert abs(K.raw_mass - 1) < 1e-4


def test_raw_mass_close_to_one_in_one_dimension(disc256):
    assert abs(disc256.K.raw_mass - 1) < 1e-9


def test_bump_kernel_lags_below_t1_are_empty():
    K0 = bump_product(1, t1=0.02, t2=0.1)
    g = Grid(1, 1.0, 256, 0.002, 8)
    K = discretize_kernel(K0, g)
    first = int(np.floor(0.02 / g.k))
    assert np.all(K.weights[:first] == 0)
    assert K.lag_mass[first + 1] > 0


def test_discrete_contraction_matches_quadrature(H1):
    g = Grid(1, 1.0, 1024, H1.t_max / 64, 8)
    K = discretize_kernel(H1, g)
    assert K.alpha_lag == 64
    assert abs(K.contraction - compute_moments(H1).contraction) < 2e-2


def test_lag_masses_match_time_quadrature(disc256, H1):
    g = disc256.grid
    for q in (1, 4, 9, 16):
        exact = time_mass(H1, (q - 1) * g.k, q * g.k, 16, 64)
        assert disc256.K.lag_mass[q] == pytest.approx(exact, abs=1e-9)


def test_convolution_identity_and_constants(rng):
    g = Grid(1, 1.0, 128, 0.01, 1)
    f = rng.standard_normal(128)
    delta = np.zeros(128)
    delta[0] = 1 / g.h
    assert np.allclose(convolve_slice(f, delta, g.h), f, atol=1e-12)
    w = rng.random(128)
    out = convolve_slice(np.full(128, 3.0), w, g.h)
    assert np.allclose(out, 3.0 * w.sum() * g.h, rtol=1e-12)
    with pytest.raises(InvalidParameter):
        convolve_slice(f, w[:64], g.h)


@pytest.mark.parametrize("shape", [(128,), (32, 32)])
def test_fft_matches_direct_sum(shape, rng):
    h = 1.0 / shape[0]
    for _ in range(10):
        f = rng.standard_normal(shape)
        w = rng.random(shape)
        ref = direct_convolve(f, w, h)
        assert np.max(np.abs(convolve_slice(f, w, h) - ref)) <= 1e-10 * np.max(np.abs(ref))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(64,), (16, 16)]))
def test_convolution_preserves_mass_and_order(seed, shape):
    rng = np.random.default_rng(seed)
    h = 1.0 / shape[0]
    n = len(shape)
    f = rng.standard_normal(shape)
    g = f - rng.random(shape)
    w = rng.random(shape)
    out = convolve_slice(f, w, h)
    mass = out.sum() * h**n
    assert mass == pytest.approx(f.sum() * h**n * w.sum() * h**n, rel=1e-12, abs=1e-12)
    assert np.all(out - convolve_slice(g, w, h) >= -1e-12)


def test_tail_weights(disc256, H1):
    K = disc256.K
    g = disc256.grid
    tails = tail_weights(K)
    assert tails.shape == (g.steps + 1, g.M)
    assert tails[0].sum() * g.h == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(tails, axis=0) <= 1e-12)
    assert np.all(tails[K.alpha_lag:] == 0)
    # Lambda_0 is the discrete jump-length marginal
    lam = K.weights.sum(axis=0) * g.k
    assert np.allclose(tails[0], lam, atol=1e-12)
    # the direct route through KernelSpec gives the same weights
    assert np.allclose(tail_weights(H1, g), tails, atol=1e-12)


def test_tail_at_half_tmax_is_resolution_independent(H1):
    g = Grid(1, 1.0, 256, H1.t_max / 16, 16)
    coarse = discretize_kernel(H1, g).tails()
    fine = discretize_kernel(H1, g, quad_order=16, time_order=32).tails()
    assert np.max(np.abs(coarse[8] - fine[8])) < 1e-8


def test_tails_hat_consistent_with_tails(disc256):
    K = disc256.K
    g = disc256.grid
    th = K.tails_hat()
    assert np.allclose(th, np.fft.rfft(K.tails(), axis=1) * g.h, atol=1e-12)


def test_space_time_field():
    g = Grid(1, 1.0, 64, 0.01, 3)
    u = SpaceTimeField(np.ones((4, 64)), g)
    assert np.allclose(u.masses(), 1.0)
    assert u.sup() == 1.0
    assert (u - u).sup() == 0.0
    with pytest.raises(InvalidParameter):
        SpaceTimeField(np.ones((3, 64)), g)


def test_two_dimensional_kernel_is_symmetric(H2):
    g = Grid(2, 1.0, 64, H2.t_max / 16, 4)
    K = discretize_kernel(H2, g)
    w = K.weights[5]
    assert np.allclose(w, w.T, atol=0)
    assert np.allclose(w, np.roll(w[::-1], 1, axis=0), atol=0)
