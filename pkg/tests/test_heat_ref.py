from math import pi

import numpy as np
import pytest
from scipy import integrate

from ctrw_heat.datum import constant, cosine, gaussian_bump, sqrt_sine, triangle_wave
from ctrw_heat.errors import ConfigurationError
from ctrw_heat.grid import Grid
from ctrw_heat.heat_ref import (heat_evolve, heat_solve, lemma_constant,
                                lipschitz_rate_check, weierstrass)


@pytest.fixture
def grid():
    return Grid(1, 1.0, 256, 0.002, 20)


def test_weierstrass_has_unit_mass():
    for t in (0.001, 0.05):
        m = integrate.quad(lambda x: float(weierstrass(np.array([x]), t)), -np.inf, np.inf)[0]
        assert m == pytest.approx(1.0, abs=1e-10)
    assert weierstrass(np.array([0.1]), 0.0) == 0.0
    x = np.array([[0.1, 0.2]])
    assert weierstrass(x, 0.02)[0] == pytest.approx(np.exp(-0.05 / 0.08) / (0.08 * pi))


def test_cosine_is_an_eigenfunction(grid):
    u = heat_solve(cosine(1.0), grid)
    x = grid.coords()[..., 0]
    for i, t in enumerate(grid.times()):
        assert np.allclose(u.values[i], np.exp(-(2 * pi) ** 2 * t) * np.cos(2 * pi * x), atol=1e-14)


def test_constants_and_mass(grid):
    u = heat_solve(constant(2.0), grid)
    assert np.allclose(u.values, 2.0, atol=1e-14)
    v = heat_solve(gaussian_bump(1.0), grid)
    m = v.masses()
    assert np.max(np.abs(m - m[0])) <= 1e-12 * m[0]
    f = gaussian_bump(1.0).sample(grid)
    assert np.array_equal(v.values[0], f)


def test_semigroup(grid):
    f = triangle_wave(1.0).sample(grid)
    a = heat_evolve(heat_evolve(f, grid, 0.003), grid, 0.005)
    b = heat_evolve(f, grid, 0.008)
    assert np.max(np.abs(a - b)) <= 1e-12


def test_maximum_principle_for_temperatures():
    g = Grid(2, 1.0, 64, 0.005, 5)
    d = gaussian_bump(1.0)
    u = heat_solve(d, g)
    f = d.sample(g)
    assert u.values.min() >= f.min() - 1e-12 and u.values.max() <= f.max() + 1e-12


def test_lemma_constant_forms():
    assert lemma_constant(1, 1.0, "printed") == pytest.approx(2 / np.sqrt(pi), rel=1e-12)
    assert lemma_constant(1, 1.0) == pytest.approx(2 / np.sqrt(pi), rel=1e-12)
    # corrected form is the mean of |z|^gamma under W(., 1)
    n, g = 2, 0.5
    ref = integrate.quad(lambda r: 2 * pi * r * r**g * np.exp(-r * r / 4) / (4 * pi), 0, np.inf)[0]
    assert lemma_constant(n, g) == pytest.approx(ref, rel=1e-10)
    with pytest.raises(ConfigurationError):
        lemma_constant(1, 1.0, "other")


def test_rate_check_bounds():
    g = Grid(1, 1.0, 4096, 0.01, 1)
    times = np.geomspace(1e-5, 0.1, 25)
    for d in (cosine(1.0), triangle_wave(1.0), sqrt_sine(1.0)):
        ratio, info = lipschitz_rate_check(d, g, times)
        assert ratio <= 2 * lemma_constant(1, d.holder_exponent, "printed")
        assert ratio <= lemma_constant(1, d.holder_exponent) * (1 + 1e-6)
    ratio, info = lipschitz_rate_check(constant(1.0), g, times)
    assert ratio == 0.0 and max(info["deviation"]) == 0.0
    from dataclasses import replace
    with pytest.raises(ConfigurationError):
        lipschitz_rate_check(replace(cosine(1.0), holder_exponent=None), g)


@pytest.mark.parametrize("datum", [triangle_wave(1.0), sqrt_sine(1.0)], ids=lambda d: d.name)
def test_rate_saturates_for_small_t(datum):
    g = Grid(1, 1.0, 2**14, 0.01, 1)
    t = 1e-4
    _, info = lipschitz_rate_check(datum, g, [t, t / 4])
    r1, r2 = info["ratios"]
    assert abs(r1 - r2) / r1 < 0.2
