import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctrw_heat.datum import (PRESETS, constant, cosine, from_array, gaussian_bump,
                             parse_datum, sqrt_sine, triangle_wave)
from ctrw_heat.errors import ConfigurationError, InvalidParameter, VerificationFailure
from ctrw_heat.grid import Grid


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_respect_their_metadata(name):
    d = parse_datum(name, L=1.0)
    g = Grid(1, 1.0, 1024, 0.01, 1)
    v = d.sample(g)
    assert d.inf_f - 1e-15 <= v.min() and v.max() <= d.sup_f + 1e-15
    assert d.check_holder(1.0)


@pytest.mark.parametrize("L", [1.0, 2.5])
def test_holder_metadata_in_two_dimensions(L):
    for d in (gaussian_bump(L), cosine(L), triangle_wave(L), sqrt_sine(L)):
        assert d.check_holder(L, dim=2, pairs=2000, seed=3)


def test_seminorms_are_sharp_enough():
    # triangle wave slope is exactly 4A/L and the bound is attained on a segment
    d = triangle_wave(1.0)
    x = np.array([[0.1], [0.2]])
    assert abs(d(x[0]) - d(x[1])) == pytest.approx(d.holder_seminorm * 0.1)
    assert cosine(2.0).holder_seminorm == pytest.approx(np.pi)


def test_wrong_seminorm_is_caught():
    from dataclasses import replace
    bad = replace(cosine(1.0), holder_seminorm=1.0)
    with pytest.raises(VerificationFailure):
        bad.check_holder(1.0)
    with pytest.raises(ConfigurationError):
        replace(cosine(1.0), holder_seminorm=None).check_holder(1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 4.0))
def test_scaling_rescales_seminorm(r):
    d = sqrt_sine(1.0)
    s = d.scaled(r)
    assert s.holder_seminorm == pytest.approx(d.holder_seminorm * r**0.5)
    x = np.array([[0.3]])
    assert s(x) == pytest.approx(d(r * x))
    assert s.check_holder(1.0 / r, pairs=300)


def test_parse_datum():
    assert parse_datum("constant:2").sup_f == 2.0
    assert parse_datum("constant").is_constant
    g = parse_datum("gaussian-bump:width=0.1,center=0.25", L=1.0)
    assert g(np.array([[0.25]]))[0] == pytest.approx(1.0)
    for bad in ("nope", "cosine:freq", "cosine:freq=2"):
        with pytest.raises(ConfigurationError):
            parse_datum(bad)


def test_array_datum():
    g = Grid(1, 1.0, 64, 0.01, 1)
    arr = np.linspace(0, 1, 64)
    d = from_array(arr)
    assert np.array_equal(d.sample(g), arr)
    assert d.inf_f == 0.0 and d.sup_f == 1.0
    with pytest.raises(InvalidParameter):
        d.sample(Grid(1, 1.0, 32, 0.01, 1))
    with pytest.raises(InvalidParameter):
        d.scaled(2.0)


def test_constant_and_bump_are_periodic():
    assert constant(3.0).sample(Grid(2, 1.0, 8, 0.1, 1)).shape == (8, 8)
    b = gaussian_bump(1.0, center=0.0)
    assert b(np.array([[0.01]]))[0] == pytest.approx(b(np.array([[0.99]]))[0])
