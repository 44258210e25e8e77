import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsbq.errors import NonPositiveLength, NotPowerOfTwo
from gsbq.grid import (
    Grid,
    RealField,
    StatePair,
    dealias_mask,
    discrete_norms,
    dispersion_symbol,
    make_grid,
    spectral_derivative,
    spectral_inner,
    symbol_values,
)


def test_grid_spacing_and_first_wavenumber():
    g = make_grid(200.0, 4096)
    assert g.dx == 400.0 / 4096 == 0.09765625
    assert g.dx * g.n_points == 2 * g.half_length
    assert np.min(g.wavenumbers[g.wavenumbers > 0]) == pytest.approx(math.pi / 200.0, rel=1e-15)
    assert g.nodes[0] == -200.0


def test_wavenumber_layout():
    # make_grid insists on n >= 16; the layout itself is defined for any even n
    g = Grid(math.pi, 8)
    np.testing.assert_array_equal(g.wavenumbers, [0, 1, 2, 3, -4, -3, -2, -1])
    k = make_grid(3.0, 64).wavenumbers
    assert np.count_nonzero(k == 0) == 1
    # antisymmetric except at the Nyquist index
    np.testing.assert_allclose(k[1:32], -k[:-32:-1])


@pytest.mark.parametrize("n", [100, 8, 0, 48])
def test_rejects_bad_sizes(n):
    with pytest.raises(NotPowerOfTwo):
        make_grid(100.0, n)


@pytest.mark.parametrize("L", [0.0, -1.0, math.nan])
def test_rejects_bad_length(L):
    with pytest.raises(NonPositiveLength):
        make_grid(L, 64)


def test_derivative_of_sine():
    g = make_grid(math.pi, 64)
    d = spectral_derivative(RealField.from_function(g, np.sin), 1)
    assert np.max(np.abs(d.samples - np.cos(g.nodes))) <= 1e-12


def test_derivative_of_constant():
    g = make_grid(5.0, 32)
    d = spectral_derivative(RealField(g, np.full(32, 3.0)), 2)
    assert np.max(np.abs(d.samples)) < 1e-13


def test_fourth_derivative_of_gaussian():
    g = make_grid(20.0, 512)
    x = g.nodes
    exact = (16 * x**4 - 48 * x**2 + 12) * np.exp(-(x**2))
    d = spectral_derivative(RealField(g, np.exp(-(x**2))), 4)
    assert np.max(np.abs(d.samples - exact)) <= 1e-8


def test_derivative_order_range():
    g = make_grid(1.0, 16)
    with pytest.raises(ValueError):
        spectral_derivative(RealField(g, np.zeros(16)), 0)


def test_symbol_examples():
    assert symbol_values(1.0, 0.0, 0.0) == 2.0
    assert symbol_values(math.sqrt(2.0), 1.0, 0.5) == pytest.approx(2.75, abs=1e-14)
    xi = np.linspace(0, 3, 300001)
    vals = symbol_values(xi, 1.9, 0.0)
    assert vals.min() == pytest.approx(1 - 1.9**2 / 4, abs=1e-9)
    assert xi[np.argmin(vals)] == pytest.approx(math.sqrt(1.9 / 2), abs=1e-4)


def test_dispersion_symbol_layout():
    g = Grid(math.pi, 8)
    np.testing.assert_allclose(dispersion_symbol(g, 0.0, 0.0), g.wavenumbers**4 + 1)


def test_norm_examples():
    g = make_grid(1.0, 16)
    assert discrete_norms(RealField(g, np.zeros(16))) == (0.0, 0.0, 0.0, None)
    assert discrete_norms(RealField(g, np.ones(16))).l2 == pytest.approx(math.sqrt(2.0), rel=1e-15)
    g = make_grid(math.pi, 128)
    n = discrete_norms(RealField.from_function(g, np.sin))
    assert n.l2 == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert n.h2 == pytest.approx(2 * math.sqrt(math.pi), rel=1e-13)
    assert n.sup == pytest.approx(1.0, abs=1e-3)


def test_state_norm_adds_components():
    g = make_grid(math.pi, 64)
    u = RealField.from_function(g, np.sin)
    v = RealField.from_function(g, np.cos)
    n = discrete_norms(StatePair(u, v))
    assert n.x_norm == pytest.approx(discrete_norms(u).h2 + discrete_norms(v).l2)


def test_field_validation():
    g = make_grid(1.0, 16)
    with pytest.raises(ValueError):
        RealField(g, np.zeros(8))
    with pytest.raises(ValueError):
        RealField(g, np.full(16, np.nan))
    f = RealField(g, np.zeros(16))
    with pytest.raises(ValueError):
        f.samples[0] = 1.0
    with pytest.raises(ValueError):
        StatePair(f, RealField(make_grid(2.0, 16), np.zeros(16)))


def test_dealias_mask_keeps_lower_two_thirds():
    g = make_grid(1.0, 64)
    m = dealias_mask(g)
    assert m.shape == (33,)
    assert m[:22].all() and not m[22:].any()


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    log_n=st.integers(4, 9),
    L=st.floats(0.5, 100.0),
    w=st.floats(-3.0, 3.0),
)
def test_spectral_inner_matches_grid_sum(seed, log_n, L, w):
    g = make_grid(L, 2**log_n)
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, g.n_points))
    lhs = g.integrate(a * b)
    rhs = spectral_inner(g, g.forward(a), g.forward(b))
    assert rhs == pytest.approx(lhs, rel=1e-10, abs=1e-10 * g.integrate(a * a + b * b))
    # weights act as a symmetric multiplier
    wt = 1.0 + w * g.rwavenumbers**2
    assert spectral_inner(g, g.forward(a), g.forward(b), wt) == pytest.approx(
        spectral_inner(g, g.forward(b), g.forward(a), wt), rel=1e-12, abs=1e-12
    )


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), order=st.integers(1, 6))
def test_derivative_is_linear_and_kills_constants(seed, order):
    g = make_grid(10.0, 128)
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, 128))
    fa, fb = RealField(g, a), RealField(g, b)
    lhs = spectral_derivative(2.0 * fa + fb, order).samples
    rhs = 2.0 * spectral_derivative(fa, order).samples + spectral_derivative(fb, order).samples
    scale = np.max(np.abs(rhs)) + 1.0
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale
    const = spectral_derivative(RealField(g, np.full(128, 2.5)), order)
    assert np.max(np.abs(const.samples)) < 1e-12
