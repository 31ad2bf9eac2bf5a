import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from kdvbbm.spectral import (
    GevreyParams,
    GridMismatchError,
    OverflowGuardError,
    SpectralField,
    SymmetryError,
    apply_multiplier,
    dealias_product,
    derivative_symbol,
    forward_transform,
    gevrey_weight,
    hermitian_residue,
    inner_product,
    inverse_transform,
    log_cosh,
    make_grid,
    sobolev_norm,
    weighted_norm,
)


def test_grid_layout():
    g = make_grid(8, 2 * np.pi)
    assert g.k.tolist() == [-4, -3, -2, -1, 0, 1, 2, 3]
    assert g.x[0] == -np.pi
    assert g.xi_max == pytest.approx(4.0)
    with pytest.raises(ValueError):
        g.wavenumbers[0] = 1.0


@pytest.mark.parametrize("n,length", [(7, 1.0), (6, 1.0), (16, 0.0), (16, -2.0)])
def test_grid_rejects_bad_input(n, length):
    with pytest.raises(ValueError):
        make_grid(n, length)


def test_grid_equality_by_value():
    assert make_grid(16, 4.0) == make_grid(16, 4.0)
    assert make_grid(16, 4.0) != make_grid(32, 4.0)


def test_constant_field_has_mean_coefficient():
    g = make_grid(16, 10.0)
    c = forward_transform(np.full(16, 2.5), g)
    assert c[8] == pytest.approx(2.5)
    assert np.abs(np.delete(c, 8)).max() < 1e-15


def test_cosine_mode():
    g = make_grid(32, 2 * np.pi)
    c = forward_transform(np.cos(3 * g.x), g)
    k = g.k
    assert c[k == 3][0] == pytest.approx(0.5)
    assert c[k == -3][0] == pytest.approx(0.5)


def test_transform_round_trip():
    g = make_grid(64, 7.0)
    s = np.random.default_rng(1).standard_normal(64)
    assert np.abs(inverse_transform(forward_transform(s, g), g) - s).max() < 1e-13


def test_transform_grid_mismatch():
    with pytest.raises(GridMismatchError):
        forward_transform(np.zeros(10), make_grid(16, 1.0))


def test_inverse_rejects_non_hermitian():
    g = make_grid(16, 1.0)
    c = np.zeros(16, dtype=complex)
    c[9] = 1.0
    assert hermitian_residue(c) == pytest.approx(1.0)
    with pytest.raises(SymmetryError):
        inverse_transform(c, g)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=3, max_value=7), st.floats(min_value=0.5, max_value=100.0))
def test_round_trip_property(log_n, length):
    n = 2**log_n
    g = make_grid(n, length)
    s = np.random.default_rng(n).standard_normal(n)
    f = SpectralField.from_samples(s, g)
    assert f.hermitian_residue() < 1e-14
    assert np.allclose(f.samples(), s, atol=1e-13)


def test_field_arithmetic_and_mismatch():
    g = make_grid(16, 3.0)
    a = SpectralField.from_samples(np.sin(g.x), g)
    b = a * 2.0
    assert np.allclose((b - a).coefficients, a.coefficients)
    with pytest.raises(GridMismatchError):
        a + SpectralField.zeros(make_grid(32, 3.0))


def test_derivative_of_sine():
    g = make_grid(64, 2 * np.pi)
    f = SpectralField.from_samples(np.sin(2 * g.x), g)
    d = apply_multiplier(f, derivative_symbol(g, 1))
    assert np.abs(d.samples() - 2 * np.cos(2 * g.x)).max() < 1e-12
    assert derivative_symbol(g, 1)[g.nyquist] == 0


def test_non_symmetric_multiplier_rejected():
    g = make_grid(16, 2 * np.pi)
    f = SpectralField.from_samples(np.cos(g.x), g)
    with pytest.raises(SymmetryError):
        apply_multiplier(f, lambda xi: 1.0 + (xi > 0))


@pytest.mark.parametrize("n", [16, 64])
def test_dealiased_products_match_direct_convolution(n):
    rng = np.random.default_rng(n)
    g = make_grid(n, 32.0)
    a = oracles.random_coeffs(n, rng, length=32.0)
    b = oracles.random_coeffs(n, rng, length=32.0)
    fa, fb = SpectralField(g, a), SpectralField(g, b)
    assert np.abs(dealias_product(fa, fb).coefficients - oracles.product(n, a, b)).max() < 1e-13
    ref = oracles.product(n, a, b, a)
    assert np.abs(dealias_product(fa, fb, fa).coefficients - ref).max() < 1e-13 * max(1, np.abs(ref).max())


def test_low_band_product_is_exact_pointwise():
    g = make_grid(64, 2 * np.pi)
    f = SpectralField.from_samples(np.cos(3 * g.x), g)
    p = dealias_product(f, f)
    assert np.abs(p.samples() - np.cos(3 * g.x) ** 2).max() < 1e-14


def test_log_cosh_accuracy():
    x = np.array([0.0, 1e-8, 0.5, 19.9, 20.1, 700.0, -3.0])
    ref = np.array([0.0, 5e-17, np.log(np.cosh(0.5)), np.log(np.cosh(19.9)),
                    np.log(np.cosh(20.1)), 700 - np.log(2), np.log(np.cosh(3.0))])
    assert np.allclose(log_cosh(x), ref, rtol=1e-14, atol=1e-20)


def test_weights_and_guard():
    g = make_grid(64, 2 * np.pi)
    assert np.all(gevrey_weight("cosh", 0.0, g) == 1)
    assert np.allclose(gevrey_weight("sech", 0.7, g) * gevrey_weight("cosh", 0.7, g), 1)
    with pytest.raises(OverflowGuardError):
        gevrey_weight("cosh", 600.0 / g.xi_max * 1.01, g)
    with pytest.raises(ValueError):
        gevrey_weight("cosh", -0.1, g)


def test_weighted_norm_matches_direct_sum():
    g = make_grid(64, 20.0)
    c = oracles.random_coeffs(64, np.random.default_rng(3), length=20.0)
    f = SpectralField(g, c)
    xi = g.wavenumbers
    for kind, w in [("cosh", np.cosh(0.4 * np.abs(xi))), ("exp", np.exp(0.4 * np.abs(xi)))]:
        ref = np.sqrt(20.0 * np.sum(w**2 * (1 + xi**2) ** 2 * np.abs(c) ** 2))
        assert weighted_norm(f, GevreyParams(0.4, 2.0), kind) == pytest.approx(ref, rel=1e-13)
    assert sobolev_norm(f, 0.0) == pytest.approx(np.sqrt(20.0 * np.sum(np.abs(c) ** 2)), rel=1e-13)


def test_weighted_norm_no_overflow_near_guard():
    g = make_grid(64, 2 * np.pi)
    c = np.zeros(64, dtype=complex)
    c[32 + 30] = c[32 - 30] = np.exp(-500.0)
    f = SpectralField(g, c)
    sigma = 590.0 / g.xi_max
    n = weighted_norm(f, GevreyParams(sigma, 2.0), "exp")
    assert np.isfinite(n) and n > 0


def test_weighted_norm_monotone_in_sigma():
    g = make_grid(64, 20.0)
    f = SpectralField(g, oracles.random_coeffs(64, np.random.default_rng(5), length=20.0))
    vals = [weighted_norm(f, GevreyParams(s, 2.0)) for s in np.linspace(0, 1, 11)]
    assert np.all(np.diff(vals) > 0)


def test_inner_product_is_l2_integral():
    g = make_grid(64, 2 * np.pi)
    f = SpectralField.from_samples(np.cos(g.x), g)
    assert inner_product(f, f) == pytest.approx(np.pi, rel=1e-14)
