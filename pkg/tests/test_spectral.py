import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nskorteweg import spectral
from nskorteweg.grid import build_grid

from conftest import band_limited


def test_single_mode_derivatives_1d(grid1):
    (x,) = grid1.coordinates()
    f = np.sin(3 * x)
    d = spectral.spectral_derivatives(grid1, f)
    assert np.max(np.abs(d["gradient"][0] - 3 * np.cos(3 * x))) < 1e-12
    assert np.max(np.abs(d["laplacian"] + 9 * np.sin(3 * x))) < 1e-12


def test_single_mode_operators_2d(grid2):
    x, y = grid2.coordinates()
    f = np.cos(2 * x + 3 * y)
    kmag = np.sqrt(13.0)
    assert np.max(np.abs(spectral.partial(grid2, f, 1) + 3 * np.sin(2 * x + 3 * y))) < 1e-12
    assert np.max(np.abs(spectral.fractional_power(grid2, f, 0.7) - kmag**0.7 * f)) < 1e-12
    assert np.max(np.abs(spectral.fractional_power(grid2, f, -1.3) - kmag**-1.3 * f)) < 1e-12
    assert np.max(np.abs(spectral.riesz_transform(grid2, f, 0) + 2 / kmag * np.sin(2 * x + 3 * y))) < 1e-12
    assert np.max(np.abs(spectral.solve_poisson(grid2, f) + f / 13.0)) < 1e-12


def test_fractional_power_zero_is_identity(grid1):
    f = band_limited(grid1, 1, mean_zero=False)
    assert np.array_equal(spectral.fractional_power(grid1, f, 0.0), f)


def test_divergence_of_gradient_is_laplacian(grid2):
    f = band_limited(grid2, 2)
    lhs = spectral.divergence(grid2, spectral.gradient(grid2, f))
    assert np.max(np.abs(lhs - spectral.laplacian(grid2, f))) < 1e-10


def test_nyquist_mode_has_no_odd_derivative():
    g = build_grid(1, 16, 2 * np.pi)
    (x,) = g.coordinates()
    nyq = np.cos(8 * x)
    assert np.max(np.abs(spectral.partial(g, nyq, 0))) < 1e-13
    # the even symbol keeps it
    assert np.max(np.abs(spectral.laplacian(g, nyq) + 64 * nyq)) < 1e-10


def test_negative_power_rejects_mean(grid1):
    f = 1.0 + band_limited(grid1, 3)
    with pytest.raises(spectral.ZeroModeError):
        spectral.fractional_power(grid1, f, -0.5)
    # positive powers simply annihilate the mean
    assert abs(np.mean(spectral.fractional_power(grid1, f, 0.5))) < 1e-13


def test_riesz_and_poisson_warn_and_drop_mean(grid2):
    f = 2.0 + band_limited(grid2, 4)
    with pytest.warns(spectral.ZeroModeWarning):
        r = spectral.riesz_transform(grid2, f, 1)
    with pytest.warns(spectral.ZeroModeWarning):
        v = spectral.solve_poisson(grid2, f)
    assert abs(np.mean(r)) < 1e-13
    assert abs(np.mean(v)) < 1e-13
    assert np.max(np.abs(spectral.laplacian(grid2, v) - (f - 2.0))) < 1e-10
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spectral.riesz_transform(grid2, f - np.mean(f), 1)


def test_riesz_square_sum_is_minus_identity(grid2):
    f = band_limited(grid2, 5)
    total = sum(spectral.riesz_transform(grid2, spectral.riesz_transform(grid2, f, i), i) for i in range(2))
    assert np.max(np.abs(total + f)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(s1=st.floats(-1.5, 2.0), s2=st.floats(-1.5, 2.0), seed=st.integers(0, 10_000))
def test_fractional_powers_compose(s1, s2, seed):
    g = build_grid(2, 32, 2 * np.pi)
    f = band_limited(g, seed)
    lhs = spectral.fractional_power(g, spectral.fractional_power(g, f, s2), s1)
    rhs = spectral.fractional_power(g, f, s1 + s2)
    scale = max(1.0, np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale


def test_dealias_mask_keeps_two_thirds():
    g = build_grid(1, 64, 2 * np.pi)
    mask = spectral.dealias_mask(g)
    kept = np.flatnonzero(mask)
    assert kept.max() == 64 // 3
    assert not mask.flags.writeable
    f = band_limited(g, 6, band=32)
    once = spectral.dealias(g, f)
    assert np.max(np.abs(spectral.dealias(g, once) - once)) < 1e-14


def test_dealias_mask_2d_is_tensor_product(grid2):
    mask = spectral.dealias_mask(grid2)
    m0 = np.abs(np.rint(grid2.k[0][:, 0]))
    m1 = np.abs(np.rint(grid2.k[1][0, :]))
    expected = (m0[:, None] <= 32 / 3) & (m1[None, :] <= 32 / 3)
    assert np.array_equal(mask, expected)


@pytest.mark.parametrize("dim,n", [(1, 32), (1, 64), (2, 16)])
def test_parseval_matches_quadrature(dim, n):
    g = build_grid(dim, n, 3.0)
    f = band_limited(g, 7, band=n // 2, mean_zero=False)
    assert spectral.spectral_l2_squared(g, spectral.forward(g, f)) == pytest.approx(g.integrate(f**2), rel=1e-12)


def test_sobolev_norm_single_mode(grid1):
    (x,) = grid1.coordinates()
    f = np.cos(4 * x)
    for s in (0.0, 0.5, 1.0, 2.3):
        expected = np.sqrt(np.pi * (1 + 16.0) ** s)
        assert spectral.sobolev_norm(grid1, f, s) == pytest.approx(expected, rel=1e-12)
        assert spectral.sobolev_norm(grid1, f, s, homogeneous=True) == pytest.approx(np.sqrt(np.pi * 16.0**s), rel=1e-12)
    assert spectral.sobolev_norm(grid1, np.ones(grid1.shape), 1.0, homogeneous=True) == 0.0


def test_spectral_derivatives_rejects_non_finite(grid1):
    f = np.zeros(grid1.shape)
    f[2] = np.inf
    with pytest.raises(ValueError):
        spectral.spectral_derivatives(grid1, f)


def test_transform_round_trip():
    g = build_grid(2, 32, 1.0)
    x, y = g.coordinates()
    f = np.sin(2 * np.pi * x / g.length) * np.cos(4 * np.pi * y)
    assert np.max(np.abs(spectral.inverse(g, spectral.forward(g, f)) - f)) < 1e-12


def test_derivative_commutes_with_fractional_power(grid2):
    f = band_limited(grid2, 8)
    for s in (-0.6, 0.5, 1.7):
        a = spectral.partial(grid2, spectral.fractional_power(grid2, f, s), 0)
        b = spectral.fractional_power(grid2, spectral.partial(grid2, f, 0), s)
        assert np.max(np.abs(a - b)) < 1e-10


def test_multiplier_outputs_are_real(grid2):
    f = band_limited(grid2, 9)
    for out in (spectral.fractional_power(grid2, f, 0.3), spectral.riesz_transform(grid2, f, 1),
                spectral.solve_poisson(grid2, f), spectral.gradient(grid2, f)):
        assert out.dtype == np.float64


def test_documented_sobolev_values():
    g = build_grid(1, 32, 2 * np.pi)
    (x,) = g.coordinates()
    f = np.sin(x)
    assert spectral.sobolev_norm(g, f, 0.0) == pytest.approx(np.sqrt(np.pi), rel=1e-13)
    assert spectral.sobolev_norm(g, f, 1.0) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-13)
    for s in (0.3, 1.0, 2.5):
        assert spectral.sobolev_norm(g, f, s, homogeneous=True) == pytest.approx(np.sqrt(np.pi), rel=1e-13)
