import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevreyflow.initial import gevrey_random, random_field
from gevreyflow.norms import (
    GevreyParams,
    InsufficientSpectrumError,
    algebra_ratio,
    bar_gevrey_norm,
    check_embeddings,
    check_gradient_estimate,
    check_sandwich,
    estimate_radius,
    gevrey_norm,
    sobolev_norm,
)
from gevreyflow.spectral import GridSpec, RadiusTooLargeError, SpectralField

L = 2 * math.pi


def field_with(grid, mags):
    c = np.zeros(grid.n, complex)
    h = grid.n // 2
    c[:h] = mags[:h]
    c[h + 1:] = mags[1:h][::-1]
    return SpectralField(grid, c)


def test_params_validation():
    with pytest.raises(ValueError):
        GevreyParams(sigma=0.5)
    with pytest.raises(ValueError):
        GevreyParams(delta=-0.1)


def test_sobolev_zero_and_parseval():
    g = GridSpec(32, 5.0)
    assert sobolev_norm(SpectralField.zeros(g), 2.0) == 0.0
    f = SpectralField.from_modes(g, {1: 0.5})
    # ||cos(xi_1 x)||_{L2}^2 = L/2
    assert sobolev_norm(f, 0.0) == pytest.approx(math.sqrt(g.period / 2), rel=1e-15)


def test_sobolev_matches_direct_sum():
    g = GridSpec(64, L)
    f = random_field(g, 11)
    total = 0.0
    for k in range(g.n):
        xi = g.wavenumbers[k]
        total += (1 + xi * xi) ** 2 * abs(f.coeffs[k]) ** 2
    assert sobolev_norm(f, 2.0) == pytest.approx(math.sqrt(g.period * total), rel=1e-13)


def test_gevrey_matches_direct_sum():
    g = GridSpec(64, L)
    mags = np.exp(-np.abs(np.fft.fftfreq(64, 1 / 64)))
    f = field_with(g, mags)
    total = sum(math.exp(2 * 0.5 * math.sqrt(1 + xi * xi)) * abs(c) ** 2
                for xi, c in zip(g.wavenumbers, f.coeffs))
    assert gevrey_norm(f, GevreyParams(1.0, 0.5, 0.0)) == pytest.approx(math.sqrt(g.period * total), rel=1e-13)


def test_delta_zero_reduces_to_sobolev():
    g = GridSpec(64, L)
    f = random_field(g, 1)
    assert gevrey_norm(f, GevreyParams(2.0, 0.0, 1.5)) == pytest.approx(sobolev_norm(f, 1.5), rel=1e-14)
    assert bar_gevrey_norm(f, GevreyParams(2.0, 0.0, 1.5)) == pytest.approx(sobolev_norm(f, 1.5), rel=1e-14)


def test_constant_mode_sandwich_ratio_is_e():
    g = GridSpec(16, L)
    f = SpectralField.from_modes(g, {0: 1.0})
    p = GevreyParams(1.0, 1.0, 0.0)
    assert gevrey_norm(f, p) / bar_gevrey_norm(f, p) == pytest.approx(math.e, rel=1e-15)


def test_sigma_monotonicity():
    g = GridSpec(64, L)
    f = random_field(g, 7)
    assert gevrey_norm(f, GevreyParams(2.0, 0.4, 1.0)) <= gevrey_norm(f, GevreyParams(1.0, 0.4, 1.0))


def test_overflow_propagates():
    g = GridSpec(256, 2.0)
    f = random_field(g, 0)
    with pytest.raises(RadiusTooLargeError):
        gevrey_norm(f, GevreyParams(1.0, 5.0, 0.0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.0, 2.0), st.sampled_from([1.0, 1.5, 2.0, 4.0]), st.floats(0.0, 4.0))
def test_sandwich_property(seed, delta, sigma, q):
    f = random_field(GridSpec(64, L), seed)
    lower, upper = check_sandwich(f, GevreyParams(sigma, delta, q))
    assert lower.lhs <= lower.rhs * (1 + 1e-12)
    assert upper.lhs <= upper.rhs * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.05, 1.5), st.floats(0.0, 0.99), st.sampled_from([1.0, 2.0, 3.0]))
def test_embeddings_property(seed, delta, frac, sigma):
    f = random_field(GridSpec(64, L), seed)
    for rec in check_embeddings(f, GevreyParams(sigma, delta, 2.0), frac * delta, 1.0 + frac * (sigma - 1.0), 2.0 * frac):
        assert rec.lhs <= rec.rhs * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.05, 1.0), st.floats(0.0, 0.999), st.sampled_from([1.0, 2.0]))
def test_gradient_property(seed, delta, frac, sigma):
    f = random_field(GridSpec(64, L), seed, sigma=sigma)
    rec = check_gradient_estimate(f, GevreyParams(sigma, delta, 1.0), frac * delta)
    assert rec.passed


def test_gradient_requires_gap():
    f = random_field(GridSpec(32, L), 0)
    with pytest.raises(ValueError):
        check_gradient_estimate(f, GevreyParams(1.0, 0.3, 0.0), 0.3)


def test_algebra_ratio_bounded_on_corpus():
    g = GridSpec(64, L)
    rng = np.random.default_rng(0)
    ratios = [algebra_ratio(random_field(g, rng), random_field(g, rng), GevreyParams(1.0, 0.2, 1.0))
              for _ in range(20)]
    assert max(ratios) < 10.0
    assert algebra_ratio(SpectralField.zeros(g), random_field(g, 1), GevreyParams()) == 0.0


def test_radius_exact_exponential():
    g = GridSpec(256, 8 * math.pi)
    xi = np.abs(g.wavenumbers)
    fit = estimate_radius(field_with(g, np.exp(-0.7 * xi)), 1.0)
    assert fit.delta_hat == pytest.approx(0.7, abs=1e-6)
    assert fit.residual < 1e-8
    fit2 = estimate_radius(field_with(g, np.exp(-0.5 * np.sqrt(xi))), 2.0)
    assert fit2.delta_hat == pytest.approx(0.5, abs=1e-6)


def test_radius_of_gevrey_random_data():
    g = GridSpec(256, 4 * math.pi)
    fit = estimate_radius(gevrey_random(g, 0.5, 1.0, 0.1, seed=3), 1.0)
    assert fit.delta_hat == pytest.approx(0.5, abs=1e-9)


def test_radius_of_entire_function_grows_with_window():
    g = GridSpec(256, 8 * math.pi)
    xi = np.abs(g.wavenumbers)
    f = field_with(g, np.exp(-xi**2))
    fits = [estimate_radius(f, 1.0, w, noise_floor=1e-300) for w in ((1, 10), (10, 20), (20, 30))]
    rates = [fit.delta_hat for fit in fits]
    assert rates[0] < rates[1] < rates[2]


def test_radius_needs_modes():
    g = GridSpec(64, L)
    with pytest.raises(InsufficientSpectrumError):
        estimate_radius(SpectralField.zeros(g))
    with pytest.raises(InsufficientSpectrumError):
        estimate_radius(random_field(g, 0), 1.0, (10, 12))
