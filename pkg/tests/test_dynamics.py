import math
from fractions import Fraction

import numpy as np
import pytest

from gevreyflow.dynamics import (
    BlowUpError,
    DerivationInconsistentError,
    KDecomposition,
    StiffnessError,
    SystemParams,
    TwoComponentState,
    conserved_quantities,
    derive_k_decomposition,
    evolve,
    inertia,
    inverse_inertia,
    rhs_kform,
    rhs_mform,
    step,
)
from gevreyflow.initial import from_modes, random_field
from gevreyflow.spectral import GridSpec, SpectralField, apply_multiplier, collocate, derivative, pointwise_product

L = 2 * math.pi


def state(u, rho=None):
    return TwoComponentState(0.0, u, rho if rho is not None else SpectralField.zeros(u.grid))


def test_params_validation():
    for bad in (dict(s=1), dict(s=2.5), dict(a=1.0)):
        with pytest.raises(ValueError):
            SystemParams(**bad)


def test_inertia_examples():
    g = GridSpec(32, L)
    c = from_modes(g, [(0, 3.0, 0.0)])
    assert np.allclose(inertia(c, 2).coeffs, c.coeffs)
    u = from_modes(g, [(1, 1.0, 0.0)])
    assert np.allclose(collocate(inertia(u, 2)), 4.0 * np.cos(g.points), atol=1e-14)
    f = random_field(g, 0)
    assert np.max(np.abs(inverse_inertia(inertia(f, 3), 3).coeffs - f.coeffs)) < 1e-12


def test_rhs_trivial_states():
    g = GridSpec(32, L)
    p = SystemParams(2, 2.0, 0.0, 0.0)
    du, dr = rhs_mform(state(SpectralField.zeros(g)), p)
    assert np.all(du.coeffs == 0) and np.all(dr.coeffs == 0)
    du, _ = rhs_mform(state(from_modes(g, [(0, 2.0, 0.0)])), p)
    assert np.max(np.abs(du.coeffs)) == 0.0


def _fd_matrices(N, h):
    # sixth-order periodic central differences
    c1 = {1: 3 / 4, 2: -3 / 20, 3: 1 / 60}
    c2 = {0: -49 / 18, 1: 3 / 2, 2: -3 / 20, 3: 1 / 90}
    D1 = np.zeros((N, N))
    D2 = np.zeros((N, N))
    for i in range(N):
        D2[i, i] = c2[0] / h**2
        for k in (1, 2, 3):
            D1[i, (i + k) % N] += c1[k] / h
            D1[i, (i - k) % N] -= c1[k] / h
            D2[i, (i + k) % N] += c2[k] / h**2
            D2[i, (i - k) % N] += c2[k] / h**2
    return D1, D2


def test_rhs_matches_finite_difference_oracle():
    g = GridSpec(64, L)
    amp = 0.7
    u = from_modes(g, [(1, amp, 0.0)])
    du, _ = rhs_mform(state(u), SystemParams(2, 2.0, 0.0, 0.0))

    N = 256
    x = np.arange(N) * L / N
    D1, D2 = _fd_matrices(N, L / N)
    I = np.eye(N)
    A = I - D2
    uu = amp * np.cos(x)
    m = A @ (A @ uu)
    mt = -uu * (D1 @ m) - 2.0 * (D1 @ uu) * m
    v = np.linalg.solve(A @ A, mt)
    assert np.max(np.abs(v[:: N // g.n] - collocate(du))) < 1e-6


def test_classical_decomposition_s1():
    k = derive_k_decomposition(1, 2.0)
    coeffs = {(o, j): c for o, j, c in k.terms}
    assert coeffs == {(1, 0): Fraction(-1), (1, 1): Fraction(-1, 2)}


@pytest.mark.parametrize("s,a", [(2, 2.0), (3, 2.0), (2, 2.5), (2, 3.0)])
def test_decomposition_term_constraint(s, a):
    k = derive_k_decomposition(s, a)
    for outer, inner, _ in k.terms:
        i = (outer + 1) // 2
        assert 1 <= i <= s and 0 <= inner <= s and outer + 2 * inner <= 2 * s + 1


def test_decomposition_s2_coefficients():
    k = derive_k_decomposition(2, 2.0)
    assert {(o, j): c for o, j, c in k.terms} == {
        (1, 0): Fraction(-1), (1, 1): Fraction(-1), (3, 1): Fraction(3, 2), (1, 2): Fraction(1, 2)}


def test_decomposition_kills_constants():
    g = GridSpec(32, L)
    for s in (1, 2, 3):
        k = derive_k_decomposition(s, 2.0)
        assert np.max(np.abs(k.apply(from_modes(g, [(0, 1.7, 0.0)])).coeffs)) == 0.0


def test_decomposition_rejects_bad_terms():
    with pytest.raises(DerivationInconsistentError):
        KDecomposition(2, Fraction(2), ((2, 0, Fraction(1)),))
    with pytest.raises(DerivationInconsistentError):
        KDecomposition(2, Fraction(2), ((3, 2, Fraction(1)),))


@pytest.mark.parametrize("s,a", [(2, 2.0), (3, 2.0), (2, 2.5)])
def test_kform_equals_mform(s, a):
    g = GridSpec(64, L)
    k = derive_k_decomposition(s, a)
    rng = np.random.default_rng(s)
    for _ in range(10):
        p = SystemParams(s, a, rng.uniform(-1, 1), rng.uniform(0, 1))
        z = state(random_field(g, rng, max_mode=10), random_field(g, rng, max_mode=10))
        um, rm = rhs_mform(z, p)
        uk, rk = rhs_kform(z, p, k)
        scale = np.max(np.abs(um.coeffs))
        assert np.max(np.abs(um.coeffs - uk.coeffs)) < 1e-10 * scale
        assert np.max(np.abs(rm.coeffs - rk.coeffs)) < 1e-10 * np.max(np.abs(rm.coeffs))


def test_kform_reduces_to_one_component():
    g = GridSpec(64, L)
    u = random_field(g, 3, max_mode=10)
    k = derive_k_decomposition(2, 2.0)
    uk, _ = rhs_kform(state(u), SystemParams(2, 2.0), k)
    ux = apply_multiplier(u, derivative(1))
    expected = k.apply(u) - pointwise_product(u, ux)
    assert np.max(np.abs(uk.coeffs - expected.coeffs)) < 1e-13


def test_density_transport_identity():
    # -(u rho)_x + (2 - a) u_x rho == -u rho_x - (a - 1) u_x rho
    g = GridSpec(64, L)
    rng = np.random.default_rng(5)
    u, rho = random_field(g, rng, max_mode=10), random_field(g, rng, max_mode=10)
    d = lambda f: apply_multiplier(f, derivative(1))
    for a in (1.5, 2.0, 3.0):
        lhs = -d(pointwise_product(u, rho)) + pointwise_product(d(u), rho) * (2 - a)
        rhs = -pointwise_product(u, d(rho)) - pointwise_product(d(u), rho) * (a - 1)
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-13


def test_kform_param_mismatch():
    g = GridSpec(32, L)
    with pytest.raises(ValueError):
        rhs_kform(state(SpectralField.zeros(g)), SystemParams(3, 2.0), derive_k_decomposition(2, 2.0))


def test_zero_state_is_fixed():
    g = GridSpec(32, L)
    out = step(state(SpectralField.zeros(g)), SystemParams(), 0.01)
    assert np.all(out.u.coeffs == 0) and out.t == pytest.approx(0.01)


def _final(z, p, T, dt, scheme="rk4"):
    *_, last = evolve(z, p, [T], dt, scheme)
    return last


def test_rk4_fourth_order():
    g = GridSpec(64, L)
    z = state(random_field(g, 1, decay=(0.6, 0.6), max_mode=10))
    p = SystemParams(2, 2.0)
    sols = [_final(z, p, 0.4, dt).u.coeffs for dt in (0.02, 0.01, 0.005)]
    ratio = np.linalg.norm(sols[0] - sols[1]) / np.linalg.norm(sols[1] - sols[2])
    assert 3.7 <= math.log2(ratio) <= 4.3


def test_rk45_matches_rk4():
    g = GridSpec(64, L)
    z = state(random_field(g, 2, max_mode=10))
    p = SystemParams(2, 2.0, 0.3, 0.5)
    a = _final(z, p, 0.5, 1e-3).u.coeffs
    b = _final(z, p, 0.5, 0.1, "rk45").u.coeffs
    assert np.max(np.abs(a - b)) < 1e-7


def test_rk45_stiffness_error():
    g = GridSpec(64, L)
    z = state(random_field(g, 2) * 50.0)
    with pytest.raises(StiffnessError):
        step(z, SystemParams(2, 2.0), 0.5, "rk45", rtol=1e-14, atol=1e-16, dt_min=1e-3)


def test_resolution_independence():
    z64 = state(random_field(GridSpec(64, L), 4, max_mode=8))
    c = np.zeros(128, complex)
    c[:32] = z64.u.coeffs[:32]
    c[-31:] = z64.u.coeffs[-31:]
    z128 = state(SpectralField(GridSpec(128, L), c))
    p = SystemParams(2, 2.0)
    a = _final(z64, p, 0.5, 0.01).u
    b = _final(z128, p, 0.5, 0.01).u
    low = np.r_[0:10, -9:0]
    assert np.max(np.abs(a.coeffs[low] - b.coeffs[low])) < 1e-6


def test_blowup_reports_trace():
    g = GridSpec(32, L)
    c = np.zeros(32, complex)
    c[1] = c[-1] = np.nan
    with pytest.raises(BlowUpError) as exc:
        list(evolve(state(SpectralField(g, c)), SystemParams(), [0.01], 0.01))
    assert exc.value.t == pytest.approx(0.01)


def test_conserved_quantities_examples():
    g = GridSpec(64, L)
    p = SystemParams(2, 2.0)
    inv = conserved_quantities(state(SpectralField.zeros(g)), p)
    assert inv == {"H": 0.0, "Mrho": 0.0}
    u = from_modes(g, [(1, 1.0, 0.0)])
    # (1 + xi_1^2)^2 ||cos||^2, with ||cos||^2 = L/2
    assert conserved_quantities(state(u), p)["H"] == pytest.approx(4.0 * L / 2, rel=1e-14)


def test_single_mode_energy_drift():
    g = GridSpec(128, L)
    z = state(from_modes(g, [(1, 0.5, 0.0)]))
    p = SystemParams(2, 2.0)
    h0 = conserved_quantities(z, p)["H"]
    h1 = conserved_quantities(_final(z, p, 1.0, 1e-3), p)["H"]
    assert abs(h1 - h0) / h0 < 1e-8
