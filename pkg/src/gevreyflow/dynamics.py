"""Right-hand sides, time stepping and invariants of the two-component system.

The system evolved here is::

    m_t + u m_x + a m u_x = alpha u_x - kappa rho rho_x
    rho_t + u rho_x + (a - 1) u_x rho = 0,      m = (1 - d_xx)^s u

The momentum form (``rhs_mform``) is the ground truth.  ``rhs_kform`` uses the
nonlocal rewrite ``u_t + u u_x = K(u, u) + ...`` whose coefficients are
derived exactly by :func:`derive_k_decomposition`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .spectral import (
    GridSpec,
    SpectralField,
    _product_coeffs,
    apply_multiplier,
    bessel,
)

BLOWUP_SLOPE = 1e6


class DynamicsError(Exception):
    pass


class BlowUpError(DynamicsError):
    """Non-finite coefficients or ``max |u_x|`` above the blow-up threshold."""

    def __init__(self, t: float, trace: list, reason: str = ""):
        self.t = t
        self.trace = list(trace)
        super().__init__(f"suspected blow-up at t={t:.6g}: {reason}")


class StiffnessError(DynamicsError):
    def __init__(self, t: float, dt: float, error_norm: float):
        self.t, self.dt, self.error_norm = t, dt, error_norm
        super().__init__(
            f"adaptive step fell below dt_min at t={t:.6g} "
            f"(dt={dt:.3g}, scaled error {error_norm:.3g})"
        )


class DerivationInconsistentError(DynamicsError):
    pass


@dataclass(frozen=True)
class SystemParams:
    s: int = 2
    a: float = 2.0
    alpha: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 2:
            raise ValueError(f"inertia order must be an integer s >= 2, got {self.s}")
        if self.a == 1:
            raise ValueError("convection parameter a = 1 is excluded")
        object.__setattr__(self, "s", int(self.s))


@dataclass(frozen=True)
class TwoComponentState:
    t: float
    u: SpectralField
    rho: SpectralField

    def __post_init__(self):
        if self.u.grid != self.rho.grid:
            raise ValueError("u and rho must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    @classmethod
    def one_component(cls, u: SpectralField, t: float = 0.0) -> "TwoComponentState":
        return cls(t, u, SpectralField.zeros(u.grid))

    def dealiased(self) -> "TwoComponentState":
        return TwoComponentState(self.t, self.u.dealiased(), self.rho.dealiased())


def inertia(u: SpectralField, s: int) -> SpectralField:
    """``m = (1 - d_xx)^s u``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return apply_multiplier(u, bessel(2 * s))


def inverse_inertia(m: SpectralField, s: int) -> SpectralField:
    return apply_multiplier(m, bessel(-2 * s))


class _Kernel:
    """Symbols and dealiased products for one (grid, params) pair, on raw arrays."""

    def __init__(self, grid: GridSpec, p: SystemParams):
        self.grid = grid
        self.p = p
        xi = grid.wavenumbers
        self.d = 1j * xi
        self.d[grid.n // 2] = 0.0
        self.fwd = (1.0 + xi * xi) ** p.s
        self.inv = 1.0 / self.fwd

    def prod(self, a, b):
        return _product_coeffs(self.grid, a, b)

    def rhs(self, uc, rc):
        p, d = self.p, self.d
        m = self.fwd * uc
        ux = d * uc
        mt = -self.prod(uc, d * m) - p.a * self.prod(ux, m) + p.alpha * ux
        if p.kappa:
            mt = mt - p.kappa * self.prod(rc, d * rc)
        du = self.inv * mt
        dr = -self.prod(uc, d * rc) - (p.a - 1.0) * self.prod(ux, rc)
        return du, dr


_KERNELS: dict = {}


def _kernel(grid: GridSpec, p: SystemParams) -> _Kernel:
    key = (grid, p)
    k = _KERNELS.get(key)
    if k is None:
        if len(_KERNELS) > 64:
            _KERNELS.clear()
        k = _KERNELS[key] = _Kernel(grid, p)
    return k


def _max_slope(grid: GridSpec, uc: np.ndarray) -> float:
    d = 1j * grid.wavenumbers
    d[grid.n // 2] = 0.0
    h = grid.n // 2
    return float(np.max(np.abs(np.fft.irfft((d * uc)[: h + 1], grid.n) * grid.n)))


def _check_finite(t, *arrays, trace=()):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowUpError(t, trace, "non-finite coefficients")


def rhs_mform(state: TwoComponentState, p: SystemParams) -> tuple:
    """Exact right-hand side ``(du/dt, drho/dt)`` evaluated through the momentum."""
    k = _kernel(state.grid, p)
    du, dr = k.rhs(state.u.coeffs, state.rho.coeffs)
    _check_finite(state.t, du, dr)
    return SpectralField(state.grid, du), SpectralField(state.grid, dr)


# ---------------------------------------------------------------------------
# Nonlocal decomposition K(u, u)
# ---------------------------------------------------------------------------
# Bilinear symbols are polynomials in (eta1, eta2) kept as {(p, q): Fraction}.


def _padd(*polys):
    out: dict = {}
    for poly in polys:
        for key, c in poly.items():
            out[key] = out.get(key, 0) + c
    return {k: c for k, c in out.items() if c != 0}


def _pscale(poly, c):
    return {k: v * c for k, v in poly.items() if v * c != 0}


def _pmul(a, b):
    out: dict = {}
    for (p1, q1), c1 in a.items():
        for (p2, q2), c2 in b.items():
            key = (p1 + p2, q1 + q2)
            out[key] = out.get(key, 0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


def _ppow(a, n):
    out = {(0, 0): Fraction(1)}
    for _ in range(n):
        out = _pmul(out, a)
    return out


def _swap(poly):
    return {(q, p): c for (p, q), c in poly.items()}


def _nonlocal_symbol(s: int, a: Fraction) -> dict:
    """Symbol P with ``(1-d_xx)^s(u u_x) - u m_x - a u_x m = i P``, symmetrized."""
    one = {(0, 0): Fraction(1)}
    eta1 = {(1, 0): Fraction(1)}
    eta2 = {(0, 1): Fraction(1)}
    e1 = _padd(eta1, eta2)
    lap1 = _ppow(_padd(one, _pmul(eta1, eta1)), s)
    lap2 = _swap(lap1)
    lap12 = _ppow(_padd(one, _pmul(e1, e1)), s)
    half = Fraction(1, 2)
    term1 = _pscale(_pmul(e1, lap12), half)
    term2 = _pscale(_padd(_pmul(eta2, lap2), _pmul(eta1, lap1)), -half)
    term3 = _pscale(_padd(_pmul(eta1, lap2), _pmul(eta2, lap1)), -half * a)
    return _padd(term1, term2, term3)


def _elementary_expansion(poly: dict, degree: int) -> list:
    """Write a symmetric homogeneous polynomial as ``sum_j b_j e1^(degree-2j) e2^j``."""
    e1 = {(1, 0): Fraction(1), (0, 1): Fraction(1)}
    out = []
    rest = dict(poly)
    j = 0
    while rest:
        top = degree - 2 * j
        if top < 0:
            raise DerivationInconsistentError("symbol is not symmetric")
        b = rest.get((top, 0), Fraction(0))
        if b:
            out.append((j, b))
            rest = _padd(rest, _pscale(_ppow(e1, top), -b))
        divided = {}
        for (p, q), c in rest.items():
            if p < 1 or q < 1:
                raise DerivationInconsistentError("symbol is not symmetric")
            divided[(p - 1, q - 1)] = c
        rest = divided
        j += 1
    return out


@dataclass(frozen=True)
class KDecomposition:
    """``K(u,u) = sum c (1-d_xx)^-s d^outer[(d^inner u)^2]`` over ``terms``.

    Each term is ``(outer, inner, c)`` with ``outer = 2i - 1`` odd.
    """

    s: int
    a: Fraction
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for outer, inner, _ in self.terms:
            i = (outer + 1) // 2
            if outer % 2 != 1 or not 1 <= i <= self.s or not 0 <= inner <= self.s:
                raise DerivationInconsistentError(f"term ({outer}, {inner}) out of range")
            if outer + 2 * inner > 2 * self.s + 1:
                raise DerivationInconsistentError(f"term ({outer}, {inner}) exceeds order 2s+1")

    def matches(self, p: SystemParams) -> bool:
        return self.s == p.s and self.a == Fraction(p.a)

    def apply(self, u: SpectralField) -> SpectralField:
        grid = u.grid
        d = 1j * grid.wavenumbers
        d[grid.n // 2] = 0.0
        acc = np.zeros(grid.n, dtype=complex)
        cache = {}
        for outer, inner, c in self.terms:
            if inner not in cache:
                dj = d**inner * u.coeffs
                cache[inner] = _product_coeffs(grid, dj, dj)
            acc += float(c) * d**outer * cache[inner]
        xi = grid.wavenumbers
        return SpectralField._projected(grid, acc * (1.0 + xi * xi) ** (-self.s))


def _k_via_mform(u: SpectralField, s: int, a: float) -> SpectralField:
    grid = u.grid
    d = 1j * grid.wavenumbers
    d[grid.n // 2] = 0.0
    fwd = (1.0 + grid.wavenumbers**2) ** s
    uc = u.coeffs
    m = fwd * uc
    uux = _product_coeffs(grid, uc, d * uc)
    nonloc = _product_coeffs(grid, uc, d * m) + a * _product_coeffs(grid, d * uc, m)
    return SpectralField._projected(grid, uux - nonloc / fwd)


def derive_k_decomposition(s: int, a: float, verify: bool = True, seed: int = 7) -> KDecomposition:
    """Exact coefficients of the nonlocal term for inertia order ``s``.

    The bilinear symbol of ``(1-d_xx)^s(u u_x) - u m_x - a u_x m`` is expanded
    in ``e1 = eta1 + eta2`` and ``e2 = eta1 eta2``; the monomial
    ``e1^(2i-1) e2^j`` is the symbol of ``d^(2i-1)[(d^j u)^2]`` up to
    ``i^(2i-1+2j)``.  With ``verify`` the result is checked against the
    momentum form on 20 random band-limited fields.
    """
    if int(s) != s or s < 1:
        raise ValueError("s must be a positive integer")
    s = int(s)
    a_frac = Fraction(a)
    poly = _nonlocal_symbol(s, a_frac)
    by_degree: dict = {}
    for (p, q), c in poly.items():
        by_degree.setdefault(p + q, {})[(p, q)] = c
    terms = []
    for degree in sorted(by_degree):
        if degree % 2 == 0:
            raise DerivationInconsistentError(f"even-order component of degree {degree}")
        sign = -1 if ((degree - 1) // 2) % 2 else 1
        for j, b in _elementary_expansion(by_degree[degree], degree):
            terms.append((degree - 2 * j, j, sign * b))
    terms.sort(key=lambda t: (t[0] + 2 * t[1], t[1]))
    dec = KDecomposition(s, a_frac, tuple(terms))
    if verify:
        _verify_decomposition(dec, float(a), seed)
    return dec


def _verify_decomposition(dec: KDecomposition, a: float, seed: int, tol: float = 1e-10):
    from .initial import random_field

    grid = GridSpec(64, 2.0 * np.pi)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        u = random_field(grid, rng, decay=(0.8, 1.5), max_mode=6)
        lhs = dec.apply(u)
        rhs = _k_via_mform(u, dec.s, a)
        scale = max(rhs.norm_l2(), 1e-300)
        err = (lhs - rhs).norm_l2() / scale
        if err > tol:
            raise DerivationInconsistentError(
                f"decomposition for s={dec.s}, a={a} disagrees with momentum form "
                f"(relative error {err:.3g})"
            )


def rhs_kform(state: TwoComponentState, p: SystemParams, k: KDecomposition) -> tuple:
    """``(F1, F2)`` of the nonlocal form, built from ``k``.

    F1 = -1/2 d(u^2) + K(u,u) + (1-d_xx)^-s (alpha u_x - kappa/2 d(rho^2))
    F2 = -d(u rho) + (2 - a) u_x rho
    """
    if not k.matches(p):
        raise ValueError(f"decomposition is for (s={k.s}, a={k.a}), params are (s={p.s}, a={p.a})")
    grid = state.grid
    kern = _kernel(grid, p)
    d = kern.d
    uc, rc = state.u.coeffs, state.rho.coeffs
    f1 = -0.5 * d * kern.prod(uc, uc) + k.apply(state.u).coeffs
    f1 = f1 + kern.inv * (p.alpha * d * uc - 0.5 * p.kappa * d * kern.prod(rc, rc))
    f2 = -d * kern.prod(uc, rc) + (2.0 - p.a) * kern.prod(d * uc, rc)
    _check_finite(state.t, f1, f2)
    return SpectralField(grid, f1), SpectralField(grid, f2)


# ---------------------------------------------------------------------------
# Time integration
# ---------------------------------------------------------------------------

# Dormand-Prince 5(4)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


def _rk4(kern: _Kernel, uc, rc, dt):
    k1u, k1r = kern.rhs(uc, rc)
    k2u, k2r = kern.rhs(uc + 0.5 * dt * k1u, rc + 0.5 * dt * k1r)
    k3u, k3r = kern.rhs(uc + 0.5 * dt * k2u, rc + 0.5 * dt * k2r)
    k4u, k4r = kern.rhs(uc + dt * k3u, rc + dt * k3r)
    uc = uc + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
    rc = rc + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
    return uc, rc


def _dp_attempt(kern: _Kernel, y, dt):
    n = kern.grid.n
    ks = []
    for i in range(7):
        yi = y.copy()
        for aij, kj in zip(_DP_A[i], ks):
            if aij:
                yi += dt * aij * kj
        du, dr = kern.rhs(yi[:n], yi[n:])
        ks.append(np.concatenate([du, dr]))
    y5 = y + dt * sum(b * k for b, k in zip(_DP_B, ks) if b)
    err = dt * sum(e * k for e, k in zip(_DP_E, ks) if e)
    return y5, err


def _dp_interval(kern: _Kernel, uc, rc, t0, span, rtol, atol, dt_min, h0):
    n = kern.grid.n
    y = np.concatenate([uc, rc])
    t, end = t0, t0 + span
    h = min(h0, span)
    while t < end:
        h = min(h, end - t)
        if h < dt_min and end - t > dt_min:
            raise StiffnessError(t, h, float("nan"))
        y_new, err = _dp_attempt(kern, y, h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))
        if not np.isfinite(enorm):
            raise BlowUpError(t, [], "non-finite coefficients in adaptive step")
        if enorm <= 1.0:
            t = end if end - (t + h) < 1e-14 * max(1.0, abs(end)) else t + h
            y = y_new
            fac = 5.0 if enorm == 0 else min(5.0, 0.9 * enorm ** -0.2)
        else:
            fac = max(0.2, 0.9 * enorm ** -0.2)
            if h <= dt_min:
                raise StiffnessError(t, h, enorm)
        h = max(h * fac, dt_min)
    return y[:n], y[n:], h


def step(
    state: TwoComponentState,
    p: SystemParams,
    dt: float,
    scheme: str = "rk4",
    rtol: float = 1e-8,
    atol: float = 1e-12,
    dt_min: float = 1e-12,
) -> TwoComponentState:
    """Advance ``state`` by ``dt``.

    ``rk4`` takes one classical Runge-Kutta step; ``rk45`` covers ``dt`` with
    adaptive Dormand-Prince substeps.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    kern = _kernel(state.grid, p)
    uc, rc = state.u.coeffs, state.rho.coeffs
    if scheme == "rk4":
        uc, rc = _rk4(kern, uc, rc, dt)
    elif scheme in ("rk45", "rk45-adaptive"):
        uc, rc, _ = _dp_interval(kern, uc, rc, state.t, dt, rtol, atol, dt_min, dt)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    t = state.t + dt
    _check_finite(t, uc, rc)
    if _max_slope(state.grid, uc) > BLOWUP_SLOPE:
        raise BlowUpError(t, [], f"max |u_x| exceeds {BLOWUP_SLOPE:g}")
    return TwoComponentState(t, SpectralField(state.grid, uc), SpectralField(state.grid, rc))


def evolve(
    state: TwoComponentState,
    p: SystemParams,
    times,
    dt: float,
    scheme: str = "rk4",
    **opts,
):
    """Yield the solution at each of ``times`` (nondecreasing, >= state.t).

    Every interval between consecutive output times is split into equal RK4
    substeps no longer than ``dt`` so the outputs land exactly on ``times``.
    A running trace of ``(t, max|u|)`` is attached to blow-up errors.
    """
    kern = _kernel(state.grid, p)
    grid = state.grid
    uc, rc = state.u.coeffs, state.rho.coeffs
    t = state.t
    trace = []
    h_adapt = dt
    for target in times:
        target = float(target)
        if target < t - 1e-14 * max(1.0, abs(t)):
            raise ValueError("output times must be nondecreasing and start at state.t")
        span = target - t
        if span > 0:
            if scheme == "rk4":
                nsub = max(1, math.ceil(span / dt - 1e-9))
                h = span / nsub
                for _ in range(nsub):
                    uc, rc = _rk4(kern, uc, rc, h)
            elif scheme in ("rk45", "rk45-adaptive"):
                uc, rc, h_adapt = _dp_interval(
                    kern, uc, rc, t, span, opts.get("rtol", 1e-8), opts.get("atol", 1e-12),
                    opts.get("dt_min", 1e-12), h_adapt,
                )
            else:
                raise ValueError(f"unknown scheme {scheme!r}")
        t = target
        u = SpectralField(grid, uc)
        trace.append((t, float(np.max(np.abs(u.samples()))) if np.all(np.isfinite(uc)) else math.inf))
        _check_finite(t, uc, rc, trace=trace)
        if _max_slope(grid, uc) > BLOWUP_SLOPE:
            raise BlowUpError(t, trace, f"max |u_x| exceeds {BLOWUP_SLOPE:g}")
        yield TwoComponentState(t, u, SpectralField(grid, rc))


def cfl_dt(state: TwoComponentState, courant: float = 0.5) -> float:
    """``courant / (max|u| xi_max)`` with ``xi_max`` the largest retained wavenumber."""
    umax = float(np.max(np.abs(state.u.samples())))
    xi_max = state.grid.band * state.grid.dxi
    if umax == 0.0:
        return math.inf
    return courant / (umax * xi_max)


def conserved_quantities(state: TwoComponentState, p: SystemParams) -> dict:
    """``H = ||u||_{H^s}^2 + kappa ||rho||_{L^2}^2`` and ``Mrho = int rho dx``.

    Both are invariants of the exact flow when ``a = 2``.  Multiplying the
    momentum equation by ``u`` and integrating, ``int u (u m_x + 2 u_x m) = 0``
    and ``int u u_x = 0``; the leftover ``-2 kappa int u rho rho_x`` cancels
    against ``d/dt kappa int rho^2 = 2 kappa int u rho rho_x``.  The density
    equation is in conservation form ``rho_t = -(u rho)_x`` at ``a = 2``.
    """
    from .norms import sobolev_norm

    H = sobolev_norm(state.u, p.s) ** 2 + p.kappa * state.rho.norm_l2() ** 2
    mrho = state.grid.period * float(state.rho.coeffs[0].real)
    return {"H": H, "Mrho": mrho}
