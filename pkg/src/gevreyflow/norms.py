"""Sobolev and Sobolev-Gevrey norms, radius fits and the norm inequalities.

All norms use the quadrature described in :mod:`gevreyflow.spectral`::

    ||f||_{H^q}^2 = L * sum_k (1 + xi_k^2)^q |c_k|^2

and the Gevrey norms are Sobolev norms of ``exp(delta A^(1/sigma)) f``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .spectral import (
    DEFAULT_LOG_CAP,
    SpectralField,
    apply_multiplier,
    bar_gevrey,
    derivative,
    gevrey,
    pointwise_product,
)


class InsufficientSpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class GevreyParams:
    sigma: float = 1.0
    delta: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 1.0:
            raise ValueError(f"Gevrey index must satisfy sigma >= 1, got {self.sigma}")
        if not self.delta >= 0.0:
            raise ValueError(f"radius must satisfy delta >= 0, got {self.delta}")

    def replace(self, **kw) -> "GevreyParams":
        return GevreyParams(**{**asdict(self), **kw})


@dataclass(frozen=True)
class RadiusFit:
    delta_hat: float
    residual: float
    k_range: tuple
    intercept: float = 0.0
    n_modes: int = 0


def sobolev_norm(f: SpectralField, q: float) -> float:
    xi = f.grid.wavenumbers
    w = (1.0 + xi * xi) ** q
    return float(np.sqrt(f.grid.period * np.sum(w * np.abs(f.coeffs) ** 2)))


def gevrey_norm(f: SpectralField, p: GevreyParams, cap: float = DEFAULT_LOG_CAP) -> float:
    """``||f||_{G^delta_{sigma,q}}`` with multiplier ``exp(delta (1+xi^2)^(1/(2 sigma)))``."""
    if p.delta == 0.0:
        return sobolev_norm(f, p.q)
    return sobolev_norm(apply_multiplier(f, gevrey(p.delta, p.sigma), cap=cap), p.q)


def bar_gevrey_norm(f: SpectralField, p: GevreyParams, cap: float = DEFAULT_LOG_CAP) -> float:
    """Norm with the homogeneous multiplier ``exp(delta |xi|^(1/sigma))``."""
    if p.delta == 0.0:
        return sobolev_norm(f, p.q)
    return sobolev_norm(apply_multiplier(f, bar_gevrey(p.delta, p.sigma), cap=cap), p.q)


def default_window(n: int) -> tuple:
    return (int(math.ceil(n / 6)), (n - 1) // 3)


def estimate_radius(
    f: SpectralField,
    sigma: float = 1.0,
    k_window: tuple | None = None,
    noise_floor: float = 1e-14,
    min_modes: int = 8,
) -> RadiusFit:
    """Fit ``log|c_k| ~ c - delta * |xi_k|^(1/sigma)`` over a window of modes.

    ``k_window`` is an inclusive range of positive mode numbers and defaults
    to the top octave of the dealiased band.  Modes whose magnitude is below
    ``noise_floor`` times the largest coefficient are dropped.
    """
    grid = f.grid
    lo, hi = k_window if k_window is not None else default_window(grid.n)
    lo, hi = max(int(lo), 1), min(int(hi), grid.n // 2)
    if hi < lo:
        raise InsufficientSpectrumError(f"empty mode window [{lo}, {hi}]")
    ks = np.arange(lo, hi + 1)
    amp = np.abs(f.coeffs[ks])
    peak = float(np.max(np.abs(f.coeffs)))
    keep = amp > noise_floor * peak if peak > 0 else np.zeros_like(amp, dtype=bool)
    if int(np.count_nonzero(keep)) < min_modes:
        raise InsufficientSpectrumError(
            f"only {int(np.count_nonzero(keep))} modes above the noise floor in "
            f"[{lo}, {hi}], need {min_modes}"
        )
    x = np.abs(grid.wavenumbers[ks][keep]) ** (1.0 / sigma)
    y = np.log(amp[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RadiusFit(
        delta_hat=max(0.0, float(-slope)),
        residual=float(np.sqrt(np.mean(resid**2))),
        k_range=(lo, hi),
        intercept=float(intercept),
        n_modes=int(np.count_nonzero(keep)),
    )


@dataclass
class InequalityRecord:
    inequality_id: str
    n: int
    sigma: float
    delta: float
    delta_prime: float
    q: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    def row(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "n": self.n,
            "sigma": self.sigma,
            "delta": self.delta,
            "delta_prime": self.delta_prime,
            "q": self.q,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "pass": self.passed,
        }


def check_sandwich(f: SpectralField, p: GevreyParams) -> tuple:
    """Both halves of ``||f||_bar <= ||f||_G <= e^delta ||f||_bar``."""
    g = gevrey_norm(f, p)
    b = bar_gevrey_norm(f, p)
    n = f.grid.n
    return (
        InequalityRecord("sandwich_lower", n, p.sigma, p.delta, np.nan, p.q, b, g),
        InequalityRecord("sandwich_upper", n, p.sigma, p.delta, np.nan, p.q, g, math.exp(p.delta) * b),
    )


def check_embeddings(f: SpectralField, p: GevreyParams, delta_prime: float,
                     sigma_prime: float, q_prime: float) -> tuple:
    """The three unit-constant embeddings, for ``delta' < delta``, ``sigma' < sigma``, ``q' < q``."""
    n = f.grid.n
    base = gevrey_norm(f, p)
    return (
        InequalityRecord("embed_delta", n, p.sigma, p.delta, delta_prime, p.q,
                         gevrey_norm(f, p.replace(delta=delta_prime)), base),
        InequalityRecord("embed_sigma", n, p.sigma, p.delta, np.nan, p.q,
                         base, gevrey_norm(f, p.replace(sigma=sigma_prime))),
        InequalityRecord("embed_q", n, p.sigma, p.delta, np.nan, q_prime,
                         gevrey_norm(f, p.replace(q=q_prime)), base),
    )


def gradient_constant(sigma: float, gap: float) -> float:
    """``e^-sigma sigma^sigma / gap^sigma``, the loss incurred by one derivative."""
    return math.exp(-sigma) * sigma**sigma / gap**sigma


def check_gradient_estimate(f: SpectralField, p: GevreyParams, delta_prime: float) -> InequalityRecord:
    if not 0.0 <= delta_prime < p.delta:
        raise ValueError("need 0 <= delta' < delta")
    df = apply_multiplier(f, derivative(1))
    lhs = gevrey_norm(df, p.replace(delta=delta_prime))
    rhs = gradient_constant(p.sigma, p.delta - delta_prime) * gevrey_norm(f, p)
    return InequalityRecord("gradient", f.grid.n, p.sigma, p.delta, delta_prime, p.q, lhs, rhs)


def algebra_ratio(f: SpectralField, g: SpectralField, p: GevreyParams) -> float:
    """``||f g|| / (||f|| ||g||)`` in ``G^delta_{sigma,q}``."""
    denom = gevrey_norm(f, p) * gevrey_norm(g, p)
    if denom == 0.0:
        return 0.0
    return gevrey_norm(pointwise_product(f, g), p) / denom
