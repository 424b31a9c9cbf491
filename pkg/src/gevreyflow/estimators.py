"""scikit-learn style wrappers over sampled periodic fields.

Rows of ``X`` are grid samples of one field (``n`` columns) or of a pair
``(u, rho)`` concatenated (``2 n`` columns).  None of the wrappers learns
anything from data; ``fit`` validates and records the grid.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dynamics import SystemParams, TwoComponentState, evolve
from .norms import GevreyParams, estimate_radius, gevrey_norm
from .spectral import GridSpec, SpectralField, collocate, synthesize


def _check_rows(X, n_features=None):
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} columns, got {X.shape[1]}")
    return X


class _GridMixin:
    def _fit_grid(self, X, allow_pair=False):
        X = _check_rows(X)
        width = X.shape[1]
        pair = allow_pair and self.pair
        if pair and width % 2:
            raise ValueError(f"pair rows need an even number of columns, got {width}")
        n = width // 2 if pair else width
        self.grid_ = GridSpec(n, float(self.period))
        self.n_features_in_ = width
        return X


class SolutionMapTransformer(_GridMixin, TransformerMixin, BaseEstimator):
    """Data-to-solution map at time ``T``: initial samples in, solution samples out.

    With ``pair=True`` each row holds ``u0`` then ``rho0``; otherwise rows are
    ``u0`` and ``rho0 = 0``.  Output rows have the same layout as the input.
    """

    def __init__(self, s=2, a=2.0, alpha=0.0, kappa=0.0, T=0.1, dt=1e-3, period=2 * math.pi,
                 scheme="rk4", pair=False):
        self.s = s
        self.a = a
        self.alpha = alpha
        self.kappa = kappa
        self.T = T
        self.dt = dt
        self.period = period
        self.scheme = scheme
        self.pair = pair

    def fit(self, X, y=None):
        self._fit_grid(X, allow_pair=True)
        self.params_ = SystemParams(int(self.s), float(self.a), float(self.alpha), float(self.kappa))
        return self

    def _evolve_row(self, row):
        g = self.grid_
        u = synthesize(g, row[: g.n])
        rho = synthesize(g, row[g.n:]) if self.pair else SpectralField.zeros(g)
        state = TwoComponentState(0.0, u, rho)
        if self.T > 0:
            *_, state = evolve(state, self.params_, [float(self.T)], float(self.dt), self.scheme)
        out = collocate(state.u)
        return np.concatenate([out, collocate(state.rho)]) if self.pair else out

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = _check_rows(X, self.n_features_in_)
        return np.vstack([self._evolve_row(row) for row in X])


class GevreyNormTransformer(_GridMixin, TransformerMixin, BaseEstimator):
    """One column: the ``G^delta_{sigma,q}`` norm of each sampled field."""

    def __init__(self, sigma=1.0, delta=0.0, q=0.0, period=2 * math.pi):
        self.sigma = sigma
        self.delta = delta
        self.q = q
        self.period = period

    def fit(self, X, y=None):
        self._fit_grid(X)
        self.params_ = GevreyParams(float(self.sigma), float(self.delta), float(self.q))
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = _check_rows(X, self.n_features_in_)
        return np.array([[gevrey_norm(synthesize(self.grid_, row), self.params_)] for row in X])


class GevreyRadiusEstimator(_GridMixin, TransformerMixin, BaseEstimator):
    """Two columns per field: fitted radius and the RMS residual of the fit."""

    def __init__(self, sigma=1.0, k_window=None, noise_floor=1e-14, period=2 * math.pi):
        self.sigma = sigma
        self.k_window = k_window
        self.noise_floor = noise_floor
        self.period = period

    def fit(self, X, y=None):
        self._fit_grid(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X = _check_rows(X, self.n_features_in_)
        rows = []
        for row in X:
            fit = estimate_radius(synthesize(self.grid_, row), float(self.sigma), self.k_window,
                                  float(self.noise_floor))
            rows.append([fit.delta_hat, fit.residual])
        return np.array(rows)
