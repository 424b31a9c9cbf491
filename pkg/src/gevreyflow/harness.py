"""Numerical checks of the auxiliary estimates behind the local and global results.

Every check returns :class:`CheckRecord` rows (``lhs``, ``rhs``, ``ratio``,
``pass``) which :mod:`gevreyflow.io` writes as CSV plus a JSON summary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .dynamics import (
    BlowUpError,
    SystemParams,
    TwoComponentState,
    evolve,
)
from .norms import GevreyParams, gevrey_norm, sobolev_norm
from .spectral import (
    DEFAULT_LOG_CAP,
    RadiusTooLargeError,
    SpectralField,
    apply_multiplier,
    bessel,
    derivative,
    gevrey,
    inner_product,
    pointwise_product,
)


class ConfigError(ValueError):
    pass


class NumericError(RuntimeError):
    pass


class GridRangeError(OverflowError):
    pass


class ExperimentInvalidatedError(RuntimeError):
    pass


@dataclass
class CheckRecord:
    check_id: str
    params: dict
    lhs: float
    rhs: float
    tol: float = 0.0

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs + self.tol)

    def row(self) -> dict:
        return {"check_id": self.check_id, **self.params, "lhs": self.lhs,
                "rhs": self.rhs, "ratio": self.ratio, "pass": self.passed}


def summarize(records, ratio_key=None) -> dict:
    """``{check_id, total, passed, max_ratio, argmax_params}`` for one check."""
    records = list(records)
    if not records:
        return {"check_id": None, "total": 0, "passed": 0, "max_ratio": None, "argmax_params": None}
    key = ratio_key or (lambda r: r.ratio)
    worst = max(records, key=key)
    return {
        "check_id": records[0].check_id,
        "total": len(records),
        "passed": sum(r.passed for r in records),
        "max_ratio": float(key(worst)),
        "argmax_params": dict(worst.params),
    }


# ---------------------------------------------------------------------------
# Weighted sup norm over the scale
# ---------------------------------------------------------------------------


def gevrey_norms_many(f: SpectralField, sigma: float, deltas, q: float) -> np.ndarray:
    """``||f||_{G^delta_{sigma,q}}`` for a vector of radii at once."""
    deltas = np.asarray(deltas, dtype=float)
    xi = f.grid.wavenumbers
    w = 1.0 + xi * xi
    expo = np.outer(deltas, w ** (0.5 / sigma))
    if expo.size and expo.max() > DEFAULT_LOG_CAP:
        i = np.unravel_index(np.argmax(expo), expo.shape)
        raise RadiusTooLargeError(float(xi[i[1]]), float(expo[i]), DEFAULT_LOG_CAP)
    weights = w**q * np.exp(2.0 * expo)
    return np.sqrt(f.grid.period * weights @ (np.abs(f.coeffs) ** 2))


@dataclass(frozen=True)
class ETNormParams:
    """Finite ``(delta, t)`` grid for the weighted sup norm with horizon ``T``."""

    T: float
    sigma: float
    q: float
    delta_grid: tuple
    t_grid: tuple

    def __post_init__(self):
        if len(self.delta_grid) != len(self.t_grid):
            raise ConfigError("need one t-grid per delta")
        for d, ts in zip(self.delta_grid, self.t_grid):
            if not 0.0 < d < 1.0:
                raise ConfigError(f"delta={d} outside (0, 1)")
            tmax = self.horizon(d)
            for t in ts:
                if not 0.0 <= t < tmax:
                    raise ConfigError(
                        f"(delta={d}, t={t}) inadmissible: need t < T(1-delta)^sigma/(2^sigma-1) = {tmax}"
                    )

    def horizon(self, delta: float) -> float:
        return self.T * (1.0 - delta) ** self.sigma / (2.0**self.sigma - 1.0)

    @classmethod
    def default(cls, T, sigma=1.0, q=0.0, n_delta=16, n_t=64, delta_range=(0.02, 0.98)):
        deltas = np.geomspace(delta_range[0], delta_range[1], n_delta)
        horizon = lambda d: T * (1.0 - d) ** sigma / (2.0**sigma - 1.0)
        t_grid = tuple(tuple(np.linspace(0.0, horizon(d), n_t, endpoint=False)) for d in deltas)
        return cls(float(T), float(sigma), float(q), tuple(float(d) for d in deltas), t_grid)

    def refined(self) -> "ETNormParams":
        """Nested refinement: every old (delta, t) pair is kept."""
        lo, hi = self.delta_grid[0], self.delta_grid[-1]
        n_delta = 2 * len(self.delta_grid) - 1
        n_t = 2 * len(self.t_grid[0])
        deltas = list(np.geomspace(lo, hi, n_delta))
        # pin shared nodes to the old values so the refinement is exactly nested
        deltas[::2] = self.delta_grid
        t_grid = []
        for k, d in enumerate(deltas):
            ts = list(np.linspace(0.0, self.horizon(d), n_t, endpoint=False))
            if k % 2 == 0:
                ts[::2] = self.t_grid[k // 2]
            t_grid.append(tuple(float(t) for t in ts))
        return ETNormParams(self.T, self.sigma, self.q, tuple(float(d) for d in deltas), tuple(t_grid))

    def times(self) -> np.ndarray:
        return np.unique(np.concatenate([np.asarray(ts) for ts in self.t_grid]))

    def weight(self, delta: float, t) -> np.ndarray:
        scale = self.T * (1.0 - delta) ** self.sigma
        return (1.0 - delta) ** self.sigma * np.sqrt(1.0 - np.asarray(t) / scale)


def et_norm(trajectory, p: ETNormParams, return_argmax: bool = False):
    """Max over the grid of ``||f(t)||_{G^delta} (1-delta)^sigma sqrt(1 - t/(T(1-delta)^sigma))``.

    ``trajectory`` maps a time to a :class:`SpectralField`.  The grid maximum
    is a lower bound of the true supremum.
    """
    best, where = 0.0, None
    cache = {}
    deltas = np.asarray(p.delta_grid)
    for t in p.times():
        f = cache.get(t)
        if f is None:
            f = cache[t] = trajectory(float(t))
        norms = gevrey_norms_many(f, p.sigma, deltas, p.q)
        for i, (d, ts) in enumerate(zip(p.delta_grid, p.t_grid)):
            if t in ts:
                val = float(norms[i] * p.weight(d, t))
                if val > best:
                    best, where = val, (d, float(t))
    return (best, where) if return_argmax else best


# ---------------------------------------------------------------------------
# Auxiliary function of the generalized Ovsyannikov argument
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OvsyannikovDelta:
    delta: float
    sigma: float
    T: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0 or self.sigma < 1.0 or self.T <= 0:
            raise ValueError("need 0 < delta < 1, sigma >= 1, T > 0")

    @property
    def t_max(self) -> float:
        return self.T * (1.0 - self.delta) ** self.sigma / (2.0**self.sigma - 1.0)


def ovs_delta_of_t(d: OvsyannikovDelta, t):
    """Intermediate radius ``delta(t)`` used to absorb one derivative loss.

    ``delta(t) = (1+delta)/2 + (1/2)^(2+1/delta) {[(1-delta)^sigma - t/a]^(1/sigma)
    - [(1-delta)^sigma + (2^(sigma+1)-1) t/a]^(1/sigma)}``; the prefactor's
    exponent depends on ``delta`` and is implemented as written.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr >= d.t_max):
        raise ValueError(f"t outside [0, {d.t_max})")
    base = (1.0 - d.delta) ** d.sigma
    s = t_arr / d.T
    bracket = (base - s) ** (1.0 / d.sigma) - (base + (2.0 ** (d.sigma + 1) - 1.0) * s) ** (1.0 / d.sigma)
    out = 0.5 * (1.0 + d.delta) + 0.5 ** (2.0 + 1.0 / d.delta) * bracket
    return float(out) if np.ndim(out) == 0 else out


def check_luo_integral(trajectory, a: float, sigma: float, delta: float, t: float, q: float = 0.0,
                       e_norm: float | None = None, et_params: ETNormParams | None = None) -> CheckRecord:
    """``int_0^t ||u||_{delta(tau)} / (delta(tau)-delta)^sigma`` against its bound.

    The bound uses ``||u||_{E_a}``; when it is not supplied it is evaluated on
    the default grid, which underestimates the supremum and so makes the
    check stricter.
    """
    d = OvsyannikovDelta(delta, sigma, a)
    if not 0.0 <= t < d.t_max:
        raise ValueError(f"t={t} outside [0, {d.t_max})")

    def integrand(tau):
        r = ovs_delta_of_t(d, tau)
        return gevrey_norm(trajectory(tau), GevreyParams(sigma, r, q)) / (r - delta) ** sigma

    if t == 0.0:
        lhs = 0.0
    else:
        lhs, err, info = integrate.quad(integrand, 0.0, t, full_output=1, limit=200)[:3]
        if not np.isfinite(lhs) or err > 1e-6 * max(abs(lhs), 1e-300) + 1e-14:
            raise NumericError(f"quadrature did not converge (estimate {lhs}, error {err})")
    if e_norm is None:
        e_norm = et_norm(trajectory, et_params or ETNormParams.default(a, sigma, q))
    scale = a * (1.0 - delta) ** sigma
    rhs = a * 2.0 ** (2 * sigma + 3) * e_norm / (1.0 - delta) ** sigma * math.sqrt(scale / (scale - t))
    return CheckRecord("luo_integral", {"a": a, "sigma": sigma, "delta": delta, "t": t, "q": q}, lhs, rhs)


# ---------------------------------------------------------------------------
# Continuity of the data-to-solution map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityConfig:
    sigma: float = 1.0
    q: float = 3.0
    q1: float = 2.0
    C: float = 1.0
    dt: float = 1e-3
    tol: float = 0.1
    n_delta: int = 16
    n_t: int = 64


@dataclass
class ContinuityLeg:
    data_diff: float
    et_diff: float
    argmax: tuple | None
    data_norm: float

    @property
    def ratio(self) -> float:
        return 0.0 if self.data_diff == 0.0 else self.et_diff / self.data_diff


@dataclass
class ContinuityReport:
    T: float
    reference_norm: float
    legs: list = field(default_factory=list)
    bound: float = 2.2
    slope: float = math.nan

    @property
    def max_ratio(self) -> float:
        return max((leg.ratio for leg in self.legs), default=0.0)

    @property
    def passed(self) -> bool:
        return all(leg.ratio <= self.bound for leg in self.legs)

    def records(self) -> list:
        return [
            CheckRecord("continuity", {"T": self.T, "data_diff": leg.data_diff},
                        leg.et_diff, self.bound * leg.data_diff)
            for leg in self.legs
        ]


def data_norm(state: TwoComponentState, sigma: float, q: float, q1: float, delta: float = 1.0) -> float:
    """``||u||_{G^delta_{sigma,q}} + ||rho||_{G^delta_{sigma,q1}}``."""
    return gevrey_norm(state.u, GevreyParams(sigma, delta, q)) + gevrey_norm(
        state.rho, GevreyParams(sigma, delta, q1)
    )


def common_horizon(reference_norm: float, sigma: float, C: float) -> float:
    """``1 / (2^(2 sigma+5) C (e^-sigma sigma^sigma + 2) (||z0||_1 + 2))``.

    Shorter than both lifespans whenever ``||z0^n||_1 <= ||z0||_1 + 1``.
    """
    return 1.0 / (2.0 ** (2 * sigma + 5) * C * (math.exp(-sigma) * sigma**sigma + 2.0) * (reference_norm + 2.0))


def _trajectory(state, p, times, dt):
    out = {}
    try:
        for st in evolve(state, p, times, dt):
            out[st.t] = st
    except BlowUpError as exc:
        raise ExperimentInvalidatedError(f"blow-up before the horizon: {exc}") from exc
    return out


def continuity_experiment(z0_inf: TwoComponentState, perturbed, p: SystemParams,
                          cfg: ContinuityConfig = ContinuityConfig()) -> ContinuityReport:
    """Compare solutions from ``z0_inf`` and each perturbed datum in the weighted norm.

    For each datum the report stores ``||z^n - z^inf||_{E_T}`` (u measured
    with ``q``, rho with ``q1``) and ``||z0^n - z0^inf||_1``; the theory bounds
    their ratio by 2.  ``slope`` is the log-log regression slope of the
    weighted difference against the data difference.
    """
    ref = data_norm(z0_inf, cfg.sigma, cfg.q, cfg.q1)
    T = common_horizon(ref, cfg.sigma, cfg.C)
    pu = ETNormParams.default(T, cfg.sigma, cfg.q, cfg.n_delta, cfg.n_t)
    pr = ETNormParams(T, cfg.sigma, cfg.q1, pu.delta_grid, pu.t_grid)
    times = pu.times()
    base = _trajectory(z0_inf, p, times, cfg.dt)
    report = ContinuityReport(T, ref, bound=2.0 * (1.0 + cfg.tol))
    for z0 in perturbed:
        diff0 = TwoComponentState(0.0, z0.u - z0_inf.u, z0.rho - z0_inf.rho)
        dnorm = data_norm(diff0, cfg.sigma, cfg.q, cfg.q1)
        if dnorm == 0.0:
            report.legs.append(ContinuityLeg(0.0, 0.0, None, ref))
            continue
        traj = _trajectory(z0, p, times, cfg.dt)
        eu, where = et_norm(lambda t: traj[t].u - base[t].u, pu, return_argmax=True)
        er = et_norm(lambda t: traj[t].rho - base[t].rho, pr)
        report.legs.append(ContinuityLeg(dnorm, eu + er, where, data_norm(z0, cfg.sigma, cfg.q, cfg.q1)))
    legs = [leg for leg in report.legs if leg.data_diff > 0 and leg.et_diff > 0]
    if len(legs) >= 2:
        x = np.log([leg.data_diff for leg in legs])
        y = np.log([leg.et_diff for leg in legs])
        report.slope = float(np.polyfit(x, y, 1)[0])
    return report


# ---------------------------------------------------------------------------
# Commutator, pointwise difference and interpolation estimates
# ---------------------------------------------------------------------------


def commutator_sides(u: SpectralField, w: SpectralField, r: float, sigma: float, delta: float) -> tuple:
    """Return ``(lhs, sobolev_part, gevrey_part)`` so that the bound reads
    ``lhs <= C (sobolev_part + delta * gevrey_part)``."""
    ew = apply_multiplier(w, bessel(r) * gevrey(delta, sigma))
    uwx = pointwise_product(u, apply_multiplier(w, derivative(1)))
    lhs = abs(inner_product(apply_multiplier(uwx, bessel(r) * gevrey(delta, sigma)), ew))
    half = r + 0.5 / sigma
    g = lambda f, order: gevrey_norm(f, GevreyParams(sigma, delta, order))
    sob = sobolev_norm(u, r) * sobolev_norm(w, r) ** 2
    gev = g(u, r) * g(w, half) ** 2 + g(u, half) * g(w, r) * g(w, half)
    return lhs, sob, gev


def check_commutator(u: SpectralField, w: SpectralField, r: float, sigma: float, delta: float,
                     C: float) -> CheckRecord:
    if not r > 1.5:
        raise ValueError("the commutator estimate needs r > 3/2")
    lhs, sob, gev = commutator_sides(u, w, r, sigma, delta)
    rec = CheckRecord("commutator", {"n": u.grid.n, "r": r, "sigma": sigma, "delta": delta, "C": C},
                      lhs, C * (sob + delta * gev))
    rec.params["empirical_ratio"] = lhs / (sob + delta * gev) if sob + delta * gev > 0 else 0.0
    return rec


def commutator_ratio(u, w, r, sigma, delta) -> float:
    lhs, sob, gev = commutator_sides(u, w, r, sigma, delta)
    denom = sob + delta * gev
    return 0.0 if denom == 0.0 else lhs / denom


def calibrate_commutator(pairs, r: float, sigma: float, delta: float) -> float:
    """Largest ``lhs / (sobolev_part + delta gevrey_part)`` over a corpus."""
    return max(commutator_ratio(u, w, r, sigma, delta) for u, w in pairs)


def pointwise_constant(r: float, sigma: float) -> float:
    """``max(r, r + 1/sigma) * 2^max(r-1, 0)`` assembled from the mean-value argument."""
    return max(r, r + 1.0 / sigma) * 2.0 ** max(r - 1.0, 0.0)


def pointwise_difference_sides(xi, eta, r: float, sigma: float, delta: float, C_r: float | None = None):
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    C_r = pointwise_constant(r, sigma) if C_r is None else C_r
    dif = xi - eta
    wx, we, wd = 1.0 + xi**2, 1.0 + eta**2, 1.0 + dif**2
    g = 0.5 / sigma
    expo = delta * wd**g + delta * we**g
    if expo.size and float(np.max(expo)) > DEFAULT_LOG_CAP:
        raise GridRangeError(f"exponent {float(np.max(expo)):.4g} overflows; shrink the scan range")
    f = lambda w: w ** (0.5 * r) * np.exp(delta * w**g)
    lhs = np.abs(f(wx) - f(we))
    ex = (r - 1.0) / 2.0
    bracket = wd**ex + we**ex + delta * (wd ** (ex + g) + we ** (ex + g)) * np.exp(expo)
    rhs = C_r * np.abs(dif) * bracket
    return lhs, rhs


@dataclass
class ScanReport:
    r: float
    sigma: float
    delta: float
    C_r: float
    total: int
    passed: int
    max_ratio: float
    argmax: tuple

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total

    def record(self) -> CheckRecord:
        params = {"r": self.r, "sigma": self.sigma, "delta": self.delta, "C_r": self.C_r,
                  "xi": self.argmax[0], "eta": self.argmax[1]}
        # lhs/rhs rescaled so that ratio reproduces the worst point
        return CheckRecord("pointwise_difference", params, self.max_ratio, 1.0)


def check_pointwise_difference(r: float, sigma: float, delta: float, xi_grid, eta_grid=None,
                               C_r: float | None = None) -> ScanReport:
    """Brute-force scan of the pointwise multiplier difference estimate over a grid."""
    if r < 1 or sigma < 1 or delta < 0:
        raise ValueError("need r >= 1, sigma >= 1, delta >= 0")
    eta_grid = xi_grid if eta_grid is None else eta_grid
    X, E = np.meshgrid(np.asarray(xi_grid, float), np.asarray(eta_grid, float), indexing="ij")
    C_r = pointwise_constant(r, sigma) if C_r is None else C_r
    lhs, rhs = pointwise_difference_sides(X, E, r, sigma, delta, C_r)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    i = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return ScanReport(r, sigma, delta, C_r, int(ratio.size), int(np.count_nonzero(lhs <= rhs)),
                      float(ratio[i]), (float(X[i]), float(E[i])))


def check_interpolation(f: SpectralField, r: float, sigma: float, delta: float, l: float) -> CheckRecord:
    """``||f||_{G^delta_{sigma,r}} <= sqrt(e) ||f||_{H^r} + (2 delta)^(l/2) ||f||_{G^delta_{sigma,r+l/(2 sigma)}}``."""
    if not (l > 0 and delta >= 0 and sigma >= 1):
        raise ValueError("need l > 0, delta >= 0, sigma >= 1")
    lhs = gevrey_norm(f, GevreyParams(sigma, delta, r))
    rhs = math.sqrt(math.e) * sobolev_norm(f, r) + (2.0 * delta) ** (0.5 * l) * gevrey_norm(
        f, GevreyParams(sigma, delta, r + l / (2.0 * sigma))
    )
    return CheckRecord("interpolation", {"n": f.grid.n, "r": r, "sigma": sigma, "delta": delta, "l": l},
                       lhs, rhs, tol=1e-12)


def commutator_corpus(grid, n_pairs: int, seed) -> list:
    """``n_pairs`` independent ``(u, w)`` pairs of :func:`random_field` draws."""
    from .initial import random_field

    rng = np.random.default_rng(seed)
    return [(random_field(grid, rng), random_field(grid, rng)) for _ in range(n_pairs)]
