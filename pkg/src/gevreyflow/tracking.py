"""Lifespan bounds, the global radius schedule and the regularity monitor."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .dynamics import BlowUpError, SystemParams, TwoComponentState, evolve
from .norms import (
    GevreyParams,
    InsufficientSpectrumError,
    estimate_radius,
    gevrey_norm,
    sobolev_norm,
)


@dataclass(frozen=True)
class LifespanParams:
    L_const: float
    M_const: float
    R_const: float
    sigma: float = 1.0
    C_alg: float = 1.0

    def __post_init__(self):
        for name in ("L_const", "M_const", "R_const", "C_alg"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.sigma >= 1:
            raise ValueError(f"sigma must be >= 1, got {self.sigma}")


def lifespan_T0(params: LifespanParams) -> float:
    """``min{1/(2^(2s+4) L), (2^s-1) R / ((2^s-1) 2^(2s+3) L R + M)}`` with ``s = sigma``."""
    s, L, M, R = params.sigma, params.L_const, params.M_const, params.R_const
    g = 2.0**s - 1.0
    return min(1.0 / (2.0 ** (2 * s + 4) * L), g * R / (g * 2.0 ** (2 * s + 3) * L * R + M))


def _loss_factor(sigma: float) -> float:
    return math.exp(-sigma) * sigma**sigma + 2.0


def lifespan_T0_reduced(sigma: float, C: float, data_norm: float, two_component: bool = False) -> float:
    """Closed-form lifespan once ``R``, ``L`` and ``M`` are fixed from the data.

    One component: ``1 / (2^(2 sigma+5) C (e^-sigma sigma^sigma + 2) ||u0||)``.
    Two components replace ``||u0||`` by ``||z0||_1 + 1``.
    """
    if not (sigma >= 1 and C > 0 and data_norm >= 0):
        raise ValueError("need sigma >= 1, C > 0 and a nonnegative data norm")
    size = data_norm + 1.0 if two_component else data_norm
    if size == 0:
        return math.inf
    return 1.0 / (2.0 ** (2 * sigma + 5) * C * _loss_factor(sigma) * size)


def reduced_lifespan_params(sigma: float, C: float, data_norm: float) -> LifespanParams:
    """The choices ``R = ||u0||``, ``L = 2 C (e^-s s^s + 2) ||u0||``, ``M = 2^(2s+3) L R``."""
    L = 2.0 * C * _loss_factor(sigma) * data_norm
    return LifespanParams(L, 2.0 ** (2 * sigma + 3) * L * data_norm, data_norm, sigma, C)


def holomorphy_time(T0: float, delta: float, sigma: float) -> float:
    """``T0 (1 - delta)^sigma / (2^sigma - 1)``."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return T0 * (1.0 - delta) ** sigma / (2.0**sigma - 1.0)


def _running_integral(y, times) -> np.ndarray:
    # composite Simpson once three samples exist, trapezoid before that
    if len(times) < 3:
        return cumulative_trapezoid(y, times, initial=0.0)
    return cumulative_simpson(y, x=times, initial=0.0)


def h_of_t(times, theta, u0_norm_G_delta0: float, C: float) -> np.ndarray:
    """``h(t)`` with ``h^2 = 2 ||u0||^2 + 2 C int_0^t theta^3`` over the sampled trace."""
    times = np.asarray(times, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if times.size == 0:
        raise ValueError("empty trace")
    integral = _running_integral(theta**3, times)
    return np.sqrt(2.0 * u0_norm_G_delta0**2 + 2.0 * C * integral)


def delta_schedule(times, h, delta0: float, C: float) -> np.ndarray:
    """``delta(t) = delta0 exp(-C int_0^t h)`` over the sampled trace."""
    times = np.asarray(times, dtype=float)
    h = np.asarray(h, dtype=float)
    if times.size == 0:
        raise ValueError("empty trace")
    return delta0 * np.exp(-C * _running_integral(h, times))


@dataclass
class RadiusSample:
    t: float
    theta: float
    h: float
    delta_theory: float
    gevrey_norm: float
    delta_measured: float
    residual: float
    fit_tolerance: float
    passed: bool
    # delta(t) underflows to 0.0 once C int h exceeds ~745; the log stays finite
    log_delta_theory: float = math.nan

    def row(self) -> dict:
        return {
            "t": self.t,
            "theta": self.theta,
            "h": self.h,
            "delta_theory": self.delta_theory,
            "delta_measured": self.delta_measured,
            "residual": self.residual,
            "pass": self.passed,
        }


@dataclass
class RadiusTrace:
    samples: list = field(default_factory=list)
    verdict: str = "PASS"
    finding: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])


@dataclass(frozen=True)
class MonitorConfig:
    """Parameters of one monitored run.

    ``C`` is the constant in both ``h`` and the radius schedule.  ``sigma``,
    ``q`` and ``delta0`` define the Gevrey space the data starts in.
    """

    sigma: float = 1.0
    q: float = 3.0
    delta0: float = 0.5
    C: float = 1.0
    T: float = 1.0
    dt: float = 1e-3
    output_every: int = 10
    scheme: str = "rk4"
    norm_tol: float = 0.05
    k_window: tuple | None = None
    noise_floor: float = 1e-14


def fit_tolerance(delta_t: float, residual: float) -> float:
    return max(0.05 * delta_t, 3.0 * residual)


def regularity_monitor(state: TwoComponentState, p: SystemParams, cfg: MonitorConfig) -> RadiusTrace:
    """Follow a simulation and compare it with the global radius schedule.

    At each output time the Sobolev norm ``theta`` feeds ``h`` and
    ``delta(t)``; the sample passes when ``||u||^2_{G^{delta(t)}} <= h^2 (1 +
    norm_tol)`` and the fitted decay rate is at least ``delta(t)`` minus the
    fit tolerance.  Blow-up ends the trace with verdict ``BLOWUP``.
    """
    u0_norm = gevrey_norm(state.u, GevreyParams(cfg.sigma, cfg.delta0, cfg.q))
    nout = max(1, int(round(cfg.T / (cfg.dt * cfg.output_every))))
    times = np.linspace(state.t, state.t + cfg.T, nout + 1)
    trace = RadiusTrace()
    ts, thetas = [], []

    def record(st: TwoComponentState):
        ts.append(st.t)
        thetas.append(sobolev_norm(st.u, cfg.q))
        h = h_of_t(ts, thetas, u0_norm, cfg.C)
        delta_t = float(delta_schedule(ts, h, cfg.delta0, cfg.C)[-1])
        log_delta = (math.log(cfg.delta0) - cfg.C * float(_running_integral(h, ts)[-1])
                     if cfg.delta0 > 0 else -math.inf)
        theta, h = thetas[-1], float(h[-1])
        gn = gevrey_norm(st.u, GevreyParams(cfg.sigma, delta_t, cfg.q))
        try:
            fit = estimate_radius(st.u, cfg.sigma, cfg.k_window, cfg.noise_floor)
            measured, residual = fit.delta_hat, fit.residual
        except InsufficientSpectrumError:
            # zero or nearly zero data: no decay to fit, the radius is unconstrained
            measured, residual = math.inf, 0.0
        tol = fit_tolerance(delta_t, residual)
        ok = gn**2 <= h**2 * (1.0 + cfg.norm_tol) and measured >= delta_t - tol
        trace.samples.append(
            RadiusSample(st.t, theta, h, delta_t, gn, measured, residual, tol, ok, log_delta)
        )
        if not ok:
            trace.verdict = "FAIL"

    record(state)
    try:
        for st in evolve(state, p, times[1:], cfg.dt, cfg.scheme):
            record(st)
    except BlowUpError as exc:
        trace.verdict = "BLOWUP"
        trace.finding = str(exc)
    return trace
