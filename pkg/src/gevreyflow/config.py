"""Flat YAML run configuration and the per-mode hypothesis registry."""
from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .dynamics import SystemParams, TwoComponentState
from .initial import from_modes, from_samples_file, gevrey_random
from .spectral import GridSpec, SpectralField

MODES = ("simulate", "radius-track", "continuity", "verify", "lifespan")
OUTPUT_DIR_ENV = "GEVREYFLOW_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


class HypothesisViolation(ConfigError):
    pass


@dataclass
class RunConfig:
    """Every key of the config file; unknown keys are rejected."""

    mode: str = "simulate"
    # grid and system
    n: int = 256
    L: float = 4 * math.pi
    s: int = 2
    a: float = 2.0
    alpha: float = 0.0
    kappa: float = 0.0
    # function spaces
    sigma: float = 1.0
    q: float = 3.0
    q1: float = 2.0
    # time stepping
    dt: float = 1e-3
    T: float = 1.0
    scheme: str = "rk4"
    rtol: float = 1e-8
    atol: float = 1e-12
    output_every: int = 10
    # radius schedule
    delta0: float = 0.5
    C: float = 1.0
    # initial data
    u0: dict = field(default_factory=lambda: {"kind": "gevrey_random", "delta0": 0.5, "amplitude": 0.1})
    rho0: dict = field(default_factory=lambda: {"kind": "zero"})
    restart: str | None = None
    # lifespan mode
    data_norm: float = 1.0
    two_component: bool = False
    # continuity mode
    perturb_mode: int = 1
    levels: list = field(default_factory=lambda: list(range(1, 9)))
    continuity_tol: float = 0.1
    # verify mode
    commutator_C: float | None = None
    seed: int = 0
    output_dir: str = "out"

    def system(self) -> SystemParams:
        return SystemParams(int(self.s), float(self.a), float(self.alpha), float(self.kappa))

    def grid(self) -> GridSpec:
        return GridSpec(int(self.n), float(self.L))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def rho_evolved(self) -> bool:
        return self.restart is not None or (self.rho0 or {}).get("kind", "zero") != "zero"


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    data = {}
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc})") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: expected a key-value document")
        data.update(loaded)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    env_out = os.environ.get(OUTPUT_DIR_ENV)
    if env_out and "output_dir" not in (overrides or {}):
        data["output_dir"] = env_out
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = RunConfig(**data)
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    return cfg


# ---------------------------------------------------------------------------
# Hypothesis registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hypothesis:
    key: str
    statement: str
    context: str
    holds: object

    def message(self, cfg: RunConfig, mode: str) -> str:
        return (f"{mode} refused: hypothesis \"{self.statement}\" ({self.context}) does not hold "
                f"for s={cfg.s}, a={cfg.a}, sigma={cfg.sigma}, q={cfg.q}, q1={cfg.q1}, "
                f"delta0={cfg.delta0}, C={cfg.C}")


HYPOTHESES = {
    h.key: h
    for h in [
        Hypothesis("s_integer", "s is an integer with s >= 2", "inertia operator order",
                   lambda c: float(c.s) == int(c.s) and int(c.s) >= 2),
        Hypothesis("a_not_one", "a != 1", "the density equation degenerates at a = 1",
                   lambda c: float(c.a) != 1.0),
        Hypothesis("sigma_ge_1", "sigma >= 1", "Gevrey class index", lambda c: c.sigma >= 1),
        Hypothesis("q_sobolev", "q > s + 1/2", "Sobolev index of the local theory",
                   lambda c: c.q > c.s + 0.5),
        Hypothesis("q1_admissible", "1/2 < q1 <= q - 1 <= q1 + 2s - 2", "index pairing of (u, rho)",
                   lambda c: 0.5 < c.q1 <= c.q - 1 <= c.q1 + 2 * c.s - 2),
        Hypothesis("delta0_radius", "0 < delta0", "initial Gevrey radius", lambda c: c.delta0 > 0),
        Hypothesis("C_positive", "C > 0", "constant of the radius schedule", lambda c: c.C > 0),
        Hypothesis("norm_nonnegative", "||u0|| >= 0", "data size for the lifespan",
                   lambda c: c.data_norm >= 0),
        Hypothesis("positive_steps", "dt > 0, T >= 0, output_every >= 1", "time stepping",
                   lambda c: c.dt > 0 and c.T >= 0 and int(c.output_every) >= 1),
    ]
}

MODE_HYPOTHESES = {
    "simulate": ["s_integer", "a_not_one", "positive_steps"],
    "radius-track": ["s_integer", "a_not_one", "positive_steps", "sigma_ge_1", "q_sobolev",
                     "delta0_radius", "C_positive"],
    "continuity": ["s_integer", "a_not_one", "positive_steps", "sigma_ge_1", "q_sobolev",
                   "q1_admissible", "C_positive"],
    "lifespan": ["sigma_ge_1", "C_positive", "norm_nonnegative"],
    "verify": [],
}


def check_hypotheses(cfg: RunConfig, mode: str | None = None) -> None:
    mode = mode or cfg.mode
    keys = list(MODE_HYPOTHESES[mode])
    if mode == "simulate" and cfg.rho_evolved:
        keys.append("q1_admissible")
    for key in keys:
        h = HYPOTHESES[key]
        if not h.holds(cfg):
            raise HypothesisViolation(h.message(cfg, mode))


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------


def build_field(grid: GridSpec, spec: dict | None, seed: int, cfg: RunConfig) -> SpectralField:
    spec = dict(spec or {"kind": "zero"})
    kind = spec.pop("kind", None)
    try:
        if kind == "zero":
            return SpectralField.zeros(grid)
        if kind == "gevrey_random":
            return gevrey_random(grid, float(spec.get("delta0", cfg.delta0)), float(spec.get("sigma", cfg.sigma)),
                                 float(spec.get("amplitude", 1.0)), spec.get("seed", seed))
        if kind == "modes":
            return from_modes(grid, [tuple(m) for m in spec["modes"]])
        if kind == "samples":
            return from_samples_file(grid, spec["path"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"initial data spec for kind {kind!r} is incomplete: {exc}") from exc
    raise ConfigError(f"unknown initial data kind {kind!r}; use zero, gevrey_random, modes or samples")


def initial_state(cfg: RunConfig) -> TwoComponentState:
    if cfg.restart:
        from .io import restore

        return restore(cfg.restart)
    grid = cfg.grid()
    u = build_field(grid, cfg.u0, cfg.seed, cfg)
    rho = build_field(grid, cfg.rho0, cfg.seed + 1, cfg)
    return TwoComponentState(0.0, u, rho)
