"""Checkpoints, NDJSON time series, CSV reports and run manifests."""
from __future__ import annotations

import csv
import json
import subprocess
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .dynamics import SystemParams, TwoComponentState, conserved_quantities
from .norms import sobolev_norm
from .spectral import GridSpec, SpectralField, apply_multiplier, derivative, max_abs

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


class CheckpointVersionError(CheckpointError):
    """Checkpoint written by an incompatible format version."""


def _pairs(c: np.ndarray) -> list:
    # repr of a Python float is the shortest string that round-trips exactly
    return [[float(z.real), float(z.imag)] for z in c]


def state_record(state: TwoComponentState) -> dict:
    g = state.grid
    return {
        "format_version": FORMAT_VERSION,
        "t": float(state.t),
        "grid": {"n": g.n, "L": g.period},
        "u": _pairs(state.u.coeffs),
        "rho": _pairs(state.rho.coeffs),
    }


def checkpoint(state: TwoComponentState, path) -> Path:
    """Write ``state`` as a single NDJSON line; coefficients in FFT order."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(state_record(state)) + "\n")
    tmp.replace(path)
    return path


def state_from_record(rec: dict) -> TwoComponentState:
    version = rec.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint format_version {version!r} cannot be read by format {FORMAT_VERSION}; "
            "re-export it with the writing version"
        )
    try:
        grid = GridSpec(int(rec["grid"]["n"]), float(rec["grid"]["L"]))
        u = np.array([complex(a, b) for a, b in rec["u"]])
        rho = np.array([complex(a, b) for a, b in rec["rho"]])
        return TwoComponentState(float(rec["t"]), SpectralField(grid, u), SpectralField(grid, rho))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint record: {exc}") from exc


def restore(path) -> TwoComponentState:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CheckpointError(f"{path}: empty checkpoint")
    try:
        rec = json.loads(lines[-1])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: truncated or corrupt checkpoint ({exc})") from exc
    return state_from_record(rec)


def trace_record(state: TwoComponentState, p: SystemParams, q: float, q1: float) -> dict:
    """One time-series row ``{t, Hq_u, Hq1_rho, H, Mrho, max_u, max_ux}``."""
    inv = conserved_quantities(state, p)
    return {
        "t": float(state.t),
        "Hq_u": sobolev_norm(state.u, q),
        "Hq1_rho": sobolev_norm(state.rho, q1),
        "H": inv["H"],
        "Mrho": inv["Mrho"],
        "max_u": max_abs(state.u),
        "max_ux": max_abs(apply_multiplier(state.u, derivative(1))),
    }


class NDJSONWriter:
    """Line-buffered NDJSON sink; one writer per artifact."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = self.path.open("w")

    def write(self, record: dict) -> None:
        self._fh.write(json.dumps(record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_ndjson(path) -> list:
    return [json.loads(ln) for ln in Path(path).read_text().splitlines() if ln.strip()]


INEQUALITY_COLUMNS = ["inequality_id", "n", "sigma", "delta", "delta_prime", "q", "lhs", "rhs", "ratio", "pass"]
RADIUS_COLUMNS = ["t", "theta", "h", "delta_theory", "delta_measured", "residual", "pass"]


def write_csv(path, rows, columns=None) -> Path:
    rows = list(rows)
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, restval="")
        w.writeheader()
        w.writerows(rows)
    return path


def write_inequality_report(path, records) -> Path:
    return write_csv(path, (r.row() for r in records), INEQUALITY_COLUMNS)


def write_radius_trace(path, trace) -> Path:
    return write_csv(path, (s.row() for s in trace.samples), RADIUS_COLUMNS)


def write_check_report(path, records) -> Path:
    """Verification CSV with columns ``check_id, params..., lhs, rhs, ratio, pass``."""
    rows = [r.row() for r in records]
    params = []
    for r in records:
        params.extend(k for k in r.params if k not in params)
    return write_csv(path, rows, ["check_id", *params, "lhs", "rhs", "ratio", "pass"])


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def version_string() -> str:
    """``git describe`` of the source tree, else the installed package version."""
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_manifest(out_dir, config: dict, artifacts, status: str) -> Path:
    manifest = {
        "version": version_string(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": config,
        "artifacts": sorted(str(Path(a).name) for a in artifacts),
        "status": status,
    }
    return write_json(Path(out_dir) / "manifest.json", manifest)
