"""Command-line front end: ``gevreyflow {simulate,radius-track,continuity,verify,lifespan}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, check_hypotheses, initial_state, load_config
from .dynamics import BlowUpError, DynamicsError, StiffnessError, TwoComponentState, evolve
from .harness import ContinuityConfig, ExperimentInvalidatedError, NumericError, continuity_experiment, summarize
from .io import (
    NDJSONWriter,
    checkpoint,
    trace_record,
    write_check_report,
    write_json,
    write_manifest,
    write_radius_trace,
)
from .spectral import RadiusTooLargeError, SpectralError
from .tracking import MonitorConfig, holomorphy_time, lifespan_T0_reduced, regularity_monitor

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3, 4, 5

log = logging.getLogger("gevreyflow")


class RunOutcome:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.artifacts = []
        self.status = "ok"

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.artifacts.append(p)
        return p


def run_simulate(cfg: RunConfig, out: RunOutcome) -> int:
    p = cfg.system()
    state = initial_state(cfg)
    chunk = cfg.dt * int(cfg.output_every)
    nout = max(1, int(round(cfg.T / chunk))) if cfg.T > 0 else 0
    times = state.t + np.arange(1, nout + 1) * (cfg.T / max(nout, 1))
    code = EXIT_OK
    with NDJSONWriter(out.path("trace.ndjson")) as w:
        first = w_last = trace_record(state, p, cfg.q, cfg.q1)
        w.write(first)
        try:
            for st in evolve(state, p, times, cfg.dt, cfg.scheme, rtol=cfg.rtol, atol=cfg.atol):
                w_last = trace_record(st, p, cfg.q, cfg.q1)
                w.write(w_last)
                state = st
        except BlowUpError as exc:
            out.status = f"blow-up: {exc}"
            log.warning("blow-up finding at t=%.6g: %s", exc.t, exc)
            code = EXIT_BLOWUP
    checkpoint(state, out.path("checkpoint.ndjson"))
    drift = abs(w_last["H"] - first["H"]) / first["H"] if first["H"] else 0.0
    log.info("t=%.6g  H=%.16g  relative H drift=%.3e", w_last["t"], w_last["H"], drift)
    return code


def run_radius_track(cfg: RunConfig, out: RunOutcome) -> int:
    state = initial_state(cfg)
    mcfg = MonitorConfig(sigma=cfg.sigma, q=cfg.q, delta0=cfg.delta0, C=cfg.C, T=cfg.T, dt=cfg.dt,
                         output_every=int(cfg.output_every), scheme=cfg.scheme)
    trace = regularity_monitor(state, cfg.system(), mcfg)
    write_radius_trace(out.path("radius_trace.csv"), trace)
    out.status = trace.verdict
    log.info("radius-track verdict: %s over %d samples", trace.verdict, len(trace.samples))
    if trace.verdict == "BLOWUP":
        log.warning("%s", trace.finding)
        return EXIT_BLOWUP
    return EXIT_OK if trace.passed else EXIT_FAIL


def run_continuity(cfg: RunConfig, out: RunOutcome) -> int:
    from .harness import data_norm
    from .initial import from_modes

    z = initial_state(cfg)
    ccfg = ContinuityConfig(sigma=cfg.sigma, q=cfg.q, q1=cfg.q1, C=cfg.C, dt=cfg.dt, tol=cfg.continuity_tol)
    bump = from_modes(z.grid, [(int(cfg.perturb_mode), 1.0, 0.0)])
    unit = data_norm(TwoComponentState(0.0, bump, bump * 0.0), cfg.sigma, cfg.q, cfg.q1)
    perturbed = [TwoComponentState(0.0, z.u + bump * (2.0 ** -int(k) / unit), z.rho) for k in cfg.levels]
    try:
        rep = continuity_experiment(z, perturbed, cfg.system(), ccfg)
    except ExperimentInvalidatedError as exc:
        out.status = f"invalidated: {exc}"
        log.warning("%s", exc)
        return EXIT_BLOWUP
    recs = rep.records()
    write_check_report(out.path("continuity.csv"), recs)
    write_json(out.path("continuity_summary.json"), {
        **summarize(recs), "T": rep.T, "reference_norm": rep.reference_norm,
        "slope": rep.slope, "bound": rep.bound, "max_difference_ratio": rep.max_ratio,
        "ratios": [leg.ratio for leg in rep.legs],
    })
    out.status = "PASS" if rep.passed else "FAIL"
    log.info("continuity: T=%.4g  max ratio=%.4g  slope=%.6f  %s", rep.T, rep.max_ratio, rep.slope, out.status)
    return EXIT_OK if rep.passed else EXIT_FAIL


def run_verify(cfg: RunConfig, out: RunOutcome) -> int:
    from . import suite

    C = cfg.commutator_C if cfg.commutator_C is not None else suite.COMMUTATOR_C
    groups = {
        "norms": suite.norm_identity_records(seed=cfg.seed),
        "gradient": suite.gradient_records(seed=cfg.seed),
        "interpolation": suite.interpolation_records(seed=cfg.seed),
        "ovs_delta": suite.ovs_sweep_records(),
        "luo_integral": suite.luo_records(seed=cfg.seed),
        "kform": suite.kform_records(seed=cfg.seed),
        "commutator_sobolev": suite.commutator_sobolev_records()[1],
    }
    comm = suite.commutator_suite(C)
    groups["commutator"] = [r for recs in comm.records.values() for r in recs]
    scan = suite.pointwise_scan()
    groups["pointwise_difference"] = [r.record() for r in scan.coarse + scan.fine]

    summaries = []
    ok = True
    for name, recs in groups.items():
        write_check_report(out.path(f"verify_{name}.csv"), recs)
        summ = summarize(recs)
        summaries.append(summ)
        ok &= summ["passed"] == summ["total"]
        log.info("%-22s %4d/%-4d max ratio %.4g", name, summ["passed"], summ["total"], summ["max_ratio"])
    ok &= suite.ovs_strict(groups["ovs_delta"]) and comm.passed
    write_json(out.path("verify_summary.json"), {
        "notes": ["delta(t) prefactor (1/2)^(2 + 1/delta) is evaluated as written, with delta in the exponent"],
        "checks": summaries,
        "commutator": {"C": C, "excess": comm.excess, "resolution_growth": comm.resolution_growth,
                       "limit": comm.growth_limit},
        "pointwise_stability": scan.stability(),
        "all_passed": bool(ok),
    })
    out.status = "PASS" if ok else "FAIL"
    return EXIT_OK if ok else EXIT_FAIL


def run_lifespan(cfg: RunConfig, out: RunOutcome) -> int:
    T0 = lifespan_T0_reduced(cfg.sigma, cfg.C, cfg.data_norm, cfg.two_component)
    table = [{"delta": round(d, 1), "holomorphy_time": holomorphy_time(T0, d, cfg.sigma)}
             for d in np.arange(1, 10) / 10]
    write_json(out.path("lifespan.json"), {"T0": T0, "table": table})
    print(f"T0 = {T0:.6e}")
    for row in table:
        print(f"  delta = {row['delta']:.1f}   T_delta = {row['holomorphy_time']:.6e}")
    return EXIT_OK


RUNNERS = {
    "simulate": run_simulate,
    "radius-track": run_radius_track,
    "continuity": run_continuity,
    "verify": run_verify,
    "lifespan": run_lifespan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="YAML config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="only warnings")
    parser = argparse.ArgumentParser(prog="gevreyflow", parents=[common],
                                     description="Gevrey-regularity simulation and verification toolkit")
    sub = parser.add_subparsers(dest="mode")
    for mode in RUNNERS:
        sub.add_parser(mode, parents=[common])
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    logging.basicConfig(level=logging.WARNING if args.get("quiet") else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    overrides = {"mode": args.get("mode"), "seed": args.get("seed")}
    if args.get("out") is not None:
        overrides["output_dir"] = str(args["out"])
    try:
        cfg = load_config(args.get("config"), overrides)
        check_hypotheses(cfg)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG

    out = RunOutcome(Path(cfg.output_dir))
    try:
        out.out_dir.mkdir(parents=True, exist_ok=True)
        code = RUNNERS[cfg.mode](cfg, out)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (StiffnessError, NumericError, RadiusTooLargeError, SpectralError, DynamicsError,
            FloatingPointError) as exc:
        log.error("numeric failure: %s", exc)
        out.status = f"numeric error: {exc}"
        code = EXIT_NUMERIC
    except ValueError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    try:
        write_manifest(out.out_dir, cfg.to_dict(), out.artifacts, out.status)
    except OSError as exc:
        log.error("I/O failure writing manifest: %s", exc)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
