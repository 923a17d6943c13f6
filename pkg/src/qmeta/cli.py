"""Command line entry point: ``qmeta <scenario> [--config PATH] [--out DIR]``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .analysis import InsufficientPeriodicity, PreconditionError
from .config import Config, ConfigError, load_config
from .dynamics import StabilityError
from .oracles import ConvergenceError, TruncationError, UnphysicalParameters, qubit_spectrum
from .scenarios import clean_json, scenario_bands, scenario_prime, scenario_probe, scenario_rabi_check, write_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

NUMERIC_ERRORS = (
    StabilityError,
    PreconditionError,
    InsufficientPeriodicity,
    TruncationError,
    UnphysicalParameters,
    ConvergenceError,
)


def _prime(cfg: Config, out: Optional[Path]) -> dict:
    summary = scenario_prime(cfg, out).summary
    if summary.get("period_error"):
        raise InsufficientPeriodicity(summary["period_error"])
    return summary


def _sweep_one(args) -> dict:
    cfg, scenario, section, key, value = args
    cfg = cfg.with_section(section, **{key: value})
    if scenario == "prime":
        s = scenario_prime(cfg).summary
    elif scenario == "probe":
        s = scenario_probe(cfg)
    elif scenario == "bands":
        s = scenario_bands(cfg)
    else:
        s = scenario_rabi_check(cfg)
    return {"value": value, "summary": s}


def run_sweep(cfg: Config, scenario: str, param: str, values: Sequence[float], workers: int) -> list:
    """Run one scenario per value, in parallel, returning results in input order."""
    if "." not in param:
        raise ConfigError(f"sweep parameter must look like section.key, got {param!r}")
    section, key = param.split(".", 1)
    if section not in cfg.flat_sections():
        raise ConfigError(f"unknown section {section!r}")
    if key not in cfg.section_keys(section):
        raise ConfigError(f"unknown key {param}")
    current = getattr(getattr(cfg, section), key)
    if isinstance(current, int) and not isinstance(current, bool):
        values = [int(v) for v in values]
    jobs = [(cfg, scenario, section, key, v) for v in values]
    # validate every point up front so config errors surface before any work starts
    for _, _, s, k, v in jobs:
        try:
            cfg.with_section(s, **{k: v})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{param}={v}: {exc}") from exc
    if workers <= 1:
        return [_sweep_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, jobs))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmeta", description="Qubit-loaded transmission line scenarios.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="INI configuration file")
    common.add_argument("--out", type=Path, default=None, help="output directory for CSV/JSON")
    common.add_argument("--mode", choices=("frozen", "live"), default=None,
                        help="qubit treatment during propagation (default: run.mode)")
    common.add_argument("--seedless", action="store_true",
                        help="accepted for scripting symmetry; every scenario is deterministic")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("prime", parents=[common], help="priming pulses write a periodic register")
    sub.add_parser("probe", parents=[common], help="probe pulse transmission through a register")
    sub.add_parser("bands", parents=[common], help="Bloch bands and gaps of a periodic susceptibility")
    sub.add_parser("rabi-check", parents=[common], help="simulation against the local Rabi formula")
    qs = sub.add_parser("qubit-spectrum", parents=[common], help="charge-basis qubit levels")
    qs.add_argument("--ratio", type=float, default=4.0, help="E_J / hbar omega_J")
    qs.add_argument("--n-g", type=float, default=0.25, help="gate charge offset")
    qs.add_argument("--M", type=int, default=30, help="charge truncation |m| <= M")
    sw = sub.add_parser("sweep", parents=[common], help="run a scenario over a list of parameter values")
    sw.add_argument("--scenario", choices=("prime", "probe", "bands", "rabi-check"), default="prime")
    sw.add_argument("--param", required=True, help="section.key to vary, e.g. pulses.A")
    sw.add_argument("--values", type=float, nargs="+", required=True)
    sw.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.mode is not None:
            cfg = cfg.with_section("run", mode=args.mode)
        out = args.out
        if args.command == "prime":
            result = _prime(cfg, out)
        elif args.command == "probe":
            result = scenario_probe(cfg, out)
        elif args.command == "bands":
            result = scenario_bands(cfg, out)
        elif args.command == "rabi-check":
            result = scenario_rabi_check(cfg, out)
        elif args.command == "qubit-spectrum":
            spec = qubit_spectrum(args.ratio, args.n_g, args.M)
            result = {
                "epsilon_over_omegaJ": spec.epsilon_over_omegaJ,
                "d00": spec.d00,
                "d01": spec.d01,
                "d11": spec.d11,
                "E_J_over_hbar_epsilon": spec.E_J_over_hbar_epsilon,
                "levels": spec.levels[:6].tolist(),
            }
            if out is not None:
                write_json(Path(out) / "qubit_spectrum.json", result)
        else:
            results = run_sweep(cfg, args.scenario, args.param, args.values, args.workers)
            result = {"param": args.param, "scenario": args.scenario, "results": results}
            if out is not None:
                write_json(Path(out) / "sweep.json", result)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(clean_json(_summary_line(result)), sort_keys=True, default=str))
    return EXIT_OK


def _summary_line(result: dict) -> dict:
    # keep stdout short: drop bulky lists
    return {k: v for k, v in result.items() if k not in ("times", "results", "warnings")}


if __name__ == "__main__":
    sys.exit(main())
