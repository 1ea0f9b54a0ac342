"""Command-line entry points for seeded experiment runs.

Every subcommand loads a config file, applies command-line overrides,
runs the corresponding experiment, writes plot-ready CSV files into the
output directory, and drops a run manifest beside them.  Exit codes:
0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

from . import __version__, csvio
from .config import RunManifest, dumps_config, load_config, write_manifest
from .errors import GridwatchError
from .harness import (
    ScenarioConfig,
    concentration_experiment,
    derive_trial_seed,
    duration_sweep,
    probability_table,
    run_billing,
    run_trial,
)

STANDARD_DURATIONS = (1, 3, 6, 12)
CONCENTRATION_DURATIONS = (1, 12)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridwatch",
        description="Seeded smart-grid metering simulator and misreporting detector",
    )
    parser.add_argument("--version", action="version", version=f"gridwatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "simulate": "simulate one window and export the per-period records",
        "detect": "simulate one window and export per-consumer correlations and labels",
        "bill": "simulate one window and export monthly bills",
        "table1": "correct-detection probability for the three attack cases across durations",
        "fig-corr": "per-consumer correlation chart data for the configured scenario",
        "fig-concentration": "per-consumer correlations at 1-month vs 12-month durations",
        "fig-duration-sweep": "detection probability of the configured scenario across durations",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the scenario config file")
        p.add_argument("--seed", type=int, default=None, help="override [experiment] master_seed")
        p.add_argument("--reps", type=int, default=None, help="override [experiment] repetitions")
        p.add_argument("--threshold", type=float, default=None, help="override [detection] threshold")
        p.add_argument("--out-dir", default=".", help="directory for CSV outputs and the manifest")
        p.add_argument("--threads", type=int, default=1, help="worker processes for repeated trials")
    return parser


def _load(args) -> ScenarioConfig:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.threshold is not None:
        overrides["th"] = args.threshold
    return dataclasses.replace(config, **overrides) if overrides else config


def _single_attacker_id(config: ScenarioConfig) -> int:
    attackers = sorted(config.attacker_ids)
    if len(attackers) == 1:
        return attackers[0]
    ids = config.region.consumer_ids
    return 25 if 25 in ids else ids[0]


def _cmd_simulate(config: ScenarioConfig, out_dir: Path, args) -> list[Path]:
    window, _ = run_billing(config, derive_trial_seed(config.master_seed, 0))
    return [csvio.export_records(window.to_records(), out_dir / "records.csv")]


def _cmd_detect(config: ScenarioConfig, out_dir: Path, args, filename="detection.csv") -> list[Path]:
    outcome = run_trial(config, derive_trial_seed(config.master_seed, 0))
    return [csvio.export_detection(outcome.report, out_dir / filename)]


def _cmd_bill(config: ScenarioConfig, out_dir: Path, args) -> list[Path]:
    _, bills = run_billing(config, derive_trial_seed(config.master_seed, 0))
    return [csvio.export_bills(bills, out_dir / "bills.csv")]


def _cmd_table1(config: ScenarioConfig, out_dir: Path, args) -> list[Path]:
    rows = probability_table(
        config,
        _single_attacker_id(config),
        durations=STANDARD_DURATIONS,
        threads=args.threads,
    )
    return [csvio.export_probability_table(rows, out_dir / "table1.csv")]


def _cmd_fig_corr(config: ScenarioConfig, out_dir: Path, args) -> list[Path]:
    return _cmd_detect(config, out_dir, args, filename="fig_corr.csv")


def _cmd_fig_concentration(config: ScenarioConfig, out_dir: Path, args) -> list[Path]:
    reports = concentration_experiment(config, CONCENTRATION_DURATIONS)
    return [csvio.export_concentration(reports, out_dir / "fig_concentration.csv")]


def _cmd_fig_duration_sweep(config: ScenarioConfig, out_dir: Path, args) -> list[Path]:
    estimates = duration_sweep(config, STANDARD_DURATIONS, threads=args.threads)
    case = config.mode
    rows = [(case, months, est) for months, est in sorted(estimates.items())]
    return [csvio.export_probability_table(rows, out_dir / "fig_duration_sweep.csv")]


_HANDLERS = {
    "simulate": _cmd_simulate,
    "detect": _cmd_detect,
    "bill": _cmd_bill,
    "table1": _cmd_table1,
    "fig-corr": _cmd_fig_corr,
    "fig-concentration": _cmd_fig_concentration,
    "fig-duration-sweep": _cmd_fig_duration_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load(args)
        out_dir = Path(args.out_dir)
        start = time.perf_counter()
        outputs = _HANDLERS[args.command](config, out_dir, args)
        elapsed = time.perf_counter() - start
        manifest = RunManifest(
            command=args.command,
            master_seed=config.master_seed,
            config_text=dumps_config(config),
            outputs=[str(p) for p in outputs],
            wall_clock_seconds=elapsed,
        )
        manifest_path = out_dir / f"{args.command.replace('-', '_')}_manifest.json"
        write_manifest(manifest, manifest_path)
    except GridwatchError as exc:
        print(f"gridwatch: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"gridwatch: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
