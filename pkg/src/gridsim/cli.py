"""Command-line entry points: run a scenario, fit recovery costs, convert sigma.

Subcommands:

    gridsim run --scenario FILE --out DIR [--attempts-log]
    gridsim fit --samples FILE.csv --modes N [--seed S]
    gridsim sigma (--rate X | --sigma X) --convention {math,industrial}

`run` writes `run_summary.json` (stable key order, byte-identical for a
given scenario + seed), `recovery_costs.csv`, and with --attempts-log a
full `attempts.csv`. All files are UTF-8 with LF line endings. Every
error path prints exactly one `error: ...` line to stderr and exits 1.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

from . import __version__
from .engine import ideal_makespan, run
from .errors import GridsimError
from .kernels import BACKEND
from .metrics import (
    SigmaConvention,
    defect_report,
    overhead_report,
    rate_from_sigma,
    recovery_cost_samples,
    sigma_from_rate,
)
from .scenario_io import (
    bundled_scenario_names,
    load_bundled_scenario,
    load_scenario,
    scenario_to_dict,
)
from .weibull import FitOptions, fit_mixture, ks_statistic

__all__ = ["main", "cmd_run", "cmd_fit", "cmd_sigma", "build_parser"]


class _CliError(Exception):
    """Raised for argument problems so main() can print a single line."""


class _Parser(argparse.ArgumentParser):
    # argparse default prints usage + message; the contract is one line.
    def error(self, message):
        raise _CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridsim", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version",
        version=f"gridsim {__version__} (kernel backend: {BACKEND})",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_run = sub.add_parser("run", help="simulate a scenario and write reports")
    p_run.add_argument("--scenario", required=True,
                       help="scenario file path, or a bundled name like scenario_2011.cfg")
    p_run.add_argument("--out", required=True, help="output directory (created if absent)")
    p_run.add_argument("--attempts-log", action="store_true",
                       help="also write attempts.csv (one row per attempt)")

    p_fit = sub.add_parser("fit", help="fit a Weibull mixture to recovery costs")
    p_fit.add_argument("--samples", required=True,
                       help="CSV of samples (single column, or a recovery_cpu_hours column)")
    p_fit.add_argument("--modes", required=True, type=int, help="number of mixture components")
    p_fit.add_argument("--seed", type=int, default=0, help="restart-jitter seed (default 0)")

    p_sigma = sub.add_parser("sigma", help="convert defect rate <-> sigma level")
    group = p_sigma.add_mutually_exclusive_group(required=True)
    group.add_argument("--rate", type=float, help="defect rate to convert to sigma")
    group.add_argument("--sigma", type=float, help="sigma level to convert to rate")
    p_sigma.add_argument("--convention", required=True, choices=("math", "industrial"))

    return parser


def _resolve_scenario(spec: str):
    if os.path.exists(spec):
        return load_scenario(spec)
    if "/" not in spec and "\\" not in spec:
        try:
            names = bundled_scenario_names()
        except Exception:
            names = []
        if spec in names:
            return load_bundled_scenario(spec)
    raise _CliError(f"scenario not found: {spec!r} is neither a file nor a bundled name")


def _json_float(value: float):
    # JSON has no inf; report saturated sigmas as null.
    return None if math.isinf(value) else value


def _summary_document(scenario, result, ideal, overheads, defects, zero_fraction):
    return {
        "tool": "gridsim",
        "version": __version__,
        "seed": scenario.seed,
        "scenario": scenario_to_dict(scenario),
        "results": {
            "makespan": result.makespan,
            "ideal_makespan": ideal,
            "time_overhead": overheads.time_overhead,
            "cpu_successful": result.cpu_successful,
            "cpu_wasted": result.cpu_wasted,
            "cpu_overhead": overheads.cpu_overhead,
            "events": {
                "total": result.events_total,
                "succeeded": result.events_succeeded,
                "lost": result.events_lost,
                "recovery_queue": result.events_recovery_queue,
                "corrupted": result.events_corrupted,
            },
            "defect_rate": defects.defect_rate,
            "defect_rate_after_recovery": defects.defect_rate_after_recovery,
            "sigma_math": _json_float(defects.sigma_math),
            "sigma_industrial": _json_float(defects.sigma_industrial),
            "tasks": len(result.tasks),
            "attempts": len(result.attempt_log),
            "recovery_zero_task_fraction": zero_fraction,
        },
    }


def cmd_run(scenario_path: str, output_dir: str, attempts_log: bool = False) -> int:
    scenario = _resolve_scenario(scenario_path)
    result = run(scenario)
    result.check()
    ideal = ideal_makespan(scenario)
    overheads = overhead_report(result, ideal)
    defects = defect_report(result)
    recovery = recovery_cost_samples(result)

    os.makedirs(output_dir, exist_ok=True)
    doc = _summary_document(scenario, result, ideal, overheads, defects,
                            recovery.zero_fraction)
    summary_path = os.path.join(output_dir, "run_summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(doc, indent=2))
        handle.write("\n")

    with open(os.path.join(output_dir, "recovery_costs.csv"),
              "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["task_id", "recovery_cpu_hours"])
        for task_id, hours in enumerate(recovery.values):
            writer.writerow([task_id, repr(hours)])

    if attempts_log:
        with open(os.path.join(output_dir, "attempts.csv"),
                  "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["job_id", "attempt", "site_id", "outcome", "stage",
                             "cpu_seconds", "wall_start", "wall_end",
                             "events_corrupted"])
            for job_id, att in result.attempt_log:
                stage = att.outcome.stage.value if att.outcome.stage is not None else ""
                writer.writerow([
                    job_id, att.attempt_index, att.site_id,
                    att.outcome.kind.value, stage,
                    repr(att.cpu_consumed), repr(att.wall_start),
                    repr(att.wall_end), att.events_corrupted,
                ])

    print(f"makespan: {result.makespan} s  (ideal {ideal} s, "
          f"time overhead {overheads.time_overhead:.6f})")
    print(f"cpu: successful {result.cpu_successful} core-s, "
          f"wasted {result.cpu_wasted} core-s, overhead {overheads.cpu_overhead:.6f}")
    print(f"events: {result.events_total} total, {result.events_succeeded} succeeded, "
          f"{result.events_lost} lost, {result.events_recovery_queue} recovery-queue, "
          f"{result.events_corrupted} corrupted")
    print(f"defect rate: {defects.defect_rate} "
          f"(after recovery {defects.defect_rate_after_recovery}, "
          f"sigma {defects.sigma_math})")
    wrote = ["run_summary.json", "recovery_costs.csv"]
    if attempts_log:
        wrote.append("attempts.csv")
    print(f"wrote {', '.join(wrote)} to {output_dir}")
    return 0


def _read_samples_csv(path: str) -> list:
    """One value per row; multi-column files need a recovery_cpu_hours column."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if row and any(c.strip() for c in row)]
    if not rows:
        raise _CliError(f"{path}: no sample rows found")

    column = 0
    first = rows[0]
    has_header = not _is_number(first[0])
    if len(first) > 1:
        if not has_header:
            raise _CliError(f"{path}: multi-column CSV needs a header naming recovery_cpu_hours")
        lowered = [cell.strip().lower() for cell in first]
        if "recovery_cpu_hours" not in lowered:
            raise _CliError(f"{path}: no recovery_cpu_hours column in header {first!r}")
        column = lowered.index("recovery_cpu_hours")
    if has_header:
        rows = rows[1:]

    values = []
    for lineno, row in enumerate(rows, start=2 if has_header else 1):
        cell = row[column] if column < len(row) else ""
        if not _is_number(cell):
            raise _CliError(f"{path}:{lineno}: not a number: {cell!r}")
        values.append(float(cell))
    return values


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except (TypeError, ValueError):
        return False
    return True


def cmd_fit(samples_path: str, n_modes: int, seed: int = 0) -> int:
    raw = _read_samples_csv(samples_path)
    positive = [v for v in raw if v > 0.0]
    zeros = len(raw) - len(positive)
    if zeros:
        print(f"samples: {len(raw)} read, {zeros} zero-cost excluded "
              f"(fraction {zeros / len(raw):.4f}), {len(positive)} fitted")
    else:
        print(f"samples: {len(raw)} read, all positive")

    opts = FitOptions(seed=seed)
    fit = fit_mixture(positive, n_modes, opts)
    for idx, (weight, params) in enumerate(fit.model.components, start=1):
        print(f"component {idx}: weight {weight:.6f}, "
              f"shape {params.shape:.6f}, scale {params.scale:.6f}")
    print(f"log-likelihood: {fit.log_likelihood:.6f}")
    print(f"ks-statistic: {ks_statistic(positive, fit.model):.6f}")
    print(f"converged: {'yes' if fit.converged else 'no'} "
          f"({fit.n_iterations} iterations)")

    # Model-order context: likelihoods for one to three components.
    comparison = []
    for modes in (1, 2, 3):
        if modes == n_modes:
            comparison.append(f"{modes}: {fit.log_likelihood:.3f}")
            continue
        try:
            other = fit_mixture(positive, modes, opts)
            comparison.append(f"{modes}: {other.log_likelihood:.3f}")
        except GridsimError:
            comparison.append(f"{modes}: n/a")
    print("log-likelihood by modes: " + ", ".join(comparison))
    return 0


def cmd_sigma(rate=None, sigma=None, convention: str = "math") -> int:
    conv = (SigmaConvention.MATHEMATICAL if convention == "math"
            else SigmaConvention.INDUSTRIAL)
    if (rate is None) == (sigma is None):
        raise _CliError("exactly one of --rate or --sigma is required")
    if rate is not None:
        print(sigma_from_rate(rate, conv))
    else:
        print(rate_from_sigma(sigma, conv))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _CliError("a command is required (run, fit, or sigma)")
        if args.command == "run":
            return cmd_run(args.scenario, args.out, args.attempts_log)
        if args.command == "fit":
            return cmd_fit(args.samples, args.modes, args.seed)
        return cmd_sigma(args.rate, args.sigma, args.convention)
    except (_CliError, GridsimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
