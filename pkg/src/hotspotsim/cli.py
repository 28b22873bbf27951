"""Command line front end.

Runs one scenario file, or every ``*.yaml``/``*.yml`` file in a
directory (each into its own subdirectory of the output directory).
Writes the four delimited reports and, unless disabled, the two
figures. Exit status: 0 for a clean run, 2 when the run finished but
recorded QoS violations, 1 for usage or input errors.
"""
from __future__ import annotations

import argparse
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import yaml

from .figures import render_figures
from .reports import emit_reports
from .scenario_io import load_scenario
from .simulator import RunResult, ScenarioError, compare, run, run_baseline
from .units import US_PER_S, format_fraction, format_mj

_FIGURE_LOCK = threading.Lock()


@dataclass(frozen=True)
class RunConfig:
    scheduler: str | None = None
    baseline: bool = False
    out: str = "out"
    seed: int = 0
    figures: bool = True


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems with exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hotspotsim",
        description=(
            "Simulate energy-aware scheduling of media streams to"
            " multi-radio clients and report energy and QoS."
        ),
    )
    parser.add_argument(
        "--scenario",
        required=True,
        help="scenario file, or a directory of scenario files to run in one go",
    )
    parser.add_argument(
        "--scheduler",
        choices=("edf", "wfq"),
        default=None,
        help="override the scheduler named in the scenario",
    )
    parser.add_argument(
        "--baseline",
        action="store_true",
        help="also run the always-on baseline and report savings",
    )
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="random seed (reserved; the simulation itself is deterministic)",
    )
    parser.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render power trace and energy summary figures",
    )
    return parser


def _summary_lines(path: str, result: RunResult, baseline, savings) -> list[str]:
    e = result.energy
    s = result.scenario
    lines = [f"scenario {path}"]
    lines.append(
        f"  {s.scheduler.kind} over {s.horizon_us / US_PER_S:g} s,"
        f" {len(s.clients)} clients, {len(result.schedule.bursts)} bursts"
    )
    mj = format_mj(e.total_energy_pj)
    mw = format_fraction(e.avg_power_mw(e.total_energy_pj))
    lines.append(f"  scheduled energy {mj} mJ, avg power {mw} mW")
    if baseline is not None:
        total = savings.get("total")
        cell = format_fraction(total) if total is not None else "undefined"
        lines.append(
            f"  baseline energy {format_mj(baseline.total_energy_pj)} mJ, savings {cell}"
        )
    q = result.qos
    lines.append(
        "  qos: "
        f"underflows {len(q.underflows)}, startup violations {len(q.startup_violations)},"
        f" deadline misses {len(q.deadline_misses)}, failures {len(q.failures)},"
        f" overflows {len(q.overflows)}, rejected {len(q.rejected)}"
    )
    lines.append(f"  switches {len(q.switches)}, wake gap conflicts {len(q.wake_conflicts)}")
    return lines


def _run_single(path: str, outdir: str, cfg: RunConfig) -> tuple[int, list[str], list[str]]:
    """Run one scenario file; returns (exit code, stdout lines, stderr lines)."""
    try:
        scenario = load_scenario(path)
        if cfg.scheduler is not None and scenario.scheduler.kind != cfg.scheduler:
            scenario = replace(scenario, scheduler=replace(scenario.scheduler, kind=cfg.scheduler))
        result = run(scenario)
        baseline = run_baseline(scenario) if cfg.baseline else None
        savings = compare(result.energy, baseline) if baseline is not None else None
        emit_reports(
            result.schedule,
            result.energy,
            result.qos,
            result.timelines,
            outdir,
            models=result.models,
            baseline=baseline,
        )
        if cfg.figures:
            with _FIGURE_LOCK:
                render_figures(result, outdir, baseline)
    except (ScenarioError, yaml.YAMLError, OSError) as exc:
        return 1, [], [f"error: {path}: {exc}"]
    lines = _summary_lines(path, result, baseline, savings)
    lines.append(f"  reports in {outdir}")
    return (2 if result.qos.violation_count else 0), lines, []


def _scenario_files(directory: str) -> list[str]:
    names = sorted(
        n for n in os.listdir(directory) if n.endswith((".yaml", ".yml"))
    )
    return [os.path.join(directory, n) for n in names]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 1
    cfg = RunConfig(
        scheduler=args.scheduler,
        baseline=args.baseline,
        out=args.out,
        seed=args.seed,
        figures=args.figures,
    )
    if os.path.isdir(args.scenario):
        files = _scenario_files(args.scenario)
        if not files:
            print(f"error: no scenario files in {args.scenario}", file=sys.stderr)
            return 1
        jobs = [
            (path, os.path.join(cfg.out, os.path.splitext(os.path.basename(path))[0]))
            for path in files
        ]
        with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
            results = list(pool.map(lambda j: _run_single(j[0], j[1], cfg), jobs))
        codes = []
        for code, out_lines, err_lines in results:
            codes.append(code)
            for line in out_lines:
                print(line)
            for line in err_lines:
                print(line, file=sys.stderr)
        if 1 in codes:
            return 1
        return 2 if 2 in codes else 0
    code, out_lines, err_lines = _run_single(args.scenario, cfg.out, cfg)
    for line in out_lines:
        print(line)
    for line in err_lines:
        print(line, file=sys.stderr)
    return code


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
