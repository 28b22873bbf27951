"""Delimited report files for one simulation run.

Four files, always with headers, rows fully ordered so repeated runs
produce byte-identical output:

    schedule.csv        one row per transmitted burst
    power_trace.csv     step series of interface power draw
    energy_summary.csv  energy and average power per interface, client
                        and in total, with baseline rows and savings
                        when a baseline report is supplied
    qos.csv             event log (violations and operational events)

Energy appears in millijoules and power in milliwatts, both printed as
exact decimals of the integer picojoule and microwatt ledgers. Savings
fractions are printed with six places, rounding half to even.
"""
from __future__ import annotations

import csv
import os
from fractions import Fraction
from typing import Mapping

from .power_model import StateTimeline, WnicModel
from .scheduler import Schedule
from .simulator import EnergyReport, QosReport, power_trace
from .units import format_fraction, format_mj, format_mw

SCHEDULE_CSV = "schedule.csv"
POWER_TRACE_CSV = "power_trace.csv"
ENERGY_SUMMARY_CSV = "energy_summary.csv"
QOS_CSV = "qos.csv"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_schedule(schedule: Schedule, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["client", "interface", "start_us", "end_us", "bytes"])
        for b in sorted(schedule.bursts, key=lambda b: (b.client, b.start_us, b.interface)):
            w.writerow([b.client, b.interface, b.start_us, b.end_us, b.bytes])


def write_power_trace(
    timelines: Mapping[tuple[str, str], StateTimeline],
    models: Mapping[tuple[str, str], WnicModel],
    path: str,
) -> None:
    steps = power_trace(timelines, models)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["client", "interface", "t_us", "power_mw"])
        for (client, iface) in sorted(steps):
            for t_us, uw in steps[(client, iface)]:
                w.writerow([client, iface, t_us, format_mw(uw)])


def _savings_cell(scheduled_pj: int, baseline_pj: int) -> str:
    if baseline_pj == 0:
        return format_fraction(Fraction(0)) if scheduled_pj == 0 else ""
    return format_fraction(1 - Fraction(scheduled_pj, baseline_pj))


def write_energy_summary(
    energy: EnergyReport, path: str, baseline: EnergyReport | None = None
) -> None:
    def rows_for(client: str, iface: str, scheduled_pj: int, baseline_pj: int | None):
        savings = "" if baseline_pj is None else _savings_cell(scheduled_pj, baseline_pj)
        yield [
            client,
            iface,
            "scheduled",
            format_mj(scheduled_pj),
            format_fraction(energy.avg_power_mw(scheduled_pj)),
            savings,
        ]
        if baseline_pj is not None:
            yield [
                client,
                iface,
                "baseline",
                format_mj(baseline_pj),
                format_fraction(baseline.avg_power_mw(baseline_pj)),
                "",
            ]

    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["client", "interface", "mode", "energy_mj", "avg_power_mw", "savings"])
        for key in sorted(energy.interfaces):
            client, iface = key
            base_pj = baseline.interfaces[key].energy_pj if baseline else None
            for row in rows_for(client, iface, energy.interfaces[key].energy_pj, base_pj):
                w.writerow(row)
        for client in energy.client_ids():
            base_pj = baseline.client_energy_pj(client) if baseline else None
            for row in rows_for(client, "all", energy.client_energy_pj(client), base_pj):
                w.writerow(row)
        base_pj = baseline.total_energy_pj if baseline else None
        for row in rows_for("all", "all", energy.total_energy_pj, base_pj):
            w.writerow(row)


def qos_rows(qos: QosReport) -> list[list]:
    rows: list[list] = []
    for s in qos.rejected:
        rows.append(
            ["admission_reject", s.client, s.start_us, f"bitrate {s.bitrate_bps} bps over capacity"]
        )
    for v in qos.startup_violations:
        if v.playback_us is None:
            rows.append(["startup_violation", v.client, v.limit_us, "playback never started"])
        else:
            rows.append(
                ["startup_violation", v.client, v.playback_us, f"playback after limit {v.limit_us}"]
            )
    for u in qos.underflows:
        rows.append(["underflow", u.client, u.t_us, "buffer empty before next delivery"])
    for o in qos.overflows:
        rows.append(["overflow", o.client, o.t_us, f"{o.excess_bytes} bytes over capacity"])
    for m in qos.deadline_misses:
        rows.append(
            ["deadline_miss", m.client, m.deadline_us, f"{m.bytes} bytes finished at {m.completed_us}"]
        )
    for f in qos.failures:
        rows.append(["burst_failure", f.client, f.t_us, f"{f.bytes} bytes: {f.reason}"])
    for s in qos.switches:
        rows.append(
            ["interface_switch", s.client, s.t_us, f"{s.from_interface} -> {s.to_interface}"]
        )
    for c in qos.wake_conflicts:
        rows.append(
            ["wake_gap_conflict", c.client, c.t_us, f"{c.interface}: gap {c.gap_us} us too short to sleep"]
        )
    rows.sort(key=lambda r: (r[2], r[0], r[1], r[3]))
    return rows


def write_qos(qos: QosReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["event", "client", "t_us", "detail"])
        w.writerows(qos_rows(qos))


def emit_reports(
    schedule: Schedule,
    energy: EnergyReport,
    qos: QosReport,
    timelines: Mapping[tuple[str, str], StateTimeline],
    outdir: str,
    *,
    models: Mapping[tuple[str, str], WnicModel],
    baseline: EnergyReport | None = None,
) -> dict[str, str]:
    """Write all four report files into outdir; returns name -> path."""
    os.makedirs(outdir, exist_ok=True)
    paths = {
        SCHEDULE_CSV: os.path.join(outdir, SCHEDULE_CSV),
        POWER_TRACE_CSV: os.path.join(outdir, POWER_TRACE_CSV),
        ENERGY_SUMMARY_CSV: os.path.join(outdir, ENERGY_SUMMARY_CSV),
        QOS_CSV: os.path.join(outdir, QOS_CSV),
    }
    write_schedule(schedule, paths[SCHEDULE_CSV])
    write_power_trace(timelines, models, paths[POWER_TRACE_CSV])
    write_energy_summary(energy, paths[ENERGY_SUMMARY_CSV], baseline)
    write_qos(qos, paths[QOS_CSV])
    return paths
