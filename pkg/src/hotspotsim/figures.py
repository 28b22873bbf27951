"""Figure rendering to image files.

Two plots per run: the per-interface power draw over time as a step
plot with transmission bursts shaded, and a bar chart of average power
per client against the always-on baseline. Matplotlib is imported
lazily with the Agg backend so headless runs and non-plotting callers
never touch a display.
"""
from __future__ import annotations

import os

from .simulator import EnergyReport, RunResult, power_trace
from .units import US_PER_S, UW_PER_MW

POWER_TRACE_PNG = "power_trace.png"
ENERGY_SUMMARY_PNG = "energy_summary.png"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_power_trace(result: RunResult, path: str) -> None:
    plt = _pyplot()
    models = {
        (c.id, iface): m for c in result.scenario.clients for iface, m in c.models.items()
    }
    steps = power_trace(result.timelines, models)
    horizon_s = result.scenario.horizon_us / US_PER_S
    fig, ax = plt.subplots(figsize=(10, 4.5))
    for key in sorted(steps):
        series = steps[key]
        if not series:
            continue
        xs = [t / US_PER_S for t, _ in series] + [horizon_s]
        ys = [p / UW_PER_MW for _, p in series]
        ys = ys + [ys[-1]]
        ax.step(xs, ys, where="post", label=f"{key[0]}/{key[1]}")
    shaded = set()
    for b in result.schedule.bursts:
        span = (b.start_us, b.end_us)
        if span in shaded:
            continue
        shaded.add(span)
        ax.axvspan(b.start_us / US_PER_S, b.end_us / US_PER_S, color="0.85", zorder=0)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("power (mW)")
    ax.set_xlim(0, max(horizon_s, 1e-6))
    ax.set_title("interface power draw (bursts shaded)")
    if steps:
        ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_energy_summary(
    result: RunResult, path: str, baseline: EnergyReport | None = None
) -> None:
    plt = _pyplot()
    energy = result.energy
    clients = energy.client_ids()
    sched = [float(energy.avg_power_mw(energy.client_energy_pj(c))) for c in clients]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    xs = range(len(clients))
    width = 0.38
    if baseline is not None:
        base = [float(baseline.avg_power_mw(baseline.client_energy_pj(c))) for c in clients]
        ax.bar([x - width / 2 for x in xs], sched, width, label="scheduled")
        ax.bar([x + width / 2 for x in xs], base, width, label="always-on baseline")
        ax.legend()
    else:
        ax.bar(list(xs), sched, width * 2, label="scheduled")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(clients)
    ax.set_ylabel("average power (mW)")
    ax.set_title("average power per client")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_figures(
    result: RunResult, outdir: str, baseline: EnergyReport | None = None
) -> dict[str, str]:
    """Render both figures into outdir; returns name -> path."""
    os.makedirs(outdir, exist_ok=True)
    paths = {
        POWER_TRACE_PNG: os.path.join(outdir, POWER_TRACE_PNG),
        ENERGY_SUMMARY_PNG: os.path.join(outdir, ENERGY_SUMMARY_PNG),
    }
    render_power_trace(result, paths[POWER_TRACE_PNG])
    render_energy_summary(result, paths[ENERGY_SUMMARY_PNG], baseline)
    return paths
