"""Piecewise-constant link traces and hysteresis-based interface selection."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .power_model import WnicModel


@dataclass(frozen=True)
class TraceStep:
    t_us: int
    throughput_bps: int
    quality: float


@dataclass(frozen=True)
class LinkTrace:
    """Scripted link conditions for one (client, interface) pair.

    Steps are left-closed: a step holds from its start until the next
    step begins. Past the last step the trace clamps to the final value.
    """

    client: str
    interface: str
    steps: tuple[TraceStep, ...]

    def check(self) -> list[str]:
        problems = []
        if not self.steps:
            problems.append("trace has no steps")
            return problems
        if self.steps[0].t_us != 0:
            problems.append("first step must start at t=0")
        prev = None
        for i, step in enumerate(self.steps):
            if prev is not None and step.t_us <= prev:
                problems.append(f"step {i} does not advance time")
            prev = step.t_us
            if step.throughput_bps < 0:
                problems.append(f"step {i}: negative throughput")
            if not (0.0 <= step.quality <= 1.0):
                problems.append(f"step {i}: quality outside [0, 1]")
        return problems


def step_at(trace: LinkTrace, t_us: int) -> TraceStep:
    if t_us < 0:
        raise ValueError("negative time")
    if not trace.steps:
        raise ValueError("trace has no steps")
    starts = [s.t_us for s in trace.steps]
    idx = bisect_right(starts, t_us) - 1
    if idx < 0:
        idx = 0
    return trace.steps[idx]


def throughput_at(trace: LinkTrace, t_us: int) -> int:
    return step_at(trace, t_us).throughput_bps


def quality_at(trace: LinkTrace, t_us: int) -> float:
    return step_at(trace, t_us).quality


@dataclass(frozen=True)
class SelectionPolicy:
    """Knobs of the interface chooser.

    min_dwell and hysteresis_margin exist to stop flapping: once a client
    lands on an interface it stays there until the dwell passes and a
    challenger shows a real quality advantage. A current interface that no
    longer meets the requirement is abandoned immediately.
    """

    quality_floor: float = 0.0
    hysteresis_margin: float = 0.1
    min_dwell_us: int = 5_000_000
    preference: tuple[str, ...] | None = None


class NoViableInterfaceError(RuntimeError):
    pass


def preference_order(models: Mapping[str, WnicModel], policy: SelectionPolicy) -> tuple[str, ...]:
    """Interfaces cheapest-first; an explicit policy list wins."""

    def by_energy_per_bit(name: str):
        m = models[name]
        return (Fraction(m.active_state.power_uw, m.active_throughput_bps), name)

    ranked = sorted(models, key=by_energy_per_bit)
    if policy.preference is None:
        return tuple(ranked)
    listed = [i for i in policy.preference if i in models]
    return tuple(listed) + tuple(i for i in ranked if i not in listed)


def select_interface(
    traces: Mapping[str, LinkTrace],
    t_us: int,
    required_bps: int,
    policy: SelectionPolicy,
    models: Mapping[str, WnicModel],
    current: str | None = None,
    last_switch_us: int | None = None,
) -> str:
    """Pick the interface to carry a transfer decided at time t_us.

    Returns the first interface in preference order that meets the
    required throughput and the quality floor. A qualifying current
    interface is kept while the dwell timer runs or while no challenger
    beats its quality by at least the hysteresis margin.
    """
    if required_bps <= 0:
        raise ValueError("required_bps must be positive")

    def qualifies(name: str) -> bool:
        trace = traces.get(name)
        if trace is None:
            return False
        return (
            throughput_at(trace, t_us) >= required_bps
            and quality_at(trace, t_us) >= policy.quality_floor
        )

    candidates = [i for i in preference_order(models, policy) if qualifies(i)]
    if not candidates:
        raise NoViableInterfaceError(
            f"no viable interface at t={t_us} for {required_bps} bps"
        )
    best = candidates[0]
    if current is not None and current in candidates and best != current:
        if last_switch_us is not None and t_us - last_switch_us < policy.min_dwell_us:
            return current
        advantage = quality_at(traces[best], t_us) - quality_at(traces[current], t_us)
        if advantage < policy.hysteresis_margin:
            return current
    if current is not None and current in candidates and best == current:
        return current
    return best
