"""WNIC power-state machines and exact energy accounting.

A radio is modeled as a small set of named states (exactly one of which
can move data), a table of direct state-to-state transitions carrying a
latency and a lump energy cost, and two distinguished states:

    sleep_state  where the radio parks between scheduled bursts
    idle_state   the always-on listening state used by the baseline

Transition intervals appear in timelines as a reserved pseudo-state with
zero power; the lump cost from the transition table accounts for their
energy, so totals stay exact integers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

# Reserved timeline state for switching intervals. Zero power by definition;
# the lump energy of the transition is accounted separately.
TRANSITION_STATE = "transition"


@dataclass(frozen=True)
class PowerState:
    name: str
    power_uw: int
    can_transfer: bool = False


@dataclass(frozen=True)
class Transition:
    latency_us: int
    energy_pj: int


@dataclass(frozen=True)
class WnicModel:
    """One radio's power behavior plus its nominal transfer rate."""

    kind: str
    states: tuple[PowerState, ...]
    transitions: Mapping[tuple[str, str], Transition]
    active_throughput_bps: int
    sleep_state: str
    idle_state: str

    def state(self, name: str) -> PowerState:
        for s in self.states:
            if s.name == name:
                return s
        raise ValueError(f"unknown state: '{name}'")

    @property
    def active_state(self) -> PowerState:
        for s in self.states:
            if s.can_transfer:
                return s
        raise ValueError("model has no transfer-capable state")

    def power_uw(self, name: str) -> int:
        if name == TRANSITION_STATE:
            return 0
        return self.state(name).power_uw


@dataclass(frozen=True)
class Segment:
    """One contiguous interval spent in a single state.

    Transition segments use TRANSITION_STATE and record the state being
    entered in `toward`, which is what a power trace renders.
    """

    start_us: int
    end_us: int
    state: str
    toward: str | None = None


@dataclass(frozen=True)
class StateTimeline:
    segments: tuple[Segment, ...]

    def check(self, horizon_us: int | None = None) -> list[str]:
        problems = []
        prev_end = None
        for i, seg in enumerate(self.segments):
            if seg.end_us < seg.start_us:
                problems.append(f"segment {i} ends before it starts")
            if prev_end is not None and seg.start_us != prev_end:
                problems.append(f"gap or overlap before segment {i}")
            prev_end = seg.end_us
        if horizon_us is not None:
            if horizon_us == 0:
                if self.segments:
                    problems.append("nonempty timeline for zero horizon")
            elif not self.segments:
                problems.append("empty timeline for nonzero horizon")
            else:
                if self.segments[0].start_us != 0:
                    problems.append("first segment does not start at 0")
                if self.segments[-1].end_us != horizon_us:
                    problems.append("last segment does not end at the horizon")
        return problems

    def duration_by_state(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for seg in self.segments:
            out[seg.state] = out.get(seg.state, 0) + (seg.end_us - seg.start_us)
        return out

    def boundaries(self) -> set[int]:
        pts = {seg.start_us for seg in self.segments}
        if self.segments:
            pts.add(self.segments[-1].end_us)
        return pts


def validate_model(model: WnicModel) -> list[str]:
    """Return a list of problems; empty means the model is usable."""
    problems: list[str] = []
    if not model.states:
        return ["no states defined"]
    names = [s.name for s in model.states]
    seen = set()
    for n in names:
        if n in seen:
            problems.append(f"duplicate state name: '{n}'")
        seen.add(n)
    for s in model.states:
        if s.power_uw < 0:
            problems.append(f"negative power: state '{s.name}'")
        if s.name == TRANSITION_STATE:
            problems.append(f"reserved state name: '{TRANSITION_STATE}'")
    transfer = [s for s in model.states if s.can_transfer]
    if len(transfer) != 1:
        problems.append(f"exactly one state may transfer data, found {len(transfer)}")
    for ref, label in ((model.sleep_state, "sleep_state"), (model.idle_state, "idle_state")):
        if ref not in seen:
            problems.append(f"unknown state: {label} '{ref}'")
    for (frm, to), tr in model.transitions.items():
        for endpoint in (frm, to):
            if endpoint not in seen:
                problems.append(f"unknown state: transition endpoint '{endpoint}'")
        if tr.latency_us < 0:
            problems.append(f"negative latency: transition {frm} -> {to}")
        if tr.energy_pj < 0:
            problems.append(f"negative energy: transition {frm} -> {to}")
    if model.active_throughput_bps <= 0:
        problems.append("active_throughput_bps must be positive")
    if len(transfer) == 1 and model.sleep_state in seen:
        active = transfer[0].name
        if model.sleep_state != active:
            if (model.sleep_state, active) not in model.transitions:
                problems.append(
                    f"unreachable active state: no transition {model.sleep_state} -> {active}"
                )
            if (active, model.sleep_state) not in model.transitions:
                problems.append(
                    f"unreachable sleep state: no transition {active} -> {model.sleep_state}"
                )
    return problems


def energy_of_interval(model: WnicModel, state: str, duration_us: int) -> int:
    """Energy in pJ of holding `state` for `duration_us`. Exact."""
    if duration_us < 0:
        raise ValueError("negative duration")
    return model.power_uw(state) * duration_us


def transition_cost(model: WnicModel, frm: str, to: str) -> Transition:
    """Latency and lump energy of a direct transition.

    Same-state "transitions" are free. Any other pair must be listed in
    the model; chained hops are never synthesized.
    """
    model.state(frm)
    model.state(to)
    if frm == to:
        return Transition(0, 0)
    try:
        return model.transitions[(frm, to)]
    except KeyError:
        raise ValueError(f"no transition {frm} -> {to}") from None


def baseline_timeline(model: WnicModel, horizon_us: int) -> StateTimeline:
    """The always-listening reference: idle_state for the whole horizon."""
    if horizon_us < 0:
        raise ValueError("negative horizon")
    model.state(model.idle_state)
    if horizon_us == 0:
        return StateTimeline(())
    return StateTimeline((Segment(0, horizon_us, model.idle_state),))


def timeline_energy(
    model: WnicModel,
    timeline: StateTimeline,
    transitions_taken: Sequence[tuple[int, str, str]] = (),
) -> int:
    """Total energy in pJ: interval energy plus lump transition costs."""
    problems = timeline.check()
    if problems:
        raise ValueError("inconsistent timeline: " + "; ".join(problems))
    total = 0
    for seg in timeline.segments:
        total += energy_of_interval(model, seg.state, seg.end_us - seg.start_us)
    if transitions_taken:
        bounds = timeline.boundaries()
        for (t_us, frm, to) in transitions_taken:
            if t_us not in bounds:
                raise ValueError(
                    f"inconsistent timeline: transition at {t_us} not on a segment boundary"
                )
            total += transition_cost(model, frm, to).energy_pj
    return total
