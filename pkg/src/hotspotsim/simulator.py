"""End-to-end run: admit, derive bursts, schedule, account energy and QoS.

The flow for one scenario:

    admission control   bitrate sum against server capacity
    burst derivation    per admitted stream
    dispatch            EDF or WFQ over the scripted link traces
    timelines           per (client, interface) power-state history
    reports             exact energy ledger plus QoS event log

Timelines place the wake transition so it ends exactly when a burst
starts. When two bursts on one interface sit closer together than the
sleep-plus-wake latency, the interface simply stays active across the
gap; that is logged as a wake-gap conflict, not an error. Unused
interfaces spend the whole horizon in their sleep state. The always-on
baseline holds every configured interface in its idle state instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .link_model import LinkTrace, SelectionPolicy
from .power_model import (
    Segment,
    StateTimeline,
    TRANSITION_STATE,
    WnicModel,
    baseline_timeline,
    timeline_energy,
    transition_cost,
    validate_model,
)
from .scheduler import (
    Burst,
    BurstFailure,
    DeadlineMiss,
    InterfaceSwitch,
    OverflowEvent,
    Schedule,
    StartupViolation,
    StreamSpec,
    UnderflowEvent,
    admit_client,
    check_feasibility,
    default_burst_bytes,
    derive_bursts,
    schedule_edf,
    schedule_wfq,
)
from .units import UW_PER_MW


class ScenarioError(ValueError):
    """Raised for scenarios that fail validation; carries all problems."""

    def __init__(self, problems: Sequence[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass(frozen=True)
class ClientSpec:
    id: str
    models: Mapping[str, WnicModel]
    battery: float = 1.0  # recorded for reports; scheduling ignores it


@dataclass(frozen=True)
class SchedulerConfig:
    kind: str = "edf"
    weights: Mapping[str, Fraction] = field(default_factory=dict)
    burst_bytes: int | None = None


@dataclass(frozen=True)
class Scenario:
    horizon_us: int
    capacity_bps: int
    clients: tuple[ClientSpec, ...]
    streams: tuple[StreamSpec, ...]
    links: tuple[LinkTrace, ...]
    scheduler: SchedulerConfig = SchedulerConfig()
    policy: SelectionPolicy = SelectionPolicy()

    def validate(self) -> list[str]:
        problems: list[str] = []
        if self.horizon_us < 0:
            problems.append("horizon must be nonnegative")
        if self.capacity_bps <= 0:
            problems.append("capacity_bps must be positive")
        ids = [c.id for c in self.clients]
        seen: set[str] = set()
        for cid in ids:
            if not cid:
                problems.append("empty client id")
            if cid in seen:
                problems.append(f"duplicate client id: '{cid}'")
            seen.add(cid)
        for client in self.clients:
            if not (0.0 <= client.battery <= 1.0):
                problems.append(f"client '{client.id}': battery outside [0, 1]")
            for iface, model in client.models.items():
                for msg in validate_model(model):
                    problems.append(f"client '{client.id}' interface '{iface}': {msg}")
        streamed: set[str] = set()
        for s in self.streams:
            where = f"stream for '{s.client}'"
            if s.client not in seen:
                problems.append(f"{where}: unknown client")
            if s.client in streamed:
                problems.append(f"{where}: more than one stream per client")
            streamed.add(s.client)
            if s.bitrate_bps <= 0:
                problems.append(f"{where}: bitrate must be positive")
            if s.start_us < 0 or s.duration_us < 0:
                problems.append(f"{where}: negative start or duration")
            if not (0 < s.prebuffer_bytes <= s.buffer_capacity_bytes):
                problems.append(f"{where}: prebuffer must fit the buffer")
            if s.max_startup_latency_us <= 0:
                problems.append(f"{where}: max_startup_latency must be positive")
            if s.start_us + s.duration_us > self.horizon_us:
                problems.append(f"{where}: runs past the horizon")
            if self.scheduler.burst_bytes is not None and (
                self.scheduler.burst_bytes > s.buffer_capacity_bytes
            ):
                problems.append(f"{where}: configured burst_bytes exceeds its buffer")
        traced: set[tuple[str, str]] = set()
        models_by_client = {c.id: c.models for c in self.clients}
        for trace in self.links:
            where = f"link {trace.client}/{trace.interface}"
            if trace.client not in seen:
                problems.append(f"{where}: unknown client")
            elif trace.interface not in models_by_client[trace.client]:
                problems.append(f"{where}: client has no model for this interface")
            if (trace.client, trace.interface) in traced:
                problems.append(f"{where}: duplicate trace")
            traced.add((trace.client, trace.interface))
            for msg in trace.check():
                problems.append(f"{where}: {msg}")
        if self.scheduler.kind not in ("edf", "wfq"):
            problems.append(f"unknown scheduler kind: '{self.scheduler.kind}'")
        for cid, w in self.scheduler.weights.items():
            if cid not in seen:
                problems.append(f"weight for unknown client '{cid}'")
            if w <= 0:
                problems.append(f"weight for '{cid}' must be positive")
        if self.scheduler.burst_bytes is not None and self.scheduler.burst_bytes <= 0:
            problems.append("burst_bytes must be positive")
        p = self.policy
        if not (0.0 <= p.quality_floor <= 1.0):
            problems.append("quality_floor outside [0, 1]")
        if p.hysteresis_margin < 0:
            problems.append("hysteresis_margin must be nonnegative")
        if p.min_dwell_us < 0:
            problems.append("min_dwell must be nonnegative")
        return problems


@dataclass(frozen=True)
class WakeGapConflict:
    client: str
    interface: str
    t_us: int
    gap_us: int


@dataclass
class InterfaceEnergy:
    time_in_state_us: dict[str, int]
    transition_count: int
    energy_pj: int
    avg_power_mw: Fraction


@dataclass
class EnergyReport:
    horizon_us: int
    interfaces: dict[tuple[str, str], InterfaceEnergy]
    savings_vs_baseline: dict[str, Fraction | None] | None = None

    def client_ids(self) -> list[str]:
        return sorted({client for (client, _) in self.interfaces})

    def client_energy_pj(self, client: str) -> int:
        return sum(e.energy_pj for (c, _), e in self.interfaces.items() if c == client)

    @property
    def total_energy_pj(self) -> int:
        return sum(e.energy_pj for e in self.interfaces.values())

    def avg_power_mw(self, energy_pj: int) -> Fraction:
        if self.horizon_us == 0:
            return Fraction(0)
        return Fraction(energy_pj, UW_PER_MW * self.horizon_us)


@dataclass
class QosReport:
    underflows: list[UnderflowEvent] = field(default_factory=list)
    startup_latency_us: dict[str, int | None] = field(default_factory=dict)
    startup_violations: list[StartupViolation] = field(default_factory=list)
    deadline_misses: list[DeadlineMiss] = field(default_factory=list)
    switches: list[InterfaceSwitch] = field(default_factory=list)
    failures: list[BurstFailure] = field(default_factory=list)
    overflows: list[OverflowEvent] = field(default_factory=list)
    rejected: list[StreamSpec] = field(default_factory=list)
    wake_conflicts: list[WakeGapConflict] = field(default_factory=list)

    @property
    def violation_count(self) -> int:
        # wake-gap conflicts and switches are operational events, not
        # violations; rejections and misses degrade service, so they count
        return (
            len(self.underflows)
            + len(self.startup_violations)
            + len(self.deadline_misses)
            + len(self.failures)
            + len(self.overflows)
            + len(self.rejected)
        )


@dataclass
class RunResult:
    scenario: Scenario
    schedule: Schedule
    energy: EnergyReport
    qos: QosReport
    timelines: dict[tuple[str, str], StateTimeline]
    transitions: dict[tuple[str, str], list[tuple[int, str, str]]]

    @property
    def models(self) -> dict[tuple[str, str], WnicModel]:
        """Power model per (client, interface), keyed like the timelines."""
        return {
            (c.id, i): m for c in self.scenario.clients for i, m in c.models.items()
        }


def build_timeline(
    model: WnicModel, bursts: Sequence[Burst], horizon_us: int
) -> tuple[StateTimeline, list[tuple[int, str, str]], list[tuple[int, int]]]:
    """Power-state history for one interface given its scheduled bursts.

    Returns the timeline, the transitions taken as (time, from, to), and
    wake-gap conflicts as (burst_start, gap). Bursts must lie within the
    horizon and not overlap; both hold for dispatcher output.
    """
    sleep = model.sleep_state
    active = model.active_state.name
    if horizon_us == 0:
        return StateTimeline(()), [], []
    if not bursts:
        return StateTimeline((Segment(0, horizon_us, sleep),)), [], []
    wake = transition_cost(model, sleep, active)
    settle = transition_cost(model, active, sleep)
    segments: list[Segment] = []
    transitions: list[tuple[int, str, str]] = []
    conflicts: list[tuple[int, int]] = []

    def emit(start: int, end: int, state: str, toward: str | None = None) -> None:
        if end <= start:
            return
        if segments and segments[-1].state == state and segments[-1].toward == toward:
            segments[-1] = replace(segments[-1], end_us=end)
        else:
            segments.append(Segment(start, end, state, toward))

    def emit_wake(at: int) -> None:
        if sleep == active:
            return
        emit(at, at + wake.latency_us, TRANSITION_STATE, active)
        transitions.append((at, sleep, active))

    ordered = sorted(bursts, key=lambda b: b.start_us)
    first = ordered[0]
    if first.start_us >= wake.latency_us:
        emit(0, first.start_us - wake.latency_us, sleep)
        emit_wake(first.start_us - wake.latency_us)
    else:
        # no room to wake after t=0: the interface rides out the wait active
        conflicts.append((first.start_us, first.start_us))
        emit(0, first.start_us, active)
    cursor = first.start_us
    for i, burst in enumerate(ordered):
        emit(cursor, burst.end_us, active)
        cursor = burst.end_us
        nxt = ordered[i + 1].start_us if i + 1 < len(ordered) else None
        if nxt is not None:
            gap = nxt - cursor
            if gap < settle.latency_us + wake.latency_us:
                conflicts.append((nxt, gap))
                emit(cursor, nxt, active)
            else:
                emit(cursor, cursor + settle.latency_us, TRANSITION_STATE, sleep)
                transitions.append((cursor, active, sleep))
                emit(cursor + settle.latency_us, nxt - wake.latency_us, sleep)
                emit_wake(nxt - wake.latency_us)
            cursor = nxt
    if cursor < horizon_us:
        if sleep == active:
            emit(cursor, horizon_us, sleep)
        elif cursor + settle.latency_us <= horizon_us:
            emit(cursor, cursor + settle.latency_us, TRANSITION_STATE, sleep)
            transitions.append((cursor, active, sleep))
            emit(cursor + settle.latency_us, horizon_us, sleep)
        else:
            # horizon cuts the settle transition short; lump cost still paid
            emit(cursor, horizon_us, TRANSITION_STATE, sleep)
            transitions.append((cursor, active, sleep))
    return StateTimeline(tuple(segments)), transitions, conflicts


def _energy_report(
    scenario: Scenario,
    timelines: Mapping[tuple[str, str], StateTimeline],
    transitions: Mapping[tuple[str, str], list[tuple[int, str, str]]],
) -> EnergyReport:
    models = {(c.id, iface): m for c in scenario.clients for iface, m in c.models.items()}
    report = EnergyReport(scenario.horizon_us, {})
    for key in sorted(timelines):
        model = models[key]
        tl = timelines[key]
        taken = transitions.get(key, [])
        pj = timeline_energy(model, tl, taken)
        report.interfaces[key] = InterfaceEnergy(
            time_in_state_us=tl.duration_by_state(),
            transition_count=len(taken),
            energy_pj=pj,
            avg_power_mw=report.avg_power_mw(pj),
        )
    return report


def run(scenario: Scenario) -> RunResult:
    """Simulate one scenario under its configured scheduler."""
    problems = scenario.validate()
    if problems:
        raise ScenarioError(problems)
    load = 0
    admitted: list[StreamSpec] = []
    rejected: list[StreamSpec] = []
    for stream in scenario.streams:
        if admit_client(load, scenario.capacity_bps, stream):
            admitted.append(stream)
            load += stream.bitrate_bps
        else:
            rejected.append(stream)
    requests = []
    for stream in admitted:
        size = scenario.scheduler.burst_bytes or default_burst_bytes(stream)
        requests.extend(derive_bursts(stream, size))
    traces: dict[str, dict[str, LinkTrace]] = {}
    for trace in scenario.links:
        traces.setdefault(trace.client, {})[trace.interface] = trace
    models = {c.id: dict(c.models) for c in scenario.clients}
    if scenario.scheduler.kind == "wfq":
        weights = {
            c.id: Fraction(scenario.scheduler.weights.get(c.id, 1)) for c in scenario.clients
        }
        schedule = schedule_wfq(
            requests, weights, traces, scenario.policy, models, scenario.capacity_bps
        )
    else:
        schedule = schedule_edf(requests, traces, scenario.policy, models)
    by_iface: dict[tuple[str, str], list[Burst]] = {}
    for b in schedule.bursts:
        by_iface.setdefault((b.client, b.interface), []).append(b)
    timelines: dict[tuple[str, str], StateTimeline] = {}
    transitions: dict[tuple[str, str], list[tuple[int, str, str]]] = {}
    conflicts: list[WakeGapConflict] = []
    for client in scenario.clients:
        for iface in sorted(client.models):
            tl, taken, confl = build_timeline(
                client.models[iface], by_iface.get((client.id, iface), []), scenario.horizon_us
            )
            timelines[(client.id, iface)] = tl
            transitions[(client.id, iface)] = taken
            conflicts.extend(
                WakeGapConflict(client.id, iface, at, gap) for (at, gap) in confl
            )
    energy = _energy_report(scenario, timelines, transitions)
    verdict = check_feasibility(schedule, admitted)
    qos = QosReport(
        underflows=verdict.underflows,
        startup_latency_us=verdict.startup_latency_us,
        startup_violations=verdict.startup_violations,
        deadline_misses=list(schedule.misses),
        switches=list(schedule.switches),
        failures=list(schedule.failures),
        overflows=verdict.overflows,
        rejected=rejected,
        wake_conflicts=conflicts,
    )
    return RunResult(scenario, schedule, energy, qos, timelines, transitions)


def run_baseline(scenario: Scenario) -> EnergyReport:
    """Always-on reference: every configured interface idles all horizon."""
    problems = scenario.validate()
    if problems:
        raise ScenarioError(problems)
    timelines = {
        (c.id, iface): baseline_timeline(model, scenario.horizon_us)
        for c in scenario.clients
        for iface, model in c.models.items()
    }
    return _energy_report(scenario, timelines, {})


def compare(scheduled: EnergyReport, baseline: EnergyReport) -> dict[str, Fraction | None]:
    """Savings fraction 1 - scheduled/baseline per client plus 'total'.

    A zero-energy baseline with zero scheduled energy counts as zero
    savings; with nonzero scheduled energy the ratio is undefined (None).
    Also stored on the scheduled report.
    """
    if set(scheduled.client_ids()) != set(baseline.client_ids()):
        raise ValueError("reports cover different clients")

    def savings(s: int, b: int) -> Fraction | None:
        if b == 0:
            return Fraction(0) if s == 0 else None
        return 1 - Fraction(s, b)

    out: dict[str, Fraction | None] = {}
    for client in scheduled.client_ids():
        out[client] = savings(
            scheduled.client_energy_pj(client), baseline.client_energy_pj(client)
        )
    out["total"] = savings(scheduled.total_energy_pj, baseline.total_energy_pj)
    scheduled.savings_vs_baseline = out
    return out


def power_trace(
    timelines: Mapping[tuple[str, str], StateTimeline],
    models: Mapping[tuple[str, str], WnicModel],
) -> dict[tuple[str, str], list[tuple[int, int]]]:
    """Step series (t_us, power_uw) per (client, interface).

    Transition intervals are drawn at the level of the state being
    entered, so a wake ramp shows active power from wake start; the
    energy ledger still charges transitions at their lump cost only.
    Adjacent steps at one level merge.
    """
    out: dict[tuple[str, str], list[tuple[int, int]]] = {}
    for key in sorted(timelines):
        model = models[key]
        steps: list[tuple[int, int]] = []
        for seg in timelines[key].segments:
            if seg.end_us <= seg.start_us:
                continue
            state = seg.toward if seg.state == TRANSITION_STATE and seg.toward else seg.state
            uw = model.power_uw(state)
            if steps and steps[-1][1] == uw:
                continue
            steps.append((seg.start_us, uw))
        out[key] = steps
    return out
