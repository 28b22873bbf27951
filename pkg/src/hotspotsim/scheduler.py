"""Burst derivation and non-preemptive burst scheduling.

Streams are chopped into bursts sized for the client buffer. Each burst
gets a release and a worst-case deadline: the instant the client buffer
would run dry if every earlier burst arrived exactly at its own deadline
and playback drained the buffer at the stream bitrate from the stream
start. Delivering every burst by its deadline therefore guarantees the
buffer never underflows, no matter how early bursts actually land.

Two dispatchers share one machinery and differ only in their priority
key: EDF sorts by deadline, WFQ by a weighted fair-queueing finish tag
computed against a GPS virtual clock. Both are non-preemptive: a burst
started on a medium holds it until done. WLAN and Bluetooth are separate
media; one burst may run on each concurrently, never two on one medium.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .link_model import (
    LinkTrace,
    NoViableInterfaceError,
    SelectionPolicy,
    select_interface,
    step_at,
)
from .power_model import WnicModel
from .units import US_PER_S, ceil_div

BITS_PER_BYTE = 8
# bit-microseconds delivered by 1 byte at 1 bps over one second
_BYTE_BIT_US = BITS_PER_BYTE * US_PER_S


@dataclass(frozen=True)
class StreamSpec:
    """One client's constant-bitrate media stream."""

    client: str
    bitrate_bps: int
    start_us: int
    duration_us: int
    prebuffer_bytes: int
    buffer_capacity_bytes: int
    max_startup_latency_us: int

    @property
    def total_bytes(self) -> int:
        return ceil_div(self.bitrate_bps * self.duration_us, _BYTE_BIT_US)


@dataclass(frozen=True)
class BurstRequest:
    client: str
    bytes: int
    release_us: int
    deadline_us: int


@dataclass(frozen=True)
class Burst:
    client: str
    interface: str
    start_us: int
    end_us: int
    bytes: int


@dataclass(frozen=True)
class DeadlineMiss:
    client: str
    deadline_us: int
    completed_us: int
    bytes: int


@dataclass(frozen=True)
class BurstFailure:
    client: str
    t_us: int
    bytes: int
    reason: str


@dataclass(frozen=True)
class InterfaceSwitch:
    client: str
    t_us: int
    from_interface: str
    to_interface: str


@dataclass
class Schedule:
    bursts: list[Burst] = field(default_factory=list)
    misses: list[DeadlineMiss] = field(default_factory=list)
    failures: list[BurstFailure] = field(default_factory=list)
    switches: list[InterfaceSwitch] = field(default_factory=list)

    def occupancy(self) -> dict[str, list[tuple[int, int]]]:
        busy: dict[str, list[tuple[int, int]]] = {}
        for b in self.bursts:
            busy.setdefault(b.interface, []).append((b.start_us, b.end_us))
        for spans in busy.values():
            spans.sort()
        return busy


def default_burst_bytes(stream: StreamSpec) -> int:
    # Half the buffer keeps headroom for one full early burst on top of
    # a full queue; 64 kB matches tens-of-kilobytes transfer chunks.
    return max(1, min(stream.buffer_capacity_bytes // 2, 64_000))


def derive_bursts(stream: StreamSpec, burst_bytes: int) -> list[BurstRequest]:
    """Chop a stream into burst requests with releases and deadlines.

    Burst 1 must carry at least the prebuffer and is due by the startup
    latency bound. Burst k releases when burst k-1 is due and is due when
    worst-case playback would exhaust everything delivered so far. The
    final burst is truncated so the total matches the stream exactly.
    """
    if stream.max_startup_latency_us <= 0:
        raise ValueError("max_startup_latency must be positive")
    if burst_bytes <= 0:
        raise ValueError("burst_bytes must be positive")
    if burst_bytes > stream.buffer_capacity_bytes:
        raise ValueError("burst_bytes exceeds buffer capacity")
    total = stream.total_bytes
    if total == 0:
        return []
    requests: list[BurstRequest] = []
    nbytes = min(max(burst_bytes, stream.prebuffer_bytes), total)
    release = stream.start_us
    deadline = stream.start_us + stream.max_startup_latency_us
    delivered = 0
    while delivered < total:
        nbytes = min(nbytes, total - delivered)
        requests.append(BurstRequest(stream.client, nbytes, release, deadline))
        delivered += nbytes
        release = deadline
        drained = stream.start_us + (delivered * _BYTE_BIT_US) // stream.bitrate_bps
        # max() guards degenerate specs where the first burst is smaller
        # than what playback eats during the whole startup window
        deadline = max(drained, release + 1)
        nbytes = burst_bytes
    return requests


def admit_client(server_load_bps: int, capacity_bps: int, stream: StreamSpec) -> bool:
    """Bitrate-sum admission test; the boundary case is admitted."""
    return server_load_bps + stream.bitrate_bps <= capacity_bps


# ---------------------------------------------------------------------------
# dispatch loop shared by EDF and WFQ


def _required_bps(request: BurstRequest, t_us: int) -> int:
    if t_us < request.deadline_us:
        return ceil_div(request.bytes * _BYTE_BIT_US, request.deadline_us - t_us)
    return 1


def _burst_end(trace: LinkTrace, start_us: int, nbytes: int) -> int | None:
    """Completion time of a transfer started at start_us, or None if the
    trace starves it forever. Integrates capacity across trace steps."""
    target = nbytes * _BYTE_BIT_US  # bit-us to deliver
    acc = 0
    t = start_us
    starts = [s.t_us for s in trace.steps]
    idx = max(0, len([s for s in starts if s <= t]) - 1)
    while True:
        rate = trace.steps[idx].throughput_bps
        nxt = trace.steps[idx + 1].t_us if idx + 1 < len(trace.steps) else None
        if rate > 0:
            need = ceil_div(target - acc, rate)
            if nxt is None or t + need <= nxt:
                return t + need
            acc += rate * (nxt - t)
        elif nxt is None:
            return None
        t = nxt
        idx += 1


def _select_for_request(
    request: BurstRequest,
    t_us: int,
    traces: Mapping[str, LinkTrace],
    policy: SelectionPolicy,
    models: Mapping[str, WnicModel],
    current: str | None,
    last_switch_us: int | None,
) -> str:
    # Ask first for the rate that still meets the deadline; failing that,
    # settle for any live interface and let the miss be reported.
    try:
        return select_interface(
            traces, t_us, _required_bps(request, t_us), policy, models, current, last_switch_us
        )
    except NoViableInterfaceError:
        return select_interface(traces, t_us, 1, policy, models, current, last_switch_us)


def _dispatch(
    requests: Sequence[BurstRequest],
    keyfn: Callable[[int], tuple],
    traces: Mapping[str, Mapping[str, LinkTrace]],
    policy: SelectionPolicy,
    models: Mapping[str, Mapping[str, WnicModel]],
) -> Schedule:
    schedule = Schedule()
    if not requests:
        return schedule
    media = sorted({iface for per in traces.values() for iface in per})
    order = sorted(range(len(requests)), key=keyfn)
    pending = set(order)
    if not media:
        for i in order:
            r = requests[i]
            schedule.failures.append(
                BurstFailure(r.client, r.release_us, r.bytes, "no viable interface")
            )
        return schedule
    boundaries = sorted(
        {s.t_us for per in traces.values() for tr in per.values() for s in tr.steps}
    )
    next_free = {m: 0 for m in media}
    current: dict[str, str] = {}
    last_switch: dict[str, int] = {}
    t = min(r.release_us for r in requests)
    while pending:
        progress = True
        while progress:
            progress = False
            for medium in media:
                if next_free[medium] > t:
                    continue
                for i in [j for j in order if j in pending and requests[j].release_us <= t]:
                    r = requests[i]
                    ctraces = {
                        k: v
                        for k, v in traces.get(r.client, {}).items()
                        if k in models.get(r.client, {})
                    }
                    cmodels = models.get(r.client, {})
                    try:
                        iface = _select_for_request(
                            r, t, ctraces, policy, cmodels,
                            current.get(r.client), last_switch.get(r.client),
                        )
                    except NoViableInterfaceError:
                        schedule.failures.append(
                            BurstFailure(r.client, t, r.bytes, "no viable interface")
                        )
                        pending.discard(i)
                        progress = True
                        continue
                    if iface != medium:
                        continue
                    end = _burst_end(ctraces[iface], t, r.bytes)
                    if end is None:
                        schedule.failures.append(
                            BurstFailure(r.client, t, r.bytes, f"link starved on {iface}")
                        )
                        pending.discard(i)
                        progress = True
                        continue
                    prev = current.get(r.client)
                    if prev is not None and prev != iface:
                        schedule.switches.append(InterfaceSwitch(r.client, t, prev, iface))
                    if prev != iface:
                        current[r.client] = iface
                        last_switch[r.client] = t
                    schedule.bursts.append(Burst(r.client, iface, t, end, r.bytes))
                    if end > r.deadline_us:
                        schedule.misses.append(
                            DeadlineMiss(r.client, r.deadline_us, end, r.bytes)
                        )
                    next_free[medium] = end
                    pending.discard(i)
                    progress = True
                    break
        if not pending:
            break
        candidates = [requests[i].release_us for i in pending if requests[i].release_us > t]
        candidates += [v for v in next_free.values() if v > t]
        candidates += [b for b in boundaries if b > t][:1]
        if not candidates:
            raise RuntimeError("dispatch stalled")  # unreachable by construction
        t = min(candidates)
    return schedule


def schedule_edf(
    requests: Sequence[BurstRequest],
    traces: Mapping[str, Mapping[str, LinkTrace]],
    policy: SelectionPolicy,
    models: Mapping[str, Mapping[str, WnicModel]],
) -> Schedule:
    """Earliest-deadline-first, non-preemptive, across independent media.

    Whenever a medium frees up, the released request with the earliest
    deadline that selects that medium starts on it. Ties break by client
    id, then release time. Misses are reported, never fatal.
    """

    def key(i: int) -> tuple:
        r = requests[i]
        return (r.deadline_us, r.client, r.release_us, i)

    return _dispatch(requests, key, traces, policy, models)


# ---------------------------------------------------------------------------
# weighted fair queueing


@dataclass
class WfqFlowState:
    """Per-flow bookkeeping for finish-tag assignment."""

    flow: str
    weight: Fraction
    last_finish: Fraction = Fraction(0)
    queued: int = 0


def wfq_finish_tag(
    flow: WfqFlowState, virtual_now: Fraction, nbytes: int, total_rate_bps: int
) -> Fraction:
    """Assign the next finish tag for a burst of this flow.

    tag = max(virtual_now, previous finish) + bits / (weight * rate).
    Updates the flow's finish bookkeeping.
    """
    if flow.weight <= 0:
        raise ValueError("flow weight must be positive")
    if total_rate_bps <= 0:
        raise ValueError("total rate must be positive")
    start = max(virtual_now, flow.last_finish)
    tag = start + Fraction(nbytes * BITS_PER_BYTE) / (flow.weight * total_rate_bps)
    flow.last_finish = tag
    return tag


def _advance_virtual(
    v: Fraction,
    from_us: Fraction,
    to_us: Fraction,
    flows: Mapping[str, WfqFlowState],
) -> Fraction:
    """Advance the GPS virtual clock from one real instant to another.

    While any flow is backlogged in the fluid reference (its last finish
    tag lies ahead of the clock) the clock runs at 1 / (sum of backlogged
    weights) per second; while idle it freezes.
    """
    t = from_us
    while t < to_us:
        backlogged = [f for f in flows.values() if f.last_finish > v]
        if not backlogged:
            return v
        phi = sum(f.weight for f in backlogged)
        next_tag = min(f.last_finish for f in backlogged)
        dt_us = (next_tag - v) * phi * US_PER_S
        if t + dt_us <= to_us:
            v = next_tag
            t = t + dt_us
        else:
            v = v + Fraction(to_us - t) / (phi * US_PER_S)
            t = to_us
    return v


def wfq_tags(
    requests: Sequence[BurstRequest],
    weights: Mapping[str, Fraction],
    total_rate_bps: int,
) -> dict[int, Fraction]:
    """Finish tags for every request, driven by releases alone.

    The fluid reference is independent of how the real server serves, so
    tags can be assigned up front in release order.
    """
    flows = {c: WfqFlowState(c, Fraction(w)) for c, w in weights.items()}
    order = sorted(range(len(requests)), key=lambda i: (requests[i].release_us, requests[i].client, i))
    v = Fraction(0)
    now = Fraction(0)
    tags: dict[int, Fraction] = {}
    for i in order:
        r = requests[i]
        if r.client not in flows:
            raise ValueError(f"no weight for client '{r.client}'")
        release = Fraction(r.release_us)
        v = _advance_virtual(v, now, release, flows)
        now = max(now, release)
        tags[i] = wfq_finish_tag(flows[r.client], v, r.bytes, total_rate_bps)
    return tags


def schedule_wfq(
    requests: Sequence[BurstRequest],
    weights: Mapping[str, Fraction],
    traces: Mapping[str, Mapping[str, LinkTrace]],
    policy: SelectionPolicy,
    models: Mapping[str, Mapping[str, WnicModel]],
    total_rate_bps: int,
) -> Schedule:
    """Weighted fair queueing at burst granularity.

    Bursts are served in ascending finish-tag order (ties by client id,
    then release), non-preemptively, using the same medium dispatch as
    EDF. total_rate_bps is the nominal service rate of the fluid
    reference, normally the server capacity.
    """
    for c, w in weights.items():
        if w <= 0:
            raise ValueError(f"weight for '{c}' must be positive")
    tags = wfq_tags(requests, weights, total_rate_bps)

    def key(i: int) -> tuple:
        r = requests[i]
        return (tags[i], r.client, r.release_us, i)

    return _dispatch(requests, key, traces, policy, models)


# ---------------------------------------------------------------------------
# feasibility replay


@dataclass(frozen=True)
class UnderflowEvent:
    client: str
    t_us: int


@dataclass(frozen=True)
class OverflowEvent:
    client: str
    t_us: int
    excess_bytes: int


@dataclass(frozen=True)
class StartupViolation:
    client: str
    playback_us: int | None
    limit_us: int


@dataclass
class QosVerdict:
    underflows: list[UnderflowEvent] = field(default_factory=list)
    startup_violations: list[StartupViolation] = field(default_factory=list)
    overflows: list[OverflowEvent] = field(default_factory=list)
    startup_latency_us: dict[str, int | None] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not (self.underflows or self.startup_violations or self.overflows)


def check_feasibility(schedule: Schedule, streams: Sequence[StreamSpec]) -> QosVerdict:
    """Replay client buffers against delivered bursts.

    A burst's bytes land when it completes. Playback begins once the
    prebuffer has arrived and then drains the buffer at the stream
    bitrate. Reports every underflow instant, startup-latency violation
    and capacity overflow. Overflowed bytes are only flagged, not lost:
    the transport is lossless, so the excess simply waits at the radio,
    which never affects the underflow arithmetic.
    """
    verdict = QosVerdict()
    for stream in streams:
        total = stream.total_bytes
        if total == 0:
            continue
        deliveries = sorted(
            ((b.end_us, b.bytes) for b in schedule.bursts if b.client == stream.client)
        )
        need = min(stream.prebuffer_bytes, total)
        cum = 0
        playback: int | None = None
        for (e, n) in deliveries:
            cum += n
            if cum >= need:
                playback = e
                break
        limit = stream.start_us + stream.max_startup_latency_us
        if playback is None or playback > limit:
            verdict.startup_violations.append(
                StartupViolation(stream.client, playback, limit)
            )
        verdict.startup_latency_us[stream.client] = (
            None if playback is None else playback - stream.start_us
        )
        if playback is None:
            continue
        rate = stream.bitrate_bps

        def consumed_floor(t_us: int) -> int:
            if t_us <= playback:
                return 0
            return min(total, ((t_us - playback) * rate) // _BYTE_BIT_US)

        delivered = 0
        deficit = False
        for k, (e, n) in enumerate(deliveries):
            delivered += n
            level = delivered - consumed_floor(e)
            if level > stream.buffer_capacity_bytes:
                verdict.overflows.append(
                    OverflowEvent(stream.client, e, level - stream.buffer_capacity_bytes)
                )
            if deficit:
                deficit = delivered < total and (e - playback) * rate > delivered * _BYTE_BIT_US
                if deficit:
                    continue
            if delivered >= total:
                break
            nxt = deliveries[k + 1][0] if k + 1 < len(deliveries) else None
            # exact zero-crossing: playback + delivered / rate
            if nxt is None or (nxt - playback) * rate > delivered * _BYTE_BIT_US:
                crossing = playback + ceil_div(delivered * _BYTE_BIT_US, rate)
                verdict.underflows.append(UnderflowEvent(stream.client, crossing))
                deficit = True
    return verdict
