"""Reference implementations the tests trust.

Everything here is written independently of the package internals:
fluid fair sharing by event sweep, schedule feasibility by brute force,
and buffer replay in exact rational arithmetic. The tests compare the
package's integer fixed-point results against these.
"""
from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from itertools import permutations
from typing import Sequence

US_PER_S = 1_000_000
BIT_US_PER_BYTE = 8 * US_PER_S


def gps_completions(requests, weights, rate_bps: int) -> dict[int, Fraction]:
    """Fluid fair-share completion time (microseconds) per request index.

    A whole burst arrives at its release. Backlogged flows share the
    server rate in proportion to their weights, each draining its own
    queue in order. Exact rational event sweep.
    """
    queues: dict[str, deque] = {c: deque() for c in weights}
    arrivals = sorted(range(len(requests)), key=lambda i: (requests[i].release_us, i))
    ai = 0
    t = Fraction(0)
    done: dict[int, Fraction] = {}

    def admit(upto: Fraction) -> None:
        nonlocal ai
        while ai < len(arrivals) and requests[arrivals[ai]].release_us <= upto:
            r = requests[arrivals[ai]]
            queues[r.client].append([arrivals[ai], Fraction(r.bytes * 8)])
            ai += 1

    while len(done) < len(requests):
        if not any(queues.values()):
            t = max(t, Fraction(requests[arrivals[ai]].release_us))
            admit(t)
            continue
        backlogged = [c for c, q in queues.items() if q]
        phi = sum(weights[c] for c in backlogged)
        rates = {c: Fraction(rate_bps) * weights[c] / (phi * US_PER_S) for c in backlogged}
        dt = min(queues[c][0][1] / rates[c] for c in backlogged)
        if ai < len(arrivals):
            gap = Fraction(requests[arrivals[ai]].release_us) - t
            if gap < dt:
                dt = gap
        for c in backlogged:
            queues[c][0][1] -= rates[c] * dt
        t += dt
        for c in backlogged:
            while queues[c] and queues[c][0][1] == 0:
                done[queues[c][0][0]] = t
                queues[c].popleft()
        admit(t)
    return done


def replay_order(requests, order: Sequence[int], rate_bps: int) -> dict[int, tuple[int, int]]:
    """Start and end of each request when served in the given order on
    one link of constant rate, each as early as its release allows."""
    t = 0
    out: dict[int, tuple[int, int]] = {}
    for i in order:
        r = requests[i]
        start = max(t, r.release_us)
        service = -((-r.bytes * BIT_US_PER_BYTE) // rate_bps)
        out[i] = (start, start + service)
        t = start + service
    return out


def exhaustive_feasible(requests, rate_bps: int) -> bool:
    """True when some non-preemptive order meets every deadline."""
    for perm in permutations(range(len(requests))):
        t = 0
        ok = True
        for i in perm:
            r = requests[i]
            start = max(t, r.release_us)
            end = start - ((-r.bytes * BIT_US_PER_BYTE) // rate_bps)
            if end > r.deadline_us:
                ok = False
                break
            t = end
        if ok:
            return True
    return False


def buffer_events(stream, deliveries: Sequence[tuple[int, int]]):
    """Exact-rational buffer replay.

    deliveries: sorted (time_us, bytes) list. Consumption follows the
    fixed worst-case line: zero until playback (the arrival of the
    prebuffer), then the stream bitrate, capped at the stream total.
    Returns (playback_us or None, underflow times, overflow
    (time, excess) pairs). An underflow is one excursion of delivered
    bytes below the consumption line, stamped at the first microsecond
    at or after the exact crossing.
    """
    total = stream.total_bytes
    need = min(stream.prebuffer_bytes, total)
    cum = 0
    playback = None
    for t, n in deliveries:
        cum += n
        if cum >= need:
            playback = t
            break
    if playback is None:
        return None, [], []
    rate = stream.bitrate_bps

    def line(t_us: int) -> Fraction:
        if t_us <= playback:
            return Fraction(0)
        return min(Fraction(total), Fraction((t_us - playback) * rate, BIT_US_PER_BYTE))

    underflows: list[int] = []
    overflows: list[tuple[int, int]] = []
    delivered = 0
    below = False
    for k, (t, n) in enumerate(deliveries):
        delivered += n
        level = delivered - math.floor(line(t))
        if level > stream.buffer_capacity_bytes:
            overflows.append((t, level - stream.buffer_capacity_bytes))
        if below:
            below = delivered < total and line(t) > delivered
            if below:
                continue
        if delivered >= total:
            break
        crossing = playback + Fraction(delivered * BIT_US_PER_BYTE, rate)
        nxt = deliveries[k + 1][0] if k + 1 < len(deliveries) else None
        if nxt is None or Fraction(nxt) > crossing:
            underflows.append(math.ceil(crossing))
            below = True
    return playback, underflows, overflows


def backlog_intervals(requests, ends: dict[int, int], client: str) -> list[tuple[int, int]]:
    """Merged [release, completion) intervals during which the client has
    at least one released, unfinished request in the real schedule."""
    spans = sorted(
        (requests[i].release_us, ends[i]) for i in ends if requests[i].client == client
    )
    merged: list[list[int]] = []
    for a, b in spans:
        if b <= a:
            continue
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def service_bits(bursts, client: str, t1: int, t2: int) -> int:
    """Bits served to the client inside [t1, t2] at 8 bits per
    microsecond of transmission overlap (the 8 Mbps test link)."""
    total = 0
    for b in bursts:
        if b.client != client:
            continue
        lo = max(b.start_us, t1)
        hi = min(b.end_us, t2)
        if hi > lo:
            total += 8 * (hi - lo)
    return total
