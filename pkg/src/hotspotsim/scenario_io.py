"""Scenario files: a strict YAML grammar with unit-suffixed time fields.

Every duration or instant is written with an explicit unit suffix and
exactly one of the three is allowed per field: ``start_us``,
``start_ms``, or ``start_s``. Values must land exactly on the
microsecond grid (``0.0000005 s`` is rejected, ``0.5 ms`` is fine).
Power is given in milliwatts on a microwatt grid, energy in millijoules
on a picojoule grid. Unknown keys anywhere are errors; messages carry
the path to the offending field.

Serialization writes the canonical ``_us`` form and deduplicates
identical radio models under generated names, so load(save(x)) equals x
by value even though the text may differ from the original file.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

import yaml

from .link_model import LinkTrace, SelectionPolicy, TraceStep
from .power_model import PowerState, Transition, WnicModel
from .scheduler import StreamSpec
from .simulator import ClientSpec, Scenario, SchedulerConfig, ScenarioError
from .units import PJ_PER_MJ, UW_PER_MW, format_mj, format_mw, parse_mj_to_pj, parse_mw_to_uw, parse_time_us


def _fail(path: str, msg: str) -> None:
    raise ScenarioError([f"{path}: {msg}" if path else msg])


def _mapping(value: Any, path: str) -> dict:
    if not isinstance(value, Mapping):
        _fail(path, "expected a mapping")
    return dict(value)


def _sequence(value: Any, path: str) -> list:
    if not isinstance(value, list):
        _fail(path, "expected a list")
    return value


def _take(d: dict, key: str, path: str, required: bool = True, default: Any = None) -> Any:
    if key not in d:
        if required:
            _fail(path, f"missing {key}")
        return default
    return d.pop(key)


def _done(d: dict, path: str) -> None:
    if d:
        name = sorted(d)[0]
        _fail(path, f"unknown key '{name}'")


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {value!r}")
    return value


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        _fail(path, f"expected true or false, got {value!r}")
    return value


def _scaled(fn, value: Any, what: str) -> int:
    try:
        return fn(value, what)
    except ValueError as exc:
        raise ScenarioError([str(exc)]) from exc


def _take_time(d: dict, base: str, path: str, required: bool = True, default: int | None = None) -> int | None:
    """Pop exactly one of base_us / base_ms / base_s and return microseconds."""
    present = [u for u in ("us", "ms", "s") if f"{base}_{u}" in d]
    if len(present) > 1:
        _fail(path, f"give exactly one of {base}_us, {base}_ms, {base}_s")
    if not present:
        if required:
            _fail(path, f"missing {base} ({base}_us, {base}_ms, or {base}_s)")
        return default
    unit = present[0]
    key = f"{base}_{unit}"
    what = f"{path}.{key}" if path else key
    return _scaled(lambda v, w: parse_time_us(v, unit, w), d.pop(key), what)


def _parse_state(name: str, raw: Any, path: str) -> PowerState:
    d = _mapping(raw, path)
    power = _scaled(parse_mw_to_uw, _take(d, "power_mw", path), f"{path}.power_mw")
    transfer = False
    if "can_transfer" in d:
        transfer = _bool(d.pop("can_transfer"), f"{path}.can_transfer")
    _done(d, path)
    return PowerState(name, power, transfer)


def _parse_transition(raw: Any, path: str) -> tuple[str, str, Transition]:
    d = _mapping(raw, path)
    src = _str(_take(d, "from", path), f"{path}.from")
    dst = _str(_take(d, "to", path), f"{path}.to")
    latency = _take_time(d, "latency", path)
    energy = _scaled(parse_mj_to_pj, _take(d, "energy_mj", path, required=False, default=0), f"{path}.energy_mj")
    _done(d, path)
    return src, dst, Transition(latency, energy)


def _parse_model(raw: Any, path: str) -> WnicModel:
    d = _mapping(raw, path)
    kind = _str(_take(d, "kind", path), f"{path}.kind")
    throughput = _int(_take(d, "active_throughput_bps", path), f"{path}.active_throughput_bps")
    sleep = _str(_take(d, "sleep_state", path), f"{path}.sleep_state")
    idle = _str(_take(d, "idle_state", path), f"{path}.idle_state")
    states_raw = _mapping(_take(d, "states", path), f"{path}.states")
    states = tuple(
        _parse_state(_str(name, f"{path}.states"), body, f"{path}.states.{name}")
        for name, body in states_raw.items()
    )
    transitions: dict[tuple[str, str], Transition] = {}
    for i, entry in enumerate(_sequence(_take(d, "transitions", path), f"{path}.transitions")):
        src, dst, tr = _parse_transition(entry, f"{path}.transitions[{i}]")
        if (src, dst) in transitions:
            _fail(f"{path}.transitions[{i}]", f"duplicate transition {src} -> {dst}")
        transitions[(src, dst)] = tr
    _done(d, path)
    return WnicModel(kind, states, transitions, throughput, sleep, idle)


def _parse_client(raw: Any, path: str, models: Mapping[str, WnicModel]) -> ClientSpec:
    d = _mapping(raw, path)
    cid = _str(_take(d, "id", path), f"{path}.id")
    ifaces_raw = _mapping(_take(d, "interfaces", path), f"{path}.interfaces")
    ifaces: dict[str, WnicModel] = {}
    for iface, ref in ifaces_raw.items():
        name = _str(ref, f"{path}.interfaces.{iface}")
        if name not in models:
            _fail(f"{path}.interfaces.{iface}", f"unknown model '{name}'")
        ifaces[_str(iface, f"{path}.interfaces")] = models[name]
    battery = 1.0
    if "battery" in d:
        battery = _float(d.pop("battery"), f"{path}.battery")
    _done(d, path)
    return ClientSpec(cid, ifaces, battery)


def _parse_trace(raw: Any, path: str) -> LinkTrace:
    d = _mapping(raw, path)
    client = _str(_take(d, "client", path), f"{path}.client")
    iface = _str(_take(d, "interface", path), f"{path}.interface")
    steps = []
    for i, entry in enumerate(_sequence(_take(d, "steps", path), f"{path}.steps")):
        sp = f"{path}.steps[{i}]"
        sd = _mapping(entry, sp)
        t = _take_time(sd, "t", sp)
        tput = _int(_take(sd, "throughput_bps", sp), f"{sp}.throughput_bps")
        quality = _float(_take(sd, "quality", sp, required=False, default=1.0), f"{sp}.quality")
        _done(sd, sp)
        steps.append(TraceStep(t, tput, quality))
    _done(d, path)
    return LinkTrace(client, iface, tuple(steps))


def _parse_stream(raw: Any, path: str) -> StreamSpec:
    d = _mapping(raw, path)
    client = _str(_take(d, "client", path), f"{path}.client")
    bitrate = _int(_take(d, "bitrate_bps", path), f"{path}.bitrate_bps")
    start = _take_time(d, "start", path)
    duration = _take_time(d, "duration", path)
    prebuffer = _int(_take(d, "prebuffer_bytes", path), f"{path}.prebuffer_bytes")
    capacity = _int(_take(d, "buffer_capacity_bytes", path), f"{path}.buffer_capacity_bytes")
    startup = _take_time(d, "max_startup_latency", path)
    _done(d, path)
    return StreamSpec(client, bitrate, start, duration, prebuffer, capacity, startup)


def _parse_weight(value: Any, path: str) -> Fraction:
    try:
        w = Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioError([f"{path}: not a weight: {value!r}"]) from exc
    return w


def _parse_scheduler(raw: Any, path: str) -> SchedulerConfig:
    d = _mapping(raw, path)
    kind = "edf"
    if "kind" in d:
        kind = _str(d.pop("kind"), f"{path}.kind")
    weights: dict[str, Fraction] = {}
    if "weights" in d:
        for cid, w in _mapping(d.pop("weights"), f"{path}.weights").items():
            weights[_str(cid, f"{path}.weights")] = _parse_weight(w, f"{path}.weights.{cid}")
    burst = None
    if "burst_bytes" in d:
        burst = _int(d.pop("burst_bytes"), f"{path}.burst_bytes")
    _done(d, path)
    return SchedulerConfig(kind, weights, burst)


def _parse_policy(raw: Any, path: str) -> SelectionPolicy:
    d = _mapping(raw, path)
    floor = 0.0
    if "quality_floor" in d:
        floor = _float(d.pop("quality_floor"), f"{path}.quality_floor")
    margin = SelectionPolicy().hysteresis_margin
    if "hysteresis_margin" in d:
        margin = _float(d.pop("hysteresis_margin"), f"{path}.hysteresis_margin")
    dwell = _take_time(d, "min_dwell", path, required=False, default=SelectionPolicy().min_dwell_us)
    preference = None
    if "preference" in d:
        preference = tuple(
            _str(x, f"{path}.preference[{i}]")
            for i, x in enumerate(_sequence(d.pop("preference"), f"{path}.preference"))
        )
    _done(d, path)
    return SelectionPolicy(floor, margin, dwell, preference)


def parse_scenario(data: Any) -> Scenario:
    """Build a Scenario from already-loaded YAML data (a mapping)."""
    d = _mapping(data, "scenario")
    horizon = _take_time(d, "horizon", "")
    capacity = _int(_take(d, "capacity_bps", ""), "capacity_bps")
    models: dict[str, WnicModel] = {}
    if "models" in d:
        for name, body in _mapping(d.pop("models"), "models").items():
            models[_str(name, "models")] = _parse_model(body, f"models.{name}")
    clients = tuple(
        _parse_client(entry, f"clients[{i}]", models)
        for i, entry in enumerate(_sequence(_take(d, "clients", ""), "clients"))
    )
    links = tuple(
        _parse_trace(entry, f"links[{i}]")
        for i, entry in enumerate(_sequence(_take(d, "links", "", required=False, default=[]), "links"))
    )
    streams = tuple(
        _parse_stream(entry, f"streams[{i}]")
        for i, entry in enumerate(_sequence(_take(d, "streams", "", required=False, default=[]), "streams"))
    )
    scheduler = SchedulerConfig()
    if "scheduler" in d:
        scheduler = _parse_scheduler(d.pop("scheduler"), "scheduler")
    policy = SelectionPolicy()
    if "policy" in d:
        policy = _parse_policy(d.pop("policy"), "policy")
    _done(d, "")
    return Scenario(horizon, capacity, clients, streams, links, scheduler, policy)


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        raise ScenarioError(["empty scenario file"])
    return parse_scenario(data)


def _mw_out(uw: int) -> int | str:
    return uw // UW_PER_MW if uw % UW_PER_MW == 0 else format_mw(uw)


def _mj_out(pj: int) -> int | str:
    return pj // PJ_PER_MJ if pj % PJ_PER_MJ == 0 else format_mj(pj)


def _weight_out(w: Fraction) -> int | str:
    return int(w) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def _model_out(m: WnicModel) -> dict:
    states: dict[str, dict] = {}
    for st in m.states:
        body: dict[str, Any] = {"power_mw": _mw_out(st.power_uw)}
        if st.can_transfer:
            body["can_transfer"] = True
        states[st.name] = body
    return {
        "kind": m.kind,
        "active_throughput_bps": m.active_throughput_bps,
        "sleep_state": m.sleep_state,
        "idle_state": m.idle_state,
        "states": states,
        "transitions": [
            {"from": src, "to": dst, "latency_us": tr.latency_us, "energy_mj": _mj_out(tr.energy_pj)}
            for (src, dst), tr in m.transitions.items()
        ],
    }


def scenario_to_dict(scenario: Scenario) -> dict:
    """Plain-data form of a scenario in canonical microsecond fields."""
    unique: list[WnicModel] = []
    names: list[str] = []
    refs: dict[tuple[str, str], str] = {}
    for client in scenario.clients:
        for iface, model in client.models.items():
            try:
                idx = unique.index(model)
            except ValueError:
                base = model.kind or "model"
                name = base
                n = 2
                while name in names:
                    name = f"{base}_{n}"
                    n += 1
                unique.append(model)
                names.append(name)
                idx = len(unique) - 1
            refs[(client.id, iface)] = names[idx]
    out: dict[str, Any] = {
        "horizon_us": scenario.horizon_us,
        "capacity_bps": scenario.capacity_bps,
        "scheduler": {"kind": scenario.scheduler.kind},
        "policy": {
            "quality_floor": scenario.policy.quality_floor,
            "hysteresis_margin": scenario.policy.hysteresis_margin,
            "min_dwell_us": scenario.policy.min_dwell_us,
        },
    }
    if scenario.scheduler.weights:
        out["scheduler"]["weights"] = {
            cid: _weight_out(w) for cid, w in scenario.scheduler.weights.items()
        }
    if scenario.scheduler.burst_bytes is not None:
        out["scheduler"]["burst_bytes"] = scenario.scheduler.burst_bytes
    if scenario.policy.preference is not None:
        out["policy"]["preference"] = list(scenario.policy.preference)
    out["models"] = {name: _model_out(m) for name, m in zip(names, unique)}
    out["clients"] = []
    for client in scenario.clients:
        body: dict[str, Any] = {
            "id": client.id,
            "interfaces": {iface: refs[(client.id, iface)] for iface in client.models},
        }
        if client.battery != 1.0:
            body["battery"] = client.battery
        out["clients"].append(body)
    out["links"] = [
        {
            "client": tr.client,
            "interface": tr.interface,
            "steps": [
                {"t_us": st.t_us, "throughput_bps": st.throughput_bps, "quality": st.quality}
                for st in tr.steps
            ],
        }
        for tr in scenario.links
    ]
    out["streams"] = [
        {
            "client": s.client,
            "bitrate_bps": s.bitrate_bps,
            "start_us": s.start_us,
            "duration_us": s.duration_us,
            "prebuffer_bytes": s.prebuffer_bytes,
            "buffer_capacity_bytes": s.buffer_capacity_bytes,
            "max_startup_latency_us": s.max_startup_latency_us,
        }
        for s in scenario.streams
    ]
    return out


def save_scenario(scenario: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yaml.safe_dump(scenario_to_dict(scenario), fh, sort_keys=False)
