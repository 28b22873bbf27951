"""Discrete-event simulator for energy-aware media scheduling.

A server (the hotspot) streams stored media to battery-powered clients
over multi-radio wireless links. Instead of trickling data at the
playback rate, the server sends bursts sized to the client buffer so
each radio can sleep between transfers. The package models radio power
states, scripted link conditions, burst derivation with buffer
feasibility checking, earliest-deadline-first and weighted-fair
dispatch, and exact integer energy accounting against an always-on
baseline.
"""
from .link_model import (
    LinkTrace,
    NoViableInterfaceError,
    SelectionPolicy,
    TraceStep,
    preference_order,
    select_interface,
)
from .power_model import (
    PowerState,
    Segment,
    StateTimeline,
    Transition,
    WnicModel,
    baseline_timeline,
    timeline_energy,
    transition_cost,
    validate_model,
)
from .scheduler import (
    Burst,
    BurstFailure,
    BurstRequest,
    DeadlineMiss,
    InterfaceSwitch,
    OverflowEvent,
    Schedule,
    StartupViolation,
    StreamSpec,
    UnderflowEvent,
    WfqFlowState,
    admit_client,
    check_feasibility,
    default_burst_bytes,
    derive_bursts,
    schedule_edf,
    schedule_wfq,
    wfq_finish_tag,
    wfq_tags,
)
from .reports import emit_reports
from .scenario_io import load_scenario, parse_scenario, save_scenario, scenario_to_dict
from .simulator import (
    ClientSpec,
    EnergyReport,
    InterfaceEnergy,
    QosReport,
    RunResult,
    Scenario,
    ScenarioError,
    SchedulerConfig,
    WakeGapConflict,
    build_timeline,
    compare,
    power_trace,
    run,
    run_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "Burst",
    "BurstFailure",
    "BurstRequest",
    "ClientSpec",
    "DeadlineMiss",
    "EnergyReport",
    "InterfaceEnergy",
    "InterfaceSwitch",
    "LinkTrace",
    "NoViableInterfaceError",
    "OverflowEvent",
    "PowerState",
    "QosReport",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "Schedule",
    "SchedulerConfig",
    "Segment",
    "SelectionPolicy",
    "StartupViolation",
    "StateTimeline",
    "StreamSpec",
    "TraceStep",
    "Transition",
    "UnderflowEvent",
    "WakeGapConflict",
    "WfqFlowState",
    "WnicModel",
    "admit_client",
    "baseline_timeline",
    "build_timeline",
    "check_feasibility",
    "compare",
    "default_burst_bytes",
    "derive_bursts",
    "emit_reports",
    "load_scenario",
    "parse_scenario",
    "power_trace",
    "preference_order",
    "run",
    "run_baseline",
    "save_scenario",
    "scenario_to_dict",
    "schedule_edf",
    "schedule_wfq",
    "select_interface",
    "timeline_energy",
    "transition_cost",
    "validate_model",
    "wfq_finish_tag",
    "wfq_tags",
    "__version__",
]
