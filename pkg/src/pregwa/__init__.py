"""Predictive green wireless access: air-time minimisation for stored video over multiple cells."""

from .allocators import (
    STRATEGIES,
    AllocationPlan,
    SlotView,
    build_airtime_lp,
    equal_share_plan,
    heuristic_plan,
    heuristic_slot,
    optimal_plan,
    optimal_plan_bs_off,
    rate_proportional_plan,
)
from .estimators import (
    EqualShareAllocator,
    HeuristicAllocator,
    OptimalAllocator,
    RateProportionalAllocator,
)
from .radio import RadioConfig, RateMatrix, build_rate_matrix, feasible_rate
from .scenario import (
    MobilityTrace,
    RoadLayout,
    ScenarioConfig,
    VideoSession,
    build_scenario,
    generate_traces,
    load_traces,
)
from .sim import PowerModel, RunOptions, RunResult, energy_proxy, run, verify_plan
from .traffic import DemandCurve, stall_report

__version__ = "0.1.0"

__all__ = [
    "STRATEGIES", "AllocationPlan", "SlotView", "build_airtime_lp", "equal_share_plan", "heuristic_plan",
    "heuristic_slot", "optimal_plan", "optimal_plan_bs_off", "rate_proportional_plan",
    "EqualShareAllocator", "HeuristicAllocator", "OptimalAllocator", "RateProportionalAllocator",
    "RadioConfig", "RateMatrix", "build_rate_matrix", "feasible_rate",
    "MobilityTrace", "RoadLayout", "ScenarioConfig", "VideoSession", "build_scenario", "generate_traces",
    "load_traces", "PowerModel", "RunOptions", "RunResult", "energy_proxy", "run", "verify_plan",
    "DemandCurve", "stall_report",
]
