"""Run orchestration: plan, verify, measure."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .allocators import (
    CAPACITY_TOL,
    DEFAULT_SOFT_LAMBDA,
    STRATEGIES,
    AllocationPlan,
    equal_share_plan,
    heuristic_plan,
    optimal_plan,
    rate_proportional_plan,
)
from .radio import NO_BS, RateMatrix, build_rate_matrix, build_rate_matrix_forced
from .scenario import ScenarioConfig
from .traffic import DemandCurve, StallReport, stall_report
from .validation import aligned_sessions

BOUND_TOL = 1e-9
CONTENT_RTOL = 1e-6


@dataclass(frozen=True)
class PowerModel:
    """Affine load-dependent BS power; an illustrative configuration, not a measured one."""

    idle_power: float = 130.0
    load_slope: float = 4.7 * 20.0
    deep_sleep_power: float = 75.0

    def __post_init__(self):
        if min(self.idle_power, self.load_slope, self.deep_sleep_power) < 0:
            raise ValueError("power model parameters must be non-negative")


@dataclass(frozen=True)
class RunOptions:
    mode: str = "hard"
    soft_lambda: float = DEFAULT_SOFT_LAMBDA
    off_bs: tuple[int, ...] = ()
    power_model: PowerModel | None = field(default_factory=PowerModel)


@dataclass(frozen=True)
class Violation:
    user_id: int | None
    slot: int | None
    constraint: str
    amount: float

    def __str__(self):
        who = f"user {self.user_id}" if self.user_id is not None else "plan"
        where = f" slot {self.slot}" if self.slot is not None else ""
        return f"{self.constraint} violated at {who}{where} (by {self.amount:.6g})"


@dataclass(frozen=True)
class VerificationReport:
    """``ok`` covers bounds, off-road zeros, BS capacity and content caps; stalls are tracked apart."""

    ok: bool
    stall_free: bool
    first_violation: Violation | None
    first_stall: Violation | None
    require_stall_free: bool = False

    @property
    def passed(self) -> bool:
        return self.ok and (self.stall_free or not self.require_stall_free)

    def describe(self) -> str:
        if self.passed:
            return "pass"
        return "fail: " + str(self.first_violation if not self.ok else self.first_stall)


def verify_plan(plan: AllocationPlan, rates: RateMatrix, sessions, require_stall_free: bool = False) -> VerificationReport:
    """Re-check a plan from its raw fractions, ignoring any planner bookkeeping."""
    if plan.x is None:
        v = Violation(None, None, f"no plan ({plan.status})", float("nan"))
        return VerificationReport(False, False, v, None, require_stall_free)
    x = np.asarray(plan.x, dtype=float)
    if x.shape != rates.shape:
        raise ValueError(f"plan shape {x.shape} does not match rate matrix {rates.shape}")
    sess = aligned_sessions(rates, sessions)
    uids = rates.user_ids
    n, T = x.shape
    found: list[tuple[int, int, int, str, float]] = []  # (slot, order, user, name, amount)

    if not np.all(np.isfinite(x)):
        u, t = np.argwhere(~np.isfinite(x))[0]
        found.append((t, 0, u, "finite fraction", float("nan")))
    lo_v = -x
    hi_v = x - 1.0
    bad = (lo_v > BOUND_TOL) | (hi_v > BOUND_TOL)
    if bad.any():
        u, t = np.argwhere(bad)[0]
        found.append((t, 0, u, "bounds 0<=x<=1", float(max(lo_v[u, t], hi_v[u, t]))))
    off = (rates.association == NO_BS) & (np.abs(x) > BOUND_TOL)
    if off.any():
        u, t = np.argwhere(off)[0]
        found.append((t, 1, u, "zero air-time off the road", float(abs(x[u, t]))))
    for t in range(T):
        for j in range(rates.n_bs):
            members = rates.association[:, t] == j
            load = float(x[members, t].sum())
            if load > 1.0 + CAPACITY_TOL:
                found.append((t, 2, -1 - j, f"BS {j} capacity", load - 1.0))
                break
    bits = np.clip(x, 0.0, None) * rates.rates
    cum = np.cumsum(bits, axis=1)
    stalls = []
    for u, s in enumerate(sess):
        cap = s.total_size * (1 + CONTENT_RTOL)
        over = np.flatnonzero(cum[u] > cap)
        if over.size:
            found.append((int(over[0]), 3, u, "content cap", float(cum[u, over[0]] - s.total_size)))
        demand = DemandCurve.for_session(s, T, rates.tau).values
        R = np.minimum(cum[u], s.total_size)
        rep = stall_report(R, demand, tol=CONTENT_RTOL * s.total_size, mask=rates.present[u])
        if rep.stall_slot_count:
            t0 = rep.first_stall_slot
            stalls.append((t0, u, float(demand[t0] - R[t0])))

    def _as_violation(slot, user, name, amount):
        uid = uids[user] if user >= 0 else None
        return Violation(uid, int(slot), name, amount)

    first = None
    if found:
        slot, _, user, name, amount = min(found, key=lambda f: (f[0], f[1], f[2]))
        first = _as_violation(slot, user, name, amount)
    first_stall = None
    if stalls:
        slot, user, amount = min(stalls)
        first_stall = _as_violation(slot, user, "playback deadline", amount)
    return VerificationReport(first is None, first_stall is None, first, first_stall, require_stall_free)


def energy_proxy(plan: AllocationPlan, power_model: PowerModel, off_bs=(), n_bs: int | None = None,
                 tau: float = 1.0) -> dict:
    """Affine energy estimate per BS in watt-seconds; switched-off BSs draw deep-sleep power throughout."""
    off = set(int(b) for b in off_bs)
    n_bs = n_bs if n_bs is not None else int(plan.association.max(initial=-1)) + 1
    T = plan.association.shape[1]
    x = plan.x if plan.x is not None else np.zeros(plan.association.shape)
    per_bs = []
    for j in range(n_bs):
        if j in off:
            per_bs.append(power_model.deep_sleep_power * T * tau)
            continue
        load = np.where(plan.association == j, x, 0.0).sum(axis=0)
        per_bs.append(float(np.sum(power_model.idle_power + power_model.load_slope * load) * tau))
    return {"per_bs": per_bs, "total": float(sum(per_bs))}


@dataclass(eq=False)
class RunResult:
    strategy: str
    status: str
    plan: AllocationPlan
    rates: RateMatrix
    verification: VerificationReport | None = None
    per_bs_airtime: np.ndarray | None = None
    network_airtime: float | None = None
    stalls: dict[int, StallReport] = field(default_factory=dict)
    undelivered_bits: dict[int, float] = field(default_factory=dict)
    buffers: np.ndarray | None = None
    energy: dict | None = None
    solver: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def ok(self) -> bool:
        return self.network_airtime is not None

    @property
    def total_stall_slots(self) -> int:
        return int(sum(r.stall_slot_count for r in self.stalls.values()))

    @property
    def total_undelivered(self) -> float:
        return float(sum(self.undelivered_bits.values()))


def _plan_for(scenario: ScenarioConfig, strategy: str, options: RunOptions):
    if strategy == "optimal_bs_off":
        off = options.off_bs or (scenario.layout.n_bs - 1,)
        active = [j for j in range(scenario.layout.n_bs) if j not in set(off)]
        rates = build_rate_matrix_forced(scenario, active)
        plan = optimal_plan(rates, scenario.sessions, mode=options.mode, soft_lambda=options.soft_lambda,
                            strategy="optimal_bs_off")
        plan.info["off_bs"] = sorted(off)
        return rates, plan, tuple(sorted(off))
    rates = build_rate_matrix(scenario)
    if strategy == "equal_share":
        return rates, equal_share_plan(rates, scenario.sessions), ()
    if strategy == "rate_proportional":
        return rates, rate_proportional_plan(rates, scenario.sessions), ()
    if strategy == "heuristic":
        return rates, heuristic_plan(rates, scenario.sessions), ()
    return rates, optimal_plan(rates, scenario.sessions, mode=options.mode, soft_lambda=options.soft_lambda), ()


def run(scenario: ScenarioConfig, strategy: str, options: RunOptions | None = None) -> RunResult:
    """Plan one strategy on one scenario, verify the plan, then derive metrics from it.

    An infeasible optimal plan yields a result with ``status`` set and no
    metrics; a plan failing verification raises, since that is a bug.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    options = options or RunOptions()
    started = time.perf_counter()
    rates, plan, off = _plan_for(scenario, strategy, options)
    if plan.x is None:
        return RunResult(strategy, plan.status, plan, rates, solver=dict(plan.info),
                         wall_clock=time.perf_counter() - started)
    strict = strategy.startswith("optimal") and options.mode == "hard"
    report = verify_plan(plan, rates, scenario.sessions, require_stall_free=strict)
    if not report.passed:
        raise RuntimeError(f"{strategy} produced an invalid plan: {report.describe()}")
    result = RunResult(strategy, "ok", plan, rates, report, solver=dict(plan.info))
    _fill_metrics(result, scenario, options, off)
    result.wall_clock = time.perf_counter() - started
    return result


def _fill_metrics(result: RunResult, scenario: ScenarioConfig, options: RunOptions, off):
    plan, rates = result.plan, result.rates
    T = rates.shape[1]
    n_bs = rates.n_bs
    per_bs = np.array([np.where(rates.association == j, plan.x, 0.0).sum() / T for j in range(n_bs)])
    result.per_bs_airtime = per_bs
    result.network_airtime = float(plan.x.sum() / T)
    sess = aligned_sessions(rates, scenario.sessions)
    delivered = np.minimum(np.cumsum(plan.x * rates.rates, axis=1),
                           np.array([s.total_size for s in sess])[:, None]) if sess else np.zeros((0, T))
    buffers = np.zeros_like(delivered)
    for u, s in enumerate(sess):
        demand = DemandCurve.for_session(s, T, rates.tau).values
        buffers[u] = delivered[u] - demand
        result.stalls[s.user_id] = stall_report(delivered[u], demand, tol=CONTENT_RTOL * s.total_size,
                                                mask=rates.present[u])
        short = s.total_size - delivered[u, -1] if T else s.total_size
        # LP round-off below the verification tolerance is not a shortfall
        result.undelivered_bits[s.user_id] = float(short) if short > CONTENT_RTOL * s.total_size else 0.0
    result.buffers = buffers
    if options.power_model is not None:
        result.energy = energy_proxy(plan, options.power_model, off, n_bs, rates.tau)


def streaming_rate_of(scenario: ScenarioConfig) -> float:
    rates = {s.streaming_rate for s in scenario.sessions}
    if len(rates) == 1:
        return rates.pop()
    return float(np.mean([s.streaming_rate for s in scenario.sessions])) if rates else 0.0


RESULTS_HEADER = ["scenario_id", "strategy", "streaming_rate_bps", "n_users", "mean_airtime",
                  "reduction_vs_es", "stall_slots", "undelivered_bits", "energy_proxy", "status"]


def results_row(scenario_id: str, scenario: ScenarioConfig, result: RunResult, es_airtime: float | None) -> list[str]:
    def fmt(v):
        return "" if v is None else f"{v:.10g}"

    reduction = None
    if result.ok and es_airtime:
        reduction = 1.0 - result.network_airtime / es_airtime
    energy = result.energy["total"] if result.energy else None
    return [
        scenario_id,
        result.strategy,
        fmt(streaming_rate_of(scenario)),
        str(scenario.n_users),
        fmt(result.network_airtime),
        fmt(reduction),
        str(result.total_stall_slots) if result.ok else "",
        fmt(result.total_undelivered) if result.ok else "",
        fmt(energy),
        result.status,
    ]
