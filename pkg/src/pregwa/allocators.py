"""Air-time allocation strategies.

Four planners share one output type, :class:`AllocationPlan`:

* equal share and rate proportional, the prediction-free baselines;
* the two-stage per-BS heuristic, which only looks one slot ahead;
* the network-wide LP that minimises total air-time over the horizon.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .lp import GE, LE, LinearProgram, LpStatus, solve
from .radio import NO_BS, RateMatrix, build_rate_matrix_forced
from .traffic import DemandCurve
from .validation import aligned_sessions, check_rate_matrix

STRATEGIES = ("equal_share", "rate_proportional", "heuristic", "optimal", "optimal_bs_off")
DEFAULT_SOFT_LAMBDA = 1e4
CAPACITY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class AllocationPlan:
    """Air-time fractions ``x[user, slot]`` plus provenance.

    ``x`` is ``None`` when the optimal planner could not produce a plan;
    ``status`` then says why.
    """

    x: np.ndarray | None
    strategy: str
    user_ids: tuple[int, ...]
    association: np.ndarray
    status: str = "ok"
    slack: np.ndarray | None = None
    objective: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.x is not None

    @property
    def total_airtime(self) -> float:
        return float(self.x.sum()) if self.x is not None else float("nan")


@dataclass(frozen=True, eq=False)
class SlotView:
    """What one BS knows about its users in one slot."""

    user_ids: tuple[int, ...]
    rates: np.ndarray
    decreasing: np.ndarray
    demand: np.ndarray
    delivered_prev: np.ndarray
    total_size: np.ndarray

    def __post_init__(self):
        for name in ("rates", "decreasing", "demand", "delivered_prev", "total_size"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=bool if name == "decreasing" else float))
        if np.any(self.rates < 0):
            raise ValueError("negative rate in slot view")

    @property
    def remaining(self) -> np.ndarray:
        return np.maximum(self.total_size - self.delivered_prev, 0.0)

    def __len__(self):
        return len(self.user_ids)


def _content_cap(view: SlotView) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(view.rates > 0, view.remaining / np.where(view.rates > 0, view.rates, 1.0), np.inf)


def equal_share_slot(view: SlotView) -> np.ndarray:
    active = view.remaining > 0
    x = np.zeros(len(view))
    if active.any():
        x[active] = 1.0 / active.sum()
    return np.minimum(x, _content_cap(view))


def rate_proportional_slot(view: SlotView) -> np.ndarray:
    active = view.remaining > 0
    x = np.zeros(len(view))
    total = view.rates[active].sum()
    if total > 0:
        x[active] = view.rates[active] / total
    return np.minimum(x, _content_cap(view))


def _by_rate(view: SlotView, idx) -> list[int]:
    # descending rate, user id breaks ties
    return sorted(idx, key=lambda k: (-view.rates[k], view.user_ids[k]))


def heuristic_slot(view: SlotView, budget: float = 1.0) -> np.ndarray:
    """Two-stage grant for one BS and slot.

    Stage 1 covers each user's playback deadline in descending-rate order;
    stage 2 spends what is left pre-buffering users whose rate is about to
    drop, again best rate first.
    """
    n = len(view)
    x = np.zeros(n)
    left = budget
    order = _by_rate(view, range(n))
    for k in order:
        r = view.rates[k]
        if r <= 0 or left <= 0:
            continue
        need = max(0.0, view.demand[k] - view.delivered_prev[k]) / r
        x[k] = min(need, left)
        left -= x[k]
    stage1_bits = x * view.rates
    extra = view.remaining - stage1_bits
    candidates = [k for k in order if view.decreasing[k] and view.rates[k] > 0 and extra[k] > 0]
    for k in candidates:
        if left <= 0:
            break
        g = min(left, extra[k] / view.rates[k])
        x[k] += g
        left -= g
    return x


def decreasing_trend(rates: np.ndarray) -> np.ndarray:
    """``rate[t+1] < rate[t]``; the last slot of the horizon always counts as decreasing."""
    dec = np.ones_like(rates, dtype=bool)
    dec[:, :-1] = rates[:, 1:] < rates[:, :-1]
    return dec


_SLOT_RULES = {
    "equal_share": equal_share_slot,
    "rate_proportional": rate_proportional_slot,
    "heuristic": heuristic_slot,
}


def greedy_plan(rates: RateMatrix, sessions, slot_rule, strategy: str = "custom") -> AllocationPlan:
    """Run ``slot_rule`` per BS per slot in time order, carrying each user's delivery forward.

    Only the user's cumulative delivery crosses a handover, so a BS never
    sees another BS's internal state.
    """
    check_rate_matrix(rates)
    sess = aligned_sessions(rates, sessions)
    n, T = rates.shape
    tau = rates.tau
    demand = np.vstack([DemandCurve.for_session(s, T, tau).values for s in sess]) if n else np.zeros((0, T))
    size = np.array([s.total_size for s in sess])
    dec = decreasing_trend(rates.rates)
    x = np.zeros((n, T))
    R = np.zeros(n)
    for t in range(T):
        assoc = rates.association[:, t]
        for j in range(rates.n_bs):
            users = np.flatnonzero(assoc == j)
            if users.size == 0:
                continue
            view = SlotView(
                tuple(rates.user_ids[u] for u in users),
                rates.rates[users, t],
                dec[users, t],
                demand[users, t],
                R[users],
                size[users],
            )
            x[users, t] = slot_rule(view)
        R = np.minimum(R + x[:, t] * rates.rates[:, t], size)
    return AllocationPlan(x, strategy, rates.user_ids, rates.association)


def equal_share_plan(rates: RateMatrix, sessions) -> AllocationPlan:
    return greedy_plan(rates, sessions, equal_share_slot, "equal_share")


def rate_proportional_plan(rates: RateMatrix, sessions) -> AllocationPlan:
    return greedy_plan(rates, sessions, rate_proportional_slot, "rate_proportional")


def heuristic_plan(rates: RateMatrix, sessions, horizon: int | None = None) -> AllocationPlan:
    if horizon is not None and horizon != rates.shape[1]:
        raise ValueError("horizon does not match the rate matrix")
    return greedy_plan(rates, sessions, heuristic_slot, "heuristic")


@dataclass
class AirtimeProgram:
    """The air-time LP together with the map from LP columns back to (user, slot)."""

    lp: LinearProgram
    users: np.ndarray
    slots: np.ndarray
    slack_users: np.ndarray
    slack_slots: np.ndarray
    n_x: int


def build_airtime_lp(rates: RateMatrix, sessions, mode: str = "hard", soft_lambda: float = DEFAULT_SOFT_LAMBDA) -> AirtimeProgram:
    """Minimise total air-time subject to BS capacity, playback deadlines and video size.

    Columns exist only for (user, slot) pairs on the road with a positive
    rate. Deadline rows stop at the slot where the video is fully due,
    since later rows are implied by it. Capacity rows with a single
    column are left to the variable bound.
    """
    if mode not in ("hard", "soft"):
        raise ValueError(f"unknown mode {mode!r}")
    check_rate_matrix(rates)
    sess = aligned_sessions(rates, sessions)
    n, T = rates.shape
    tau = rates.tau
    live = rates.present & (rates.rates > 0)
    users, slots = np.nonzero(live)
    n_x = users.size
    col = -np.ones((n, T), dtype=np.int64)
    col[users, slots] = np.arange(n_x)

    rows = []  # (cols, coefs, relation, rhs, slack-owner or None)
    for u, s in enumerate(sess):
        demand = DemandCurve.for_session(s, T, tau).values
        on_road = np.flatnonzero(rates.present[u])
        mine = np.flatnonzero(live[u])
        if on_road.size:
            due = on_road[demand[on_road] > 0]
            full = np.flatnonzero(demand >= s.total_size)
            if full.size:
                due = due[due <= max(full[0], due[0] if due.size else 0)]
            for t in due:
                k = mine[mine <= t]
                rows.append((col[u, k], rates.rates[u, k], GE, demand[t], (u, t)))
        if mine.size:
            rows.append((col[u, mine], rates.rates[u, mine], LE, s.total_size, None))
    for t in range(T):
        for j in range(rates.n_bs):
            k = col[(rates.association[:, t] == j) & live[:, t], t]
            if k.size >= 2:
                rows.append((k, np.ones(k.size), LE, 1.0, None))

    slack_owner = [r[4] for r in rows if r[4] is not None] if mode == "soft" else []
    n_s = len(slack_owner)
    cost = np.ones(n_x + n_s)
    if n_s:
        V_tau = np.array([sess[u].streaming_rate * tau for u, _ in slack_owner])
        cost[n_x:] = soft_lambda / V_tau
    lp = LinearProgram(n_x + n_s, cost, 0.0, np.concatenate([np.ones(n_x), np.full(n_s, np.inf)]))
    k_slack = n_x
    for cols, coefs, rel, rhs, owner in rows:
        if owner is not None and mode == "soft":
            cols = np.append(cols, k_slack)
            coefs = np.append(coefs, 1.0)
            k_slack += 1
        lp.add_constraint(cols, coefs, rel, rhs)
    su = np.array([o[0] for o in slack_owner], dtype=np.int64)
    st = np.array([o[1] for o in slack_owner], dtype=np.int64)
    return AirtimeProgram(lp, users, slots, su, st, n_x)


def optimal_plan(rates: RateMatrix, sessions, horizon: int | None = None, mode: str = "hard",
                 soft_lambda: float = DEFAULT_SOFT_LAMBDA, strategy: str = "optimal") -> AllocationPlan:
    """Network-wide minimum air-time plan.

    In ``hard`` mode an infeasible program comes back as a plan with
    ``x is None`` and the LP status; it is never replaced by a fallback.
    ``soft`` mode trades deadline misses for air-time at ``soft_lambda``
    per slot of playback shortfall and reports the shortfall as ``slack``.
    """
    if horizon is not None and horizon != rates.shape[1]:
        raise ValueError("horizon does not match the rate matrix")
    prog = build_airtime_lp(rates, sessions, mode, soft_lambda)
    sol = solve(prog.lp)
    info = {"lp_status": sol.status.value, "iterations": sol.iterations,
            "n_vars": prog.lp.n_vars, "n_rows": prog.lp.n_constraints, "mode": mode}
    if sol.status is not LpStatus.OPTIMAL:
        return AllocationPlan(None, strategy, rates.user_ids, rates.association, sol.status.value, info=info)
    x = np.zeros(rates.shape)
    x[prog.users, prog.slots] = np.clip(sol.x[: prog.n_x], 0.0, 1.0)
    slack = None
    if mode == "soft":
        slack = np.zeros(rates.shape)
        slack[prog.slack_users, prog.slack_slots] = sol.x[prog.n_x:]
    return AllocationPlan(x, strategy, rates.user_ids, rates.association, "optimal", slack,
                          float(x.sum()), info)


def optimal_plan_bs_off(scenario, off_bs=(), mode: str = "hard",
                        soft_lambda: float = DEFAULT_SOFT_LAMBDA) -> AllocationPlan:
    """Optimal plan with the BSs in ``off_bs`` powered down for the whole horizon."""
    off = set(int(b) for b in off_bs)
    active = [j for j in range(scenario.layout.n_bs) if j not in off]
    rates = build_rate_matrix_forced(scenario, active)
    plan = optimal_plan(rates, scenario.sessions, mode=mode, soft_lambda=soft_lambda,
                        strategy="optimal_bs_off" if off else "optimal")
    plan.info["off_bs"] = sorted(off)
    return plan


PLAN_HEADER = ["strategy", "user_id", "slot", "bs", "x", "granted_bits"]


def dump_plan(plan: AllocationPlan, rates: RateMatrix, path) -> None:
    """One row per (user, slot) on the road."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PLAN_HEADER)
        if plan.x is None:
            return
        for u, uid in enumerate(plan.user_ids):
            for t in np.flatnonzero(plan.association[u] != NO_BS):
                xv = float(plan.x[u, t])
                w.writerow([plan.strategy, uid, int(t), int(plan.association[u, t]), repr(xv),
                            repr(xv * float(rates.rates[u, t]))])


class PlanFileError(ValueError):
    pass


def load_plan(path, rates: RateMatrix) -> AllocationPlan:
    """Rebuild a plan from :func:`dump_plan` output against the matching rate matrix."""
    index = {uid: u for u, uid in enumerate(rates.user_ids)}
    x = np.zeros(rates.shape)
    seen = np.zeros(rates.shape, dtype=bool)
    strategy = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PLAN_HEADER:
            raise PlanFileError(f"{path}: line 1: expected header {','.join(PLAN_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(PLAN_HEADER):
                raise PlanFileError(f"{path}: line {lineno}: expected {len(PLAN_HEADER)} fields")
            try:
                uid, t, bs, xv = int(row[1]), int(row[2]), int(row[3]), float(row[4])
            except ValueError as exc:
                raise PlanFileError(f"{path}: line {lineno}: {exc}") from None
            if uid not in index or not 0 <= t < rates.shape[1]:
                raise PlanFileError(f"{path}: line {lineno}: user {uid} slot {t} outside the scenario")
            u = index[uid]
            if rates.association[u, t] != bs:
                raise PlanFileError(f"{path}: line {lineno}: user {uid} slot {t} is not served by BS {bs}")
            x[u, t] = xv
            seen[u, t] = True
            strategy = row[0]
    missing = rates.present & ~seen
    if missing.any():
        u, t = np.argwhere(missing)[0]
        raise PlanFileError(f"{path}: plan has no row for user {rates.user_ids[u]} slot {t} "
                            f"({int(missing.sum())} rows missing)")
    return AllocationPlan(x, strategy or "unknown", rates.user_ids, rates.association)
