"""Road geometry, vehicle traces and video sessions for one experiment."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_SPEED = 20.0
TRACE_HEADER = ["user_id", "entry_slot", "speed_mps", "positions"]


class ScenarioError(ValueError):
    pass


class TraceParseError(ScenarioError):
    pass


@dataclass(frozen=True)
class RoadLayout:
    """A one-way road with base stations at (along-road, perpendicular) offsets in metres."""

    length: float = 2000.0
    bs_positions: tuple[tuple[float, float], ...] = ((500.0, 0.0), (1500.0, 0.0))
    one_way: bool = True

    def __post_init__(self):
        object.__setattr__(self, "bs_positions", tuple((float(a), float(b)) for a, b in self.bs_positions))
        if not self.length > 0:
            raise ScenarioError("road length must be positive")
        if not self.bs_positions:
            raise ScenarioError("layout needs at least one base station")
        for k, (along, _) in enumerate(self.bs_positions):
            if not 0.0 <= along <= self.length:
                raise ScenarioError(f"base station {k} lies outside the road span")

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions)


@dataclass(frozen=True, eq=False)
class MobilityTrace:
    user_id: int
    entry_slot: int
    positions: np.ndarray
    speed: float = 0.0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __eq__(self, other):
        if not isinstance(other, MobilityTrace):
            return NotImplemented
        return (
            self.user_id == other.user_id
            and self.entry_slot == other.entry_slot
            and self.speed == other.speed
            and np.array_equal(self.positions, other.positions)
        )

    __hash__ = None

    @property
    def exit_slot(self) -> int:
        """First slot after the trace ends."""
        return self.entry_slot + len(self.positions)


@dataclass(frozen=True)
class VideoSession:
    user_id: int
    streaming_rate: float
    total_size: float
    start_slot: int = 0

    def duration_slots(self, tau: float) -> int:
        return int(round(self.total_size / (self.streaming_rate * tau)))


@dataclass(frozen=True)
class ScenarioConfig:
    layout: RoadLayout
    traces: tuple[MobilityTrace, ...]
    sessions: tuple[VideoSession, ...]
    horizon: int
    slot_duration: float = 1.0
    radio: "RadioConfig" = None  # noqa: F821 - filled from pregwa.radio
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        from .radio import RadioConfig

        object.__setattr__(self, "traces", tuple(self.traces))
        object.__setattr__(self, "sessions", tuple(self.sessions))
        if self.radio is None:
            object.__setattr__(self, "radio", RadioConfig())
        validate_scenario(self)

    @property
    def user_ids(self) -> list[int]:
        return [tr.user_id for tr in self.traces]

    @property
    def n_users(self) -> int:
        return len(self.traces)

    def session_for(self, user_id) -> VideoSession:
        for s in self.sessions:
            if s.user_id == user_id:
                return s
        raise KeyError(user_id)


def validate_trace(trace: MobilityTrace, layout: RoadLayout, tau: float = 1.0, max_speed: float = MAX_SPEED):
    pos = trace.positions
    uid = trace.user_id
    if trace.entry_slot < 0:
        raise ScenarioError(f"user {uid}: negative entry slot")
    if pos.size == 0:
        raise ScenarioError(f"user {uid}: empty trace")
    if not np.all(np.isfinite(pos)):
        raise ScenarioError(f"user {uid}: non-finite position")
    if pos.min() < 0 or pos.max() > layout.length:
        raise ScenarioError(f"user {uid}: position off the road")
    steps = np.diff(pos)
    if np.any(steps < 0):
        raise ScenarioError(f"user {uid}: positions decrease (traffic is one-way)")
    if np.any(steps > max_speed * tau * (1 + 1e-9)):
        raise ScenarioError(f"user {uid}: step exceeds {max_speed} m/s")


def validate_session(session: VideoSession, tau: float):
    uid = session.user_id
    if not session.streaming_rate > 0:
        raise ScenarioError(f"user {uid}: streaming rate must be positive")
    if not session.total_size > 0:
        raise ScenarioError(f"user {uid}: video size must be positive")
    slots = session.total_size / (session.streaming_rate * tau)
    if abs(slots - round(slots)) > 1e-9 * max(1.0, slots):
        raise ScenarioError(f"user {uid}: video size is not a whole number of slots")
    if session.start_slot < 0:
        raise ScenarioError(f"user {uid}: negative start slot")


def validate_scenario(sc: ScenarioConfig):
    if sc.horizon < 1:
        raise ScenarioError("horizon must be at least one slot")
    if not sc.slot_duration > 0:
        raise ScenarioError("slot duration must be positive")
    ids = [tr.user_id for tr in sc.traces]
    if len(set(ids)) != len(ids):
        raise ScenarioError("duplicate user ids in traces")
    if sorted(ids) != sorted(s.user_id for s in sc.sessions):
        raise ScenarioError("sessions must match traces one-to-one by user id")
    for tr in sc.traces:
        validate_trace(tr, sc.layout, sc.slot_duration)
    for s in sc.sessions:
        validate_session(s, sc.slot_duration)


def generate_traces(
    layout: RoadLayout,
    n_users: int,
    speed_range=(10.0, 20.0),
    arrival_spread: int = 0,
    horizon: int = 200,
    seed: int = 0,
    tau: float = 1.0,
) -> list[MobilityTrace]:
    """Constant-speed vehicles entering at the road start.

    Entry slots are uniform on ``[0, arrival_spread]`` and speeds uniform on
    ``speed_range``; a vehicle is tracked until it would pass the road end or
    the horizon closes.
    """
    if layout is None or not layout.bs_positions:
        raise ScenarioError("empty layout")
    lo, hi = (float(v) for v in speed_range)
    if hi <= 0:
        raise ScenarioError("speed range upper bound must be positive")
    if not 0 < lo <= hi <= MAX_SPEED:
        raise ScenarioError(f"speed range must lie within (0, {MAX_SPEED}] m/s")
    if n_users < 1:
        raise ScenarioError("need at least one user")
    if not 0 <= arrival_spread < horizon:
        raise ScenarioError("arrival spread must be shorter than the horizon")
    rng = np.random.default_rng(seed)
    entries = rng.integers(0, arrival_spread + 1, size=n_users)
    speeds = rng.uniform(lo, hi, size=n_users) if hi > lo else np.full(n_users, lo)
    traces = []
    for uid in range(n_users):
        entry = int(entries[uid])
        steps = np.arange(horizon - entry)
        pos = steps * speeds[uid] * tau
        pos = pos[pos <= layout.length]
        traces.append(MobilityTrace(uid, entry, pos, float(speeds[uid])))
    return traces


def position_at(trace: MobilityTrace, t: int):
    """Along-road position at slot ``t`` or ``None`` when the user is not on the road."""
    k = t - trace.entry_slot
    if 0 <= k < len(trace.positions):
        return float(trace.positions[k])
    return None


def export_traces(traces, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for tr in traces:
            w.writerow([tr.user_id, tr.entry_slot, repr(float(tr.speed)), ";".join(repr(float(p)) for p in tr.positions)])


def load_traces(path, layout: RoadLayout | None = None, tau: float = 1.0) -> list[MobilityTrace]:
    """Read traces written by :func:`export_traces` (or any file in that schema)."""
    traces = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRACE_HEADER:
            raise TraceParseError(f"{path}: line 1: expected header {','.join(TRACE_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise TraceParseError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
            try:
                uid = int(row[0])
                entry = int(row[1])
                speed = float(row[2])
                pos = [float(p) for p in row[3].split(";")] if row[3].strip() else []
            except ValueError as exc:
                raise TraceParseError(f"{path}: line {lineno}: {exc}") from None
            traces.append(MobilityTrace(uid, entry, np.array(pos), speed))
    check_layout = layout if layout is not None else RoadLayout(
        length=max((float(tr.positions.max()) for tr in traces if tr.positions.size), default=1.0) or 1.0,
        bs_positions=((0.0, 0.0),),
    )
    for tr in traces:
        validate_trace(tr, check_layout, tau)
    return traces


def make_sessions(traces, streaming_rate: float, duration_slots: int, tau: float = 1.0) -> list[VideoSession]:
    """One video per user, requested on road entry."""
    size = streaming_rate * tau * duration_slots
    return [VideoSession(tr.user_id, float(streaming_rate), float(size), tr.entry_slot) for tr in traces]


def build_scenario(
    n_users: int = 40,
    streaming_rate: float = 1.2e6,
    video_slots: int = 600,
    horizon: int = 200,
    tau: float = 1.0,
    speed_range=(10.0, 20.0),
    arrival_spread: int = 100,
    seed: int = 1,
    layout: RoadLayout | None = None,
    radio=None,
) -> ScenarioConfig:
    """Two-cell road scenario with synthetic traffic; every argument is a knob."""
    layout = layout or RoadLayout()
    traces = generate_traces(layout, n_users, speed_range, arrival_spread, horizon, seed, tau)
    sessions = make_sessions(traces, streaming_rate, video_slots, tau)
    return ScenarioConfig(layout, traces, sessions, horizon, tau, radio, seed)
