"""Stored-video demand, cumulative delivery and stall accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import VideoSession


def demand_at(session: VideoSession, t: int, tau: float = 1.0) -> float:
    """Bits that must have arrived by the end of slot ``t`` for uninterrupted playback."""
    played = max(0, t - session.start_slot + 1)
    return min(session.streaming_rate * tau * played, session.total_size)


@dataclass(frozen=True, eq=False)
class DemandCurve:
    values: np.ndarray
    total_size: float

    @classmethod
    def for_session(cls, session: VideoSession, horizon: int, tau: float = 1.0) -> "DemandCurve":
        t = np.arange(horizon)
        played = np.maximum(0, t - session.start_slot + 1)
        vals = np.minimum(session.streaming_rate * tau * played, session.total_size)
        return cls(vals, float(session.total_size))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class DeliveryState:
    """Cumulative delivered bits per slot; the buffer is what is ahead of playback."""

    delivered: np.ndarray
    demand: DemandCurve

    @property
    def buffer(self) -> np.ndarray:
        return self.delivered - self.demand.values

    @classmethod
    def from_grants(cls, x, rates, demand: DemandCurve) -> "DeliveryState":
        bits = np.asarray(x, dtype=float) * np.asarray(rates, dtype=float)
        R = np.minimum(np.cumsum(bits), demand.total_size)
        return cls(R, demand)


def accumulate(prev: float, x: float, r: float, total_size: float) -> float:
    """Delivery after granting air-time fraction ``x`` at ``r`` bits per slot."""
    return min(prev + x * r, total_size)


@dataclass(frozen=True)
class StallReport:
    stall_slot_count: int
    first_stall_slot: int | None
    max_deficit_bits: float


def stall_report(delivered, demand, tol: float = 0.0, mask=None) -> StallReport:
    """Slots where cumulative delivery trails cumulative demand by more than ``tol`` bits.

    ``delivered`` and ``demand`` may be arrays or the corresponding state
    objects; ``mask`` restricts the scan (e.g. to slots the user is on the road).
    """
    R = np.asarray(getattr(delivered, "delivered", delivered), dtype=float)
    D = np.asarray(getattr(demand, "values", demand), dtype=float)
    if R.shape != D.shape:
        raise ValueError("delivery and demand horizons differ")
    deficit = np.maximum(D - R, 0.0)
    stalled = deficit > tol
    if mask is not None:
        stalled &= np.asarray(mask, dtype=bool)
        deficit = np.where(mask, deficit, 0.0)
    idx = np.flatnonzero(stalled)
    return StallReport(
        int(idx.size),
        int(idx[0]) if idx.size else None,
        float(deficit[stalled].max()) if idx.size else 0.0,
    )
