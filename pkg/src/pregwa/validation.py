"""Input checks shared by the planners and estimators."""

from __future__ import annotations

import numpy as np

from .radio import NO_BS, RateMatrix


def check_rate_matrix(rates) -> RateMatrix:
    if not isinstance(rates, RateMatrix):
        raise TypeError(f"expected a RateMatrix, got {type(rates).__name__}")
    r, a = rates.rates, rates.association
    if np.any(~np.isfinite(r)) or np.any(r < 0):
        raise ValueError("rates must be finite and non-negative")
    if np.any((a != NO_BS) & ((a < 0) | (a >= rates.n_bs))):
        raise ValueError("association refers to an unknown base station")
    if np.any((a == NO_BS) & (r != 0)):
        raise ValueError("off-road entries must carry zero rate")
    if len(rates.user_ids) != r.shape[0]:
        raise ValueError("one user id per rate-matrix row is required")
    return rates


def aligned_sessions(rates: RateMatrix, sessions) -> list:
    """Sessions reordered to follow the rate matrix rows."""
    by_id = {}
    for s in sessions:
        if s.user_id in by_id:
            raise ValueError(f"duplicate session for user {s.user_id}")
        by_id[s.user_id] = s
    missing = [u for u in rates.user_ids if u not in by_id]
    if missing:
        raise ValueError(f"no session for users {missing}")
    return [by_id[u] for u in rates.user_ids]
