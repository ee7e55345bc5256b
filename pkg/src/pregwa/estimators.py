"""scikit-learn style front ends for the planners.

``fit(rates, sessions)`` plans the horizon and stores the plan; parameters
live on the estimator so sweeps can ``clone``/``set_params`` them like any
other estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .allocators import (
    DEFAULT_SOFT_LAMBDA,
    equal_share_plan,
    heuristic_plan,
    optimal_plan,
    rate_proportional_plan,
)
from .validation import aligned_sessions, check_rate_matrix


class _PlannerMixin:
    def _plan(self, rates, sessions):
        raise NotImplementedError

    def fit(self, rates, sessions):
        check_rate_matrix(rates)
        aligned_sessions(rates, sessions)
        self.plan_ = self._plan(rates, sessions)
        self.n_users_, self.horizon_ = rates.shape
        self.airtime_ = self.plan_.total_airtime
        return self

    def predict(self, rates=None, sessions=None) -> np.ndarray:
        """Air-time fractions (users x slots); refits first when inputs are given."""
        if rates is not None:
            self.fit(rates, sessions)
        check_is_fitted(self, "plan_")
        if self.plan_.x is None:
            raise ValueError(f"no feasible plan ({self.plan_.status})")
        return self.plan_.x

    def fit_predict(self, rates, sessions) -> np.ndarray:
        return self.fit(rates, sessions).predict()


class EqualShareAllocator(_PlannerMixin, BaseEstimator):
    def _plan(self, rates, sessions):
        return equal_share_plan(rates, sessions)


class RateProportionalAllocator(_PlannerMixin, BaseEstimator):
    def _plan(self, rates, sessions):
        return rate_proportional_plan(rates, sessions)


class HeuristicAllocator(_PlannerMixin, BaseEstimator):
    def _plan(self, rates, sessions):
        return heuristic_plan(rates, sessions)


class OptimalAllocator(_PlannerMixin, BaseEstimator):
    """Minimum network air-time over the horizon.

    Parameters
    ----------
    mode : {"hard", "soft"}
        ``soft`` admits playback shortfall at ``soft_lambda`` per slot of video.
    soft_lambda : float
    """

    def __init__(self, mode="hard", soft_lambda=DEFAULT_SOFT_LAMBDA):
        self.mode = mode
        self.soft_lambda = soft_lambda

    def _plan(self, rates, sessions):
        if self.mode not in ("hard", "soft"):
            raise ValueError(f"mode must be 'hard' or 'soft', got {self.mode!r}")
        return optimal_plan(rates, sessions, mode=self.mode, soft_lambda=self.soft_lambda)
