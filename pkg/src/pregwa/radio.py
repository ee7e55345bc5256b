"""Path loss, clipped Shannon rate and nearest-BS association."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .scenario import RoadLayout, ScenarioConfig, ScenarioError

NO_BS = -1


@dataclass(frozen=True)
class RadioConfig:
    tx_power_dbm: float = 46.02
    bandwidth_hz: float = 5e6
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0
    snr_cap_db: float = 20.0
    pl_intercept_db: float = 128.1
    pl_slope_db: float = 37.6
    min_distance_m: float = 1.0
    interference_margin_db: float = 0.0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ScenarioError("bandwidth must be positive")
        if not np.isfinite(self.snr_cap_db):
            raise ScenarioError("SNR cap must be finite")
        if not self.min_distance_m > 0:
            raise ScenarioError("minimum distance must be positive")

    @property
    def noise_dbm(self) -> float:
        return (self.noise_psd_dbm_hz + 10.0 * np.log10(self.bandwidth_hz) + self.noise_figure_db
                + self.interference_margin_db)

    def rate_ceiling(self, tau: float) -> float:
        return tau * self.bandwidth_hz * np.log2(1.0 + 10.0 ** (self.snr_cap_db / 10.0))


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """Per-slot feasible bits (users x slots) and serving BS (``NO_BS`` when off the road)."""

    rates: np.ndarray
    association: np.ndarray
    user_ids: tuple[int, ...]
    n_bs: int
    tau: float = 1.0

    def __post_init__(self):
        rates = np.array(self.rates, dtype=float)
        assoc = np.array(self.association, dtype=np.int64)
        if rates.shape != assoc.shape or rates.ndim != 2:
            raise ValueError("rates and association must be equal-shape 2-D arrays")
        rates.setflags(write=False)
        assoc.setflags(write=False)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "association", assoc)
        object.__setattr__(self, "user_ids", tuple(int(u) for u in self.user_ids))

    @property
    def shape(self):
        return self.rates.shape

    @property
    def present(self) -> np.ndarray:
        return self.association != NO_BS

    def __eq__(self, other):
        if not isinstance(other, RateMatrix):
            return NotImplemented
        return (
            self.user_ids == other.user_ids
            and self.n_bs == other.n_bs
            and np.array_equal(self.rates, other.rates)
            and np.array_equal(self.association, other.association)
        )

    __hash__ = None


def path_loss_db(d, cfg: RadioConfig | None = None):
    """Distance-dependent loss in dB; ``d`` in metres, clamped at ``min_distance_m``."""
    cfg = cfg or RadioConfig()
    d = np.maximum(np.asarray(d, dtype=float), cfg.min_distance_m)
    out = cfg.pl_intercept_db + cfg.pl_slope_db * np.log10(d / 1000.0)
    return float(out) if out.ndim == 0 else out


def snr_db(d, cfg: RadioConfig | None = None):
    cfg = cfg or RadioConfig()
    raw = cfg.tx_power_dbm - np.asarray(path_loss_db(d, cfg)) - cfg.noise_dbm
    return np.minimum(raw, cfg.snr_cap_db)


def feasible_rate(d, cfg: RadioConfig | None = None, tau: float = 1.0):
    """Bits deliverable in one slot of length ``tau`` with the whole BS granted."""
    cfg = cfg or RadioConfig()
    out = tau * cfg.bandwidth_hz * np.log2(1.0 + 10.0 ** (snr_db(d, cfg) / 10.0))
    return float(out) if np.ndim(out) == 0 else out


def _distances(positions, layout: RoadLayout, bs=None):
    bs_xy = np.asarray(layout.bs_positions, dtype=float)
    if bs is not None:
        bs_xy = bs_xy[list(bs)]
    pos = np.asarray(positions, dtype=float)[..., None]
    return np.hypot(pos - bs_xy[:, 0], bs_xy[:, 1])


def associate(position: float, layout: RoadLayout, active_bs=None) -> int:
    """Nearest base station; ties go to the lowest index."""
    ids = list(range(layout.n_bs)) if active_bs is None else sorted(active_bs)
    d = _distances(position, layout, ids)
    return ids[int(np.argmin(d))]


def build_rate_matrix(scenario: ScenarioConfig) -> RateMatrix:
    return build_rate_matrix_forced(scenario, range(scenario.layout.n_bs))


def build_rate_matrix_forced(scenario: ScenarioConfig, active_bs) -> RateMatrix:
    """Rates when only ``active_bs`` transmit; every user attaches to the nearest active BS."""
    ids = sorted(set(int(b) for b in active_bs))
    if not ids:
        raise ScenarioError("at least one base station must stay active")
    layout = scenario.layout
    if ids[0] < 0 or ids[-1] >= layout.n_bs:
        raise ScenarioError("active base station index out of range")
    T = scenario.horizon
    n = scenario.n_users
    rates = np.zeros((n, T))
    assoc = np.full((n, T), NO_BS, dtype=np.int64)
    id_arr = np.asarray(ids)
    for u, tr in enumerate(scenario.traces):
        lo = min(tr.entry_slot, T)
        hi = min(tr.exit_slot, T)
        if hi <= lo:
            continue
        pos = tr.positions[: hi - lo]
        d = _distances(pos, layout, ids)
        k = np.argmin(d, axis=1)
        assoc[u, lo:hi] = id_arr[k]
        rates[u, lo:hi] = feasible_rate(d[np.arange(len(k)), k], scenario.radio, scenario.slot_duration)
    return RateMatrix(rates, assoc, scenario.user_ids, layout.n_bs, scenario.slot_duration)


def dump_rate_matrix(rm: RateMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "slot", "bs", "rate_bits"])
        for u, uid in enumerate(rm.user_ids):
            for t in np.flatnonzero(rm.present[u]):
                w.writerow([uid, int(t), int(rm.association[u, t]), repr(float(rm.rates[u, t]))])
