import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pregwa.radio import (
    NO_BS,
    RadioConfig,
    associate,
    build_rate_matrix,
    build_rate_matrix_forced,
    dump_rate_matrix,
    feasible_rate,
    path_loss_db,
    snr_db,
)
from pregwa.scenario import MobilityTrace, RoadLayout, ScenarioConfig, ScenarioError, VideoSession, build_scenario

LAYOUT = RoadLayout()
CEILING = 33_291_057.413758975  # 5 MHz * log2(101)


def one_user(positions, entry=0, T=None, radio=None):
    pos = np.asarray(positions, dtype=float)
    T = T or entry + len(pos)
    tr = MobilityTrace(0, entry, pos, 0.0)
    return ScenarioConfig(LAYOUT, [tr], [VideoSession(0, 1e5, 1e5, entry)], T, 1.0, radio)


def test_path_loss_reference_points():
    assert path_loss_db(1000.0) == pytest.approx(128.1)
    assert path_loss_db(500.0) == pytest.approx(116.78127216, abs=1e-8)
    assert path_loss_db(0.0) == path_loss_db(1.0)


def test_path_loss_strictly_increasing():
    d = np.linspace(1.0, 5000.0, 500)
    assert np.all(np.diff(path_loss_db(d)) > 0)


def test_clipped_rate_near_bs():
    assert feasible_rate(10.0) == pytest.approx(CEILING, rel=1e-12)
    # 27.25 dB before the clip at 500 m with the default noise budget
    assert float(snr_db(500.0, RadioConfig(snr_cap_db=99.0))) == pytest.approx(27.2490278, abs=1e-6)
    assert feasible_rate(500.0) == pytest.approx(CEILING, rel=1e-12)


def test_unclipped_rate_at_one_km():
    assert feasible_rate(1000.0) == pytest.approx(26_641_470.561, rel=1e-9)


def test_rate_scales_with_tau():
    assert feasible_rate(700.0, tau=0.5) == pytest.approx(0.5 * feasible_rate(700.0))


def test_interference_margin_lowers_rate():
    cfg = RadioConfig(interference_margin_db=25.0)
    assert cfg.noise_dbm == pytest.approx(RadioConfig().noise_dbm + 25.0)
    assert feasible_rate(500.0, cfg) < feasible_rate(500.0)


def test_rate_falls_with_cap():
    caps = [30.0, 20.0, 10.0, 0.0, -10.0, -30.0]
    r = [feasible_rate(10.0, RadioConfig(snr_cap_db=c)) for c in caps]
    assert all(a > b for a, b in zip(r, r[1:]))
    assert r[-1] < 1e4


@pytest.mark.parametrize("bad", [{"bandwidth_hz": 0.0}, {"snr_cap_db": float("inf")}, {"min_distance_m": 0.0}])
def test_radio_config_invariants(bad):
    with pytest.raises(ScenarioError):
        RadioConfig(**bad)


@pytest.mark.parametrize("pos,bs", [(0.0, 0), (1000.0, 0), (999.9, 0), (1000.1, 1), (1600.0, 1), (2000.0, 1)])
def test_associate_nearest_lowest_index_on_tie(pos, bs):
    assert associate(pos, LAYOUT) == bs


def test_associate_restricted():
    assert associate(1600.0, LAYOUT, active_bs=[0]) == 0


def test_stationary_user_at_bs_gets_ceiling():
    sc = one_user([500.0] * 6, entry=2, T=10)
    rm = build_rate_matrix(sc)
    np.testing.assert_allclose(rm.rates[0, 2:8], CEILING, rtol=1e-12)
    assert np.all(rm.rates[0, :2] == 0) and np.all(rm.rates[0, 8:] == 0)
    assert list(rm.association[0]) == [NO_BS] * 2 + [0] * 6 + [NO_BS] * 2


def test_handover_at_midpoint():
    pos = np.arange(0.0, 2001.0, 15.0)
    rm = build_rate_matrix(one_user(pos))
    first_far = int(np.argmax(pos > 1000.0))
    assert np.all(rm.association[0, :first_far] == 0)
    assert np.all(rm.association[0, first_far:] == 1)


def test_rates_unimodal_per_cell():
    radio = RadioConfig(interference_margin_db=25.0)
    pos = np.arange(0.0, 2000.0, 10.0)
    rm = build_rate_matrix(one_user(pos, radio=radio))
    for j, centre in enumerate((500.0, 1500.0)):
        seg = rm.rates[0, rm.association[0] == j]
        d = np.abs(pos[rm.association[0] == j] - centre)
        peak = int(np.argmin(d))
        assert np.all(np.diff(seg[: peak + 1]) >= 0)
        assert np.all(np.diff(seg[peak:]) <= 0)


def test_forced_all_equals_unrestricted():
    sc = build_scenario(n_users=8, streaming_rate=2e5, video_slots=20, arrival_spread=50, seed=4)
    a = build_rate_matrix(sc)
    b = build_rate_matrix_forced(sc, [0, 1])
    assert a == b


def test_forced_single_bs():
    sc = one_user([1500.0])
    rm = build_rate_matrix_forced(sc, [0])
    assert rm.association[0, 0] == 0
    assert rm.rates[0, 0] == pytest.approx(26_641_470.561, rel=1e-9)


def test_forced_dominated_by_unrestricted():
    sc = build_scenario(n_users=10, streaming_rate=2e5, video_slots=20, arrival_spread=50, seed=5,
                        radio=RadioConfig(interference_margin_db=25.0))
    full = build_rate_matrix(sc).rates
    for active in ([0], [1]):
        assert np.all(build_rate_matrix_forced(sc, active).rates <= full)


def test_forced_empty_rejected():
    with pytest.raises(ScenarioError):
        build_rate_matrix_forced(one_user([0.0]), [])


def test_rate_matrix_invariants():
    sc = build_scenario(n_users=15, streaming_rate=2e5, video_slots=20, arrival_spread=80, seed=9)
    rm = build_rate_matrix(sc)
    assert np.all(rm.rates >= 0) and np.all(rm.rates <= sc.radio.rate_ceiling(1.0) * (1 + 1e-12))
    for u, tr in enumerate(sc.traces):
        on = np.zeros(sc.horizon, bool)
        on[tr.entry_slot:min(tr.exit_slot, sc.horizon)] = True
        np.testing.assert_array_equal(rm.present[u], on)
    assert not rm.rates.flags.writeable


def test_dump_rate_matrix(tmp_path):
    rm = build_rate_matrix(one_user([500.0, 510.0], entry=1, T=4))
    path = tmp_path / "r.csv"
    dump_rate_matrix(rm, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "user_id,slot,bs,rate_bits"
    assert [ln.split(",")[:3] for ln in lines[1:]] == [["0", "1", "0"], ["0", "2", "0"]]


@settings(max_examples=60, deadline=None)
@given(
    d1=st.floats(0.0, 5000.0),
    d2=st.floats(0.0, 5000.0),
    margin=st.floats(0.0, 40.0),
    cap=st.floats(-10.0, 40.0),
)
def test_rate_monotone_and_bounded(d1, d2, margin, cap):
    cfg = RadioConfig(interference_margin_db=margin, snr_cap_db=cap)
    near, far = sorted((d1, d2))
    assert feasible_rate(near, cfg) >= feasible_rate(far, cfg)
    assert feasible_rate(near, cfg) <= cfg.rate_ceiling(1.0) * (1 + 1e-12)
