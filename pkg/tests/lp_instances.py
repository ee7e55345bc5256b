"""Seeded random instances shared by the LP tests and the acceptance gate."""

import numpy as np

from pregwa.allocators import build_airtime_lp
from pregwa.lp import EQ, GE, LE, LinearProgram
from pregwa.lp.brute import MAX_SUBSETS, subset_count
from pregwa.radio import NO_BS, RateMatrix
from pregwa.scenario import VideoSession


def random_lp(rng) -> LinearProgram:
    """Small integer-data LP; usually feasible around a hidden point, sometimes not, sometimes unbounded."""
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 7))
    x0 = rng.uniform(-2, 2, n)
    wild = rng.random() < 0.1
    lower = np.where(rng.random(n) < 0.8, np.floor(x0) - rng.integers(0, 2, n), -np.inf)
    upper = np.where(rng.random(n) < 0.6, np.ceil(x0) + rng.integers(0, 2, n), np.inf)
    lp = LinearProgram(n, rng.integers(-3, 4, n).astype(float), lower, upper)
    for _ in range(m):
        a = rng.integers(-4, 5, n).astype(float)
        rel = rng.choice([LE, GE, EQ], p=[0.45, 0.45, 0.1])
        act = a @ x0
        if wild:
            rhs = float(rng.integers(-5, 6))
        elif rel == LE:
            rhs = float(np.ceil(act) + rng.integers(0, 3))
        elif rel == GE:
            rhs = float(np.floor(act) - rng.integers(0, 3))
        else:
            rhs = act
        lp.add_constraint(np.arange(n), a, rel, rhs)
    return lp


def random_airtime_case(rng):
    """(rates, sessions, mode) with at most 3 users and 4 slots."""
    n = int(rng.integers(1, 4))
    T = int(rng.integers(1, 5))
    n_bs = int(rng.integers(1, 3))
    rates = np.zeros((n, T))
    assoc = np.full((n, T), NO_BS)
    sessions = []
    for u in range(n):
        entry = int(rng.integers(0, T))
        stay = int(rng.integers(1, T - entry + 1))
        for t in range(entry, entry + stay):
            assoc[u, t] = int(rng.integers(0, n_bs))
            rates[u, t] = 0.0 if rng.random() < 0.15 else float(rng.choice([1, 2, 3, 5, 8, 10])) * 1e6
        V = float(rng.choice([0.5, 1.0, 2.0, 4.0])) * 1e6
        k = int(rng.integers(1, 4))
        sessions.append(VideoSession(u, V, V * k, entry))
    rm = RateMatrix(rates, assoc, tuple(range(n)), n_bs, 1.0)
    mode = "soft" if rng.random() < 0.3 else "hard"
    return rm, sessions, mode


def airtime_lps(seed, count):
    """``count`` air-time LPs small enough for the enumeration oracle."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        rm, sess, mode = random_airtime_case(rng)
        prog = build_airtime_lp(rm, sess, mode)
        if subset_count(prog.lp) <= MAX_SUBSETS:
            out.append((rm, sess, mode, prog))
    return out
