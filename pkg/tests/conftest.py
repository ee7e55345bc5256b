import numpy as np
import pytest

from pregwa.radio import NO_BS, RateMatrix
from pregwa.scenario import VideoSession


def rate_matrix(rates, assoc=None, n_bs=1, tau=1.0, user_ids=None):
    """RateMatrix from a plain array; zero entries are off the road unless ``assoc`` says otherwise."""
    rates = np.atleast_2d(np.asarray(rates, dtype=float))
    if assoc is None:
        assoc = np.where(rates > 0, 0, NO_BS)
    ids = tuple(range(rates.shape[0])) if user_ids is None else tuple(user_ids)
    return RateMatrix(rates, np.asarray(assoc), ids, n_bs, tau)


def sessions_for(n, V, size, starts=None):
    starts = starts or [0] * n
    return [VideoSession(u, float(V), float(size), starts[u]) for u in range(n)]


@pytest.fixture
def mk_rates():
    return rate_matrix


@pytest.fixture
def mk_sessions():
    return sessions_for


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> None:
    """Record one acceptance verdict; all verdicts are echoed in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
