import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gamesynth.dou.state import apply_action, deal, legal_actions, winner
from gamesynth.go.board import GoMove, apply_move, empty_state, point_features

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("repo")

MOCK = [sys.executable, "-m", "gamesynth.bridge.mock"]


def random_dou_state(seed: int, max_plies: int | None = None):
    """A reachable mid-game state: a seeded deal followed by uniform random play."""
    rng = np.random.default_rng(seed)
    state = deal(rng, landlord=int(rng.integers(3)))
    plies = int(rng.integers(0, 40)) if max_plies is None else max_plies
    for _ in range(plies):
        acts = legal_actions(state)
        nxt = apply_action(state, acts[int(rng.integers(len(acts)))])
        if winner(nxt) is not None:
            break
        state = nxt
    return state


def random_go_state(seed: int, size: int = 9, plies: int | None = None):
    rng = np.random.default_rng(seed)
    state = empty_state(size)
    n = int(rng.integers(0, size * size * 2)) if plies is None else plies
    for _ in range(n):
        pts = list(point_features(state))
        if not pts or rng.random() < 0.02:
            state = apply_move(state, GoMove(state.to_move, None))
            continue
        state = apply_move(state, GoMove(state.to_move, pts[int(rng.integers(len(pts)))]))
    return state


@pytest.fixture
def mock_cmd():
    return list(MOCK)


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return Path(__file__).resolve().parent.parent


# acceptance outcomes, filled by test_acceptance.criterion and printed after the run
ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{status} criterion {n:>2}: {title}" + (f" ({detail})" if detail else ""))
