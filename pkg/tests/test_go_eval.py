import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_go_state
from gamesynth.go.board import Color, GoMove, apply_move, empty_state, from_grid, play
from gamesynth.go.evaluate import (EvalSource, InvalidEval, OwnershipMap, PositionEval, count_territory,
                                   estimate_ownership, estimate_winrate, evaluate_position, score_lead,
                                   to_perspective)
from gamesynth.go.fastgo import playouts
from gamesynth.go.policy import Tier, choose_move, heuristic_logits, heuristic_move
from gamesynth.go.sgf import IllegalMoveInRecord, ParseError, load_sgf, read_sgf


def test_count_and_lead_golden():
    raw = np.array([[0.9, 0.7, 0.59], [-0.6, -0.61, 0.0], [1.0, -1.0, 0.2]])
    own = OwnershipMap(raw, theta=0.6)
    assert own.discrete.tolist() == [[1, 1, 0], [-1, -1, 0], [1, -1, 0]]
    assert count_territory(own) == (3, 3)
    assert score_lead((3, 3), 7.5) == -7.5
    assert score_lead((200, 150), 6.5) == 43.5


def test_ownership_validation():
    with pytest.raises(InvalidEval):
        OwnershipMap(np.full((3, 3), 1.5))
    with pytest.raises(InvalidEval):
        OwnershipMap(np.zeros((3, 4)))
    with pytest.raises(InvalidEval):
        PositionEval(OwnershipMap(np.zeros((3, 3))), 0.0, 1.2)
    with pytest.raises(InvalidEval):
        PositionEval(OwnershipMap(np.zeros((3, 3))), float("nan"), 0.5)


def test_perspective_conversion():
    assert to_perspective(3.5, Color.WHITE) == -3.5
    assert to_perspective(0.7, Color.WHITE, "winrate") == pytest.approx(0.3)
    assert to_perspective(0.7, Color.BLACK, "winrate") == 0.7


def test_settled_board_is_counted_exactly():
    # black walls off three columns, white two; the walls have no eyes, so
    # playouts sometimes break through, but ownership stays on the right side
    grid = np.zeros((5, 5), dtype=np.int8)
    grid[:, 2] = 1
    grid[:, 3] = -1
    ev = evaluate_position(from_grid(grid), 64, seed=3)
    assert count_territory(ev.ownership) == (15, 10)
    assert ev.score_lead == 15 - 10 - 7.5
    assert ev.win_rate < 0.5
    assert ev.source == EvalSource.BUILTIN_MC


@given(st.integers(0, 2**31))
def test_playouts_are_colour_symmetric(seed):
    state = random_go_state(seed, size=7, plies=20)
    flipped = from_grid(-state.grid, to_move=state.to_move.opponent)
    own, margins = playouts(state, 16, seed)
    own_f, margins_f = playouts(flipped, 16, seed)
    assert np.allclose(own, -own_f)
    assert np.array_equal(margins, -margins_f)


def test_playouts_are_seed_deterministic():
    state = random_go_state(4, size=9, plies=30)
    a = evaluate_position(state, 50, seed=9)
    b = evaluate_position(state, 50, seed=9)
    assert np.array_equal(a.ownership.raw, b.ownership.raw) and a.win_rate == b.win_rate
    assert 0.0 <= estimate_winrate(state, 20, 1) <= 1.0
    assert estimate_winrate(state, 20, 1, side=Color.WHITE) <= 1.0
    assert estimate_ownership(state, 10, 1).size == 9


def test_empty_board_favours_white_with_komi():
    ev = evaluate_position(empty_state(9), 200, seed=1)
    assert ev.win_rate < 0.5


# -- heuristic policy -------------------------------------------------------------

def test_heuristic_prefers_captures():
    # white C3 has one liberty left, at D3
    grid = np.zeros((5, 5), dtype=np.int8)
    grid[2, 2] = -1
    grid[1, 2] = grid[3, 2] = grid[2, 1] = 1
    s = from_grid(grid)
    logits = dict(heuristic_logits(s, np.random.default_rng(0), noise=0.0))
    assert max(logits, key=logits.get) == (4, 3)


def test_choose_move_tiers():
    rng = np.random.default_rng(0)
    cands = [((1, 1), 0.0), ((2, 2), 3.0), ((3, 3), 2.9)]
    assert choose_move(cands, Tier.OPTIMAL, rng) == (2, 2)
    # softmax mass: 0.51, 0.46, 0.025, so p=0.9 keeps the top two and p=0.99 all three
    picks = {choose_move(cands, Tier.SUBOPTIMAL, rng, p=0.9) for _ in range(200)}
    assert picks == {(2, 2), (3, 3)}
    picks = {choose_move(cands, Tier.SUBOPTIMAL, rng, p=0.99) for _ in range(400)}
    assert picks == {(1, 1), (2, 2), (3, 3)}


def test_heuristic_move_is_legal():
    rng = np.random.default_rng(1)
    s = empty_state(9)
    for _ in range(120):
        m = heuristic_move(s, Tier.SUBOPTIMAL, rng)
        s = apply_move(s, m)
    assert len(s.history) == 120


# -- SGF --------------------------------------------------------------------------

GAME = b"(;GM[1]FF[4]SZ[9]KM[6.5]C[root note];B[ee]C[center];W[cc](;B[gg]C[main])(;B[dd]C[variation]))"


def test_sgf_main_line():
    game = read_sgf(GAME)
    assert (game.size, game.komi, game.root_comment) == (9, 6.5, "root note")
    assert [str(s.move) for s in game.steps] == ["black E5", "white C7", "black G3"]
    assert [s.comment for s in game.steps] == ["center", "", "main"]
    assert load_sgf(GAME)[2][0] == game.steps[1].after


def test_sgf_escapes_and_pass():
    game = read_sgf(b"(;SZ[5];B[]C[a \\] bracket];W[tt])")
    assert game.steps[0].move.is_pass and game.steps[1].move.is_pass
    assert game.steps[0].comment == "a ] bracket"


@pytest.mark.parametrize("data,err", [(b"no tree", ParseError), (b"(;SZ[5];B[cc];W[cc])", IllegalMoveInRecord),
                                      (b"(;SZ[5];B[cc", ParseError)])
def test_sgf_errors(data, err):
    with pytest.raises(err):
        read_sgf(data)


def test_sgf_replays_like_engine():
    game = read_sgf(GAME)
    s = empty_state(9, komi=6.5)
    for step in game.steps:
        assert step.before == s
        s = apply_move(s, GoMove(step.move.color, step.move.point))
    assert s == game.steps[-1].after
