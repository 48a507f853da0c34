import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gamesynth.dou.agents import ScoredActions, top_p_filter, uniform_scores
from gamesynth.dou.state import deal, legal_actions
from gamesynth.topp import DOU_TOP_P, GO_TOP_P, nucleus, softmax

probs_st = st.lists(st.floats(0.001, 10.0), min_size=1, max_size=40).map(lambda xs: [x / sum(xs) for x in xs])


def test_defaults():
    assert (DOU_TOP_P, GO_TOP_P) == (0.25, 0.4)


@given(probs_st)
def test_full_mass_keeps_everything_in_order(probs):
    idx = nucleus(probs, 1.0)
    assert sorted(idx) == list(range(len(probs)))
    assert all(probs[a] >= probs[b] for a, b in zip(idx, idx[1:]))


@given(probs_st, st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_size_is_monotone_in_p(probs, p, q):
    lo, hi = sorted((p, q))
    small, big = nucleus(probs, lo), nucleus(probs, hi)
    assert len(small) <= len(big) and big[: len(small)] == small


@given(probs_st, st.floats(0.01, 1.0))
def test_prefix_is_minimal(probs, p):
    idx = nucleus(probs, p)
    mass = sum(probs[i] for i in idx)
    assert mass >= p - 1e-9
    assert sum(probs[i] for i in idx[:-1]) < p - 1e-12 or len(idx) == 1


def test_ties_break_by_key():
    assert nucleus([0.25] * 4, 0.5, tiebreak=[3, 1, 2, 0]) == [3, 1]
    assert nucleus([0.5, 0.5], 0.5) == [0]


@pytest.mark.parametrize("p", [0.0, -0.1, 1.5])
def test_bad_p(p):
    with pytest.raises(ValueError):
        nucleus([1.0], p)


def test_softmax_is_shift_invariant():
    assert np.allclose(softmax([1.0, 2.0, 3.0]), softmax([11.0, 12.0, 13.0]))


def test_action_filter_on_game_states():
    state = deal(4)
    acts = legal_actions(state)
    assert top_p_filter(uniform_scores(state), 1.0) == acts
    logits = ScoredActions(tuple((a, -float(i)) for i, a in enumerate(acts)))
    assert top_p_filter(logits, DOU_TOP_P) == acts[:1]
    sizes = [len(top_p_filter(logits, p / 100, temperature=5.0)) for p in range(1, 101)]
    assert sizes == sorted(sizes) and sizes[-1] == len(acts)
