from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_dou_state
from oracles import brute_force_legal
from gamesynth.dou.cards import (RANKS, CardError, Hand, MultiplicityExceeded, UnknownRank, encode_cards, faces,
                                 parse_cards)
from gamesynth.dou.combos import (PASS, Category, beats, canonical_order, enumerate_all_actions, is_well_formed,
                                  make_combo, playable_combos)
from gamesynth.dou.fastsim import compiled_moves
from gamesynth.dou.solver import TooLarge, optimal_actions, play_against, solve_endgame
from gamesynth.dou.state import (DouState, IllegalAction, Side, TerminalState, apply_action, deal, legal_actions,
                                 new_game, winner)
from gamesynth.dou.agents import extreme_card_policy

# frozen after the first brute-force enumeration; see test_action_count_matches_closed_form
ACTION_SPACE_SIZE = 28_895


def hands_strategy(max_cards=20):
    deck = [r for r in RANKS for _ in range(1 if r >= 20 else 4)]
    return st.lists(st.sampled_from(range(len(deck))), unique=True, max_size=max_cards).map(
        lambda idx: Hand.from_ranks(deck[i] for i in idx))


# -- codec ------------------------------------------------------------------------

@given(hands_strategy(54))
def test_card_codec_round_trip(hand):
    assert parse_cards(encode_cards(hand)) == hand


def test_encode_is_sorted_ascending():
    assert encode_cards([30, 3, 17, 3]) == "3 3 17 30"
    assert faces([14, 17, 20]) == "A 2 BJ"


@pytest.mark.parametrize("text,err", [("3 3 99", UnknownRank), ("3 3 3 3 3", MultiplicityExceeded),
                                      ("20 20", MultiplicityExceeded), ("Q", UnknownRank)])
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_cards(text)
    assert issubclass(err, CardError)


# -- action space -----------------------------------------------------------------

def _closed_form_count() -> int:
    """Independent count of the abstract actions from combinatorics alone."""
    non_jokers = 13

    def solo_kicker_sets(k, body):
        # multisets of size k over the 13-body non-joker ranks (4 copies) and two
        # single jokers, never both jokers
        free = non_jokers - body
        poly = [1]
        for cap in [4] * free + [1, 1]:
            nxt = [0] * (len(poly) + cap)
            for i, c in enumerate(poly):
                for t in range(cap + 1):
                    nxt[i + t] += c
            poly = nxt
        both_jokers = 0
        poly_nj = [1]
        for cap in [4] * free:
            nxt = [0] * (len(poly_nj) + cap)
            for i, c in enumerate(poly_nj):
                for t in range(cap + 1):
                    nxt[i + t] += c
            poly_nj = nxt
        if k >= 2:
            both_jokers = poly_nj[k - 2] if k - 2 < len(poly_nj) else 0
        return poly[k] - both_jokers

    total = 1  # PASS
    total += 15 + 13 + 13 + 13 + 1  # solo, pair, trio, bomb, rocket
    total += 13 * 14  # trio + solo
    total += 13 * 12  # trio + pair
    total += 13 * solo_kicker_sets(2, 1)  # four + two solos
    total += 13 * comb(12, 2)  # four + two pairs
    chains = lambda lo, hi: sum(12 - L + 1 for L in range(lo, hi + 1))
    total += chains(5, 12) + chains(3, 10) + chains(2, 6)
    for L in range(2, 6):
        total += (12 - L + 1) * solo_kicker_sets(L, L)
    for L in range(2, 5):
        total += (12 - L + 1) * comb(13 - L, L)
    return total


def test_action_count_matches_closed_form():
    acts = enumerate_all_actions()
    assert len(acts) == len(set(acts)) == ACTION_SPACE_SIZE == _closed_form_count()
    assert acts[-1] == PASS


def test_every_action_is_well_formed():
    assert all(is_well_formed(a) for a in enumerate_all_actions())
    assert not is_well_formed(make_combo(Category.PAIR, [3, 4]))


def test_kicker_convention():
    by_key = {(a.category, a.cards) for a in enumerate_all_actions()}
    assert (Category.TRIO_SOLO, (3, 3, 3, 3)) not in by_key  # kicker reuses the body rank
    assert (Category.FOUR_TWO_SOLO, (3, 3, 3, 3, 20, 30)) not in by_key  # two jokers as kickers
    assert (Category.FOUR_TWO_SOLO, (3, 3, 3, 3, 4, 4)) in by_key
    assert (Category.SOLO_CHAIN, (10, 11, 12, 13, 14, 17)) not in by_key  # 2 never chains


# -- legal moves ------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(40))
def test_legal_actions_match_brute_force(seed):
    state = random_dou_state(seed)
    assert legal_actions(state) == brute_force_legal(state)


@pytest.mark.parametrize("seed", range(60))
def test_compiled_generator_matches_python(seed):
    state = random_dou_state(1000 + seed)
    dom = state.dominant[1] if state.dominant else None
    assert canonical_order(compiled_moves(state.hand, dom)) == canonical_order(playable_combos(state.hand, dom))


@given(st.integers(0, 2**32 - 1))
def test_playout_invariants(seed):
    rng = np.random.default_rng(seed)
    state = deal(rng, landlord=int(rng.integers(3)))
    assert sorted(len(h) for h in state.hands) == [17, 17, 20]
    while winner(state) is None:
        acts = legal_actions(state)
        if state.dominant is None:
            assert PASS not in acts and acts == canonical_order(acts)
        else:
            assert acts[-1] == PASS and acts[:-1] == canonical_order(acts[:-1])
        before = state.to_move
        state = apply_action(state, acts[int(rng.integers(len(acts)))])
        assert state.to_move == (before + 1) % 3
        assert state.dominant is None or not state.dominant[1].is_pass
        assert sum(len(h) for h in state.hands) + sum(len(c.cards) for _, c in state.history) == 54
    with pytest.raises(TerminalState):
        legal_actions(state)


def test_beats_is_irreflexive_and_asymmetric():
    acts = [a for a in enumerate_all_actions() if not a.is_pass]
    rng = np.random.default_rng(5)
    for i in rng.integers(len(acts), size=3000):
        a, b = acts[i], acts[rng.integers(len(acts))]
        assert not beats(a, a)
        assert not (beats(a, b) and beats(b, a))


def test_illegal_actions_rejected():
    state = new_game([parse_cards("4 5 6"), parse_cards("3 7 8"), parse_cards("9 10 11")], 0)
    with pytest.raises(IllegalAction, match="cannot pass"):
        apply_action(state, PASS)
    with pytest.raises(IllegalAction, match="not in hand"):
        apply_action(state, make_combo(Category.SOLO, [7]))
    state = apply_action(state, make_combo(Category.SOLO, [5]))
    with pytest.raises(IllegalAction, match="does not beat"):
        apply_action(state, make_combo(Category.SOLO, [3]))
    with pytest.raises(IllegalAction, match="malformed"):
        apply_action(state, make_combo(Category.PAIR, [7, 8]))


def test_lead_returns_after_two_passes():
    state = new_game([parse_cards("3 4"), parse_cards("5"), parse_cards("6")], 0)
    state = apply_action(state, make_combo(Category.SOLO, [4]))
    state = apply_action(state, PASS)
    state = apply_action(state, PASS)
    assert state.to_move == 0 and state.dominant is None


def test_history_records_every_turn():
    state = random_dou_state(3, max_plies=12)
    assert len(state.history) == 12


# -- endgames and scripted opponents --------------------------------------------

QA2 = "12 14 17"
K22 = "13 17 17"


def test_two_player_start_is_lost_for_first_player():
    state = new_game([parse_cards(QA2), parse_cards(K22)], 0)
    assert solve_endgame(state) == (-1, 1)
    assert optimal_actions(state) == legal_actions(state)


def test_smallest_card_opponent_is_beaten():
    state = new_game([parse_cards(QA2), parse_cards(K22)], 0)
    moves, won = play_against(state, 0, lambda s: extreme_card_policy(s, largest=False))
    assert [(seat, a.encode()) for seat, a in moves] == [(0, "12"), (1, "13"), (0, "17"), (1, "pass"), (0, "14")]
    assert won == Side.LANDLORD


def test_largest_card_opponent_wins():
    state = new_game([parse_cards(QA2), parse_cards(K22)], 0)
    moves, won = play_against(state, 0, lambda s: extreme_card_policy(s, largest=True))
    assert [(seat, a.encode()) for seat, a in moves] == [(0, "12"), (1, "17"), (0, "pass"), (1, "17"),
                                                         (0, "pass"), (1, "13")]
    assert won == Side.FARMERS


def test_solver_refuses_large_or_hidden_positions():
    with pytest.raises(TooLarge):
        solve_endgame(deal(0))
    with pytest.raises(ValueError):
        solve_endgame(new_game([parse_cards("3"), parse_cards("4")], 0), visible=False)


def test_solver_matches_exhaustive_search_on_tiny_deals():
    rng = np.random.default_rng(11)
    deck = [r for r in RANKS[:8] for _ in range(4)]
    for _ in range(25):
        cards = rng.permutation(deck)[:6].tolist()
        state = new_game([Hand.from_ranks(cards[:3]), Hand.from_ranks(cards[3:])], 0)

        def search(s):
            w = winner(s)
            if w is not None:
                return w
            me = s.side_of(s.to_move)
            outcomes = [search(apply_action(s, a)) for a in legal_actions(s)]
            return me if me in outcomes else outcomes[0]

        expected = search(state)
        assert solve_endgame(state) == tuple(1 if state.side_of(i) == expected else -1 for i in range(2))


def test_pair_kicker_sets_are_distinct():
    four_pairs = [a for a in enumerate_all_actions() if a.category == Category.FOUR_TWO_PAIR]
    assert len(four_pairs) == 13 * comb(12, 2)
    assert all(len(set(a.cards)) == 3 for a in four_pairs)
    wings = [a for a in enumerate_all_actions() if a.category == Category.AIRPLANE_PAIR_WINGS and a.length == 2]
    assert len(wings) == 11 * len(list(combinations(range(11), 2)))
