"""Doudizhu game state and transitions.

States are immutable; ``apply_action`` returns a new state. The seat count is a
parameter (3 normally, 2 for reduced endgame puzzles); in the 2-seat variant the
non-landlord seat plays the farmer side alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .cards import RANKS, Hand, max_copies
from .combos import PASS, Combo, beats, canonical_order, is_well_formed, playable_combos

DECK_SIZE = 54


class Side(Enum):
    LANDLORD = "landlord"
    FARMERS = "farmers"


class DouError(ValueError):
    pass


class IllegalAction(DouError):
    def __init__(self, rule: str, combo: Combo | None = None):
        self.rule = rule
        self.combo = combo
        super().__init__(f"illegal action {combo}: {rule}" if combo is not None else f"illegal action: {rule}")


class TerminalState(DouError):
    pass


@dataclass(frozen=True)
class DouState:
    hands: tuple[Hand, ...]
    landlord: int = 0
    to_move: int = 0
    history: tuple[tuple[int, Combo], ...] = ()
    dominant: Optional[tuple[int, Combo]] = None
    passes: int = 0
    # cards publicly known to be out of play (reduced variants, endgame puzzles)
    removed: Hand = field(default_factory=Hand)

    def __post_init__(self):
        n = len(self.hands)
        if n not in (2, 3):
            raise ValueError("Doudizhu is played with 2 or 3 seats")
        if not (0 <= self.landlord < n and 0 <= self.to_move < n):
            raise ValueError("seat index out of range")
        if self.dominant is not None and self.dominant[1].is_pass:
            raise ValueError("dominant combo can never be PASS")
        total = sum(len(h) for h in self.hands) + len(self.removed) + sum(len(c.cards) for _, c in self.history)
        if total != DECK_SIZE:
            raise ValueError(f"card conservation violated: {total} != {DECK_SIZE}")

    @property
    def n_seats(self) -> int:
        return len(self.hands)

    @property
    def hand(self) -> Hand:
        return self.hands[self.to_move]

    def side_of(self, seat: int) -> Side:
        return Side.LANDLORD if seat == self.landlord else Side.FARMERS

    def played_cards(self) -> Hand:
        return Hand.from_ranks(r for _, c in self.history for r in c.cards)

    def unseen_by(self, seat: int) -> Hand:
        """Cards held by the other seats, as far as ``seat`` can tell."""
        return Hand.full_deck() - self.hands[seat] - self.played_cards() - self.removed

    def next_seat(self, seat: Optional[int] = None) -> int:
        seat = self.to_move if seat is None else seat
        return (seat + 1) % self.n_seats


def new_game(hands: Sequence[Hand], landlord: int = 0, to_move: Optional[int] = None) -> DouState:
    """Start a game from explicit hands; undealt cards are marked as removed."""
    hands = tuple(hands)
    dealt = Hand()
    for h in hands:
        dealt = dealt + h
    return DouState(
        hands=hands,
        landlord=landlord,
        to_move=landlord if to_move is None else to_move,
        removed=Hand.full_deck() - dealt,
    )


def deal(rng: np.random.Generator | int, landlord: int = 0) -> DouState:
    """Shuffle a full deck: 17 cards per seat, the 3 bonus cards go to the landlord."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    deck = np.array([r for r in RANKS for _ in range(max_copies(r))])
    rng.shuffle(deck)
    hands = [Hand.from_ranks(deck[17 * i:17 * (i + 1)].tolist()) for i in range(3)]
    hands[landlord] = hands[landlord] + Hand.from_ranks(deck[51:].tolist())
    return new_game(hands, landlord)


def winner(state: DouState) -> Optional[Side]:
    for seat, h in enumerate(state.hands):
        if len(h) == 0:
            return state.side_of(seat)
    return None


def is_terminal(state: DouState) -> Optional[Side]:
    return winner(state)


def winning_seat(state: DouState) -> Optional[int]:
    for seat, h in enumerate(state.hands):
        if len(h) == 0:
            return seat
    return None


def legal_actions(state: DouState) -> list[Combo]:
    if winner(state) is not None:
        raise TerminalState("game is over")
    if state.dominant is None:
        return canonical_order(playable_combos(state.hand))
    acts = playable_combos(state.hand, state.dominant[1])
    return canonical_order(acts) + [PASS]


def check_action(state: DouState, combo: Combo) -> None:
    if winner(state) is not None:
        raise TerminalState("game is over")
    if combo.is_pass:
        if state.dominant is None:
            raise IllegalAction("cannot pass when leading", combo)
        return
    if not is_well_formed(combo):
        raise IllegalAction("malformed combo", combo)
    if not state.hand.contains(combo.hand):
        raise IllegalAction("cards not in hand", combo)
    if state.dominant is not None and not beats(combo, state.dominant[1]):
        raise IllegalAction("does not beat the dominant combo", combo)


def apply_action(state: DouState, combo: Combo) -> DouState:
    check_action(state, combo)
    seat = state.to_move
    history = state.history + ((seat, combo),)
    nxt = state.next_seat()
    if combo.is_pass:
        passes = state.passes + 1
        if passes >= state.n_seats - 1:
            # everyone else passed: lead returns to the dominant seat
            return replace(state, history=history, dominant=None, passes=0, to_move=nxt)
        return replace(state, history=history, passes=passes, to_move=nxt)
    hands = list(state.hands)
    hands[seat] = hands[seat] - combo.hand
    return replace(state, hands=tuple(hands), history=history, dominant=(seat, combo), passes=0, to_move=nxt)
