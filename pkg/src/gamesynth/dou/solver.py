"""Exact minimax for small perfect-information endgames."""
from __future__ import annotations

from functools import lru_cache

from .state import DouState, Side, apply_action, legal_actions, winner

MAX_CARDS = 10


class TooLarge(ValueError):
    pass


def _key(state: DouState) -> tuple:
    dom = None
    if state.dominant is not None:
        seat, c = state.dominant
        dom = (seat, int(c.category), c.principal, c.length)
    return (tuple(h.counts for h in state.hands), state.landlord, state.to_move, dom, state.passes)


@lru_cache(maxsize=1_000_000)
def _solve(key: tuple, state: DouState) -> Side:
    mover_side = state.side_of(state.to_move)
    for a in legal_actions(state):
        nxt = apply_action(state, a)
        w = winner(nxt)
        if w is None:
            w = _solve(_key(nxt), nxt)
        if w == mover_side:
            return mover_side
    return Side.FARMERS if mover_side == Side.LANDLORD else Side.LANDLORD


def _check(state: DouState, visible: bool) -> None:
    if not visible:
        raise ValueError("the endgame solver needs every hand visible")
    total = sum(len(h) for h in state.hands)
    if total > MAX_CARDS:
        raise TooLarge(f"{total} cards in hand exceed the solver cap of {MAX_CARDS}")


def winning_side(state: DouState, visible: bool = True) -> Side:
    _check(state, visible)
    w = winner(state)
    return w if w is not None else _solve(_key(state), state)


def solve_endgame(state: DouState, visible: bool = True) -> tuple[int, ...]:
    """Game value per seat under optimal play: +1 for a win, -1 for a loss."""
    side = winning_side(state, visible)
    return tuple(1 if state.side_of(s) == side else -1 for s in range(state.n_seats))


def optimal_actions(state: DouState, visible: bool = True) -> list:
    """Legal actions that keep the mover's optimal game value."""
    _check(state, visible)
    mover_side = state.side_of(state.to_move)
    best = winning_side(state, visible)
    out = []
    for a in legal_actions(state):
        nxt = apply_action(state, a)
        w = winner(nxt) or _solve(_key(nxt), nxt)
        if w == best or (best != mover_side):
            out.append(a)
    return out


def _beats_fixed(state: DouState, seat: int, opponent) -> bool:
    """Whether ``seat`` can force a win when every other seat follows ``opponent``."""
    w = winner(state)
    if w is not None:
        return w == state.side_of(seat)
    if state.to_move != seat:
        return _beats_fixed(apply_action(state, opponent(state)), seat, opponent)
    return any(_beats_fixed(apply_action(state, a), seat, opponent) for a in legal_actions(state))


def exploiting_action(state: DouState, opponent):
    """First action (canonical order) that wins against a known deterministic
    opponent policy, or None when every line loses."""
    _check(state, True)
    for a in legal_actions(state):
        if _beats_fixed(apply_action(state, a), state.to_move, opponent):
            return a
    return None


def play_against(state: DouState, seat: int, opponent) -> tuple[list, Side]:
    """Play out ``seat``'s exploiting line against ``opponent``; with no winning
    line the seat just takes its first legal action each turn."""
    moves = []
    while winner(state) is None:
        if state.to_move == seat:
            a = exploiting_action(state, opponent) or legal_actions(state)[0]
        else:
            a = opponent(state)
        moves.append((state.to_move, a))
        state = apply_action(state, a)
    return moves, winner(state)
