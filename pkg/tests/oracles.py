"""Independent reference implementations the engines are checked against."""
from collections import Counter
from functools import lru_cache

import numpy as np

from gamesynth.dou.cards import RANKS
from gamesynth.dou.combos import PASS, Category, enumerate_all_actions


# -- Doudizhu --------------------------------------------------------------------

def oracle_beats(a, b) -> bool:
    if a.category == Category.ROCKET:
        return True
    if b.category == Category.ROCKET:
        return False
    if a.category == Category.BOMB and b.category != Category.BOMB:
        return True
    return a.category == b.category and len(a.cards) == len(b.cards) and a.principal > b.principal


@lru_cache(maxsize=1)
def _action_table():
    acts = [a for a in enumerate_all_actions() if not a.is_pass]
    need = np.zeros((len(acts), len(RANKS)), dtype=np.int64)
    for i, a in enumerate(acts):
        for r, n in Counter(a.cards).items():
            need[i, RANKS.index(r)] = n
    return acts, need


def brute_force_legal(state) -> list:
    """Filter the whole action space by what the hand holds and what it must beat."""
    acts, need = _action_table()
    have = np.array([state.hand.ranks().count(r) for r in RANKS])
    fits = [acts[i] for i in np.flatnonzero((need <= have).all(axis=1))]
    if state.dominant is None:
        return fits
    return [a for a in fits if oracle_beats(a, state.dominant[1])] + [PASS]


# -- Go ----------------------------------------------------------------------------

def flood_liberties(grid: np.ndarray, r: int, c: int) -> tuple[set, int]:
    """Connected stones of the chain at (r, c) and its liberty count, by plain BFS."""
    n = grid.shape[0]
    color = grid[r, c]
    seen, libs, todo = {(r, c)}, set(), [(r, c)]
    while todo:
        y, x = todo.pop()
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            yy, xx = y + dy, x + dx
            if 0 <= yy < n and 0 <= xx < n:
                if grid[yy, xx] == 0:
                    libs.add((yy, xx))
                elif grid[yy, xx] == color and (yy, xx) not in seen:
                    seen.add((yy, xx))
                    todo.append((yy, xx))
    return seen, len(libs)


def oracle_place(grid: np.ndarray, r: int, c: int, color: int):
    """Resulting grid, or None for suicide. Ignores ko, which the engine checks separately."""
    g = grid.copy()
    g[r, c] = color
    n = g.shape[0]
    for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        y, x = r + dy, c + dx
        if 0 <= y < n and 0 <= x < n and g[y, x] == -color:
            chain, libs = flood_liberties(g, y, x)
            if libs == 0:
                for p in chain:
                    g[p] = 0
    if flood_liberties(g, r, c)[1] == 0:
        return None
    return g


def check_captures(state, points) -> int:
    """Compare apply_move with the oracle at each (row, col); returns how many were checked."""
    from gamesynth.go.board import GoMove, KoViolation, Suicide, apply_move
    checked = 0
    for r, c in points:
        expected = oracle_place(state.grid, int(r), int(c), int(state.to_move))
        try:
            got = apply_move(state, GoMove(state.to_move, (int(c) + 1, int(r) + 1))).grid
        except Suicide:
            assert expected is None, (r, c)
            checked += 1
            continue
        except KoViolation:
            continue
        assert expected is not None and np.array_equal(got, expected), (r, c)
        checked += 1
    return checked
