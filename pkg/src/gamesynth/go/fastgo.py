"""Compiled random Go playouts scored by area.

The playout policy picks uniformly among legal points that do not fill the
mover's own single-point eye and passes when none is left. Simple ko is
enforced inside playouts; positional superko is not. Every decision depends
only on geometry relative to the mover, so swapping all colours yields the
mirrored playout under the same seed.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .board import GoState


def neighbor_array(size: int) -> np.ndarray:
    nb = -np.ones((size * size, 4), dtype=np.int64)
    for i in range(size * size):
        r, c = divmod(i, size)
        k = 0
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < size and 0 <= cc < size:
                nb[i, k] = rr * size + cc
                k += 1
    return nb


def diagonal_array(size: int) -> np.ndarray:
    dg = -np.ones((size * size, 4), dtype=np.int64)
    for i in range(size * size):
        r, c = divmod(i, size)
        k = 0
        for dr, dc in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < size and 0 <= cc < size:
                dg[i, k] = rr * size + cc
                k += 1
    return dg


@njit(cache=True)
def _chain_has_other_liberty(board, nb, start, skip, mark, stamp, stack):
    """True if the chain at ``start`` has a liberty other than point ``skip``."""
    color = board[start]
    top = 0
    stack[top] = start
    top += 1
    mark[start] = stamp
    while top > 0:
        top -= 1
        p = stack[top]
        for k in range(4):
            q = nb[p, k]
            if q < 0:
                break
            v = board[q]
            if v == 0:
                if q != skip:
                    return True
            elif v == color and mark[q] != stamp:
                mark[q] = stamp
                stack[top] = q
                top += 1
    return False


@njit(cache=True)
def _remove_chain(board, nb, start, stack, empties, where, n_empty):
    color = board[start]
    top = 0
    stack[top] = start
    top += 1
    board[start] = 0
    removed = 0
    while top > 0:
        top -= 1
        p = stack[top]
        removed += 1
        where[p] = n_empty
        empties[n_empty] = p
        n_empty += 1
        for k in range(4):
            q = nb[p, k]
            if q < 0:
                break
            if board[q] == color:
                board[q] = 0
                stack[top] = q
                top += 1
    return removed, n_empty


@njit(cache=True)
def _is_own_eye(board, nb, dg, p, color):
    for k in range(4):
        q = nb[p, k]
        if q < 0:
            break
        if board[q] != color:
            return False
    bad = 0
    cnt = 0
    for k in range(4):
        q = dg[p, k]
        if q < 0:
            break
        cnt += 1
        if board[q] == -color:
            bad += 1
    if cnt < 4:
        return bad == 0
    return bad <= 1


@njit(cache=True)
def _area(board, nb, out, mark, stamp, stack):
    """Write per-point area ownership (+1 black, -1 white, 0 neutral) into ``out``."""
    n = board.shape[0]
    members = np.empty(n, dtype=np.int64)
    for p in range(n):
        if board[p] != 0:
            out[p] = board[p]
            continue
        if mark[p] == stamp:
            continue
        # flood the empty region, recording which colours border it
        region_start = 0
        top = 0
        stack[top] = p
        top += 1
        mark[p] = stamp
        touches_b = False
        touches_w = False
        m = 0
        while top > 0:
            top -= 1
            x = stack[top]
            members[m] = x
            m += 1
            for k in range(4):
                q = nb[x, k]
                if q < 0:
                    break
                v = board[q]
                if v == 1:
                    touches_b = True
                elif v == -1:
                    touches_w = True
                elif mark[q] != stamp:
                    mark[q] = stamp
                    stack[top] = q
                    top += 1
        owner = 0
        if touches_b and not touches_w:
            owner = 1
        elif touches_w and not touches_b:
            owner = -1
        for j in range(region_start, m):
            out[members[j]] = owner


@njit(cache=True)
def _playout(board, to_move, ko, nb, dg, max_moves, mark, stack):
    n = board.shape[0]
    empties = np.empty(n, dtype=np.int64)
    where = -np.ones(n, dtype=np.int64)
    n_empty = 0
    for p in range(n):
        if board[p] == 0:
            where[p] = n_empty
            empties[n_empty] = p
            n_empty += 1
    stamp = 1
    passes = 0
    color = to_move
    for _ in range(max_moves):
        if passes >= 2:
            break
        played = False
        m = n_empty
        while m > 0:
            j = np.random.randint(0, m)
            p = empties[j]
            legal = p != ko and not _is_own_eye(board, nb, dg, p, color)
            if legal:
                has_lib = False
                captures = False
                for k in range(4):
                    q = nb[p, k]
                    if q < 0:
                        break
                    v = board[q]
                    if v == 0:
                        has_lib = True
                    else:
                        stamp += 1
                        other = _chain_has_other_liberty(board, nb, q, p, mark, stamp, stack)
                        if v == color and other:
                            has_lib = True
                        elif v == -color and not other:
                            captures = True
                legal = has_lib or captures
            if not legal:
                # move the rejected point out of the sampling window
                last = empties[m - 1]
                empties[m - 1] = p
                empties[j] = last
                where[p] = m - 1
                where[last] = j
                m -= 1
                continue
            # remove p from the empty list
            last = empties[n_empty - 1]
            jj = where[p]
            empties[jj] = last
            where[last] = jj
            where[p] = -1
            n_empty -= 1
            board[p] = color
            total_captured = 0
            captured_at = -1
            for k in range(4):
                q = nb[p, k]
                if q < 0:
                    break
                if board[q] == -color:
                    stamp += 1
                    if not _chain_has_other_liberty(board, nb, q, -1, mark, stamp, stack):
                        removed, n_empty = _remove_chain(board, nb, q, stack, empties, where, n_empty)
                        total_captured += removed
                        captured_at = q
            ko = -1
            if total_captured == 1:
                lone = True
                libs = 0
                for k in range(4):
                    q = nb[p, k]
                    if q < 0:
                        break
                    if board[q] == color:
                        lone = False
                    elif board[q] == 0:
                        libs += 1
                if lone and libs == 1:
                    ko = captured_at
            played = True
            break
        if played:
            passes = 0
        else:
            passes += 1
            ko = -1
        color = -color
    return stamp


@njit(cache=True)
def run_playouts(board, to_move, ko, nb, dg, max_moves, seeds, own_sum, scores):
    """Accumulate area ownership into ``own_sum``; ``scores[i]`` = black area - white area."""
    n = board.shape[0]
    mark = np.zeros(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    for i in range(seeds.shape[0]):
        np.random.seed(seeds[i])
        mark[:] = 0
        b = board.copy()
        stamp = _playout(b, to_move, ko, nb, dg, max_moves, mark, stack)
        _area(b, nb, out, mark, stamp + 1, stack)
        s = 0
        for p in range(n):
            own_sum[p] += out[p]
            s += out[p]
        scores[i] = s


def playout_seeds(seed: int, n: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32).astype(np.int64)


def playouts(state: GoState, n: int, seed: int, max_moves: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean ownership grid (rows as in ``state.grid``) and per-playout area margins."""
    size = state.size
    board = state.grid.astype(np.int64).ravel().copy()
    ko = -1
    if state.ko_point is not None:
        ko = (state.ko_point[1] - 1) * size + state.ko_point[0] - 1
    own_sum = np.zeros(size * size, dtype=np.int64)
    scores = np.zeros(n, dtype=np.int64)
    run_playouts(board, int(state.to_move), ko, neighbor_array(size), diagonal_array(size),
                 max_moves or 3 * size * size, playout_seeds(seed, n), own_sum, scores)
    return (own_sum / n).reshape(size, size), scores
