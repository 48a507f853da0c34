"""Compiled random playouts for the Monte Carlo policy.

Hands are count vectors over rank indices 0..14 (3..A, 2, black joker, red
joker). The move generator mirrors ``combos.playable_combos`` and is checked
against it in the test suite.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .cards import RANK_INDEX, RANKS, Hand
from .combos import Category, Combo
from .state import DouState

MAX_MOVES = 16384
N_RANKS = 15
BJ, RJ = 13, 14

_CHAIN_LO = np.array([0, 0, 0, 0, 0, 0, 5, 3, 2, 2, 2, 0, 0, 0, 0], dtype=np.int64)
_CHAIN_HI = np.array([0, 0, 0, 0, 0, 0, 12, 10, 6, 5, 4, 0, 0, 0, 0], dtype=np.int64)


@njit(cache=True)
def _push(buf, n, cat, prin, ln, delta):
    if n >= buf.shape[0]:
        raise ValueError("move buffer overflow")
    buf[n, 0] = cat
    buf[n, 1] = prin
    buf[n, 2] = ln
    for i in range(N_RANKS):
        buf[n, 3 + i] = delta[i]
    return n + 1


@njit(cache=True)
def _solo_kickers(counts, body_lo, body_hi, k, cat, prin, ln, base, buf, n, ws):
    avail = ws[1]
    m = 0
    for r in range(N_RANKS):
        if (r < body_lo or r > body_hi) and counts[r] > 0:
            avail[m] = r
            m += 1
    if m == 0:
        return n
    idx = ws[2]
    for j in range(k):
        idx[j] = 0
    delta = ws[3]
    while True:
        ok = True
        run = 1
        for j in range(1, k + 1):
            if j < k and idx[j] == idx[j - 1]:
                run += 1
            else:
                if run > counts[avail[idx[j - 1]]]:
                    ok = False
                    break
                run = 1
        if ok:
            has_bj = False
            has_rj = False
            for j in range(k):
                if avail[idx[j]] == BJ:
                    has_bj = True
                elif avail[idx[j]] == RJ:
                    has_rj = True
            if not (has_bj and has_rj):
                for r in range(N_RANKS):
                    delta[r] = base[r]
                for j in range(k):
                    delta[avail[idx[j]]] += 1
                n = _push(buf, n, cat, prin, ln, delta)
        j = k - 1
        while j >= 0 and idx[j] == m - 1:
            j -= 1
        if j < 0:
            break
        idx[j] += 1
        for t in range(j + 1, k):
            idx[t] = idx[j]
    return n


@njit(cache=True)
def _pair_kickers(counts, body_lo, body_hi, k, cat, prin, ln, base, buf, n, ws):
    avail = ws[1]
    m = 0
    for r in range(13):
        if (r < body_lo or r > body_hi) and counts[r] >= 2:
            avail[m] = r
            m += 1
    if m < k:
        return n
    idx = ws[2]
    for j in range(k):
        idx[j] = j
    delta = ws[3]
    while True:
        for r in range(N_RANKS):
            delta[r] = base[r]
        for j in range(k):
            delta[avail[idx[j]]] += 2
        n = _push(buf, n, cat, prin, ln, delta)
        j = k - 1
        while j >= 0 and idx[j] == m - k + j:
            j -= 1
        if j < 0:
            break
        idx[j] += 1
        for t in range(j + 1, k):
            idx[t] = idx[t - 1] + 1
    return n


@njit(cache=True)
def _gen_cat(counts, cat, want_len, above, buf, n, ws):
    delta = ws[0]
    delta[:] = 0
    if cat == 1:
        for r in range(N_RANKS):
            if counts[r] >= 1 and r > above:
                delta[:] = 0
                delta[r] = 1
                n = _push(buf, n, cat, r, 1, delta)
    elif cat == 2 or cat == 3 or cat == 13:
        need = 2 if cat == 2 else (3 if cat == 3 else 4)
        for r in range(13):
            if counts[r] >= need and r > above:
                delta[:] = 0
                delta[r] = need
                n = _push(buf, n, cat, r, 1, delta)
    elif cat == 14:
        if counts[BJ] > 0 and counts[RJ] > 0:
            delta[:] = 0
            delta[BJ] = 1
            delta[RJ] = 1
            n = _push(buf, n, cat, BJ, 1, delta)
    elif cat == 4 or cat == 5 or cat == 11 or cat == 12:
        need = 3 if (cat == 4 or cat == 5) else 4
        for r in range(13):
            if counts[r] < need or r <= above:
                continue
            delta[:] = 0
            delta[r] = need
            if cat == 4:
                n = _solo_kickers(counts, r, r, 1, cat, r, 1, delta, buf, n, ws)
            elif cat == 5:
                n = _pair_kickers(counts, r, r, 1, cat, r, 1, delta, buf, n, ws)
            elif cat == 11:
                n = _solo_kickers(counts, r, r, 2, cat, r, 1, delta, buf, n, ws)
            else:
                n = _pair_kickers(counts, r, r, 2, cat, r, 1, delta, buf, n, ws)
    else:
        width = 1 if cat == 6 else (2 if cat == 7 else 3)
        lo = _CHAIN_LO[cat]
        hi = _CHAIN_HI[cat]
        for L in range(lo, hi + 1):
            if want_len >= 0 and L != want_len:
                continue
            for start in range(0, 12 - L + 1):
                if start <= above:
                    continue
                ok = True
                for r in range(start, start + L):
                    if counts[r] < width:
                        ok = False
                        break
                if not ok:
                    continue
                delta[:] = 0
                for r in range(start, start + L):
                    delta[r] = width
                if cat == 6 or cat == 7 or cat == 8:
                    n = _push(buf, n, cat, start, L, delta)
                elif cat == 9:
                    n = _solo_kickers(counts, start, start + L - 1, L, cat, start, L, delta, buf, n, ws)
                else:
                    n = _pair_kickers(counts, start, start + L - 1, L, cat, start, L, delta, buf, n, ws)
    return n


@njit(cache=True)
def gen_moves(counts, dcat, dprin, dlen, buf):
    """Fill the buffers with every non-PASS move; ``dcat < 0`` means leading."""
    return _gen_moves(counts, dcat, dprin, dlen, buf, np.zeros((4, N_RANKS), dtype=np.int64))


@njit(cache=True)
def _gen_moves(counts, dcat, dprin, dlen, buf, ws):
    # ws rows: category delta, kicker ranks, kicker indices, kicker delta
    n = 0
    if dcat < 0:
        for cat in range(1, 15):
            n = _gen_cat(counts, cat, -1, -1, buf, n, ws)
        return n
    if dcat == 14:
        return 0
    if dcat == 13:
        n = _gen_cat(counts, 13, -1, dprin, buf, n, ws)
    else:
        n = _gen_cat(counts, dcat, dlen, dprin, buf, n, ws)
        n = _gen_cat(counts, 13, -1, -1, buf, n, ws)
    n = _gen_cat(counts, 14, -1, -1, buf, n, ws)
    return n


@njit(cache=True)
def _rollout(hands, hidden, pool, landlord, to_move, dcat, dprin, dlen, passes, eval_landlord, buf, ws):
    n_seats = hands.shape[0]
    h = hands.copy()
    # determinize: deal the unseen pool to the hidden seats in seat order
    total = 0
    for r in range(N_RANKS):
        total += pool[r]
    cards = np.empty(total, dtype=np.int64)
    t = 0
    for r in range(N_RANKS):
        for _ in range(pool[r]):
            cards[t] = r
            t += 1
    for i in range(total - 1, 0, -1):
        j = np.random.randint(0, i + 1)
        tmp = cards[i]
        cards[i] = cards[j]
        cards[j] = tmp
    t = 0
    for s in range(n_seats):
        if hidden[s]:
            size = 0
            for r in range(N_RANKS):
                size += h[s, r]
            for r in range(N_RANKS):
                h[s, r] = 0
            for _ in range(size):
                h[s, cards[t]] += 1
                t += 1
    while True:
        n = _gen_moves(h[to_move], dcat, dprin, dlen, buf, ws)
        options = n + 1 if dcat >= 0 else n
        pick = np.random.randint(0, options)
        if pick == n:
            passes += 1
            if passes >= n_seats - 1:
                dcat = -1
                passes = 0
        else:
            empty = True
            for r in range(N_RANKS):
                h[to_move, r] -= buf[pick, 3 + r]
                if h[to_move, r] != 0:
                    empty = False
            if empty:
                return (to_move == landlord) == eval_landlord
            dcat = buf[pick, 0]
            dprin = buf[pick, 1]
            dlen = buf[pick, 2]
            passes = 0
        to_move = (to_move + 1) % n_seats


@njit(cache=True)
def rollout_wins(hands, hidden, pool, landlord, to_move, dcat, dprin, dlen, passes, eval_landlord, seeds):
    buf = np.empty((MAX_MOVES, 3 + N_RANKS), dtype=np.int64)
    ws = np.zeros((4, N_RANKS), dtype=np.int64)
    wins = 0
    for i in range(seeds.shape[0]):
        np.random.seed(seeds[i])
        if _rollout(hands, hidden, pool, landlord, to_move, dcat, dprin, dlen, passes, eval_landlord, buf, ws):
            wins += 1
    return wins


def _dominant_fields(state: DouState) -> tuple[int, int, int]:
    if state.dominant is None:
        return -1, -1, -1
    c = state.dominant[1]
    return int(c.category), RANK_INDEX[c.principal], c.length


def count_wins(state: DouState, observer: int, eval_side_is_landlord: bool, seeds: np.ndarray) -> int:
    """Random playouts from ``state`` with every seat except ``observer`` determinized."""
    hands = np.array([h.counts for h in state.hands], dtype=np.int64)
    hidden = np.array([s != observer for s in range(state.n_seats)])
    pool = np.array(state.unseen_by(observer).counts, dtype=np.int64)
    dcat, dprin, dlen = _dominant_fields(state)
    return int(rollout_wins(hands, hidden, pool, state.landlord, state.to_move, dcat, dprin, dlen,
                            state.passes, eval_side_is_landlord, np.asarray(seeds, dtype=np.int64)))


def compiled_moves(hand: Hand, dominant: Combo | None = None) -> list[Combo]:
    """The compiled generator's view of ``playable_combos`` (used to cross-check it)."""
    buf = np.empty((MAX_MOVES, 3 + N_RANKS), dtype=np.int64)
    if dominant is None:
        dcat, dprin, dlen = -1, -1, -1
    else:
        dcat, dprin, dlen = int(dominant.category), RANK_INDEX[dominant.principal], dominant.length
    n = gen_moves(np.array(hand.counts, dtype=np.int64), dcat, dprin, dlen, buf)
    out = []
    for i in range(n):
        cards = [RANKS[r] for r in range(N_RANKS) for _ in range(buf[i, 3 + r])]
        out.append(Combo(Category(int(buf[i, 0])), RANKS[buf[i, 1]], tuple(sorted(cards)), int(buf[i, 2])))
    return out
