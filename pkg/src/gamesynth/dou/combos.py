"""Combo taxonomy, the abstract action space, and dominance between combos.

Kicker convention (shared by every generator in this package): kickers never
reuse a rank from the combo body, solo kickers may repeat a rank up to the
deck limit but may not be the two jokers together, and pair kickers are
distinct non-joker ranks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Optional

from .cards import CHAIN_RANKS, JOKERS, RANKS, Hand, encode_cards, max_copies

NON_JOKERS = RANKS[:13]


class Category(IntEnum):
    PASS = 0
    SOLO = 1
    PAIR = 2
    TRIO = 3
    TRIO_SOLO = 4
    TRIO_PAIR = 5
    SOLO_CHAIN = 6
    PAIR_CHAIN = 7
    AIRPLANE = 8
    AIRPLANE_SOLO_WINGS = 9
    AIRPLANE_PAIR_WINGS = 10
    FOUR_TWO_SOLO = 11
    FOUR_TWO_PAIR = 12
    BOMB = 13
    ROCKET = 14


# (min length, max length) of the body for chain-like categories
CHAIN_LIMITS = {
    Category.SOLO_CHAIN: (5, 12),
    Category.PAIR_CHAIN: (3, 10),
    Category.AIRPLANE: (2, 6),
    Category.AIRPLANE_SOLO_WINGS: (2, 5),
    Category.AIRPLANE_PAIR_WINGS: (2, 4),
}


@dataclass(frozen=True)
class Combo:
    category: Category
    principal: int
    cards: tuple[int, ...]
    # body length for chains and airplanes, 1 otherwise
    length: int = field(default=1, compare=False)

    @property
    def sort_key(self) -> tuple:
        # PASS sorts after every real play
        return (self.category == Category.PASS, int(self.category), self.principal, self.cards)

    @property
    def is_pass(self) -> bool:
        return self.category == Category.PASS

    @property
    def hand(self) -> Hand:
        return Hand.from_ranks(self.cards)

    def encode(self) -> str:
        return "pass" if self.is_pass else encode_cards(self.cards)

    def __str__(self) -> str:
        if self.is_pass:
            return "PASS"
        return f"{self.category.name} {encode_cards(self.cards)}"


PASS = Combo(Category.PASS, 0, (), 0)


def make_combo(category: Category, body: Iterable[int], kickers: Iterable[int] = (), length: int = 1) -> Combo:
    body = list(body)
    cards = tuple(sorted(body + list(kickers)))
    return Combo(Category(category), min(body), cards, length)


def canonical_order(combos: Iterable[Combo]) -> list[Combo]:
    return sorted(combos, key=lambda c: c.sort_key)


def beats(challenger: Combo, dominant: Combo) -> bool:
    if challenger.is_pass or dominant.is_pass:
        raise ValueError("PASS takes no part in dominance")
    a, b = challenger.category, dominant.category
    if a == Category.ROCKET:
        return b != Category.ROCKET
    if b == Category.ROCKET:
        return False
    if a == Category.BOMB:
        return b != Category.BOMB or challenger.principal > dominant.principal
    if b == Category.BOMB:
        return False
    return a == b and challenger.length == dominant.length and challenger.principal > dominant.principal


def _bounded_multisets(avail: list[tuple[int, int]], k: int, start: int = 0) -> Iterator[list[int]]:
    """Non-decreasing rank lists of size ``k`` drawing at most ``cap`` of each rank."""
    if k == 0:
        yield []
        return
    for i in range(start, len(avail)):
        rank, cap = avail[i]
        for take in range(min(cap, k), 0, -1):
            for rest in _bounded_multisets(avail, k - take, i + 1):
                yield [rank] * take + rest


def _solo_kickers(avail: list[tuple[int, int]], k: int) -> Iterator[list[int]]:
    for ks in _bounded_multisets(avail, k):
        if JOKERS[0] in ks and JOKERS[1] in ks:
            continue
        yield ks


def _chains(category: Category) -> Iterator[tuple[int, ...]]:
    lo, hi = CHAIN_LIMITS[category]
    for length in range(lo, hi + 1):
        for start in range(len(CHAIN_RANKS) - length + 1):
            yield CHAIN_RANKS[start:start + length]


@lru_cache(maxsize=1)
def _all_actions() -> tuple[Combo, ...]:
    acts: set[Combo] = {PASS}
    for r in RANKS:
        acts.add(make_combo(Category.SOLO, [r]))
    for r in NON_JOKERS:
        acts.add(make_combo(Category.PAIR, [r] * 2))
        acts.add(make_combo(Category.TRIO, [r] * 3))
        acts.add(make_combo(Category.BOMB, [r] * 4))
        for k in RANKS:
            if k != r:
                acts.add(make_combo(Category.TRIO_SOLO, [r] * 3, [k]))
        for k in NON_JOKERS:
            if k != r:
                acts.add(make_combo(Category.TRIO_PAIR, [r] * 3, [k, k]))
        avail = [(k, max_copies(k)) for k in RANKS if k != r]
        for ks in _solo_kickers(avail, 2):
            acts.add(make_combo(Category.FOUR_TWO_SOLO, [r] * 4, ks))
        for a, b in combinations([k for k in NON_JOKERS if k != r], 2):
            acts.add(make_combo(Category.FOUR_TWO_PAIR, [r] * 4, [a, a, b, b]))
    acts.add(make_combo(Category.ROCKET, list(JOKERS)))
    for chain in _chains(Category.SOLO_CHAIN):
        acts.add(make_combo(Category.SOLO_CHAIN, chain, length=len(chain)))
    for chain in _chains(Category.PAIR_CHAIN):
        acts.add(make_combo(Category.PAIR_CHAIN, [r for r in chain for _ in range(2)], length=len(chain)))
    for chain in _chains(Category.AIRPLANE):
        acts.add(make_combo(Category.AIRPLANE, [r for r in chain for _ in range(3)], length=len(chain)))
    for chain in _chains(Category.AIRPLANE_SOLO_WINGS):
        body = [r for r in chain for _ in range(3)]
        avail = [(k, max_copies(k)) for k in RANKS if k not in chain]
        for ks in _solo_kickers(avail, len(chain)):
            acts.add(make_combo(Category.AIRPLANE_SOLO_WINGS, body, ks, len(chain)))
    for chain in _chains(Category.AIRPLANE_PAIR_WINGS):
        body = [r for r in chain for _ in range(3)]
        for ks in combinations([k for k in NON_JOKERS if k not in chain], len(chain)):
            acts.add(make_combo(Category.AIRPLANE_PAIR_WINGS, body, [k for k in ks for _ in range(2)], len(chain)))
    return tuple(canonical_order(acts))


def enumerate_all_actions() -> tuple[Combo, ...]:
    """Every abstract action of a 54-card deck (PASS included), canonically ordered."""
    return _all_actions()


@lru_cache(maxsize=1)
def action_lookup() -> dict[tuple[int, tuple[int, ...]], list[Combo]]:
    # some wing sets read two ways (333444555666 is 3-4-5 + 666 or 4-5-6 + 333)
    out: dict[tuple[int, tuple[int, ...]], list[Combo]] = {}
    for c in _all_actions():
        out.setdefault((int(c.category), c.cards), []).append(c)
    return out


def is_well_formed(combo: Combo) -> bool:
    found = action_lookup().get((int(combo.category), combo.cards), ())
    return any(f.principal == combo.principal and f.length == combo.length for f in found)


# hand-driven generation, used by legal_actions


def _counts(hand: Hand) -> dict[int, int]:
    return dict(zip(RANKS, hand.counts))


def _gen_category(cat: Category, cnt: dict[int, int], length: Optional[int], above: int) -> Iterator[Combo]:
    if cat == Category.SOLO:
        for r in RANKS:
            if cnt[r] >= 1 and r > above:
                yield make_combo(cat, [r])
    elif cat in (Category.PAIR, Category.TRIO, Category.BOMB):
        need = {Category.PAIR: 2, Category.TRIO: 3, Category.BOMB: 4}[cat]
        for r in NON_JOKERS:
            if cnt[r] >= need and r > above:
                yield make_combo(cat, [r] * need)
    elif cat == Category.ROCKET:
        if cnt[JOKERS[0]] and cnt[JOKERS[1]]:
            yield make_combo(cat, list(JOKERS))
    elif cat in (Category.TRIO_SOLO, Category.TRIO_PAIR, Category.FOUR_TWO_SOLO, Category.FOUR_TWO_PAIR):
        need = 3 if cat in (Category.TRIO_SOLO, Category.TRIO_PAIR) else 4
        for r in NON_JOKERS:
            if cnt[r] < need or r <= above:
                continue
            if cat == Category.TRIO_SOLO:
                for k in RANKS:
                    if k != r and cnt[k] >= 1:
                        yield make_combo(cat, [r] * 3, [k])
            elif cat == Category.TRIO_PAIR:
                for k in NON_JOKERS:
                    if k != r and cnt[k] >= 2:
                        yield make_combo(cat, [r] * 3, [k, k])
            elif cat == Category.FOUR_TWO_SOLO:
                avail = [(k, cnt[k]) for k in RANKS if k != r and cnt[k]]
                for ks in _solo_kickers(avail, 2):
                    yield make_combo(cat, [r] * 4, ks)
            else:
                pairs = [k for k in NON_JOKERS if k != r and cnt[k] >= 2]
                for a, b in combinations(pairs, 2):
                    yield make_combo(cat, [r] * 4, [a, a, b, b])
    else:
        lo, hi = CHAIN_LIMITS[cat]
        width = {Category.SOLO_CHAIN: 1, Category.PAIR_CHAIN: 2}.get(cat, 3)
        lengths = range(lo, hi + 1) if length is None else [length]
        for L in lengths:
            if L < lo or L > hi:
                continue
            for start in range(len(CHAIN_RANKS) - L + 1):
                chain = CHAIN_RANKS[start:start + L]
                if chain[0] <= above or any(cnt[r] < width for r in chain):
                    continue
                body = [r for r in chain for _ in range(width)]
                if cat in (Category.SOLO_CHAIN, Category.PAIR_CHAIN, Category.AIRPLANE):
                    yield make_combo(cat, body, length=L)
                elif cat == Category.AIRPLANE_SOLO_WINGS:
                    avail = [(k, cnt[k]) for k in RANKS if k not in chain and cnt[k]]
                    for ks in _solo_kickers(avail, L):
                        yield make_combo(cat, body, ks, L)
                else:
                    pairs = [k for k in NON_JOKERS if k not in chain and cnt[k] >= 2]
                    for ks in combinations(pairs, L):
                        yield make_combo(cat, body, [k for k in ks for _ in range(2)], L)


def playable_combos(hand: Hand, dominant: Optional[Combo] = None) -> list[Combo]:
    """Non-PASS combos formable from ``hand`` (beating ``dominant`` when given)."""
    cnt = _counts(hand)
    out: list[Combo] = []
    if dominant is None:
        for cat in Category:
            if cat != Category.PASS:
                out.extend(_gen_category(cat, cnt, None, 0))
        return out
    cat = dominant.category
    if cat == Category.ROCKET:
        return out
    if cat == Category.BOMB:
        out.extend(_gen_category(Category.BOMB, cnt, None, dominant.principal))
    else:
        out.extend(_gen_category(cat, cnt, dominant.length, dominant.principal))
        out.extend(_gen_category(Category.BOMB, cnt, None, 0))
    out.extend(_gen_category(Category.ROCKET, cnt, None, 0))
    return out
