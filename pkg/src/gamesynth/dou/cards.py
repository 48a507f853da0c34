"""Card ranks, hands, and the integer text codec for Doudizhu."""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator


class Card(IntEnum):
    THREE = 3
    FOUR = 4
    FIVE = 5
    SIX = 6
    SEVEN = 7
    EIGHT = 8
    NINE = 9
    TEN = 10
    JACK = 11
    QUEEN = 12
    KING = 13
    ACE = 14
    TWO = 17
    BLACK_JOKER = 20
    RED_JOKER = 30


RANKS: tuple[int, ...] = tuple(int(c) for c in Card)
RANK_INDEX: dict[int, int] = {r: i for i, r in enumerate(RANKS)}
# chains may only use 3..A
CHAIN_RANKS: tuple[int, ...] = RANKS[:12]
JOKERS = (int(Card.BLACK_JOKER), int(Card.RED_JOKER))
FACE_NAMES = {
    3: "3", 4: "4", 5: "5", 6: "6", 7: "7", 8: "8", 9: "9", 10: "10",
    11: "J", 12: "Q", 13: "K", 14: "A", 17: "2", 20: "BJ", 30: "RJ",
}


class CardError(ValueError):
    pass


class UnknownRank(CardError):
    pass


class MultiplicityExceeded(CardError):
    pass


def max_copies(rank: int) -> int:
    return 1 if rank in JOKERS else 4


@dataclass(frozen=True, order=True)
class Hand:
    """A multiset of cards stored as per-rank counts in ``RANKS`` order."""

    counts: tuple[int, ...] = (0,) * len(RANKS)

    def __post_init__(self):
        if len(self.counts) != len(RANKS):
            raise ValueError("counts must have one entry per rank")
        for rank, n in zip(RANKS, self.counts):
            if n < 0:
                raise ValueError(f"negative count for rank {rank}")
            if n > max_copies(rank):
                raise MultiplicityExceeded(f"{n} copies of rank {rank}")

    @classmethod
    def from_ranks(cls, ranks: Iterable[int]) -> "Hand":
        counts = [0] * len(RANKS)
        for r in ranks:
            try:
                counts[RANK_INDEX[int(r)]] += 1
            except KeyError:
                raise UnknownRank(f"no card has rank {r!r}") from None
        return cls(tuple(counts))

    @classmethod
    def full_deck(cls) -> "Hand":
        return cls(tuple(max_copies(r) for r in RANKS))

    def ranks(self) -> list[int]:
        out: list[int] = []
        for r, n in zip(RANKS, self.counts):
            out.extend([r] * n)
        return out

    def __iter__(self) -> Iterator[int]:
        return iter(self.ranks())

    def __len__(self) -> int:
        return sum(self.counts)

    def count(self, rank: int) -> int:
        return self.counts[RANK_INDEX[rank]]

    def contains(self, other: "Hand") -> bool:
        return all(a >= b for a, b in zip(self.counts, other.counts))

    def __add__(self, other: "Hand") -> "Hand":
        return Hand(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def __sub__(self, other: "Hand") -> "Hand":
        if not self.contains(other):
            raise ValueError("cannot remove cards that are not present")
        return Hand(tuple(a - b for a, b in zip(self.counts, other.counts)))

    def __str__(self) -> str:
        return encode_cards(self)


def encode_cards(hand: Hand | Iterable[int]) -> str:
    """Ascending, space separated integer codes, e.g. ``"3 3 14 17"``."""
    ranks = hand.ranks() if isinstance(hand, Hand) else sorted(int(r) for r in hand)
    return " ".join(str(r) for r in ranks)


def parse_cards(text: str) -> Hand:
    ranks = []
    for tok in text.split():
        try:
            value = int(tok)
        except ValueError:
            raise UnknownRank(f"not an integer card code: {tok!r}") from None
        if value not in RANK_INDEX:
            raise UnknownRank(f"no card has code {value}")
        ranks.append(value)
    return Hand.from_ranks(ranks)


def faces(hand: Hand | Iterable[int]) -> str:
    ranks = hand.ranks() if isinstance(hand, Hand) else sorted(hand)
    return " ".join(FACE_NAMES[r] for r in ranks)
