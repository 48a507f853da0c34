"""Ownership, territory counting, score lead and win rate for Go positions.

All numbers are reported from black's point of view: positive ownership and
positive leads favour black, and ``win_rate`` is black's winning chance.
``to_perspective`` converts a black-perspective value for another colour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .board import Color, GoState
from .fastgo import playouts

DEFAULT_THETA = 0.6
DEFAULT_KOMI = 7.5


class EvalSource(Enum):
    BUILTIN_MC = "builtin_mc"
    EXTERNAL_ENGINE = "external_engine"


class InvalidEval(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OwnershipMap:
    raw: np.ndarray  # raw[row - 1, col - 1] in [-1, 1], +1 = black
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if self.raw.ndim != 2 or self.raw.shape[0] != self.raw.shape[1]:
            raise InvalidEval("ownership must be a square grid")
        if not 0 < self.theta <= 1:
            raise InvalidEval("theta must lie in (0, 1]")
        if np.any(np.abs(self.raw) > 1 + 1e-9) or not np.all(np.isfinite(self.raw)):
            raise InvalidEval("ownership values must lie in [-1, 1]")

    @property
    def size(self) -> int:
        return self.raw.shape[0]

    @property
    def discrete(self) -> np.ndarray:
        """BLACK / WHITE / EMPTY (undecided) per point, as ``Color`` values."""
        out = np.zeros(self.raw.shape, dtype=np.int8)
        out[self.raw >= self.theta] = int(Color.BLACK)
        out[self.raw <= -self.theta] = int(Color.WHITE)
        return out

    @classmethod
    def from_discrete(cls, grid: np.ndarray, theta: float = DEFAULT_THETA) -> "OwnershipMap":
        return cls(np.asarray(grid, dtype=float), theta)


@dataclass(frozen=True, eq=False)
class PositionEval:
    ownership: OwnershipMap
    score_lead: float
    win_rate: float
    source: EvalSource = EvalSource.BUILTIN_MC
    komi: float = DEFAULT_KOMI

    def __post_init__(self):
        validate_eval(self)


def validate_eval(ev: PositionEval, size: int | None = None) -> None:
    if not (0.0 <= ev.win_rate <= 1.0) or math.isnan(ev.win_rate):
        raise InvalidEval(f"win rate {ev.win_rate} outside [0, 1]")
    if not math.isfinite(ev.score_lead):
        raise InvalidEval("score lead must be finite")
    if size is not None and ev.ownership.size != size:
        raise InvalidEval(f"ownership is {ev.ownership.size}x{ev.ownership.size}, board is {size}x{size}")


def estimate_ownership(state: GoState, n_rollouts: int, seed: int, theta: float = DEFAULT_THETA) -> OwnershipMap:
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    own, _ = playouts(state, n_rollouts, seed)
    return OwnershipMap(own, theta)


def count_territory(ownership: OwnershipMap | np.ndarray) -> tuple[int, int]:
    """Number of points judged black and white (undecided points count for neither)."""
    grid = ownership.discrete if isinstance(ownership, OwnershipMap) else np.asarray(ownership)
    return int((grid == Color.BLACK).sum()), int((grid == Color.WHITE).sum())


def score_lead(counts: tuple[int, int], komi: float = DEFAULT_KOMI) -> float:
    black, white = counts
    return black - white - komi


def to_perspective(black_value: float, color: Color, kind: str = "lead") -> float:
    """Convert a black-perspective lead (or win rate, ``kind="winrate"``) for ``color``."""
    if color == Color.BLACK:
        return black_value
    return 1.0 - black_value if kind == "winrate" else -black_value


def estimate_winrate(state: GoState, n_rollouts: int, seed: int, komi: float = DEFAULT_KOMI,
                     side: Color = Color.BLACK) -> float:
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    _, margins = playouts(state, n_rollouts, seed)
    net = margins - komi
    wins = (net > 0) if side == Color.BLACK else (net < 0)
    return float(wins.mean())


def evaluate_position(state: GoState, n_rollouts: int, seed: int, komi: float = DEFAULT_KOMI,
                      theta: float = DEFAULT_THETA) -> PositionEval:
    """Built-in estimate: one batch of playouts feeds ownership and win rate."""
    own, margins = playouts(state, n_rollouts, seed)
    ownership = OwnershipMap(own, theta)
    lead = score_lead(count_territory(ownership), komi)
    return PositionEval(ownership, lead, float((margins - komi > 0).mean()), EvalSource.BUILTIN_MC, komi)
