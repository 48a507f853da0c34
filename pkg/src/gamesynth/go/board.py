"""Go rules: placement, capture, suicide, simple ko and positional superko."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

COLUMNS = "ABCDEFGHJKLMNOPQRST"
Point = tuple[int, int]  # (column, row), both 1-based; A1 is the bottom-left corner


class Color(IntEnum):
    WHITE = -1
    EMPTY = 0
    BLACK = 1

    @property
    def opponent(self) -> "Color":
        return Color(-self.value)

    @property
    def word(self) -> str:
        return self.name.lower()


class GoError(ValueError):
    pass


class IllegalMove(GoError):
    pass


class Occupied(IllegalMove):
    pass


class Suicide(IllegalMove):
    pass


class KoViolation(IllegalMove):
    pass


class OutOfBounds(IllegalMove):
    pass


def point_name(point: Optional[Point]) -> str:
    if point is None:
        return "pass"
    return f"{COLUMNS[point[0] - 1]}{point[1]}"


def parse_point(text: str, size: int = 19) -> Optional[Point]:
    text = text.strip().upper()
    if text == "PASS":
        return None
    if len(text) < 2 or text[0] not in COLUMNS[:size] or not text[1:].isdigit():
        raise GoError(f"bad coordinate {text!r}")
    pt = (COLUMNS.index(text[0]) + 1, int(text[1:]))
    if not 1 <= pt[1] <= size:
        raise OutOfBounds(f"{text} is off a {size}x{size} board")
    return pt


@dataclass(frozen=True)
class GoMove:
    color: Color
    point: Optional[Point] = None

    @property
    def is_pass(self) -> bool:
        return self.point is None

    def __str__(self) -> str:
        return f"{self.color.word} {point_name(self.point)}"


@lru_cache(maxsize=None)
def neighbor_table(size: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for i in range(size * size):
        r, c = divmod(i, size)
        nb = []
        if r > 0:
            nb.append(i - size)
        if r < size - 1:
            nb.append(i + size)
        if c > 0:
            nb.append(i - 1)
        if c < size - 1:
            nb.append(i + 1)
        out.append(tuple(nb))
    return tuple(out)


@lru_cache(maxsize=None)
def zobrist_table(size: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    rng = np.random.default_rng(0x60B0A4D + size)
    keys = rng.integers(1, 2**63, size=(2, size * size), dtype=np.int64)
    return tuple(int(k) for k in keys[0]), tuple(int(k) for k in keys[1])


def _zkey(size: int, color: int, idx: int) -> int:
    black, white = zobrist_table(size)
    return black[idx] if color == 1 else white[idx]


def board_hash(grid: np.ndarray) -> int:
    size = grid.shape[0]
    h = 0
    for idx, v in enumerate(grid.ravel().tolist()):
        if v:
            h ^= _zkey(size, v, idx)
    return h


@dataclass(frozen=True, eq=False)
class GoState:
    size: int
    grid: np.ndarray  # grid[row - 1, col - 1]
    to_move: Color = Color.BLACK
    history: tuple[GoMove, ...] = ()
    position_hashes: frozenset = frozenset()
    captures: tuple[int, int] = (0, 0)  # stones of (black, white) removed from the board
    ko_point: Optional[Point] = None
    superko: bool = True
    komi: float = 7.5
    marks: tuple[tuple[Point, Color, int], ...] = ()  # move labels recovered by the text codec
    hash: int = 0

    def __post_init__(self):
        self.grid.setflags(write=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GoState):
            return NotImplemented
        return (self.size == other.size and self.to_move == other.to_move
                and np.array_equal(self.grid, other.grid))

    def __hash__(self):
        return hash((self.size, int(self.to_move), self.grid.tobytes()))

    def at(self, point: Point) -> Color:
        return Color(int(self.grid[point[1] - 1, point[0] - 1]))

    def stones(self, color: Color) -> int:
        return int((self.grid == color).sum())

    @property
    def passes_in_row(self) -> int:
        n = 0
        for m in reversed(self.history):
            if not m.is_pass:
                break
            n += 1
        return n

    def is_over(self) -> bool:
        return self.passes_in_row >= 2


def empty_state(size: int = 19, komi: float = 7.5, superko: bool = True, to_move: Color = Color.BLACK) -> GoState:
    if not 2 <= size <= 19:
        raise ValueError("board size must be between 2 and 19")
    return GoState(size, np.zeros((size, size), dtype=np.int8), to_move, (), frozenset({0}), komi=komi, superko=superko)


def from_grid(grid: np.ndarray, to_move: Color = Color.BLACK, komi: float = 7.5, superko: bool = True,
              marks: Iterable = ()) -> GoState:
    grid = np.array(grid, dtype=np.int8)
    h = board_hash(grid)
    return GoState(grid.shape[0], grid, Color(to_move), (), frozenset({h}), komi=komi, superko=superko,
                   marks=tuple(marks), hash=h)


def _idx(size: int, point: Point) -> int:
    return (point[1] - 1) * size + (point[0] - 1)


def _pt(size: int, idx: int) -> Point:
    r, c = divmod(idx, size)
    return (c + 1, r + 1)


def chain_at(flat: list, size: int, start: int) -> tuple[list[int], set[int]]:
    """Stones connected to ``start`` and their liberties."""
    nbrs = neighbor_table(size)
    color = flat[start]
    stones, libs = [start], set()
    seen = {start}
    i = 0
    while i < len(stones):
        for q in nbrs[stones[i]]:
            v = flat[q]
            if v == 0:
                libs.add(q)
            elif v == color and q not in seen:
                seen.add(q)
                stones.append(q)
        i += 1
    return stones, libs


def apply_move(state: GoState, move: GoMove) -> GoState:
    color = Color(move.color)
    if color == Color.EMPTY:
        raise GoError("a move needs a colour")
    if move.is_pass:
        return replace(state, to_move=color.opponent, history=state.history + (move,), ko_point=None, marks=())
    col, row = move.point
    size = state.size
    if not (1 <= col <= size and 1 <= row <= size):
        raise OutOfBounds(f"{move.point} is off a {size}x{size} board")
    idx = _idx(size, move.point)
    flat = state.grid.ravel().tolist()
    if flat[idx] != 0:
        raise Occupied(f"{point_name(move.point)} is occupied")
    if state.ko_point == move.point:
        raise KoViolation(f"{point_name(move.point)} retakes a ko immediately")
    flat[idx] = int(color)
    h = state.hash ^ _zkey(size, int(color), idx)
    captured: list[int] = []
    for q in neighbor_table(size)[idx]:
        if flat[q] == -int(color) and q not in captured:
            stones, libs = chain_at(flat, size, q)
            if not libs:
                for s in stones:
                    flat[s] = 0
                    h ^= _zkey(size, -int(color), s)
                captured.extend(stones)
    own, libs = chain_at(flat, size, idx)
    if not libs:
        raise Suicide(f"{point_name(move.point)} would be suicide")
    if state.superko and h in state.position_hashes:
        raise KoViolation(f"{point_name(move.point)} repeats an earlier position")
    ko = None
    if len(captured) == 1 and len(own) == 1 and len(libs) == 1:
        ko = _pt(size, captured[0])
    caps = list(state.captures)
    caps[0 if color == Color.WHITE else 1] += len(captured)
    grid = np.array(flat, dtype=np.int8).reshape(size, size)
    return replace(state, grid=grid, to_move=color.opponent, history=state.history + (move,),
                   position_hashes=state.position_hashes | {h}, captures=tuple(caps), ko_point=ko,
                   marks=(), hash=h)


def play(state: GoState, name: str) -> GoState:
    """Convenience: play ``name`` (e.g. ``"D4"``) for the side to move."""
    return apply_move(state, GoMove(state.to_move, parse_point(name, state.size)))


def point_features(state: GoState, color: Optional[Color] = None) -> dict[Point, tuple[int, int]]:
    """Legal points for ``color`` mapped to (stones captured, liberties of the new chain).

    The liberty count ignores points freed by the capture except the captured
    neighbours themselves; it is meant for move heuristics, not rules.
    """
    color = state.to_move if color is None else Color(color)
    c = int(color)
    size = state.size
    nbrs = neighbor_table(size)
    flat = state.grid.ravel().tolist()
    label = [-1] * (size * size)
    chain_libs: list[set[int]] = []
    chain_stones: list[list[int]] = []
    for i, v in enumerate(flat):
        if v and label[i] < 0:
            stones, libs = chain_at(flat, size, i)
            cid = len(chain_libs)
            for st in stones:
                label[st] = cid
            chain_libs.append(libs)
            chain_stones.append(stones)
    ko_idx = _idx(size, state.ko_point) if state.ko_point else -1
    out: dict[Point, tuple[int, int]] = {}
    for i, v in enumerate(flat):
        if v or i == ko_idx:
            continue
        libs: set[int] = set()
        cap_chains = set()
        for q in nbrs[i]:
            w = flat[q]
            if w == 0:
                libs.add(q)
            elif w == c:
                libs |= chain_libs[label[q]]
            elif len(chain_libs[label[q]]) == 1:
                cap_chains.add(label[q])
                libs.add(q)
        libs.discard(i)
        if not libs:
            continue
        if state.superko:
            h = state.hash ^ _zkey(size, c, i)
            for cid in cap_chains:
                for st in chain_stones[cid]:
                    h ^= _zkey(size, -c, st)
            if h in state.position_hashes:
                continue
        out[_pt(size, i)] = (sum(len(chain_stones[cid]) for cid in cap_chains), len(libs))
    return out


def legal_points(state: GoState, color: Optional[Color] = None) -> list[Point]:
    """All points where ``color`` (default: side to move) may legally play."""
    return list(point_features(state, color))


def is_eye(state: GoState, point: Point, color: Color) -> bool:
    """Single-point eye test used to keep random play from filling its own eyes."""
    size = state.size
    col, row = point
    if state.at(point) != Color.EMPTY:
        return False
    for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        c, r = col + dc, row + dr
        if 1 <= c <= size and 1 <= r <= size and state.at((c, r)) != color:
            return False
    bad = 0
    diag = 0
    for dc, dr in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        c, r = col + dc, row + dr
        if 1 <= c <= size and 1 <= r <= size:
            diag += 1
            if state.at((c, r)) == color.opponent:
                bad += 1
    return bad == 0 if diag < 4 else bad <= 1


class NotReachable(GoError):
    pass


def diff_states(s: GoState, s_next: GoState) -> GoMove:
    """The move that turns ``s`` into ``s_next`` (same stones and side to move)."""
    if s.size != s_next.size:
        raise NotReachable("board sizes differ")
    added = np.argwhere((s.grid == 0) & (s_next.grid != 0))
    color = s.to_move if s_next.to_move != s.to_move else None
    if len(added) == 0:
        if np.array_equal(s.grid, s_next.grid) and color is not None:
            return GoMove(color, None)
        raise NotReachable("no single move explains the difference")
    if len(added) != 1:
        raise NotReachable(f"{len(added)} stones appeared")
    r, c = (int(x) for x in added[0])
    stone = Color(int(s_next.grid[r, c]))
    move = GoMove(stone, (c + 1, r + 1))
    try:
        result = apply_move(s, move)
    except IllegalMove as exc:
        raise NotReachable(f"{move} is illegal here: {exc}") from None
    if not np.array_equal(result.grid, s_next.grid) or result.to_move != s_next.to_move:
        raise NotReachable(f"{move} does not produce the target position")
    return move
