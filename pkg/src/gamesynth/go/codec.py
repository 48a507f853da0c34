"""Text codec for Go boards.

Row 19 is printed first, column letters (I skipped) run across the top, white
is ``o``, black is ``#`` and empty points are ``•``. Recent moves carry their
per-colour move number, so ``o(1)`` is white's first stone. Cells are separated
by single spaces and lines by LF.
"""
from __future__ import annotations

import re
from typing import Optional

import numpy as np

from .board import COLUMNS, Color, GoError, GoState, Point, from_grid

CODEC_VERSION = "go-board-text/1"
SYMBOLS = {Color.BLACK: "#", Color.WHITE: "o", Color.EMPTY: "•"}
_FROM_SYMBOL = {v: k for k, v in SYMBOLS.items()}
_CELL = re.compile(r"^([#o•])(?:\((\d+)\))?$")


class BoardTextError(GoError):
    pass


class BadSymbol(BoardTextError):
    pass


class RaggedGrid(BoardTextError):
    pass


class CoordinateMismatch(BoardTextError):
    pass


def move_labels(state: GoState, last_k: int) -> dict[Point, tuple[Color, int]]:
    """Labels for the stones placed by the last ``last_k`` moves still on the board."""
    if last_k < 0:
        raise ValueError("last_k must be non-negative")
    if not state.history:
        return {pt: (color, i) for pt, color, i in state.marks}
    if last_k > len(state.history):
        raise ValueError("cannot annotate more moves than were played")
    counts = {Color.BLACK: 0, Color.WHITE: 0}
    numbered = []
    for m in state.history:
        if m.is_pass:
            numbered.append(None)
            continue
        counts[m.color] += 1
        numbered.append((m.point, m.color, counts[m.color]))
    labels: dict[Point, tuple[Color, int]] = {}
    for entry in numbered[len(numbered) - last_k:] if last_k else []:
        if entry is not None:
            labels[entry[0]] = (entry[1], entry[2])
    # drop stones that were captured after being placed
    return {pt: lab for pt, lab in labels.items() if state.at(pt) == lab[0]}


def serialize_grid(grid: np.ndarray, labels: Optional[dict] = None, frame: bool = True,
                   symbols: Optional[dict] = None) -> str:
    size = grid.shape[0]
    labels = labels or {}
    symbols = symbols or SYMBOLS
    lines = []
    if frame:
        lines.append("   " + " ".join(COLUMNS[:size]))
    for row in range(size, 0, -1):
        cells = []
        for col in range(1, size + 1):
            color = Color(int(grid[row - 1, col - 1]))
            cell = symbols[color]
            if (col, row) in labels:
                cell += f"({labels[(col, row)][1]})"
            cells.append(cell)
        body = " ".join(cells)
        lines.append(f"{row:>2} {body}" if frame else body)
    return "\n".join(lines)


def serialize_board(state: GoState, annotate_last_k: int = 0, frame: bool = True) -> str:
    return serialize_grid(state.grid, move_labels(state, annotate_last_k), frame)


def parse_grid(text: str, size: Optional[int] = None) -> tuple[np.ndarray, dict[Point, tuple[Color, int]]]:
    lines = [ln for ln in text.strip("\n").split("\n") if ln.strip()]
    if not lines:
        raise RaggedGrid("empty board text")
    header = None
    first = lines[0].split()
    if first and all(tok in COLUMNS for tok in first):
        header = first
        lines = lines[1:]
    n = size or (len(header) if header else len(lines))
    if header is not None and header != list(COLUMNS[:n]):
        raise CoordinateMismatch(f"column header {' '.join(header)} does not match size {n}")
    if len(lines) != n:
        raise RaggedGrid(f"expected {n} rows, found {len(lines)}")
    grid = np.zeros((n, n), dtype=np.int8)
    labels: dict[Point, tuple[Color, int]] = {}
    for i, line in enumerate(lines):
        toks = line.split()
        expected_row = n - i
        if toks and toks[0].isdigit():
            if int(toks[0]) != expected_row:
                raise CoordinateMismatch(f"row label {toks[0]} where {expected_row} was expected")
            toks = toks[1:]
        elif header is not None:
            raise CoordinateMismatch(f"row {expected_row} has no label")
        if len(toks) != n:
            raise RaggedGrid(f"row {expected_row} has {len(toks)} cells, expected {n}")
        for col, tok in enumerate(toks, start=1):
            m = _CELL.match(tok)
            if not m:
                raise BadSymbol(f"unknown cell {tok!r} at {COLUMNS[col - 1]}{expected_row}")
            color = _FROM_SYMBOL[m.group(1)]
            grid[expected_row - 1, col - 1] = int(color)
            if m.group(2) is not None:
                if color == Color.EMPTY:
                    raise BadSymbol(f"empty point {COLUMNS[col - 1]}{expected_row} carries a move number")
                labels[(col, expected_row)] = (color, int(m.group(2)))
    return grid, labels


def parse_board(text: str, size: Optional[int] = None, to_move: Color = Color.BLACK, komi: float = 7.5) -> GoState:
    """Recover stones and move labels; earlier history is not recoverable."""
    grid, labels = parse_grid(text, size)
    marks = tuple(sorted((pt, color, i) for pt, (color, i) in labels.items()))
    return from_grid(grid, to_move=to_move, komi=komi, marks=marks)
