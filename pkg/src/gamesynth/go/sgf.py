"""Main-line SGF (FF[4]) reader: B/W moves, C comments, SZ and KM."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .board import Color, GoMove, GoState, IllegalMove, apply_move, empty_state


class SgfError(ValueError):
    pass


class ParseError(SgfError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


class IllegalMoveInRecord(SgfError):
    def __init__(self, move_number: int, move: GoMove, reason: str):
        self.move_number = move_number
        self.move = move
        super().__init__(f"move {move_number} ({move}) is illegal: {reason}")


@dataclass(frozen=True)
class SgfStep:
    before: GoState
    move: GoMove
    after: GoState
    comment: str  # describes ``after``


@dataclass(frozen=True)
class SgfGame:
    size: int
    komi: float
    root_comment: str
    steps: tuple[SgfStep, ...]


def _parse_nodes(text: str) -> list[dict[str, list[str]]]:
    """Properties of each node on the main line; ``text`` is latin-1 decoded bytes."""
    i = 0
    n = len(text)

    def skip_ws():
        nonlocal i
        while i < n and text[i].isspace():
            i += 1

    skip_ws()
    if i >= n or text[i] != "(":
        raise ParseError("expected '(' to open the game tree", i)
    nodes: list[dict[str, list[str]]] = []
    depth = 0
    while i < n:
        ch = text[i]
        if ch == "(":
            depth += 1
            i += 1
        elif ch == ")":
            depth -= 1
            i += 1
            if depth == 0:
                return nodes
        elif ch == ";":
            i += 1
            props: dict[str, list[str]] = {}
            skip_ws()
            while i < n and text[i].isupper():
                start = i
                while i < n and text[i].isalpha():
                    i += 1
                ident = "".join(c for c in text[start:i] if c.isupper())
                skip_ws()
                if i >= n or text[i] != "[":
                    raise ParseError(f"property {ident} has no value", i)
                while i < n and text[i] == "[":
                    i += 1
                    buf = []
                    while True:
                        if i >= n:
                            raise ParseError("unterminated property value", i)
                        c = text[i]
                        if c == "\\":
                            if i + 1 >= n:
                                raise ParseError("dangling escape", i)
                            nxt = text[i + 1]
                            if nxt == "\n":
                                i += 2
                                continue
                            buf.append(nxt)
                            i += 2
                            continue
                        if c == "]":
                            i += 1
                            break
                        buf.append(c)
                        i += 1
                    props.setdefault(ident, []).append("".join(buf))
                    skip_ws()
            nodes.append(props)
        elif ch.isspace():
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    raise ParseError("game tree is not closed", i)


def _main_line(text: str) -> list[dict[str, list[str]]]:
    """Drop every variation except the first child at each branch point."""
    i = 0
    n = len(text)
    # find spans of sub-trees that are not first children and blank them out
    keep = list(text)
    stack: list[int] = []  # number of child trees seen at each open depth
    in_value = False
    skip_depth = None
    while i < n:
        c = text[i]
        if in_value:
            if c == "\\":
                if skip_depth is not None:
                    keep[i] = " "
                    if i + 1 < n:
                        keep[i + 1] = " "
                i += 2
                continue
            if c == "]":
                in_value = False
        elif c == "[":
            in_value = True
        elif c == "(":
            if stack:
                stack[-1] += 1
                if stack[-1] > 1 and skip_depth is None:
                    skip_depth = len(stack)
            stack.append(0)
        elif c == ")":
            if not stack:
                raise ParseError("unbalanced ')'", i)
            stack.pop()
            if skip_depth is not None and len(stack) == skip_depth:
                keep[i] = " "
                skip_depth = None
                i += 1
                continue
        if skip_depth is not None:
            keep[i] = " "
        i += 1
    if in_value:
        raise ParseError("unterminated property value", n)
    if stack:
        raise ParseError("game tree is not closed", n)
    return _parse_nodes("".join(keep))


def _decode_point(value: str, size: int) -> Optional[tuple[int, int]]:
    if value == "" or (value == "tt" and size <= 19):
        return None
    if len(value) != 2 or not value.isalpha():
        raise SgfError(f"bad SGF coordinate {value!r}")
    x = ord(value[0].lower()) - ord("a")
    y = ord(value[1].lower()) - ord("a")
    if not (0 <= x < size and 0 <= y < size):
        raise SgfError(f"SGF coordinate {value!r} is off the board")
    return (x + 1, size - y)


def _text(values: list[str]) -> str:
    return "\n".join(v.encode("latin-1").decode("utf-8", errors="replace") for v in values).strip()


def read_sgf(data: bytes | str, superko: bool = True) -> SgfGame:
    text = data.decode("latin-1") if isinstance(data, bytes) else data.encode("utf-8").decode("latin-1")
    nodes = _main_line(text)
    if not nodes:
        raise ParseError("game tree has no nodes", 0)
    root = nodes[0]
    size = int(root.get("SZ", ["19"])[0].split(":")[0])
    komi = float(root.get("KM", ["7.5"])[0] or 7.5)
    state = empty_state(size, komi=komi, superko=superko)
    steps = []
    move_no = 0
    root_comment = _text(root.get("C", []))
    for node in nodes:
        for key, color in (("B", Color.BLACK), ("W", Color.WHITE)):
            if key not in node:
                continue
            move_no += 1
            try:
                move = GoMove(color, _decode_point(node[key][0], size))
            except SgfError as exc:
                raise IllegalMoveInRecord(move_no, GoMove(color, None), str(exc)) from None
            try:
                after = apply_move(state, move)
            except IllegalMove as exc:
                raise IllegalMoveInRecord(move_no, move, str(exc)) from None
            comment = _text(node.get("C", [])) if node is not root else ""
            steps.append(SgfStep(state, move, after, comment))
            state = after
    return SgfGame(size, komi, root_comment, tuple(steps))


def load_sgf(data: bytes | str, superko: bool = True) -> list[tuple[GoState, GoMove, str]]:
    """(position before the move, move, comment on the resulting position) per main-line move."""
    return [(s.before, s.move, s.comment) for s in read_sgf(data, superko).steps]
