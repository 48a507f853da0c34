"""Recover structured answers from template-shaped text.

``parse_answer`` never raises: anything it cannot read comes back with
``format_ok=False`` and a short ``reason`` naming the offending section.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..datagen.templates import Task
from ..dou.cards import CardError, encode_cards, parse_cards
from ..go.board import GoError
from ..go.codec import parse_grid

_ACT = r"(pass|\[[^\]]*\])"
FINAL_RE = re.compile(rf"^Therefore, I will play {_ACT}\.$")
REASON_RE = re.compile(rf"^If I play {_ACT}, (?:I will have no cards left|the next player will play {_ACT}"
                       rf"|the next two players will play {_ACT}, {_ACT})\.$")
PRED_RE = re.compile(rf"^The next (?:player will play {_ACT}|two players will play {_ACT}, {_ACT})\.$")
MOVE_RE = re.compile(r"^The move is (black|white) (pass|[A-HJ-T]\d{1,2})\.$")
COUNT_RE = re.compile(r"^Count: black (\d+), white (\d+)$")
LEAD_RE = re.compile(r"^Lead \(black\): (.*)$")
WINRATE_RE = re.compile(r"^Win rate \(black\): (.*)$")


class _Bad(Exception):
    def __init__(self, reason: str):
        self.reason = reason


@dataclass
class ParsedAnswer:
    task: Task
    format_ok: bool
    reason: str = ""
    text: str = ""
    thought_text: str = ""
    final_action: Optional[str] = None  # normalised "[c c]" or "pass"
    reasoning: dict = field(default_factory=dict)  # candidate -> predicted response chain
    chain: Optional[tuple[str, ...]] = None
    board: Optional[np.ndarray] = None
    move: Optional[str] = None  # "black D4" for the action variant
    ownership: Optional[np.ndarray] = None
    counts: Optional[tuple[int, int]] = None
    lead: Optional[float] = None
    win_rate: Optional[float] = None

    def structured(self) -> Any:
        """The task's ground-truth payload, used for parse-back comparisons."""
        if self.task in (Task.DOU_PROB, Task.DOU_NO_PROB):
            return (self.final_action, tuple(sorted(self.reasoning.items())))
        if self.task == Task.DOU_PRED_PROB:
            return self.chain
        if self.task == Task.GO_NEXT_STATE:
            return self.move if self.move is not None else (None if self.board is None else self.board.tobytes())
        if self.task == Task.GO_ANALYSIS:
            own = None if self.ownership is None else self.ownership.tobytes()
            return (own, self.counts, self.lead, self.win_rate)
        return self.text


def normalize_action(text: str) -> str:
    text = text.strip()
    if text.lower() == "pass":
        return "pass"
    if not (text.startswith("[") and text.endswith("]")):
        raise _Bad("action")
    try:
        hand = parse_cards(text[1:-1])
    except CardError:
        raise _Bad("action") from None
    if len(hand) == 0:
        raise _Bad("action")
    return "[" + encode_cards(hand) + "]"


def _number(text: str, reason: str) -> float:
    try:
        v = float(text.strip())
    except ValueError:
        raise _Bad(reason) from None
    if not math.isfinite(v):
        raise _Bad(reason)
    return v


def _parse_dou(out: ParsedAnswer, lines: list[str], with_prob: bool) -> None:
    if not lines:
        raise _Bad("empty")
    m = FINAL_RE.match(lines[-1].strip())
    if not m:
        raise _Bad("final_action")
    out.final_action = normalize_action(m.group(1))
    out.thought_text = "\n".join(lines[:-1])
    if not with_prob:
        return
    for ln in lines[:-1]:
        r = REASON_RE.match(ln.strip())
        if not r:
            raise _Bad("reasoning")
        groups = [g for g in r.groups()[1:] if g is not None]
        out.reasoning[normalize_action(r.group(1))] = tuple(normalize_action(g) for g in groups)
    if not out.reasoning:
        raise _Bad("reasoning")


def _parse_pred(out: ParsedAnswer, lines: list[str]) -> None:
    if len(lines) != 1:
        raise _Bad("prediction")
    m = PRED_RE.match(lines[0].strip())
    if not m:
        raise _Bad("prediction")
    out.chain = tuple(normalize_action(g) for g in m.groups() if g is not None)


def _parse_next_state(out: ParsedAnswer, text: str) -> None:
    m = MOVE_RE.match(text.strip())
    if m:
        out.move = f"{m.group(1)} {m.group(2).lower() if m.group(2) == 'pass' else m.group(2)}"
        return
    try:
        out.board, _ = parse_grid(text)
    except (GoError, ValueError):
        raise _Bad("board") from None


def _parse_analysis(out: ParsedAnswer, lines: list[str]) -> None:
    if not lines or lines[0].strip() != "Ownership:":
        raise _Bad("ownership")
    i = 1
    while i < len(lines) and not lines[i].startswith("Count:"):
        i += 1
    try:
        grid, labels = parse_grid("\n".join(lines[1:i]))
    except (GoError, ValueError):
        raise _Bad("ownership") from None
    if labels:
        raise _Bad("ownership")
    out.ownership = grid
    rest = lines[i:]
    if len(rest) != 3:
        raise _Bad("count" if not rest else "sections")
    m = COUNT_RE.match(rest[0].strip())
    if not m:
        raise _Bad("count")
    out.counts = (int(m.group(1)), int(m.group(2)))
    m = LEAD_RE.match(rest[1].strip())
    if not m:
        raise _Bad("lead")
    out.lead = _number(m.group(1), "lead")
    m = WINRATE_RE.match(rest[2].strip())
    if not m:
        raise _Bad("win_rate")
    wr = _number(m.group(1), "win_rate")
    if not 0.0 <= wr <= 1.0:
        raise _Bad("win_rate")
    out.win_rate = wr


def parse_answer(text: Any, task: Task | str) -> ParsedAnswer:
    try:
        task = Task(task) if not isinstance(task, Task) else task
    except ValueError:
        return ParsedAnswer(Task.GO_STATE_EXPL, False, "task", str(text))
    if not isinstance(text, str):
        return ParsedAnswer(task, False, "not_text", "")
    out = ParsedAnswer(task, True, "", text)
    lines = [ln for ln in text.strip().split("\n")] if text.strip() else []
    try:
        if task == Task.DOU_PROB:
            _parse_dou(out, lines, True)
        elif task == Task.DOU_NO_PROB:
            _parse_dou(out, lines, False)
        elif task == Task.DOU_PRED_PROB:
            _parse_pred(out, lines)
        elif task == Task.GO_NEXT_STATE:
            _parse_next_state(out, text)
        elif task == Task.GO_ANALYSIS:
            _parse_analysis(out, lines)
        else:
            if not text.strip():
                raise _Bad("empty")
            out.thought_text = text
    except _Bad as bad:
        out.format_ok = False
        out.reason = bad.reason
    except Exception as exc:  # totality: nothing escapes
        out.format_ok = False
        out.reason = f"unexpected:{type(exc).__name__}"
    return out
