"""Question/answer templates and the per-task sample builders.

Every builder is a pure function of its inputs, so a sample can be
re-rendered from the trajectory state it came from.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional, Sequence

from ..dou.cards import Hand, encode_cards
from ..dou.combos import Combo
from ..dou.state import DouState, legal_actions
from ..go.board import GoMove, GoState, apply_move, diff_states, point_name
from ..go.codec import CODEC_VERSION, serialize_board, serialize_grid
from ..go.evaluate import PositionEval, count_territory, score_lead

TEMPLATE_VERSION = "qa-templates/1"


class Task(Enum):
    DOU_PROB = "DOU_PROB"
    DOU_NO_PROB = "DOU_NO_PROB"
    DOU_PRED_PROB = "DOU_PRED_PROB"
    GO_NEXT_STATE = "GO_NEXT_STATE"
    GO_ANALYSIS = "GO_ANALYSIS"
    GO_STATE_EXPL = "GO_STATE_EXPL"

    @property
    def is_dou(self) -> bool:
        return self.value.startswith("DOU")


class TemplateInvariantViolation(ValueError):
    pass


class InconsistentEval(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    task: Task
    question: str
    answer: str
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.question.strip() or not self.answer.strip():
            raise TemplateInvariantViolation("question and answer must be non-empty")

    def to_json(self) -> str:
        return json.dumps({"task": self.task.value, "question": self.question, "answer": self.answer,
                           "meta": self.meta}, ensure_ascii=False, sort_keys=False)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Sample":
        return cls(Task(d["task"]), d["question"], d["answer"], d.get("meta", {}))


def with_meta(sample: Sample, **meta) -> Sample:
    return Sample(sample.task, sample.question, sample.answer, {**sample.meta, **meta})


# -- Doudizhu -------------------------------------------------------------------

def render_cards(cards: Hand | Sequence[int]) -> str:
    return "[" + encode_cards(cards) + "]"


def render_action(combo: Combo) -> str:
    return "pass" if combo.is_pass else render_cards(combo.cards)


def seat_name(state: DouState, seat: int) -> str:
    offset = (seat - state.landlord) % state.n_seats
    if offset == 0:
        return "landlord"
    if state.n_seats == 2:
        return "farmer"
    return "farmer-down" if offset == 1 else "farmer-up"


def render_history(state: DouState) -> str:
    if not state.history:
        return "none"
    return ", ".join(f"{seat_name(state, s)} {render_action(c)}" for s, c in state.history)


def dou_context(state: DouState) -> str:
    me = state.to_move
    opp = Hand.from_ranks(r for s in range(state.n_seats) if s != me for r in state.hands[s].ranks())
    sizes = []
    seat = me
    for label in ("next player", "player after")[: state.n_seats - 1]:
        seat = state.next_seat(seat)
        sizes.append(f"the {label} has {len(state.hands[seat])} cards left")
    counts = " and ".join(sizes)
    return (f"I am the {seat_name(state, me)}. My handcards are {render_cards(state.hand)}, "
            f"while the opponents' handcards are {render_cards(opp)}. "
            f"{counts[0].upper()}{counts[1:]}. Played so far: {render_history(state)}.")


def render_responses(action: Combo, responses: Sequence[Combo]) -> str:
    if not responses:
        return f"If I play {render_action(action)}, I will have no cards left."
    if len(responses) == 1:
        return f"If I play {render_action(action)}, the next player will play {render_action(responses[0])}."
    return (f"If I play {render_action(action)}, the next two players will play "
            + ", ".join(render_action(r) for r in responses) + ".")


def final_line(action: Combo) -> str:
    return f"Therefore, I will play {render_action(action)}."


def _check_legal(state: DouState, actions: Sequence[Combo]) -> None:
    legal = set(legal_actions(state))
    for a in actions:
        if a not in legal:
            raise TemplateInvariantViolation(f"{render_action(a)} is not legal here")


def build_dou_sample(state: DouState, candidates: Sequence[Combo],
                     predicted_responses: Mapping[Combo, Sequence[Combo]], chosen: Combo,
                     with_prob: bool = True, meta: Optional[Mapping] = None) -> Sample:
    if not candidates:
        raise TemplateInvariantViolation("no candidate actions")
    if chosen not in candidates:
        raise TemplateInvariantViolation("the chosen action must be a candidate")
    _check_legal(state, candidates)
    question = dou_context(state) + "\nMy possible actions are " + ", ".join(map(render_action, candidates)) + "."
    lines = []
    if with_prob:
        for a in candidates:
            if a not in predicted_responses:
                raise TemplateInvariantViolation(f"no predicted responses for {render_action(a)}")
            lines.append(render_responses(a, predicted_responses[a]))
    lines.append(final_line(chosen))
    task = Task.DOU_PROB if with_prob else Task.DOU_NO_PROB
    return Sample(task, question, "\n".join(lines), dict(meta or {}))


def render_observed(responses: Sequence[Combo]) -> str:
    if len(responses) == 1:
        return f"The next player will play {render_action(responses[0])}."
    return "The next two players will play " + ", ".join(render_action(r) for r in responses) + "."


def build_dou_pred_sample(state: DouState, action: Combo, observed_response: Sequence[Combo] | Combo,
                          meta: Optional[Mapping] = None) -> Sample:
    if isinstance(observed_response, Combo):
        observed_response = (observed_response,)
    if not observed_response:
        raise TemplateInvariantViolation("no observed response to predict")
    _check_legal(state, [action])
    question = dou_context(state) + f"\nMy action is {render_action(action)}."
    return Sample(Task.DOU_PRED_PROB, question, render_observed(observed_response), dict(meta or {}))


# -- Go -------------------------------------------------------------------------

def _to_play(state: GoState) -> str:
    return f"{state.to_move.word.capitalize()} is to play"


def render_move(move: GoMove) -> str:
    return f"{move.color.word} {point_name(move.point)}"


def build_go_next_state_sample(s: GoState, a: GoMove, annotate_last_k: int = 0,
                               meta: Optional[Mapping] = None) -> Sample:
    after = apply_move(s, a)
    k_before = min(annotate_last_k, len(s.history))
    k_after = min(annotate_last_k, len(after.history))
    question = (f"The following is a game record of {s.size}x{s.size} Go. {_to_play(s)}.\n"
                f"{serialize_board(s, k_before)}\n"
                f"The next move is on {point_name(a.point)} by {a.color.word}. "
                f"Please predict the next Go board after this move.")
    return Sample(Task.GO_NEXT_STATE, question, serialize_board(after, k_after),
                  {"variant": "next_state", **(meta or {})})


def build_go_action_sample(s: GoState, s_next: GoState, annotate_last_k: int = 0,
                           meta: Optional[Mapping] = None) -> Sample:
    move = diff_states(s, s_next)
    question = (f"The following is a game record of {s.size}x{s.size} Go. {_to_play(s)}.\n"
                f"Board before the move:\n{serialize_board(s, min(annotate_last_k, len(s.history)))}\n"
                f"Board after the move:\n{serialize_board(s_next, min(annotate_last_k, len(s_next.history)))}\n"
                f"Please predict the move that was played.")
    return Sample(Task.GO_NEXT_STATE, question, f"The move is {render_move(move)}.",
                  {"variant": "action", **(meta or {})})


def render_analysis_answer(ev: PositionEval) -> str:
    counts = count_territory(ev.ownership)
    lead = score_lead(counts, ev.komi)
    return (f"Ownership:\n{serialize_grid(ev.ownership.discrete)}\n"
            f"Count: black {counts[0]}, white {counts[1]}\n"
            f"Lead (black): {lead:+g}\n"
            f"Win rate (black): {ev.win_rate:.4f}")


def build_go_analysis_sample(state: GoState, ev: PositionEval, annotate_last_k: int = 0,
                             meta: Optional[Mapping] = None) -> Sample:
    if ev.ownership.size != state.size:
        raise InconsistentEval(f"{ev.ownership.size}x{ev.ownership.size} ownership for a {state.size}x{state.size} board")
    counts = count_territory(ev.ownership)
    if ev.score_lead != score_lead(counts, ev.komi):
        raise InconsistentEval(f"lead {ev.score_lead} does not follow from counts {counts} and komi {ev.komi:g}")
    question = (f"The following is a game board of Go. {_to_play(state)}, komi {ev.komi:g}. "
                f"Here is the board state:\n{serialize_board(state, min(annotate_last_k, len(state.history)))}\n"
                f"Please predict the ownership map, the leading score and the win rate.")
    return Sample(Task.GO_ANALYSIS, question, render_analysis_answer(ev), dict(meta or {}))


def recount_eval(ev: PositionEval) -> PositionEval:
    """Same eval with the lead recomputed by the Count tool (engine leads are not area counts)."""
    from dataclasses import replace
    return replace(ev, score_lead=score_lead(count_territory(ev.ownership), ev.komi))


def build_go_expl_sample(state: GoState, explanation: str, annotate_last_k: int = 0,
                         meta: Optional[Mapping] = None) -> Sample:
    if not explanation.strip():
        raise TemplateInvariantViolation("empty explanation")
    question = (f"The following is a game board of Go. {_to_play(state)}. "
                f"Here is the board state:\n{serialize_board(state, min(annotate_last_k, len(state.history)))}\n"
                f"Please generate the corresponding explanations.")
    return Sample(Task.GO_STATE_EXPL, question, explanation, dict(meta or {}))


VERSIONS = {"template": TEMPLATE_VERSION, "board_codec": CODEC_VERSION, "card_codec": "dou-card-codes/1",
            "board_frame": "column letters above, row numbers left"}
