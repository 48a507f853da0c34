import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gamesynth.datagen.pipeline import DouParams, GoParams, dou_trajectory, go_trajectory
from gamesynth.datagen.templates import Task
from gamesynth.evalkit.metrics import (Empty, LengthMismatch, MetricError, action_accuracy, lcs_length,
                                       pred_accuracy, rl_sum, rouge_l, s_prime_accuracy, score_mae, split_sentences,
                                       tokenize, winrate_mae)
from gamesynth.evalkit.parse import normalize_action, parse_answer
from gamesynth.evalkit.report import ReportError, evaluate_records, evaluate_task

CHEAP_SEATS = [{"kind": "rule"}, {"kind": "random"}, {"kind": "rule"}]


# -- metrics ----------------------------------------------------------------------

def test_rouge_l_goldens():
    assert rouge_l("the cat sat", "the cat ran")[2] == pytest.approx(2 / 3, abs=1e-9)
    assert rouge_l("a b c", "a b c") == (1.0, 1.0, 1.0)
    assert rouge_l("a b c", "x y z") == (0.0, 0.0, 0.0)
    assert rouge_l("", "") == (1.0, 1.0, 1.0)
    p, r, f = rouge_l("a b c d", "a c")
    assert (p, r) == (0.5, 1.0) and f == pytest.approx(2 / 3)


def test_tokenizer_and_sentences():
    assert tokenize("If I play [3 3], the next") == ["if", "i", "play", "3", "3", "the", "next"]
    assert split_sentences("One. Two!\nThree? four") == ["One.", "Two!", "Three?", "four"]


def _lcs_brute(a, b):
    # exponential reference for tiny inputs
    if not a or not b:
        return 0
    if a[0] == b[0]:
        return 1 + _lcs_brute(a[1:], b[1:])
    return max(_lcs_brute(a[1:], b), _lcs_brute(a, b[1:]))


@given(st.lists(st.sampled_from("abc"), max_size=7), st.lists(st.sampled_from("abc"), max_size=7))
def test_lcs_matches_recursive_definition(a, b):
    assert lcs_length(a, b) == _lcs_brute(a, b)


def test_rl_sum_golden():
    # reference tokens: the cat ran; union of hits over both candidate sentences covers all three
    assert rl_sum("the cat sat. a dog ran.", "the cat ran.") == pytest.approx(2 / 3)
    assert rl_sum("x y.", "x y.") == 1.0
    assert rl_sum("p q.", "x y.") == 0.0


@given(st.text(alphabet="ab .\n", max_size=40), st.text(alphabet="ab .\n", max_size=40))
def test_rl_sum_bounded_and_reflexive(a, b):
    v = rl_sum(a, b)
    assert 0.0 <= v <= 1.0
    if tokenize(a):
        assert rl_sum(a, a) == pytest.approx(1.0)


def test_score_mae_penalty_golden():
    labels = [1.5] * 10
    preds = [1.5] * 9 + [None]
    assert score_mae(preds, labels) == 1.0
    assert winrate_mae([0.5] * 9 + ["x"], [0.5] * 10) == pytest.approx(0.1)
    assert score_mae([float("nan")], [0.0]) == 10.0
    assert score_mae([2.0, -1.0], [1.0, 1.0]) == 1.5


def test_accuracy_metrics():
    assert action_accuracy(["[3]", None, "pass"], ["[3]", "[4]", "[5]"]) == pytest.approx(1 / 3)
    assert pred_accuracy([("[3]", "pass"), ("[4]",), None], [("[3]", "pass"), ("[4]", "pass"), ("[5]",)]) == \
        pytest.approx(1 / 3)
    board = "# o\n• •"
    assert s_prime_accuracy([board, np.array([[0, 0], [1, -1]]), "junk"], [board, board, board]) == \
        pytest.approx(2 / 3)


def test_metric_errors():
    with pytest.raises(LengthMismatch):
        action_accuracy(["a"], [])
    with pytest.raises(Empty):
        score_mae([], [])
    with pytest.raises(MetricError):
        s_prime_accuracy(["# o"], ["not a board"])


# -- parsing ------------------------------------------------------------------------

def test_normalize_action():
    assert normalize_action(" [17 3 3] ") == "[3 3 17]"
    assert normalize_action("PASS") == "pass"


@given(st.text(max_size=200), st.sampled_from([t.value for t in Task] + ["NOPE"]))
def test_parse_answer_is_total(text, task):
    out = parse_answer(text, task)
    assert out.format_ok in (True, False)
    if not out.format_ok:
        assert out.reason


def test_parse_answer_reasons():
    assert parse_answer("Therefore, I will play [3].", Task.DOU_NO_PROB).final_action == "[3]"
    assert parse_answer("I will play [3].", Task.DOU_NO_PROB).reason == "final_action"
    assert parse_answer("nonsense\nTherefore, I will play [3].", Task.DOU_PROB).reason == "reasoning"
    assert parse_answer("Therefore, I will play [99].", Task.DOU_NO_PROB).reason == "action"
    assert parse_answer(None, Task.GO_ANALYSIS).reason == "not_text"
    bad_wr = "Ownership:\n# o\n• •\nCount: black 1, white 1\nLead (black): -7.5\nWin rate (black): 1.5"
    assert parse_answer(bad_wr, Task.GO_ANALYSIS).reason == "win_rate"
    assert parse_answer("The move is black pass.", Task.GO_NEXT_STATE).move == "black pass"


@pytest.fixture(scope="module")
def generated_samples():
    params = DouParams(trajectories=1, seats=CHEAP_SEATS)
    samples = dou_trajectory(0, 123, params)
    gp = GoParams(board_size=9, max_moves=40, analysis_stride=10, analysis_rollouts=20)
    samples += list(go_trajectory(0, 7, gp, lambda t: True))
    return samples


def test_generated_answers_parse_back(generated_samples):
    tasks = {s.task for s in generated_samples}
    assert tasks == {Task.DOU_PROB, Task.DOU_NO_PROB, Task.DOU_PRED_PROB, Task.GO_NEXT_STATE, Task.GO_ANALYSIS}
    for s in generated_samples:
        parsed = parse_answer(s.answer, s.task)
        assert parsed.format_ok, (s.task, parsed.reason, s.answer)
        if s.task == Task.DOU_PROB:
            assert parsed.final_action and parsed.reasoning and parsed.thought_text


def test_ground_truth_scores_perfectly(generated_samples):
    records = [{**json.loads(s.to_json()), "prediction": s.answer} for s in generated_samples]
    report = evaluate_records(records)
    for key, v in report.items():
        if key.endswith(("accuracy", "rl_sum", "format_ok")):
            assert v == 1.0, key
        if key.endswith("_mae"):
            assert v == 0.0, key
    assert report["n"] == len(records) and report["config"]["rl_scope"] == "thought"


def test_rl_scope_full_and_thought_differ():
    ans = "If I play [3], the next player will play pass.\nTherefore, I will play [3]."
    pred = "Therefore, I will play [3]."
    assert evaluate_task(Task.DOU_PROB, [pred], [ans], "thought")["rl_sum"] == 0.0
    assert evaluate_task(Task.DOU_PROB, [pred], [ans], "full")["rl_sum"] > 0.0
    with pytest.raises(ReportError):
        evaluate_task(Task.DOU_PROB, [pred], [ans], "words")


def test_report_rejects_bad_input():
    with pytest.raises(ReportError):
        evaluate_records([])
    with pytest.raises(ReportError):
        evaluate_records([{"task": "DOU_NO_PROB", "answer": "x"}])
    with pytest.raises(ReportError):
        evaluate_records([{"task": "DOU_NO_PROB", "answer": "not parseable", "prediction": "x"}])
