"""Score prediction files (dataset shards with an added ``prediction`` field)."""
from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Mapping

from ..datagen.templates import Task
from .metrics import action_accuracy, pred_accuracy, rl_sum, s_prime_accuracy, score_mae, winrate_mae
from .parse import parse_answer

TASK_METRICS = {
    Task.DOU_PROB: ("action_accuracy", "rl_sum"),
    Task.DOU_NO_PROB: ("action_accuracy",),
    Task.DOU_PRED_PROB: ("pred_accuracy",),
    Task.GO_NEXT_STATE: ("s_prime_accuracy", "move_accuracy"),
    Task.GO_ANALYSIS: ("score_mae", "winrate_mae"),
    Task.GO_STATE_EXPL: ("rl_sum",),
}


class ReportError(ValueError):
    pass


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs)


def evaluate_task(task: Task, predictions: list, answers: list[str], rl_scope: str = "thought") -> dict:
    """Metrics for one task. ``rl_scope`` is "thought" (text before the final
    decision) or "full" (whole answer) for the chain-of-thought similarity."""
    if rl_scope not in ("thought", "full"):
        raise ReportError(f"unknown rl_scope {rl_scope!r}")
    preds = [parse_answer(p, task) for p in predictions]
    labels = [parse_answer(a, task) for a in answers]
    bad = [i for i, lab in enumerate(labels) if not lab.format_ok]
    if bad:
        raise ReportError(f"{len(bad)} reference answers for {task.value} do not parse (first: {labels[bad[0]].reason})")
    out: dict = {"n": len(labels), "format_ok": sum(p.format_ok for p in preds) / len(preds)}
    if task in (Task.DOU_PROB, Task.DOU_NO_PROB):
        out["action_accuracy"] = action_accuracy([p.final_action if p.format_ok else None for p in preds],
                                                 [l.final_action for l in labels])
    if task == Task.DOU_PROB:
        if rl_scope == "thought":
            pairs = [(p.thought_text if p.format_ok else "", l.thought_text) for p, l in zip(preds, labels)]
        else:
            pairs = [(p.text, l.text) for p, l in zip(preds, labels)]
        out["rl_sum"] = _mean([rl_sum(c, r) for c, r in pairs])
    if task == Task.DOU_PRED_PROB:
        out["pred_accuracy"] = pred_accuracy([p.chain if p.format_ok else None for p in preds],
                                             [l.chain for l in labels])
    if task == Task.GO_NEXT_STATE:
        boards = [(p, l) for p, l in zip(preds, labels) if l.move is None]
        moves = [(p, l) for p, l in zip(preds, labels) if l.move is not None]
        if boards:
            out["s_prime_accuracy"] = s_prime_accuracy([p.board if p.format_ok else None for p, _ in boards],
                                                       [l.board for _, l in boards])
            out["n_next_state"] = len(boards)
        if moves:
            out["move_accuracy"] = sum(p.format_ok and p.move == l.move for p, l in moves) / len(moves)
            out["n_action"] = len(moves)
    if task == Task.GO_ANALYSIS:
        out["score_mae"] = score_mae([p.lead if p.format_ok else None for p in preds], [l.lead for l in labels])
        out["winrate_mae"] = winrate_mae([p.win_rate if p.format_ok else None for p in preds],
                                         [l.win_rate for l in labels])
    if task == Task.GO_STATE_EXPL:
        out["rl_sum"] = _mean([rl_sum(p.text if isinstance(p.text, str) else "", l.text)
                               for p, l in zip(preds, labels)])
    return out


def evaluate_records(records: Iterable[Mapping], rl_scope: str = "thought") -> dict:
    by_task: dict[Task, tuple[list, list]] = defaultdict(lambda: ([], []))
    n = 0
    for rec in records:
        if "prediction" not in rec:
            raise ReportError(f"record {n} has no prediction field")
        preds, answers = by_task[Task(rec["task"])]
        preds.append(rec["prediction"])
        answers.append(rec["answer"])
        n += 1
    if n == 0:
        raise ReportError("no records to evaluate")
    report: dict = {}
    per_task = {}
    for task in Task:
        if task not in by_task:
            continue
        res = evaluate_task(task, *by_task[task], rl_scope=rl_scope)
        per_task[task.value] = res["n"]
        for k, v in res.items():
            if k != "n":
                report[f"{task.value}/{k}"] = v
    report["n"] = n
    report["n_by_task"] = per_task
    report["config"] = {"rl_scope": rl_scope, "tokenizer": "lowercase \\w+ runs",
                        "sentence_split": "newline or [.!?] + whitespace", "pred_matching": "whole chain",
                        "score_penalty": 10.0, "winrate_penalty": 1.0}
    return report


def read_jsonl(paths: Iterable[str | Path]) -> list[dict]:
    out = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(json.loads(line))
    return out


def write_report(report: Mapping, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
