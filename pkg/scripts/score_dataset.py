"""Score a generated dataset against itself, optionally with damaged predictions.

With ``--damage 0`` every metric should sit at its perfect value; raising the
damage fraction shows how each metric degrades when answers are truncated.

    python3 scripts/score_dataset.py data/desk --damage 0.2
"""
import argparse
import json

import numpy as np

from gamesynth.datagen.pipeline import iter_samples
from gamesynth.evalkit.report import evaluate_records


def damage(answer: str) -> str:
    lines = answer.split("\n")
    # drop the last line: the final decision, the win rate, or the bottom board row
    return "\n".join(lines[:-1]) if len(lines) > 1 else answer[: len(answer) // 2]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dataset")
    ap.add_argument("--damage", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rl-scope", default="thought", choices=["thought", "full"])
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    records = []
    for s in iter_samples(args.dataset):
        rec = json.loads(s.to_json())
        rec["prediction"] = damage(s.answer) if rng.random() < args.damage else s.answer
        records.append(rec)
    report = evaluate_records(records, rl_scope=args.rl_scope)
    for key in sorted(report):
        if "/" in key and "/n_" not in key:
            print(f"{key:<36} {report[key]:.4f}")
    print(f"{report['n']} samples, damage fraction {args.damage}")


if __name__ == "__main__":
    main()
