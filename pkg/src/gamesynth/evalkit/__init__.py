"""Answer parsing and the metric suite."""
from .metrics import (Empty, LengthMismatch, action_accuracy, pred_accuracy, rl_sum, rouge_l, s_prime_accuracy,
                      score_mae, winrate_mae)
from .parse import ParsedAnswer, parse_answer
from .report import evaluate_records, write_report
