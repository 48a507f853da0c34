"""Answer-level metrics.

Tokenisation for the Rouge-L family: lowercase, then keep maximal runs of
word characters; whitespace and punctuation only separate tokens.
Sentences (for ``rl_sum``) end at a newline or at ``.``, ``!`` or ``?``
followed by whitespace or the end of the text.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from typing import Optional, Sequence

import numpy as np

from ..go.board import GoError
from ..go.codec import parse_grid

SCORE_PENALTY = 10.0
WINRATE_PENALTY = 1.0

_TOKEN = re.compile(r"\w+", re.UNICODE)
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+|\n+")


class MetricError(ValueError):
    pass


class LengthMismatch(MetricError):
    pass


class Empty(MetricError):
    pass


def _check(preds: Sequence, labels: Sequence, allow_empty: bool = False) -> None:
    if len(preds) != len(labels):
        raise LengthMismatch(f"{len(preds)} predictions for {len(labels)} labels")
    if not preds and not allow_empty:
        raise Empty("no samples")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_END.split(text) if s.strip()]


def lcs_table(a: Sequence[str], b: Sequence[str]) -> np.ndarray:
    t = np.zeros((len(a) + 1, len(b) + 1), dtype=np.int64)
    for i, x in enumerate(a, 1):
        for j, y in enumerate(b, 1):
            t[i, j] = t[i - 1, j - 1] + 1 if x == y else max(t[i - 1, j], t[i, j - 1])
    return t


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    return int(lcs_table(a, b)[len(a), len(b)])


def _lcs_indices(ref: Sequence[str], cand: Sequence[str]) -> set[int]:
    """Positions in ``ref`` covered by one longest common subsequence with ``cand``."""
    t = lcs_table(ref, cand)
    i, j = len(ref), len(cand)
    out = set()
    while i > 0 and j > 0:
        if ref[i - 1] == cand[j - 1]:
            out.add(i - 1)
            i -= 1
            j -= 1
        elif t[i - 1, j] >= t[i, j - 1]:
            i -= 1
        else:
            j -= 1
    return out


def _prf(hits: int, n_cand: int, n_ref: int) -> tuple[float, float, float]:
    if n_cand == 0 and n_ref == 0:
        return 1.0, 1.0, 1.0
    if n_cand == 0 or n_ref == 0 or hits == 0:
        return 0.0, 0.0, 0.0
    p, r = hits / n_cand, hits / n_ref
    return p, r, 2 * p * r / (p + r)


def rouge_l(candidate: str, reference: str) -> tuple[float, float, float]:
    """(precision, recall, f1) from the token LCS; two empty texts score 1.0."""
    c, r = tokenize(candidate), tokenize(reference)
    return _prf(lcs_length(c, r), len(c), len(r))


def rl_sum(candidate: str, reference: str) -> float:
    """Summary-level Rouge-L F1: per reference sentence, the union of its LCS hits
    against every candidate sentence; hits are clipped by token counts."""
    c_sents = [tokenize(s) for s in split_sentences(candidate)]
    r_sents = [tokenize(s) for s in split_sentences(reference)]
    c_sents = [s for s in c_sents if s]
    r_sents = [s for s in r_sents if s]
    n_c = sum(map(len, c_sents))
    n_r = sum(map(len, r_sents))
    c_left = Counter(t for s in c_sents for t in s)
    r_left = Counter(t for s in r_sents for t in s)
    hits = 0
    for ref in r_sents:
        union: set[int] = set()
        for cand in c_sents:
            union |= _lcs_indices(ref, cand)
        for i in sorted(union):
            tok = ref[i]
            if c_left[tok] > 0 and r_left[tok] > 0:
                hits += 1
                c_left[tok] -= 1
                r_left[tok] -= 1
    return _prf(hits, n_c, n_r)[2]


def action_accuracy(preds: Sequence[Optional[str]], labels: Sequence[str]) -> float:
    """Exact match of final actions; ``None`` marks a format failure."""
    _check(preds, labels)
    return sum(p is not None and p == l for p, l in zip(preds, labels)) / len(labels)


def _as_grid(board) -> Optional[np.ndarray]:
    if board is None:
        return None
    if isinstance(board, np.ndarray):
        return board
    try:
        return parse_grid(str(board))[0]
    except (GoError, ValueError):
        return None


def s_prime_accuracy(pred_boards: Sequence, label_boards: Sequence) -> float:
    """All-or-nothing stone agreement per sample; boards are text or grids."""
    _check(pred_boards, label_boards)
    hits = 0
    for p, l in zip(pred_boards, label_boards):
        pg, lg = _as_grid(p), _as_grid(l)
        if lg is None:
            raise MetricError("label board does not parse")
        hits += pg is not None and pg.shape == lg.shape and bool(np.array_equal(pg, lg))
    return hits / len(label_boards)


def _mae(preds: Sequence[Optional[float]], labels: Sequence[float], penalty: float) -> float:
    _check(preds, labels)
    total = 0.0
    for p, l in zip(preds, labels):
        if p is None or isinstance(p, bool) or not isinstance(p, (int, float)) or not math.isfinite(p):
            total += penalty
        else:
            total += abs(float(p) - float(l))
    return total / len(labels)


def score_mae(preds: Sequence[Optional[float]], labels: Sequence[float]) -> float:
    """Mean absolute lead error; a malformed prediction costs 10 points."""
    return _mae(preds, labels, SCORE_PENALTY)


def winrate_mae(preds: Sequence[Optional[float]], labels: Sequence[float]) -> float:
    """Mean absolute win-rate error; a malformed prediction costs the full 1.0."""
    return _mae(preds, labels, WINRATE_PENALTY)


def pred_accuracy(pred_responses: Sequence, label_responses: Sequence) -> float:
    """Fraction of samples whose whole predicted response chain is right."""
    _check(pred_responses, label_responses)
    hits = 0
    for p, l in zip(pred_responses, label_responses):
        hits += bool(p) and tuple(p) == tuple(l)
    return hits / len(label_responses)
