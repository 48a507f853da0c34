"""Nucleus (Top-p) selection shared by the card and board policies."""
from __future__ import annotations

from typing import Any, Sequence

import numpy as np

DOU_TOP_P = 0.25
GO_TOP_P = 0.4


def softmax(logits: Sequence[float], temperature: float = 1.0) -> np.ndarray:
    z = np.asarray(logits, dtype=float) / temperature
    z = np.exp(z - z.max())
    return z / z.sum()


def nucleus(probs: Sequence[float], p: float, tiebreak: Sequence[Any] | None = None) -> list[int]:
    """Indices of the shortest descending-probability prefix with mass >= ``p``.

    Equal probabilities are ordered by ``tiebreak`` (default: input order).
    """
    if len(probs) == 0:
        raise ValueError("nothing to filter")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    keys = tiebreak if tiebreak is not None else range(len(probs))
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], keys[i]))
    if p >= 1.0:
        return order
    out, mass = [], 0.0
    for i in order:
        out.append(i)
        mass += probs[i]
        if mass >= p - 1e-12:
            break
    return out
