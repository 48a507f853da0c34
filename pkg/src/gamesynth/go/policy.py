"""Move policies used to drive Go self-play trajectories.

Two strength tiers mirror the data recipe: ``OPTIMAL`` always takes the
policy's best move, ``SUBOPTIMAL`` samples from its Top-p nucleus. Without an
external engine the policy is a cheap shape/capture heuristic.
"""
from __future__ import annotations

from enum import Enum
from typing import Optional

import numpy as np

from ..topp import GO_TOP_P, nucleus, softmax
from .board import Color, GoMove, GoState, Point, is_eye, point_features


class Tier(Enum):
    OPTIMAL = "optimal"
    SUBOPTIMAL = "suboptimal"


def _line_bonus(point: Point, size: int) -> float:
    d = min(point[0] - 1, point[1] - 1, size - point[0], size - point[1])
    return {0: -2.0, 1: -0.5, 2: 1.0, 3: 1.0}.get(d, 0.3)


def heuristic_logits(state: GoState, rng: np.random.Generator, noise: float = 0.5) -> list[tuple[Optional[Point], float]]:
    """Candidate moves with logits; PASS is the only candidate when nothing sensible is left."""
    color = state.to_move
    feats = point_features(state, color)
    out = []
    for pt, (captured, libs) in feats.items():
        if captured == 0 and is_eye(state, pt, color):
            continue
        logit = _line_bonus(pt, state.size) + 2.0 * captured
        if libs == 1 and captured == 0:
            logit -= 3.0
        elif libs >= 3:
            logit += 0.3
        out.append((pt, logit))
    if not out:
        return [(None, 0.0)]
    noise_draw = rng.normal(0.0, noise, size=len(out))
    return [(pt, lg + float(z)) for (pt, lg), z in zip(out, noise_draw)]


def choose_move(candidates: list[tuple[Optional[Point], float]], tier: Tier, rng: np.random.Generator,
                p: float = GO_TOP_P, weights_are_probs: bool = False) -> Optional[Point]:
    pts = [c[0] for c in candidates]
    probs = np.array([c[1] for c in candidates], dtype=float)
    if not weights_are_probs:
        probs = softmax(probs)
    else:
        probs = probs / probs.sum()
    keys = [(0, 0) if pt is None else pt for pt in pts]
    order = nucleus(probs.tolist(), 1.0 if tier == Tier.OPTIMAL else p, keys)
    if tier == Tier.OPTIMAL:
        return pts[order[0]]
    sub = probs[order]
    pick = rng.choice(len(order), p=sub / sub.sum())
    return pts[order[pick]]


def heuristic_move(state: GoState, tier: Tier, rng: np.random.Generator, p: float = GO_TOP_P) -> GoMove:
    return GoMove(state.to_move, choose_move(heuristic_logits(state, rng), tier, rng, p))
