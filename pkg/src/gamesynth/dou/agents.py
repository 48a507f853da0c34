"""Data-generating Doudizhu policies and the Top-p candidate filter."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from ..topp import nucleus
from .cards import JOKERS
from .combos import NON_JOKERS, PASS, Category, Combo
from .fastsim import count_wins
from .state import DouState, apply_action, legal_actions, winner


class EmptyInput(ValueError):
    pass


class AgentFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ScoredActions:
    entries: tuple[tuple[Combo, float], ...]
    normalized: bool = False

    def __post_init__(self):
        if not self.entries:
            raise EmptyInput("scored action list is empty")
        if any(w < 0 or math.isnan(w) for _, w in self.entries) and self.normalized:
            raise ValueError("normalized weights must be non-negative")
        if self.normalized and abs(sum(w for _, w in self.entries) - 1.0) > 1e-9:
            raise ValueError("normalized weights must sum to 1")

    @property
    def actions(self) -> list[Combo]:
        return [a for a, _ in self.entries]

    def probabilities(self, temperature: float = 1.0) -> list[float]:
        """Weights as a distribution; raw weights are treated as logits."""
        if self.normalized:
            return [w for _, w in self.entries]
        z = np.array([w for _, w in self.entries], dtype=float) / temperature
        z = np.exp(z - z.max())
        return (z / z.sum()).tolist()

    def softmax(self, temperature: float = 1.0) -> "ScoredActions":
        probs = self.probabilities(temperature)
        total = math.fsum(probs)
        return ScoredActions(tuple((a, p / total) for a, p in zip(self.actions, probs)), normalized=True)

    def ranked(self) -> list[tuple[Combo, float]]:
        return sorted(self.entries, key=lambda e: (-e[1], e[0].sort_key))

    def argmax(self) -> Combo:
        return self.ranked()[0][0]

    def weight_of(self, action: Combo) -> float:
        for a, w in self.entries:
            if a == action:
                return w
        return 0.0


def top_p_filter(scored: ScoredActions, p: float, temperature: float = 1.0) -> list[Combo]:
    """Smallest highest-probability prefix whose cumulative mass reaches ``p``."""
    if not scored.entries:
        raise EmptyInput("nothing to filter")
    acts = scored.actions
    idx = nucleus(scored.probabilities(temperature), p, [a.sort_key for a in acts])
    return [acts[i] for i in idx]


def _breaks_power(combo: Combo, state: DouState) -> bool:
    if combo.category in (Category.BOMB, Category.ROCKET):
        return False
    hand = state.hand
    bomb_ranks = {r for r in NON_JOKERS if hand.count(r) == 4}
    has_rocket = hand.count(JOKERS[0]) and hand.count(JOKERS[1])
    for r in combo.cards:
        if r in bomb_ranks or (has_rocket and r in JOKERS):
            return True
    return False


def rule_policy(state: DouState) -> Combo:
    """Deterministic heuristic.

    Leading: the longest combo, lowest principal rank first, without splitting
    a bomb or the rocket. Following: the cheapest combo of the dominant's
    category, then the smallest bomb, then the rocket, else PASS.
    """
    acts = legal_actions(state)
    plays = [a for a in acts if not a.is_pass]
    if not plays:
        return PASS
    if state.dominant is None:
        safe = [a for a in plays if a.category not in (Category.BOMB, Category.ROCKET) and not _breaks_power(a, state)]
        pool = safe or [a for a in plays if not _breaks_power(a, state)] or plays
        return min(pool, key=lambda a: (-len(a.cards), a.principal, a.sort_key))
    dom = state.dominant[1]
    same = [a for a in plays if a.category == dom.category]
    if same:
        return min(same, key=lambda a: (_breaks_power(a, state), a.principal, a.sort_key))
    for cat in (Category.BOMB, Category.ROCKET):
        power = [a for a in plays if a.category == cat]
        if power:
            return min(power, key=lambda a: a.principal)
    return PASS


def extreme_card_policy(state: DouState, largest: bool = False) -> Combo:
    """Play the smallest (or largest) single card allowed; PASS when nothing beats."""
    plays = [a for a in legal_actions(state) if not a.is_pass]
    if not plays:
        return PASS
    solos = [a for a in plays if a.category == Category.SOLO]
    pool = solos or plays
    key = lambda a: (a.principal, a.sort_key)
    return max(pool, key=key) if largest else min(pool, key=key)


def uniform_scores(state: DouState) -> ScoredActions:
    acts = legal_actions(state)
    w = 1.0 / len(acts)
    return ScoredActions(tuple((a, w) for a in acts), normalized=True)


def _rollout_seeds(seed: int, action_index: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(action_index,))
    return ss.generate_state(n, dtype=np.uint32).astype(np.int64)


def monte_carlo_policy(state: DouState, n_rollouts: int, seed: int) -> ScoredActions:
    """Win fraction of each legal action under determinized random playouts.

    ``n_rollouts`` is the budget for the whole decision; it is split evenly over
    the legal actions (at least one rollout each, remainder to the first ones
    in canonical order). Rollout ``j`` of action ``i`` uses its own seed derived
    from ``(seed, i, j)`` so results do not depend on evaluation order.
    """
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    acts = legal_actions(state)
    per, extra = divmod(n_rollouts, len(acts))
    mover = state.to_move
    mover_is_landlord = mover == state.landlord
    entries = []
    for i, a in enumerate(acts):
        n = max(1, per + (1 if i < extra else 0))
        nxt = apply_action(state, a)
        won = winner(nxt)
        if won is not None:
            frac = 1.0 if won == state.side_of(mover) else 0.0
        else:
            frac = count_wins(nxt, mover, mover_is_landlord, _rollout_seeds(seed, i, n)) / n
        entries.append((a, frac))
    return ScoredActions(tuple(entries), normalized=False)


class AgentKind(Enum):
    RULE = "rule"
    RANDOM = "random"
    MONTE_CARLO = "monte_carlo"
    ORACLE = "oracle"
    SMALLEST_CARD = "smallest_card"
    LARGEST_CARD = "largest_card"


@dataclass(frozen=True)
class AgentProfile:
    kind: AgentKind
    strength_params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind == AgentKind.MONTE_CARLO and int(self.strength_params.get("n_rollouts", 1)) < 1:
            raise ValueError("rollout count must be >= 1")
        if self.kind == AgentKind.ORACLE and "endpoint" not in self.strength_params:
            raise ValueError("ORACLE profiles need an endpoint")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_rollouts(self) -> int:
        return int(self.strength_params.get("n_rollouts", 200))

    def to_dict(self) -> dict:
        params = {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in self.strength_params.items()}
        return {"kind": self.kind.value, "strength_params": params, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AgentProfile":
        params = dict(d.get("strength_params", {}))
        if "endpoint" in params and isinstance(params["endpoint"], Mapping):
            from ..bridge.transport import EngineEndpoint
            params["endpoint"] = EngineEndpoint.from_dict(params["endpoint"])
        return cls(AgentKind(d["kind"]), params, int(d.get("seed", 0)))

    def label(self) -> str:
        if self.kind == AgentKind.MONTE_CARLO:
            return f"monte_carlo({self.n_rollouts})"
        return self.kind.value


class Agent:
    """A stateful player built from a profile.

    ``stream`` distinguishes independent uses of the same profile (for example
    game index and seat in a match) so their random streams never overlap.
    """

    def __init__(self, profile: AgentProfile, stream: Sequence[int] = ()):
        self.profile = profile
        self.rng = np.random.default_rng(np.random.SeedSequence(entropy=profile.seed, spawn_key=tuple(stream)))
        self._policy_client = None

    def _decision_seed(self) -> int:
        return int(self.rng.integers(0, 2**63 - 1))

    def _oracle(self):
        if self._policy_client is None:
            from ..bridge.policy import PolicyClient
            self._policy_client = PolicyClient(self.profile.strength_params["endpoint"])
        return self._policy_client

    def scores(self, state: DouState) -> ScoredActions:
        kind = self.profile.kind
        if kind == AgentKind.RULE:
            return ScoredActions(((rule_policy(state), 1.0),), normalized=True)
        if kind == AgentKind.SMALLEST_CARD:
            return ScoredActions(((extreme_card_policy(state, largest=False), 1.0),), normalized=True)
        if kind == AgentKind.LARGEST_CARD:
            return ScoredActions(((extreme_card_policy(state, largest=True), 1.0),), normalized=True)
        if kind == AgentKind.RANDOM:
            return uniform_scores(state)
        if kind == AgentKind.MONTE_CARLO:
            return monte_carlo_policy(state, self.profile.n_rollouts, self._decision_seed())
        return self._oracle().query(state)

    def decide(self, state: DouState) -> tuple[ScoredActions, Combo]:
        """Scores used for candidate filtering and the action this agent takes."""
        kind = self.profile.kind
        if kind == AgentKind.RANDOM:
            scored = uniform_scores(state)
            acts = scored.actions
            return scored, acts[int(self.rng.integers(len(acts)))]
        if kind == AgentKind.MONTE_CARLO:
            acts = legal_actions(state)
            if len(acts) == 1:
                return ScoredActions(((acts[0], 1.0),), normalized=True), acts[0]
        scored = self.scores(state)
        return scored, scored.argmax()

    def act(self, state: DouState) -> Combo:
        return self.decide(state)[1]

    def close(self) -> None:
        if self._policy_client is not None:
            self._policy_client.close()
            self._policy_client = None


def predict_opponent_responses(
    state: DouState,
    action: Combo,
    opponent_profiles: Mapping[int, AgentProfile] | Sequence[AgentProfile],
    agents: Optional[Mapping[int, Agent]] = None,
) -> list[tuple[int, ScoredActions]]:
    """Score the replies of the next (up to two) seats after ``action``.

    Each later seat sees the state reached by the earlier seats' argmax replies.
    ``opponent_profiles`` is either a seat mapping or a sequence aligned with
    the seats that follow the mover.
    """
    cur = apply_action(state, action)
    seats = []
    seat = state.to_move
    for _ in range(min(2, state.n_seats - 1)):
        seat = state.next_seat(seat)
        seats.append(seat)
    if not isinstance(opponent_profiles, Mapping):
        opponent_profiles = dict(zip(seats, opponent_profiles))
    out = []
    for seat in seats:
        if winner(cur) is not None:
            break
        agent = (agents or {}).get(seat) or Agent(opponent_profiles[seat], stream=(len(cur.history), seat))
        scored = agent.scores(cur)
        out.append((seat, scored))
        cur = apply_action(cur, scored.argmax())
    return out


PolicyFn = Callable[[DouState], Combo]
