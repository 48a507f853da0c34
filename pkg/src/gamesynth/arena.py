"""Landlord-vs-farmers match play with JSONL replays.

Seat 0 is always the landlord. Game ``i`` is dealt from
``SeedSequence(base_seed, spawn_key=(0, i))`` and every agent draws from its
own stream keyed by ``(base_seed, i, seat)``, so deals never depend on which
profiles sit at the table.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .bridge.transport import BridgeError
from .dou.agents import Agent, AgentFailure, AgentProfile
from .dou.cards import CardError, encode_cards, parse_cards
from .dou.combos import Category, Combo, action_lookup
from .dou.state import DouError, DouState, Side, apply_action, deal, legal_actions, new_game, winner

REPORT_VERSION = "match-report/1"
LANDLORD_SEAT = 0
SEAT_NAMES = ("landlord", "farmer-down", "farmer-up")


class DealMode(Enum):
    RANDOM = "random"
    FIXED_DEALS = "fixed_deals"


class MatchConfigError(ValueError):
    pass


class NotFound(LookupError):
    """The replay is missing, unreadable or does not re-validate."""


@dataclass(frozen=True)
class MatchConfig:
    landlord: AgentProfile
    farmers: tuple[AgentProfile, AgentProfile]
    n_games: int = 100
    base_seed: int = 0
    deal_mode: DealMode = DealMode.RANDOM
    deals_file: Optional[str] = None
    replay_dir: Optional[str] = None

    def __post_init__(self):
        if self.n_games < 1:
            raise MatchConfigError("n_games must be >= 1")
        if len(self.farmers) != 2:
            raise MatchConfigError("exactly two farmer profiles are needed")
        if self.base_seed < 0:
            raise MatchConfigError("base_seed must be non-negative")
        if self.deal_mode == DealMode.FIXED_DEALS and not self.deals_file:
            raise MatchConfigError("FIXED_DEALS needs a deals_file")

    @property
    def profiles(self) -> tuple[AgentProfile, AgentProfile, AgentProfile]:
        return (self.landlord, *self.farmers)

    def to_dict(self) -> dict:
        return {"landlord": self.landlord.to_dict(), "farmers": [f.to_dict() for f in self.farmers],
                "n_games": self.n_games, "base_seed": self.base_seed, "deal_mode": self.deal_mode.value,
                "deals_file": self.deals_file, "replay_dir": self.replay_dir}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MatchConfig":
        known = {"landlord", "farmers", "n_games", "base_seed", "deal_mode", "deals_file", "replay_dir"}
        unknown = set(d) - known
        if unknown:
            raise MatchConfigError(f"unknown match config keys: {sorted(unknown)}")
        try:
            return cls(landlord=AgentProfile.from_dict(d["landlord"]),
                       farmers=tuple(AgentProfile.from_dict(f) for f in d["farmers"]),
                       n_games=int(d.get("n_games", 100)), base_seed=int(d.get("base_seed", 0)),
                       deal_mode=DealMode(d.get("deal_mode", "random")), deals_file=d.get("deals_file"),
                       replay_dir=d.get("replay_dir"))
        except (KeyError, ValueError, TypeError) as exc:
            if isinstance(exc, MatchConfigError):
                raise
            raise MatchConfigError(f"bad match config: {exc}") from exc


@dataclass(frozen=True)
class GameResult:
    game: int
    winner: str  # "landlord" or "farmers"
    turns: int
    flagged: Optional[str] = None  # why the game ended early, if it did
    replay: Optional[str] = None

    def to_dict(self) -> dict:
        return {"game": self.game, "winner": self.winner, "turns": self.turns, "flagged": self.flagged,
                "replay": self.replay}


@dataclass
class MatchReport:
    config: MatchConfig
    games: list[GameResult] = field(default_factory=list)

    @property
    def n_games(self) -> int:
        return len(self.games)

    @property
    def landlord_wins(self) -> int:
        return sum(g.winner == Side.LANDLORD.name.lower() for g in self.games)

    @property
    def landlord_win_rate(self) -> float:
        return self.landlord_wins / self.n_games

    @property
    def flagged(self) -> list[int]:
        return [g.game for g in self.games if g.flagged]

    def to_dict(self) -> dict:
        clean = [g for g in self.games if not g.flagged]
        return {
            "version": REPORT_VERSION,
            "config": self.config.to_dict(),
            "n_games": self.n_games,
            "landlord_wins": self.landlord_wins,
            "landlord_win_rate": self.landlord_win_rate,
            "flagged_games": self.flagged,
            # secondary view with failure-decided games left out
            "unflagged_win_rate": (sum(g.winner == "landlord" for g in clean) / len(clean)) if clean else None,
            "games": [g.to_dict() for g in self.games],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


# -- deals ----------------------------------------------------------------------

def load_deals(path: str | Path) -> list[DouState]:
    """One JSON object per line: ``{"hands": ["3 3 4 ...", ...], "landlord": 0}``.

    The landlord's hand is moved to seat 0 so the seating matches the match.
    """
    out = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise MatchConfigError(f"cannot read deals file {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            hands = [parse_cards(h) for h in d["hands"]]
            lord = int(d.get("landlord", 0))
            if len(hands) != 3:
                raise MatchConfigError("a deal needs three hands")
            hands = hands[lord:] + hands[:lord]
            out.append(new_game(hands, LANDLORD_SEAT))
        except (ValueError, KeyError, TypeError, CardError, DouError) as exc:
            raise MatchConfigError(f"{path}:{n}: bad deal ({exc})") from exc
    if not out:
        raise MatchConfigError(f"{path} holds no deals")
    return out


def game_deal(config: MatchConfig, game: int, fixed: Optional[Sequence[DouState]] = None) -> DouState:
    if config.deal_mode == DealMode.FIXED_DEALS:
        fixed = fixed if fixed is not None else load_deals(config.deals_file)
        return fixed[game % len(fixed)]
    rng = np.random.default_rng(np.random.SeedSequence(entropy=config.base_seed, spawn_key=(0, game)))
    return deal(rng, LANDLORD_SEAT)


# -- replay encoding ------------------------------------------------------------

def encode_action(combo: Combo) -> str:
    """``"PAIR 3 3"`` or ``"PASS"``.

    A wing set that reads two ways gets its lowest body rank appended,
    e.g. ``"AIRPLANE_SOLO_WINGS 3 3 3 4 4 4 5 5 5 6 6 6 @4"``.
    """
    if len(action_lookup().get((int(combo.category), combo.cards), ())) > 1:
        return f"{combo} @{combo.principal}"
    return str(combo)


def decode_action(text: str, state: DouState) -> Combo:
    body, _, principal = text.strip().partition(" @")
    name, _, cards = body.partition(" ")
    for a in legal_actions(state):
        if a.category.name == name and encode_cards(a.cards) == cards.strip() \
                and (not principal or str(a.principal) == principal):
            return a
    raise NotFound(f"action {text!r} is not legal at this point")


def _hand_sizes(state: DouState) -> list[int]:
    return [len(h) for h in state.hands]


def _side(side: Side) -> str:
    return side.name.lower()


# -- play -----------------------------------------------------------------------

def play_game(config: MatchConfig, game: int, start: DouState) -> tuple[GameResult, list[dict]]:
    agents = [Agent(p, stream=(config.base_seed, game, seat)) for seat, p in enumerate(config.profiles)]
    events: list[dict] = [{"game": game, "deal": {"hands": [encode_cards(h) for h in start.hands],
                                                  "landlord": start.landlord}}]
    state = start
    flagged = None
    won: Optional[Side] = None
    try:
        while (won := winner(state)) is None:
            seat = state.to_move
            try:
                action = agents[seat].act(state)
                nxt = apply_action(state, action)
            except (AgentFailure, BridgeError, DouError) as exc:
                flagged = f"seat {seat}: {type(exc).__name__}: {exc}"
                won = Side.FARMERS if seat == LANDLORD_SEAT else Side.LANDLORD
                break
            state = nxt
            events.append({"game": game, "turn": len(state.history), "seat": seat,
                           "action": encode_action(action), "hand_sizes": _hand_sizes(state)})
    finally:
        for a in agents:
            a.close()
    events.append({"game": game, "result": _side(won), "turns": len(state.history), "flagged": flagged})
    return GameResult(game, _side(won), len(state.history), flagged), events


def replay_path(replay_dir: str | Path, game: int) -> Path:
    return Path(replay_dir) / f"game-{game:05d}.jsonl"


def play_match(config: MatchConfig) -> MatchReport:
    fixed = load_deals(config.deals_file) if config.deal_mode == DealMode.FIXED_DEALS else None
    if config.replay_dir:
        Path(config.replay_dir).mkdir(parents=True, exist_ok=True)
    report = MatchReport(config)
    for i in range(config.n_games):
        result, events = play_game(config, i, game_deal(config, i, fixed))
        if config.replay_dir:
            path = replay_path(config.replay_dir, i)
            path.write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in events), encoding="utf-8")
            result = GameResult(result.game, result.winner, result.turns, result.flagged, path.name)
        report.games.append(result)
    return report


# -- replays --------------------------------------------------------------------

@dataclass
class Replay:
    game: int
    start: DouState
    moves: list[tuple[int, Combo]]
    result: str
    flagged: Optional[str]


def load_replay(ref: str | Path) -> Replay:
    """Read a replay and re-check every move against the rules engine."""
    path = Path(ref)
    try:
        records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise NotFound(f"replay {ref}: {exc}") from exc
    try:
        head, events, tail = records[0], records[1:-1], records[-1]
        hands = [parse_cards(h) for h in head["deal"]["hands"]]
        start = new_game(hands, int(head["deal"]["landlord"]))
        state = start
        moves = []
        for ev in events:
            if ev["seat"] != state.to_move:
                raise NotFound(f"turn {ev['turn']}: seat {ev['seat']} moved out of turn")
            action = decode_action(ev["action"], state)
            state = apply_action(state, action)
            if _hand_sizes(state) != list(ev["hand_sizes"]):
                raise NotFound(f"turn {ev['turn']}: hand sizes disagree with the moves")
            moves.append((ev["seat"], action))
        result, flagged = tail["result"], tail.get("flagged")
        won = winner(state)
        if flagged is None and (won is None or _side(won) != result):
            raise NotFound("recorded result does not follow from the moves")
    except NotFound:
        raise
    except (IndexError, KeyError, TypeError, ValueError, CardError, DouError) as exc:
        raise NotFound(f"replay {ref} is corrupt: {exc}") from exc
    return Replay(int(head["game"]), start, moves, result, flagged)


def dump_replay(ref: str | Path) -> str:
    """Turn-by-turn transcript followed by one result line."""
    rep = load_replay(ref)
    names = {(rep.start.landlord + k) % 3: SEAT_NAMES[k] for k in range(3)}
    lines = [f"game {rep.game}: " + ", ".join(f"{names[s]} [{encode_cards(h)}]"
                                              for s, h in enumerate(rep.start.hands))]
    for turn, (seat, action) in enumerate(rep.moves, 1):
        shown = "PASS" if action.category == Category.PASS else f"{action.category.name.lower()} [{action.encode()}]"
        lines.append(f"{turn:3d}. {names[seat]}: {shown}")
    result = f"result: {rep.result} win"
    if rep.flagged:
        result += f" (flagged: {rep.flagged})"
    lines.append(result)
    return "\n".join(lines)

