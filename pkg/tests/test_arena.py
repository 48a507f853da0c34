import json

import pytest

from conftest import MOCK
from gamesynth.arena import (DealMode, MatchConfig, MatchConfigError, NotFound, decode_action, dump_replay,
                             encode_action, game_deal, load_deals, load_replay, play_match)
from gamesynth.dou.agents import AgentKind, AgentProfile
from gamesynth.dou.cards import encode_cards, parse_cards
from gamesynth.dou.combos import Category
from gamesynth.dou.state import legal_actions, new_game

RULE = AgentProfile(AgentKind.RULE)
RANDOM = AgentProfile(AgentKind.RANDOM)


def quick_config(tmp_path, **kw):
    return MatchConfig(kw.pop("landlord", RULE), kw.pop("farmers", (RANDOM, RANDOM)),
                       n_games=kw.pop("n_games", 6), base_seed=kw.pop("base_seed", 3),
                       replay_dir=str(tmp_path / "replays"), **kw)


def test_match_is_reproducible(tmp_path):
    a = play_match(quick_config(tmp_path))
    b = play_match(quick_config(tmp_path))
    assert a.to_json() == b.to_json()
    c = play_match(quick_config(tmp_path, base_seed=4))
    assert c.to_json() != a.to_json()
    d = json.loads(a.to_json())
    assert d["version"] == "match-report/1" and d["n_games"] == 6
    assert d["landlord_win_rate"] == d["landlord_wins"] / 6


def test_replay_round_trip(tmp_path):
    report = play_match(quick_config(tmp_path, n_games=2))
    g = report.games[1]
    rep = load_replay(tmp_path / "replays" / g.replay)
    assert len(rep.moves) == g.turns and rep.result == g.winner
    assert rep.start == game_deal(report.config, 1, None)
    text = dump_replay(tmp_path / "replays" / g.replay)
    lines = text.splitlines()
    assert lines[0].startswith("game 1: landlord [")
    assert lines[1].startswith("  1. landlord: ")
    assert lines[-1] == f"result: {g.winner} win"
    assert len(lines) == g.turns + 2


@pytest.mark.parametrize("damage", ["sizes", "seat", "action", "result", "truncate"])
def test_corrupt_replay_is_not_found(tmp_path, damage):
    report = play_match(quick_config(tmp_path, n_games=1))
    path = tmp_path / "replays" / report.games[0].replay
    rows = [json.loads(x) for x in path.read_text().splitlines()]
    if damage == "sizes":
        rows[1]["hand_sizes"][0] += 1
    elif damage == "seat":
        rows[1]["seat"] = (rows[1]["seat"] + 1) % 3
    elif damage == "action":
        rows[1]["action"] = "ROCKET 20 30" if "ROCKET" not in rows[1]["action"] else "SOLO 3"
    elif damage == "result":
        rows[-1]["result"] = "farmers" if rows[-1]["result"] == "landlord" else "landlord"
    else:
        rows = rows[:1]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    with pytest.raises(NotFound):
        load_replay(path)


def test_missing_replay_is_not_found(tmp_path):
    with pytest.raises(NotFound):
        load_replay(tmp_path / "nope.jsonl")


def test_fixed_deals_cycle(tmp_path):
    deals = tmp_path / "deals.jsonl"
    hands = ["3 4 5", "6 7 8", "9 10 11"]
    deals.write_text(json.dumps({"hands": hands, "landlord": 1}) + "\n"
                     + json.dumps({"hands": ["3", "4", "5"], "landlord": 0}) + "\n")
    fixed = load_deals(deals)
    # the landlord is rotated to seat 0
    assert [encode_cards(h) for h in fixed[0].hands] == ["6 7 8", "9 10 11", "3 4 5"]
    cfg = quick_config(tmp_path, n_games=4, deal_mode=DealMode.FIXED_DEALS, deals_file=str(deals))
    report = play_match(cfg)
    starts = [load_replay(tmp_path / "replays" / g.replay).start for g in report.games]
    assert starts[0] == starts[2] and starts[1] == starts[3] and starts[0] != starts[1]


def test_failing_agent_is_flagged_as_a_loss(tmp_path):
    from gamesynth.bridge.transport import EngineEndpoint
    bad = AgentProfile(AgentKind.ORACLE, {"endpoint": EngineEndpoint.subprocess(MOCK + ["policy", "--fault", "illegal"])})
    report = play_match(quick_config(tmp_path, landlord=bad, n_games=2))
    assert report.flagged == [0, 1]
    assert all(g.winner == "farmers" and "UnknownActionInResponse" in g.flagged for g in report.games)
    assert "(flagged: seat 0" in dump_replay(tmp_path / "replays" / report.games[0].replay)


def test_oracle_agent_plays_through_the_bridge(tmp_path):
    from gamesynth.bridge.transport import EngineEndpoint
    oracle = AgentProfile(AgentKind.ORACLE, {"endpoint": EngineEndpoint.subprocess(MOCK + ["policy"])})
    report = play_match(quick_config(tmp_path, landlord=oracle, n_games=1))
    assert report.flagged == [] and report.games[0].turns > 0


def test_ambiguous_wing_sets_round_trip():
    hand = parse_cards("3 3 3 4 4 4 5 5 5 6 6 6")
    state = new_game([hand, parse_cards("7")], 0)
    wings = [a for a in legal_actions(state) if a.category == Category.AIRPLANE_SOLO_WINGS and len(a.cards) == 12]
    assert sorted(a.principal for a in wings) == [3, 4]
    texts = {encode_action(a) for a in wings}
    assert texts == {"AIRPLANE_SOLO_WINGS 3 3 3 4 4 4 5 5 5 6 6 6 @3", "AIRPLANE_SOLO_WINGS 3 3 3 4 4 4 5 5 5 6 6 6 @4"}
    for a in wings:
        assert decode_action(encode_action(a), state) == a
    assert encode_action(legal_actions(state)[0]) == "SOLO 3"


def test_config_validation(tmp_path):
    with pytest.raises(MatchConfigError):
        MatchConfig(RULE, (RANDOM,))
    with pytest.raises(MatchConfigError):
        MatchConfig(RULE, (RANDOM, RANDOM), n_games=0)
    with pytest.raises(MatchConfigError):
        MatchConfig(RULE, (RANDOM, RANDOM), deal_mode=DealMode.FIXED_DEALS)
    with pytest.raises(MatchConfigError):
        MatchConfig.from_dict({"landlord": {"kind": "rule"}, "farmers": [{"kind": "random"}] * 2, "games": 3})
    with pytest.raises(MatchConfigError):
        MatchConfig.from_dict({"landlord": {"kind": "chess"}, "farmers": [{"kind": "random"}] * 2})
    cfg = quick_config(tmp_path)
    assert MatchConfig.from_dict(cfg.to_dict()) == cfg
