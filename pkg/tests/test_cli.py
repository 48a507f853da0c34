import json

import pytest
import yaml

from conftest import MOCK
from gamesynth.cli import main


def test_help_and_usage_errors(capsys):
    assert main(["--help"]) == 0
    assert main([]) == 1
    assert main(["gen", "--seed", "notanumber"]) == 1
    assert main(["arena"]) == 1
    assert main(["eval"]) == 1
    assert "error:" in capsys.readouterr().err


def test_bad_config_is_usage_error(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("seed: [1, 2\n")
    assert main(["gen", "--config", str(bad)]) == 1
    assert main(["gen", "--config", str(tmp_path / "missing.yaml")]) == 1
    unknown = tmp_path / "unknown.yaml"
    unknown.write_text("seeed: 3\n")
    assert main(["gen", "--config", str(unknown)]) == 1


def test_runtime_failure_exit_code(tmp_path, capsys):
    assert main(["replay", str(tmp_path / "missing.jsonl")]) == 2
    assert "NotFound" in capsys.readouterr().err
    assert main(["probe-engine", "--cmd", "/nonexistent/engine"]) == 2


def test_arena_replay_and_inspect(tmp_path, capsys):
    cfg = tmp_path / "match.yaml"
    cfg.write_text(yaml.safe_dump({"landlord": {"kind": "rule"}, "farmers": [{"kind": "random"}] * 2,
                                   "n_games": 2}))
    out = tmp_path / "report.json"
    assert main(["arena", "--config", str(cfg), "--replay-dir", str(tmp_path / "r"), "--output", str(out),
                 "--seed", "9"]) == 0
    report = json.loads(out.read_text())
    assert report["config"]["base_seed"] == 9 and report["n_games"] == 2
    assert main(["replay", str(tmp_path / "r" / "game-00000.jsonl")]) == 0
    assert main(["inspect", "deal:4"]) == 0
    assert "I am the landlord." in capsys.readouterr().out


def test_gen_eval_inspect(tmp_path, capsys):
    cfg = tmp_path / "gen.yaml"
    cfg.write_text(yaml.safe_dump({"output_dir": str(tmp_path / "data"),
                                   "mix": {"GO_NEXT_STATE": 1.0, "DOU_NO_PROB": 1.0},
                                   "dou": {"trajectories": 1, "seats": [{"kind": "rule"}] * 3},
                                   "go": {"next_state_samples": 10, "board_size": 9}}))
    assert main(["gen", "--config", str(cfg)]) == 0
    assert "GO_NEXT_STATE" in capsys.readouterr().out
    assert main(["inspect", str(tmp_path / "data"), "--verify", "-n", "1"]) == 0
    shard = tmp_path / "data" / "go_next_state-00000.jsonl"
    preds = tmp_path / "preds.jsonl"
    rows = [json.loads(x) for x in shard.read_text().splitlines()]
    preds.write_text("".join(json.dumps({**r, "prediction": r["answer"]}) + "\n" for r in rows))
    capsys.readouterr()
    assert main(["eval", "--predictions", str(preds), "--output", str(tmp_path / "rep.json")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["GO_NEXT_STATE/format_ok"] == 1.0


def test_probe_engine(capsys):
    cmd = " ".join(MOCK + ["gtp"])
    assert main(["probe-engine", "--cmd", cmd]) == 0
    assert "MockGo" in capsys.readouterr().out
    assert main(["probe-engine", "--protocol", "policy", "--cmd", " ".join(MOCK + ["policy"])]) == 0
    assert main(["probe-engine", "--tcp", "nohostport"]) == 1


def test_inspect_sgf(tmp_path, capsys):
    sgf = tmp_path / "g.sgf"
    sgf.write_bytes(b"(;SZ[5];B[cc]C[first])")
    assert main(["inspect", str(sgf)]) == 0
    out = capsys.readouterr().out
    assert "#" in out and "first" in out
