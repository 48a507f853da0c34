import json

import numpy as np
import pytest

from gamesynth.datagen.pipeline import (ConfigError, GenConfig, ManifestMismatch, generate_dataset, iter_samples,
                                        load_manifest, regenerate_sample, trajectory_seed)
from gamesynth.datagen.templates import (InconsistentEval, Task, TemplateInvariantViolation, build_dou_pred_sample,
                                         build_dou_sample, build_go_analysis_sample, build_go_expl_sample,
                                         build_go_next_state_sample, dou_context, render_responses)
from gamesynth.dou.cards import parse_cards
from gamesynth.dou.combos import PASS, Category, make_combo
from gamesynth.dou.state import new_game
from gamesynth.go.board import Color, GoMove, apply_move, empty_state, play
from gamesynth.go.codec import parse_board, serialize_board
from gamesynth.go.evaluate import OwnershipMap, PositionEval

CHEAP_SEATS = [{"kind": "rule"}, {"kind": "random"}, {"kind": "rule"}]


def tiny_state():
    return new_game([parse_cards("3 4"), parse_cards("5"), parse_cards("6")], 0)


def solo(r):
    return make_combo(Category.SOLO, [r])


# -- templates ----------------------------------------------------------------------

def test_dou_context_text():
    assert dou_context(tiny_state()) == (
        "I am the landlord. My handcards are [3 4], while the opponents' handcards are [5 6]. "
        "The next player has 1 cards left and the player after has 1 cards left. Played so far: none.")


def test_dou_sample_text():
    s = tiny_state()
    preds = {solo(3): [solo(5), PASS], solo(4): [solo(5), solo(6)]}
    sample = build_dou_sample(s, [solo(3), solo(4)], preds, solo(4))
    assert sample.question.endswith("My possible actions are [3], [4].")
    assert sample.answer.splitlines() == [
        "If I play [3], the next two players will play [5], pass.",
        "If I play [4], the next two players will play [5], [6].",
        "Therefore, I will play [4].",
    ]
    plain = build_dou_sample(s, [solo(3), solo(4)], preds, solo(4), with_prob=False)
    assert plain.task == Task.DOU_NO_PROB and plain.answer == "Therefore, I will play [4]."
    assert render_responses(solo(3), []) == "If I play [3], I will have no cards left."


def test_dou_template_invariants():
    s = tiny_state()
    with pytest.raises(TemplateInvariantViolation):
        build_dou_sample(s, [solo(3)], {solo(3): []}, solo(4))
    with pytest.raises(TemplateInvariantViolation):
        build_dou_sample(s, [solo(5)], {solo(5): []}, solo(5))
    with pytest.raises(TemplateInvariantViolation):
        build_dou_sample(s, [solo(3)], {}, solo(3))
    with pytest.raises(TemplateInvariantViolation):
        build_dou_pred_sample(s, solo(3), [])
    assert build_dou_pred_sample(s, solo(3), solo(5)).answer == "The next player will play [5]."


def test_go_next_state_answer_is_engine_result():
    s = play(play(empty_state(5), "C3"), "D3")
    move = GoMove(Color.BLACK, (2, 2))
    sample = build_go_next_state_sample(s, move, annotate_last_k=2)
    assert "The next move is on B2 by black." in sample.question
    assert sample.answer == serialize_board(apply_move(s, move), 2)
    assert sample.meta["variant"] == "next_state"


def test_go_analysis_rejects_inconsistent_lead():
    own = OwnershipMap(np.ones((5, 5)))
    good = PositionEval(own, 25 - 7.5, 0.9)
    sample = build_go_analysis_sample(empty_state(5), good)
    assert "Count: black 25, white 0\nLead (black): +17.5\nWin rate (black): 0.9000" in sample.answer
    with pytest.raises(InconsistentEval):
        build_go_analysis_sample(empty_state(5), PositionEval(own, 3.0, 0.9))
    with pytest.raises(InconsistentEval):
        build_go_analysis_sample(empty_state(9), good)
    with pytest.raises(TemplateInvariantViolation):
        build_go_expl_sample(empty_state(5), "   ")


# -- pipeline -------------------------------------------------------------------------

BOOK = b"(;GM[1]SZ[9]KM[7.5];B[ee]C[Black takes the centre.];W[cc];B[gg]C[A second stone.])"


def small_config(out, **over):
    d = {"seed": 5, "output_dir": str(out), "shard_size": 40,
         "dou": {"trajectories": 2, "seats": CHEAP_SEATS},
         "go": {"next_state_samples": 60, "analysis_samples": 6, "board_size": 9, "max_moves": 50,
                "analysis_rollouts": 16, "analysis_stride": 10},
         "books": {"sgf_paths": [str(out.parent / "book.sgf")]}}
    d.update(over)
    return GenConfig.from_dict(d)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("gen")
    (root / "book.sgf").write_bytes(BOOK)
    out = root / "data"
    manifest = generate_dataset(small_config(out))
    return out, manifest


def test_manifest_matches_files(dataset):
    out, manifest = dataset
    again = load_manifest(out, verify=True)
    assert again.to_dict() == manifest.to_dict()
    counts = {}
    for s in iter_samples(out):
        counts[s.task.value] = counts.get(s.task.value, 0) + 1
    assert counts == {k: v.samples for k, v in manifest.tasks.items()}
    assert manifest.tasks["GO_NEXT_STATE"].samples == 60 and manifest.tasks["GO_ANALYSIS"].samples == 6
    assert manifest.tasks["GO_STATE_EXPL"].samples == 2 and manifest.tasks["GO_STATE_EXPL"].skipped_empty == 1
    assert manifest.tasks["DOU_PROB"].trajectories == 2
    row = {r["task"]: r for r in manifest.table()}["GO_ANALYSIS"]
    assert set(row) == {"task", "trajectories", "samples", "tokens", "metrics"}
    assert row["metrics"] == "score_mae, winrate_mae"


def test_generation_is_deterministic(dataset, tmp_path):
    out, manifest = dataset
    (tmp_path / "book.sgf").write_bytes(BOOK)
    other = generate_dataset(small_config(tmp_path / "data"))
    shards = lambda m: {k: [s["sha256"] for s in v.shards] for k, v in m.tasks.items()}
    assert shards(other) == shards(manifest)


def test_tampered_shard_is_detected(dataset, tmp_path):
    out, manifest = dataset
    copy = tmp_path / "copy"
    copy.mkdir()
    for f in out.iterdir():
        (copy / f.name).write_bytes(f.read_bytes())
    shard = copy / manifest.tasks["GO_ANALYSIS"].shards[0]["file"]
    shard.write_text(shard.read_text().replace("Count", "Tally", 1))
    with pytest.raises(ManifestMismatch):
        load_manifest(copy)


@pytest.mark.parametrize("task", list(Task))
def test_samples_regenerate_from_meta(dataset, task):
    out, _ = dataset
    samples = list(iter_samples(out, task))
    for s in (samples[0], samples[-1]):
        book = out.parent / "book.sgf" if task == Task.GO_STATE_EXPL else None
        again = regenerate_sample(json.loads(json.dumps(s.meta)), book)
        assert (again.task, again.question, again.answer) == (s.task, s.question, s.answer)


def test_go_questions_replay_to_answers(dataset):
    out, _ = dataset
    for s in iter_samples(out, Task.GO_NEXT_STATE):
        if s.meta["key"].startswith("GO_ACTION"):
            assert s.answer.startswith("The move is ")
            continue
        lines = s.question.split("\n")
        board = parse_board("\n".join(lines[1:-1]))
        where, color = lines[-1].split("The next move is on ")[1].split(" by ")
        to_move = Color.BLACK if color.startswith("black") else Color.WHITE
        from gamesynth.go.board import parse_point
        after = apply_move(parse_board("\n".join(lines[1:-1]), to_move=to_move),
                           GoMove(to_move, parse_point(where, board.size)))
        assert np.array_equal(after.grid, parse_board(s.answer).grid)


def test_mixture_weights(tmp_path):
    (tmp_path / "book.sgf").write_bytes(BOOK)
    cfg = small_config(tmp_path / "data", write_mixture=True,
                       mix={"GO_NEXT_STATE": 1.0, "GO_ANALYSIS": 0.5})
    m = generate_dataset(cfg)
    assert set(m.tasks) == {"GO_NEXT_STATE", "GO_ANALYSIS"}
    assert m.mixture["samples"] == 60 + 3


def test_config_validation():
    with pytest.raises(ConfigError):
        GenConfig.from_dict({"sed": 1})
    with pytest.raises(ConfigError):
        GenConfig.from_dict({"go": {"boardsize": 9}})
    with pytest.raises(ConfigError):
        GenConfig.from_dict({"go": {"evaluator": "engine"}})
    with pytest.raises(ValueError):
        GenConfig.from_dict({"mix": {"CHESS": 1.0}})
    assert trajectory_seed(0, 0, 1) != trajectory_seed(0, 1, 0)
