"""Trajectory orchestration, sharded JSONL output and the dataset manifest.

Every trajectory owns a seed derived from ``(config.seed, domain, index)``.
Samples carry that seed plus the generation parameters in ``meta`` so any
single sample can be rebuilt with ``regenerate_sample(meta)``.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping, Optional

import numpy as np

from ..dou.agents import Agent, AgentFailure, AgentKind, AgentProfile, predict_opponent_responses, top_p_filter
from ..dou.state import DouError, apply_action, deal, winner
from ..go.board import Color, GoError, GoMove, apply_move, empty_state, parse_point
from ..go.evaluate import DEFAULT_THETA, evaluate_position
from ..go.policy import Tier, choose_move, heuristic_logits
from ..go.sgf import SgfError, read_sgf
from ..topp import DOU_TOP_P, GO_TOP_P
from .templates import (TEMPLATE_VERSION, VERSIONS, Sample, Task, build_dou_pred_sample, build_dou_sample,
                        build_go_action_sample, build_go_analysis_sample, build_go_expl_sample,
                        build_go_next_state_sample, recount_eval, with_meta)

log = logging.getLogger(__name__)

MANIFEST_VERSION = "dataset-manifest/1"
DOU, GO, BOOKS = 0, 1, 2

TASK_METRICS = {
    Task.DOU_PROB: ["action_accuracy", "rl_sum"],
    Task.DOU_NO_PROB: ["action_accuracy"],
    Task.DOU_PRED_PROB: ["pred_accuracy"],
    Task.GO_NEXT_STATE: ["s_prime_accuracy"],
    Task.GO_ANALYSIS: ["score_mae", "winrate_mae"],
    Task.GO_STATE_EXPL: ["rl_sum"],
}

TOKEN_RULES: dict[str, Callable[[str], int]] = {"whitespace": lambda text: len(text.split())}


def register_token_rule(name: str, fn: Callable[[str], int]) -> None:
    TOKEN_RULES[name] = fn


class ConfigError(ValueError):
    pass


class ManifestMismatch(ValueError):
    pass


def _default_seats() -> list[dict]:
    return [{"kind": "monte_carlo", "strength_params": {"n_rollouts": 200}},
            {"kind": "rule"},
            {"kind": "monte_carlo", "strength_params": {"n_rollouts": 200}}]


@dataclass
class DouParams:
    trajectories: int = 15
    seats: list = field(default_factory=_default_seats)  # landlord, farmer-down, farmer-up
    top_p: float = DOU_TOP_P
    mc_temperature: float = 0.05  # rollout win fractions live in [0, 1]; oracle logits use 1.0

    def profiles(self, traj_seed: int) -> list[AgentProfile]:
        out = []
        for i, d in enumerate(self.seats):
            d = dict(d)
            d["seed"] = int(np.random.SeedSequence(traj_seed, spawn_key=(i,)).generate_state(2, np.uint64)[0])
            out.append(AgentProfile.from_dict(d))
        return out


@dataclass
class GoParams:
    next_state_samples: int = 2000
    analysis_samples: int = 500
    max_trajectories: int = 1000
    board_size: int = 19
    komi: float = 7.5
    max_moves: int = 200
    tiers: tuple = ("optimal", "suboptimal")  # black, white on even trajectories; swapped on odd
    top_p: float = GO_TOP_P
    annotate_last_k: int = 4
    action_every: int = 4  # every k-th move becomes an (s, s') -> a sample; 0 disables
    analysis_stride: int = 8
    analysis_candidates: int = 2
    analysis_rollouts: int = 100
    theta: float = DEFAULT_THETA
    noise: float = 0.5
    engine: Optional[dict] = None  # EngineEndpoint.to_dict() of a GTP engine
    policy_source: str = "builtin"  # or "engine"
    evaluator: str = "builtin"  # or "engine"
    analysis: dict = field(default_factory=dict)  # AnalysisConfig fields

    def __post_init__(self):
        self.tiers = tuple(self.tiers)
        for name in ("policy_source", "evaluator"):
            if getattr(self, name) not in ("builtin", "engine"):
                raise ConfigError(f"go.{name} must be 'builtin' or 'engine'")
            if getattr(self, name) == "engine" and not self.engine:
                raise ConfigError(f"go.{name}=engine needs go.engine")


@dataclass
class BookParams:
    sgf_paths: list = field(default_factory=list)
    annotate_last_k: int = 0


@dataclass
class GenConfig:
    seed: int = 0
    output_dir: str = "data"
    mix: dict = field(default_factory=lambda: {t.value: 1.0 for t in Task})
    shard_size: int = 10_000
    token_rule: str = "whitespace"
    write_mixture: bool = False
    dou: DouParams = field(default_factory=DouParams)
    go: GoParams = field(default_factory=GoParams)
    books: BookParams = field(default_factory=BookParams)

    def __post_init__(self):
        for k, w in self.mix.items():
            Task(k)
            if w < 0:
                raise ConfigError(f"mix weight for {k} is negative")
        if self.token_rule not in TOKEN_RULES:
            raise ConfigError(f"unknown token rule {self.token_rule!r}")
        if self.shard_size < 1:
            raise ConfigError("shard_size must be >= 1")

    def weight(self, task: Task) -> float:
        return float(self.mix.get(task.value, 0.0))

    def enabled(self, task: Task) -> bool:
        return self.weight(task) > 0

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GenConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, sub in (("dou", DouParams), ("go", GoParams), ("books", BookParams)):
            if key in d and not isinstance(d[key], sub):
                extra = set(d[key]) - {f.name for f in fields(sub)}
                if extra:
                    raise ConfigError(f"unknown {key} keys: {sorted(extra)}")
                d[key] = sub(**d[key])
        if "mix" in d:
            d["mix"] = {str(k): float(v) for k, v in d["mix"].items()}
        return cls(**d)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["go"]["tiers"] = list(self.go.tiers)
        return out


def load_config(path: str | Path) -> GenConfig:
    import yaml
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return GenConfig.from_dict(data)


def trajectory_seed(seed: int, domain: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(domain, index)).generate_state(2, np.uint64)[0] >> 1)


# -- Doudizhu trajectories -------------------------------------------------------

def dou_trajectory(traj_id: int, traj_seed: int, params: DouParams,
                   tasks: frozenset = frozenset({Task.DOU_PROB, Task.DOU_NO_PROB, Task.DOU_PRED_PROB})) -> list[Sample]:
    """Play one three-seat game and emit samples for every decision point."""
    profiles = params.profiles(traj_seed)
    agents = [Agent(p, stream=(0, seat)) for seat, p in enumerate(profiles)]
    state = deal(np.random.default_rng(np.random.SeedSequence(traj_seed, spawn_key=(9,))))
    base = {"trajectory": traj_id, "seed": traj_seed, "template": TEMPLATE_VERSION,
            "params": {"domain": "dou", **asdict(params)}}
    steps = []
    out = []
    try:
        while winner(state) is None:
            step = len(state.history)
            seat = state.to_move
            scored, chosen = agents[seat].decide(state)
            temp = params.mc_temperature if profiles[seat].kind == AgentKind.MONTE_CARLO else 1.0
            cands = top_p_filter(scored, params.top_p, temp)
            if chosen not in cands:
                cands.append(chosen)
            if Task.DOU_PROB in tasks or Task.DOU_NO_PROB in tasks:
                preds = {}
                if Task.DOU_PROB in tasks:
                    opp = {s: profiles[s] for s in range(state.n_seats) if s != seat}
                    for ci, a in enumerate(cands):
                        fresh = {s: Agent(profiles[s], stream=(1, step, ci, s)) for s in opp}
                        preds[a] = [sc.argmax() for _, sc in predict_opponent_responses(state, a, opp, fresh)]
                meta = {**base, "step": step, "seat": seat}
                if Task.DOU_PROB in tasks:
                    out.append(with_meta(build_dou_sample(state, cands, preds, chosen, True),
                                         **meta, key=f"{Task.DOU_PROB.value}:{step}"))
                if Task.DOU_NO_PROB in tasks:
                    out.append(with_meta(build_dou_sample(state, cands, preds, chosen, False),
                                         **meta, key=f"{Task.DOU_NO_PROB.value}:{step}"))
            steps.append((state, chosen))
            state = apply_action(state, chosen)
    finally:
        for a in agents:
            a.close()
    if Task.DOU_PRED_PROB in tasks:
        for t, (st, action) in enumerate(steps):
            observed = [a for _, a in steps[t + 1:t + 3]]
            if not observed:
                continue
            meta = {**base, "step": t, "seat": st.to_move, "key": f"{Task.DOU_PRED_PROB.value}:{t}"}
            out.append(with_meta(build_dou_pred_sample(st, action, observed), **meta))
    return out


# -- Go trajectories -------------------------------------------------------------

class GoEngines:
    """Lazily opened GTP session shared by a generation run."""

    def __init__(self, params: GoParams):
        self.params = params
        self._session = None

    def session(self):
        if self._session is None:
            from ..bridge.gtp import GtpSession
            from ..bridge.transport import EngineEndpoint
            self._session = GtpSession(EngineEndpoint.from_dict(self.params.engine))
        return self._session

    def analysis_config(self):
        from ..bridge.gtp import AnalysisConfig
        return AnalysisConfig(**self.params.analysis)

    def close(self):
        if self._session is not None:
            self._session.close()
            self._session = None


def _tier(params: GoParams, traj_id: int, color: Color) -> Tier:
    black, white = (params.tiers if traj_id % 2 == 0 else params.tiers[::-1])
    return Tier(black if color == Color.BLACK else white)


def _engine_candidates(engines: GoEngines, state) -> list[tuple[Optional[tuple[int, int]], float]]:
    rec = engines.session().analyze(state, engines.analysis_config())
    weights = [c.prior for c in rec.candidates]
    if sum(weights) <= 0:
        weights = [float(c.visits) for c in rec.candidates]
    return [(None if c.move == "pass" else parse_point(c.move, state.size), w)
            for c, w in zip(rec.candidates, weights)]


def go_trajectory(traj_id: int, traj_seed: int, params: GoParams, wants: Callable[[Task], bool],
                  engines: Optional[GoEngines] = None, only_step: Optional[int] = None) -> Iterator[Sample]:
    """Self-play one game, yielding transition samples and, every ``analysis_stride``
    moves, analysis samples for the top candidate moves."""
    move_rng = np.random.default_rng(np.random.SeedSequence(traj_seed, spawn_key=(0,)))
    state = empty_state(params.board_size, komi=params.komi)
    base = {"trajectory": traj_id, "seed": traj_seed, "template": TEMPLATE_VERSION,
            "params": {"domain": "go", **asdict(params), "tiers": list(params.tiers)}}
    k = params.annotate_last_k
    for t in range(params.max_moves):
        if state.is_over():
            break
        color = state.to_move
        tier = _tier(params, traj_id, color)
        if params.policy_source == "engine":
            cands = _engine_candidates(engines, state)
            point = choose_move(cands, tier, move_rng, params.top_p, weights_are_probs=True)
        else:
            cands = heuristic_logits(state, move_rng, params.noise)
            point = choose_move(cands, tier, move_rng, params.top_p)
        move = GoMove(color, point)
        after = apply_move(state, move)
        emit = only_step is None or only_step == t
        if emit and wants(Task.GO_NEXT_STATE):
            meta = {**base, "step": t, "tier": tier.value}
            if params.action_every and t % params.action_every == params.action_every - 1:
                yield with_meta(build_go_action_sample(state, after, k), **meta, key=f"GO_ACTION:{t}")
            elif not move.is_pass:
                yield with_meta(build_go_next_state_sample(state, move, k), **meta, key=f"GO_NEXT_STATE:{t}")
        if emit and t % params.analysis_stride == 0 and wants(Task.GO_ANALYSIS):
            yield from _analysis_samples(t, state, params, traj_seed, base, engines)
        state = after


def _analysis_samples(t, state, params: GoParams, traj_seed: int, base: dict, engines) -> Iterator[Sample]:
    rng = np.random.default_rng(np.random.SeedSequence(traj_seed, spawn_key=(1, t)))
    ranked = sorted(heuristic_logits(state, rng, params.noise), key=lambda c: (-c[1], c[0] or (0, 0)))
    picks = [pt for pt, _ in ranked if pt is not None][: params.analysis_candidates]
    for ci, pt in enumerate(picks):
        s_c = apply_move(state, GoMove(state.to_move, pt))
        seed = int(np.random.SeedSequence(traj_seed, spawn_key=(2, t, ci)).generate_state(1)[0])
        if params.evaluator == "engine":
            rec = engines.session().analyze(s_c, engines.analysis_config())
            raw = rec.to_position_eval(params.komi, params.theta)
            ev = recount_eval(raw)
            extra = {"engine_score_lead": raw.score_lead}
        else:
            ev = evaluate_position(s_c, params.analysis_rollouts, seed, params.komi, params.theta)
            extra = {}
        yield with_meta(build_go_analysis_sample(s_c, ev, params.annotate_last_k),
                        **base, step=t, candidate=ci, eval_seed=seed, source=ev.source.value,
                        key=f"GO_ANALYSIS:{t}:{ci}", **extra)


# -- books ---------------------------------------------------------------------------

def _sgf_files(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        out.extend(sorted(p.rglob("*.sgf")) if p.is_dir() else [p])
    return out


def book_samples(path: Path, traj_id: int, annotate_last_k: int = 0) -> tuple[list[Sample], int]:
    game = read_sgf(path.read_bytes())
    out, empty = [], 0
    for i, step in enumerate(game.steps):
        if not step.comment.strip():
            empty += 1
            continue
        meta = {"trajectory": traj_id, "step": i, "source": path.name, "template": TEMPLATE_VERSION,
                "params": {"domain": "books", "annotate_last_k": annotate_last_k}, "key": f"GO_STATE_EXPL:{i}"}
        out.append(build_go_expl_sample(step.after, step.comment, min(annotate_last_k, len(step.after.history)), meta))
    if empty:
        log.info("%s: skipped %d positions without commentary", path.name, empty)
    return out, empty


# -- regeneration --------------------------------------------------------------------

def regenerate_sample(meta: Mapping[str, Any], book_path: Optional[str | Path] = None) -> Sample:
    """Rebuild a sample from its ``meta`` alone (books need the SGF file)."""
    params = dict(meta["params"])
    domain = params.pop("domain")
    key = meta["key"]
    task = Task(key.split(":")[0]) if not key.startswith("GO_ACTION") else Task.GO_NEXT_STATE
    if domain == "dou":
        samples = dou_trajectory(meta["trajectory"], meta["seed"], DouParams(**params), frozenset({task}))
    elif domain == "go":
        gp = GoParams(**params)
        engines = GoEngines(gp) if gp.engine else None
        try:
            samples = list(go_trajectory(meta["trajectory"], meta["seed"], gp, lambda t: t == task,
                                         engines, only_step=meta["step"]))
        finally:
            if engines:
                engines.close()
    else:
        samples, _ = book_samples(Path(book_path or meta["source"]), meta["trajectory"], params["annotate_last_k"])
    for s in samples:
        if s.meta["key"] == key:
            return s
    raise KeyError(f"no sample {key} in trajectory {meta['trajectory']}")


# -- output ------------------------------------------------------------------------------

@dataclass
class TaskStats:
    trajectories: int = 0
    samples: int = 0
    tokens: int = 0
    metrics: list = field(default_factory=list)
    skipped_trajectories: int = 0
    skipped_empty: int = 0
    shards: list = field(default_factory=list)  # [{"file", "lines", "sha256"}]


@dataclass
class Manifest:
    tasks: dict  # task value -> TaskStats
    config: dict
    token_rule: str
    versions: dict = field(default_factory=lambda: dict(VERSIONS))
    mixture: Optional[dict] = None
    version: str = MANIFEST_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    def table(self) -> list[dict]:
        """One row per task: trajectories, samples, tokens and the metrics it is scored with."""
        return [{"task": k, "trajectories": v.trajectories, "samples": v.samples, "tokens": v.tokens,
                 "metrics": ", ".join(v.metrics)} for k, v in self.tasks.items()]

    @classmethod
    def from_dict(cls, d: Mapping) -> "Manifest":
        d = dict(d)
        d["tasks"] = {k: TaskStats(**v) for k, v in d["tasks"].items()}
        return cls(**d)


def _write_shards(out_dir: Path, stem: str, samples: list[Sample], shard_size: int) -> list[dict]:
    shards = []
    for k in range(0, max(len(samples), 1), shard_size):
        chunk = samples[k:k + shard_size]
        if not chunk:
            break
        name = f"{stem}-{k // shard_size:05d}.jsonl"
        data = "".join(s.to_json() + "\n" for s in chunk).encode("utf-8")
        (out_dir / name).write_bytes(data)
        shards.append({"file": name, "lines": len(chunk), "sha256": hashlib.sha256(data).hexdigest()})
    return shards


def _count_tokens(samples: list[Sample], rule: str) -> int:
    fn = TOKEN_RULES[rule]
    return sum(fn(s.question) + fn(s.answer) for s in samples)


def _mixture(config: GenConfig, per_task: dict[Task, list[Sample]]) -> list[Sample]:
    """Each task subsampled to weight / max weight of its samples, then shuffled."""
    weights = {t: config.weight(t) for t in per_task}
    top = max(weights.values(), default=0.0)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(99,)))
    picked = []
    for t, samples in per_task.items():
        n = int(round(len(samples) * weights[t] / top)) if top else 0
        idx = sorted(rng.choice(len(samples), size=n, replace=False).tolist()) if n < len(samples) else range(len(samples))
        picked.extend(samples[i] for i in idx)
    order = rng.permutation(len(picked))
    return [picked[i] for i in order]


def generate_dataset(config: GenConfig) -> Manifest:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_task: dict[Task, list[Sample]] = {t: [] for t in Task if config.enabled(t)}
    stats = {t: TaskStats(metrics=list(TASK_METRICS[t])) for t in per_task}

    dou_tasks = frozenset(t for t in per_task if t.is_dou)
    if dou_tasks:
        for i in range(config.dou.trajectories):
            seed = trajectory_seed(config.seed, DOU, i)
            try:
                samples = dou_trajectory(i, seed, config.dou, dou_tasks)
            except (AgentFailure, DouError, RuntimeError) as exc:
                log.warning("Doudizhu trajectory %d skipped: %s", i, exc)
                for t in dou_tasks:
                    stats[t].skipped_trajectories += 1
                continue
            for t in dou_tasks:
                got = [s for s in samples if s.task == t]
                per_task[t].extend(got)
                stats[t].trajectories += bool(got)

    go_tasks = [t for t in (Task.GO_NEXT_STATE, Task.GO_ANALYSIS) if t in per_task]
    if go_tasks:
        gp = config.go
        target = {Task.GO_NEXT_STATE: gp.next_state_samples, Task.GO_ANALYSIS: gp.analysis_samples}
        engines = GoEngines(gp) if gp.engine else None
        if engines and (gp.policy_source == "engine" or (gp.evaluator == "engine" and Task.GO_ANALYSIS in per_task)):
            engines.session()  # fail fast when a required engine is unreachable
        try:
            i = 0
            while i < gp.max_trajectories and any(len(per_task[t]) < target[t] for t in go_tasks):
                seed = trajectory_seed(config.seed, GO, i)
                wants = lambda t: t in per_task and len(per_task[t]) < target[t]
                got = {t: 0 for t in go_tasks}
                try:
                    for s in go_trajectory(i, seed, gp, wants, engines):
                        if len(per_task[s.task]) < target[s.task]:
                            per_task[s.task].append(s)
                            got[s.task] += 1
                except (GoError, RuntimeError) as exc:
                    log.warning("Go trajectory %d skipped: %s", i, exc)
                    for t in go_tasks:
                        stats[t].skipped_trajectories += 1
                for t in go_tasks:
                    stats[t].trajectories += bool(got[t])
                i += 1
        finally:
            if engines:
                engines.close()

    if Task.GO_STATE_EXPL in per_task:
        st = stats[Task.GO_STATE_EXPL]
        for i, path in enumerate(_sgf_files(config.books.sgf_paths)):
            try:
                samples, empty = book_samples(path, i, config.books.annotate_last_k)
            except (SgfError, OSError) as exc:
                log.warning("book %s skipped: %s", path, exc)
                st.skipped_trajectories += 1
                continue
            per_task[Task.GO_STATE_EXPL].extend(samples)
            st.trajectories += bool(samples)
            st.skipped_empty += empty

    for t, samples in per_task.items():
        st = stats[t]
        st.samples = len(samples)
        st.tokens = _count_tokens(samples, config.token_rule)
        st.shards = _write_shards(out_dir, t.value.lower(), samples, config.shard_size)
    mixture = None
    if config.write_mixture:
        mixed = _mixture(config, per_task)
        mixture = {"weights": {t.value: config.weight(t) for t in per_task}, "samples": len(mixed),
                   "shards": _write_shards(out_dir, "mixture", mixed, config.shard_size)}
    manifest = Manifest({t.value: stats[t] for t in per_task}, config.to_dict(), config.token_rule, mixture=mixture)
    (out_dir / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")
    return manifest


def load_manifest(out_dir: str | Path, verify: bool = True) -> Manifest:
    """Read ``manifest.json``; with ``verify`` re-count every shard and its tokens."""
    out_dir = Path(out_dir)
    manifest = Manifest.from_dict(json.loads((out_dir / "manifest.json").read_text(encoding="utf-8")))
    if not verify:
        return manifest
    fn = TOKEN_RULES[manifest.token_rule]
    for task, st in manifest.tasks.items():
        lines = tokens = 0
        for shard in st.shards:
            data = (out_dir / shard["file"]).read_bytes()
            if hashlib.sha256(data).hexdigest() != shard["sha256"]:
                raise ManifestMismatch(f"{shard['file']} does not match its checksum")
            rows = [json.loads(ln) for ln in data.decode("utf-8").splitlines() if ln.strip()]
            if len(rows) != shard["lines"]:
                raise ManifestMismatch(f"{shard['file']} has {len(rows)} lines, manifest says {shard['lines']}")
            for r in rows:
                if r["task"] != task:
                    raise ManifestMismatch(f"{shard['file']} holds a {r['task']} sample")
                tokens += fn(r["question"]) + fn(r["answer"])
            lines += len(rows)
        if lines != st.samples or tokens != st.tokens:
            raise ManifestMismatch(f"{task}: files hold {lines} samples / {tokens} tokens, "
                                   f"manifest says {st.samples} / {st.tokens}")
    return manifest


def iter_samples(out_dir: str | Path, task: Optional[Task] = None) -> Iterator[Sample]:
    out_dir = Path(out_dir)
    manifest = load_manifest(out_dir, verify=False)
    for name, st in manifest.tasks.items():
        if task is not None and name != task.value:
            continue
        for shard in st.shards:
            with open(out_dir / shard["file"], encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        yield Sample.from_dict(json.loads(line))
