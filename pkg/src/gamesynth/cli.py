"""Command-line entry point: ``gamesynth <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

USAGE, RUNTIME = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _read_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    import yaml
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise UsageError(f"--config {path}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"--config {path}: not valid YAML/JSON ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError(f"--config {path}: expected a mapping at the top level")
    return data


# -- commands -------------------------------------------------------------------

def cmd_gen(args) -> int:
    from .datagen.pipeline import ConfigError, GenConfig, generate_dataset
    data = _read_config(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.output:
        data["output_dir"] = args.output
    try:
        config = GenConfig.from_dict(data)
    except (ConfigError, TypeError, ValueError) as exc:
        raise UsageError(f"--config: {exc}") from None
    manifest = generate_dataset(config)
    for row in manifest.table():
        print(f"{row['task']:<14} trajectories={row['trajectories']:<5} samples={row['samples']:<6} "
              f"tokens={row['tokens']:<9} metrics={row['metrics']}")
    print(f"wrote {Path(config.output_dir) / 'manifest.json'}")
    return 0


def cmd_eval(args) -> int:
    from .evalkit.report import evaluate_records, read_jsonl, write_report
    data = _read_config(args.config)
    paths = args.predictions or data.get("predictions") or []
    if isinstance(paths, str):
        paths = [paths]
    if not paths:
        raise UsageError("eval: --predictions is required (or 'predictions' in --config)")
    scope = args.rl_scope or data.get("rl_scope", "thought")
    report = evaluate_records(read_jsonl(paths), rl_scope=scope)
    out = args.output or data.get("output")
    if out:
        write_report(report, out)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_arena(args) -> int:
    from .arena import MatchConfig, MatchConfigError, play_match
    data = _read_config(args.config)
    if not data:
        raise UsageError("arena: --config is required")
    out = args.output or data.pop("output", None) or "match_report.json"
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.games is not None:
        data["n_games"] = args.games
    if args.replay_dir:
        data["replay_dir"] = args.replay_dir
    try:
        config = MatchConfig.from_dict(data)
    except MatchConfigError as exc:
        raise UsageError(f"--config: {exc}") from None
    report = play_match(config)
    report.write(out)
    print(f"landlord win rate {report.landlord_win_rate:.4f} ({report.landlord_wins}/{report.n_games}), "
          f"flagged games: {len(report.flagged)}; report written to {out}")
    return 0


def cmd_replay(args) -> int:
    from .arena import dump_replay
    print(dump_replay(args.ref))
    return 0


def _endpoint(args, data: dict):
    from .bridge.transport import EngineEndpoint
    if args.cmd:
        return EngineEndpoint.subprocess(args.cmd)
    if args.tcp:
        host, _, port = args.tcp.rpartition(":")
        if not host or not port.isdigit():
            raise UsageError(f"--tcp {args.tcp}: expected HOST:PORT")
        return EngineEndpoint.tcp(host, int(port))
    ep = data.get("endpoint") or data.get("engine") or (data.get("go") or {}).get("engine")
    if not ep:
        raise UsageError("probe-engine: give --cmd, --tcp or an 'endpoint' in --config")
    try:
        return EngineEndpoint.from_dict(ep)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"--config: bad endpoint ({exc})") from None


def cmd_probe(args) -> int:
    data = _read_config(args.config)
    endpoint = _endpoint(args, data)
    if args.protocol == "gtp":
        from .bridge.gtp import GtpSession
        session = GtpSession(endpoint)
        try:
            version = session.command("version").strip()
            print(f"ok: {session.name} {version} (GTP protocol {session.protocol_version})")
        finally:
            session.close()
        return 0
    from .bridge.policy import PolicyClient
    from .dou.state import deal
    client = PolicyClient(endpoint)
    try:
        scored = client.query(deal(0 if args.seed is None else args.seed))
        print(f"ok: policy engine scored {len(scored.entries)} opening actions, top {scored.argmax().encode()}")
    finally:
        client.close()
    return 0


def _print_sample(rec: dict, i: int) -> None:
    print(f"--- #{i} {rec.get('task')} {json.dumps(rec.get('meta', {}), sort_keys=True)}")
    print(rec.get("question", ""))
    print(">>>")
    print(rec.get("answer", ""))
    if "prediction" in rec:
        print("<<< prediction")
        print(rec["prediction"])


def cmd_inspect(args) -> int:
    target = args.target
    if target.startswith("deal:"):
        from .datagen.templates import dou_context
        from .dou.state import deal
        try:
            seed = int(target[5:])
        except ValueError:
            raise UsageError(f"inspect: {target!r}: expected deal:SEED") from None
        print(dou_context(deal(seed)))
        return 0
    path = Path(target)
    if not path.exists():
        raise FileNotFoundError(f"{target} does not exist")
    if path.is_dir():
        from .datagen.pipeline import Task, iter_samples, load_manifest
        manifest = load_manifest(path, verify=args.verify)
        for row in manifest.table():
            print(f"{row['task']:<14} trajectories={row['trajectories']:<5} samples={row['samples']:<6} "
                  f"tokens={row['tokens']}")
        task = Task(args.task) if args.task else None
        for i, s in enumerate(iter_samples(path, task)):
            if i >= args.n:
                break
            _print_sample(json.loads(s.to_json()), i)
        return 0
    if path.suffix.lower() == ".sgf":
        from .go.codec import serialize_board
        from .go.sgf import read_sgf
        game = read_sgf(path.read_bytes())
        steps = game.steps[: args.n] if args.n else game.steps
        for step in steps:
            print(serialize_board(step.after))
            if step.comment:
                print(step.comment)
            print()
        return 0
    shown = 0
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            rec = json.loads(line)
            if args.task and rec.get("task") != args.task:
                continue
            if "question" in rec:
                _print_sample(rec, i)
            else:
                print(json.dumps(rec, sort_keys=True))
            shown += 1
            if shown >= args.n:
                break
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gamesynth", description="Game engines, dataset generation, evaluation and match play.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="command")
    sub.required = True

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="YAML or JSON config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("gen", cmd_gen, "generate a dataset and its manifest")
    sp.add_argument("--output", help="output directory")

    sp = add("eval", cmd_eval, "score prediction JSONL files")
    sp.add_argument("--predictions", nargs="+", help="JSONL files with task/answer/prediction fields")
    sp.add_argument("--rl-scope", choices=("thought", "full"))
    sp.add_argument("--output", help="write the report JSON here")

    sp = add("arena", cmd_arena, "play a landlord-vs-farmers match")
    sp.add_argument("--games", type=int, help="override n_games")
    sp.add_argument("--replay-dir")
    sp.add_argument("--output", help="report path (default match_report.json)")

    sp = add("replay", cmd_replay, "print a game transcript from a replay file")
    sp.add_argument("ref", help="replay file")

    sp = add("probe-engine", cmd_probe, "connect to an engine and check the handshake")
    sp.add_argument("--protocol", choices=("gtp", "policy"), default="gtp")
    sp.add_argument("--cmd", help="engine command line (subprocess transport)")
    sp.add_argument("--tcp", help="HOST:PORT (TCP transport)")

    sp = add("inspect", cmd_inspect, "pretty-print samples, datasets, SGF records or a dealt state")
    sp.add_argument("target", help="dataset dir, .jsonl, .sgf, or deal:SEED")
    sp.add_argument("--task")
    sp.add_argument("-n", type=int, default=3, help="how many items to show")
    sp.add_argument("--verify", action="store_true", help="re-check shard checksums")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except Exception as exc:  # anything past argument checking is a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
