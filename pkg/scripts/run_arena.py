"""Play a landlord-vs-farmers match from a YAML config and time it.

    python3 scripts/run_arena.py configs/arena_mc_vs_random.yaml --out match_report.json
"""
import argparse
import hashlib
import time

import yaml

from gamesynth.arena import MatchConfig, play_match


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--games", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--replay-dir")
    ap.add_argument("--out", default="match_report.json")
    args = ap.parse_args()

    with open(args.config) as fh:
        d = yaml.safe_load(fh)
    if args.games:
        d["n_games"] = args.games
    if args.seed is not None:
        d["base_seed"] = args.seed
    if args.replay_dir:
        d["replay_dir"] = args.replay_dir
    config = MatchConfig.from_dict(d)

    t0 = time.perf_counter()
    report = play_match(config)
    elapsed = time.perf_counter() - t0
    report.write(args.out)
    digest = hashlib.sha256(report.to_json().encode()).hexdigest()
    print(f"{config.landlord.label()} vs {config.farmers[0].label()}/{config.farmers[1].label()}: "
          f"{report.landlord_wins}/{report.n_games} landlord wins ({report.landlord_win_rate:.3f}), "
          f"{len(report.flagged)} flagged, {elapsed:.1f}s")
    print(f"report {args.out} sha256 {digest}")


if __name__ == "__main__":
    main()
