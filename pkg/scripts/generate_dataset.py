"""Generate a dataset from a YAML config, then reload and verify its manifest.

    python3 scripts/generate_dataset.py configs/desk_scale.yaml
"""
import argparse
import logging
import time

from gamesynth.datagen.pipeline import generate_dataset, load_config, load_manifest


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--output")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    config = load_config(args.config)
    if args.output:
        config.output_dir = args.output
    if args.seed is not None:
        config.seed = args.seed

    t0 = time.perf_counter()
    manifest = generate_dataset(config)
    elapsed = time.perf_counter() - t0
    load_manifest(config.output_dir, verify=True)

    print(f"{'task':<14} {'traj':>5} {'samples':>8} {'tokens':>10}  metrics")
    for row in manifest.table():
        print(f"{row['task']:<14} {row['trajectories']:>5} {row['samples']:>8} {row['tokens']:>10}  {row['metrics']}")
    print(f"{elapsed:.1f}s, manifest verified against {config.output_dir}")


if __name__ == "__main__":
    main()
