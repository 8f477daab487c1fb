"""Command-line entry point.

Subcommands:
  simulate  extract features only (fills the cache)
  train     run one end-to-end experiment and append a runs.csv row
  sweep     expand the sweep grid from the config and write runs.csv
  metrics   print the hardware figures of merit (table + CSV)
  report    summarize an existing runs.csv

Exit code 0 on success; nonzero with a diagnostic on constraint failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

from . import harness, metrics
from .config import ConfigError, ExperimentConfig, load_config


def _load(args) -> tuple[ExperimentConfig, object]:
    if args.config:
        config, grid = load_config(args.config)
    else:
        config, grid = ExperimentConfig(), None
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.subset is not None:
        overrides["train_subset"] = args.subset
    if getattr(args, "bypass_oss", False):
        overrides["bypass_oss"] = True
    if overrides:
        config = replace(config, **overrides)
    return config, grid


def cmd_simulate(args) -> int:
    config, _ = _load(args)
    config.validate()
    cache_dir = os.path.join(config.output_dir, "cache")
    harness.extract_or_load_features(config, cache_dir)
    print(f"features cached under {cache_dir}")
    return 0


def cmd_train(args) -> int:
    config, _ = _load(args)
    cache_dir = os.path.join(config.output_dir, "cache")
    report = harness.run_experiment(config, cache_dir=cache_dir, run_id="run000")
    row = harness.report_row("run000", config, report)
    os.makedirs(config.output_dir, exist_ok=True)
    harness.write_runs_csv(os.path.join(config.output_dir, "runs.csv"), [row])
    harness.write_history_csv(
        os.path.join(config.output_dir, "history.csv"), {"run000": report.history}
    )
    print(
        f"feature_dim={report.feature_dim} "
        f"compression_ratio={report.compression_ratio:.4g} "
        f"test_accuracy={report.test_accuracy:.4f} "
        f"wall_clock={report.wall_clock_s:.1f}s"
    )
    return 0


def cmd_sweep(args) -> int:
    config, grid = _load(args)
    if grid is None:
        print("config has no sweep.* keys", file=sys.stderr)
        return 2
    cache_dir = os.path.join(config.output_dir, "cache")
    rows = harness.run_sweep(grid, config, cache_dir=cache_dir)
    for row in rows:
        print(
            f"{row['run_id']}: status={row['status']} "
            f"ratio={row['compression_ratio']} accuracy={row['test_accuracy']} "
            f"{row['error']}"
        )
    print(f"wrote {os.path.join(config.output_dir, 'runs.csv')}")
    return 0


def cmd_metrics(args) -> int:
    config, _ = _load(args)
    spec = metrics.HardwareSpec(
        patch_edge=config.patch_edge,
        nodes=config.node_count,
        pixel_rate_hz=config.pixel_rate_hz,
    )
    report = metrics.derived_figures(spec, metrics.PowerModelParams())
    row = report.as_row()
    print(f"{'metric':<28}{'value':>16}")
    for key, value in row.items():
        print(f"{key:<28}{value if isinstance(value, str) else f'{value:.4g}':>16}")
    print("\nreference systems (quoted constants, not modeled):")
    for ref in metrics.REFERENCE_SYSTEMS:
        print(
            f"  {ref['name']:<24} {ref['tops_per_w']} TOPS/W, "
            f"{ref['tops_per_mm2']} TOPS/mm2"
        )
    print(
        "\nreported minimum input power per node: "
        f"{metrics.REPORTED_MIN_INPUT_POWER_PER_NODE_W * 1e6:.0f} uW "
        "(quoted constant, no stated formula)"
    )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "metrics.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(row))
            writer.writeheader()
            writer.writerow(row)
        print(f"wrote {path}")
    return 0


def cmd_report(args) -> int:
    config, _ = _load(args)
    path = os.path.join(config.output_dir, "runs.csv")
    if not os.path.exists(path):
        print(f"no runs.csv under {config.output_dir}", file=sys.stderr)
        return 2
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'run':<10}{'ratio':>8}{'dim':>7}{'accuracy':>10}  status")
    for row in rows:
        print(
            f"{row['run_id']:<10}{row['compression_ratio'][:7]:>8}"
            f"{row['feature_dim']:>7}{row['test_accuracy'][:8]:>10}  {row['status']}"
        )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oss-cnn",
        description="Spectrum-slicing photonic convolutional accelerator simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("simulate", cmd_simulate),
        ("train", cmd_train),
        ("sweep", cmd_sweep),
        ("metrics", cmd_metrics),
        ("report", cmd_report),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", help="experiment config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--subset", type=int, default=None,
                       help="limit training images (fast runs)")
        p.add_argument("--bypass-oss", action="store_true",
                       help="feed raw pixels straight to the FCL")
        p.set_defaults(func=fn)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
