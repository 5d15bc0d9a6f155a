"""Command-line entry points: run, verify, sweep, lower-bound.

Exit code 0 means every runtime assertion passed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import config_to_text, load_config
from .errors import ConfigError, ModelViolationError
from .harness import lower_bound_experiment, run, sweep, verify


def _write_outputs(result, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    result.log.to_csv(os.path.join(out_dir, "metrics.csv"))
    result.log.write_plot_files(
        os.path.join(out_dir, "phi_per_object.dat"),
        os.path.join(out_dir, "distance_per_object.dat"),
    )
    with open(os.path.join(out_dir, "summary.txt"), "w", newline="\n") as fh:
        fh.write(result.summary.to_text())
    with open(os.path.join(out_dir, "config.txt"), "w", newline="\n") as fh:
        fh.write(config_to_text(result.config))
    if result.sim.hypothesis_snapshots:
        with open(os.path.join(out_dir, "hypothesis.csv"), "w", newline="\n") as fh:
            d = result.config.d
            header = ["t", "i"] + [f"k{j + 1}" for j in range(d)] + ["h"]
            fh.write(",".join(header) + "\n")
            for row in result.sim.hypothesis_snapshots:
                fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _load(args) -> "ExperimentConfig":
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = config.replace(seed=args.seed)
    return config


def cmd_run(args) -> int:
    config = _load(args)
    result = run(config)
    out_dir = args.out or config.out_dir
    if out_dir:
        _write_outputs(result, out_dir)
    print(result.summary.to_text(), end="")
    return 0 if result.summary.violations == 0 else 1


def cmd_verify(args) -> int:
    config = _load(args)
    report = verify(config)
    print(report.to_text(), end="")
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    config = _load(args)
    key, _, raw = args.vary.partition("=")
    if not raw:
        raise ConfigError("--vary expects KEY=V1,V2,...")
    from .config import _coerce  # reuse the field typing

    values = [_coerce(key.strip(), v) for v in raw.split(",")]
    failures = 0
    for value, summary in sweep(config, key.strip(), values):
        print(f"--- {key.strip()} = {value}")
        print(summary.to_text(), end="")
        failures += summary.violations
    return 0 if failures == 0 else 1


def cmd_lower_bound(args) -> int:
    config = _load(args)
    result = lower_bound_experiment(config)
    print(f"window = [{result.window_start}, {result.window_end})")
    print(f"pushed_indices = {result.pushed_indices}")
    print(f"c_lb = {result.c_lb!r}")
    print(result.summary.to_text(), end="")
    return 0 if result.summary.violations == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zoomtrack",
        description="Track evolving point distributions through a two-bit ball oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run the invariant battery")
    p_verify.add_argument("--config", required=True)
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="re-run the config varying one key")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--vary", required=True, metavar="KEY=V1,V2,...")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lb = sub.add_parser("lower-bound", help="run the adversarial lower-bound experiment")
    p_lb.add_argument("--config", required=True)
    p_lb.add_argument("--seed", type=int, default=None)
    p_lb.set_defaults(func=cmd_lower_bound)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModelViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
