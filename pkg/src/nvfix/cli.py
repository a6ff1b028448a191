"""Command line front end.

    nvfix --config run.toml [--task scan] [--output report.json]
    nvfix --suite rp2

Exit status: 0 success, 1 a verification check failed, 2 configuration
error, 3 engine error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .config import SUITES, TASKS, RunConfig, load_config
from .errors import ConfigError, NvfixError, UnknownSuite
from .report import render

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_ENGINE = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nvfix", description="Nielsen numbers and fixed points of n-valued maps.")
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--task", choices=TASKS, help="override the configured task")
    p.add_argument("--suite", help=f"verification suite: {', '.join(SUITES)}")
    p.add_argument("--resolution", type=float, help="finest grid cell size")
    p.add_argument("--refine", type=int, help="local bisection levels before polishing")
    p.add_argument("--cluster-radius", type=float, help="fixed point merge radius")
    p.add_argument("--seed", type=int, help="seed for regular values and random suites")
    p.add_argument("--output", type=Path, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--timing", action="store_true", help="include wall-clock times in the report")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.suite is not None or args.task == "verify":
        cfg = RunConfig(task="verify")
    else:
        raise ConfigError("give --config or --suite")
    suite = args.suite
    task = args.task or ("verify" if suite is not None and args.config is None else None)
    return cfg.with_overrides(task=task, suite=suite, seed=args.seed, resolution=args.resolution,
                              refinement_depth=args.refine, cluster_radius=args.cluster_radius)


def main(argv: Optional[Sequence[str]] = None) -> int:
    from .runner import run

    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, UnknownSuite) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        report = run(cfg)
    except UnknownSuite as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NvfixError as exc:
        print(f"engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    if args.timing:
        report["wall_time"] = round(time.perf_counter() - t0, 3)
    text = render(report, args.format, timing=args.timing)
    if args.output is not None:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if report.get("passed") is False:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
