"""Command-line entry point.

    lowrank-mde run        --config exp.toml --out results/
    lowrank-mde sweep-rank --config exp.toml --out results/
    lowrank-mde sweep-dt   --config exp.toml --out results/
    lowrank-mde scaling    --config exp.toml --out results/
    lowrank-mde compare    --config exp.toml --out results/

Exit codes: 0 success, 2 configuration error, 3 model blowup.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .harness import (
    compare_fom,
    load_config,
    run_experiment,
    scaling_study,
    sweep_dt,
    sweep_rank,
)

_EXIT_CONFIG = 2
_EXIT_BLOWUP = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowrank-mde",
        description="Low-rank integration of matrix differential equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep-rank", "sweep-dt", "scaling", "compare"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, type=Path)
        cmd.add_argument("--out", type=Path, default=None)
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--threads", type=int, default=None)
        cmd.add_argument("--checkpoint", type=int, default=None,
                         help="write a binary state checkpoint every k steps")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(
            args.config,
            seed_override=args.seed,
            threads_override=args.threads,
            checkpoint_override=args.checkpoint,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG

    out = args.out if args.out is not None else Path("out") / args.config.stem
    try:
        if args.command == "run":
            record = run_experiment(config, out_dir=out)
            if record.summary["failed"]:
                info = record.summary["failure"]
                print(
                    f"run failed ({info['kind']}) at t = {info['t']}; "
                    f"partial trajectory written to {out}",
                    file=sys.stderr,
                )
                return _EXIT_BLOWUP
            print(f"run complete: {out}")
        elif args.command == "sweep-rank":
            print(f"wrote {sweep_rank(config, out)}")
        elif args.command == "sweep-dt":
            print(f"wrote {sweep_dt(config, out)}")
        elif args.command == "scaling":
            print(f"wrote {scaling_study(config, out)}")
        elif args.command == "compare":
            print(f"wrote {compare_fom(config, out)}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
