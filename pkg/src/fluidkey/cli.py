"""Command-line entry point: `fluidkey {compare,layout,sweep}`."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiments import cmd_compare, cmd_layout, cmd_sweep, default_config, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluidkey",
        description="Key-rate experiments for a movable-antenna array simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("compare", "run all configured methods over all seeds and summarize"),
        ("layout", "dump initial vs. optimized antenna positions"),
        ("sweep", "joint-swarm convergence versus multipath count"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a key-value config file")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seeds", help="comma-separated seed list (overrides the config)")
        p.add_argument(
            "--mc",
            action="store_true",
            help="use the Monte-Carlo covariance instead of the closed form",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config)
        else:
            cfg = default_config()
            if args.command == "layout":
                cfg = replace(cfg, methods=("joint_pso", "ao"))
        if args.seeds:
            cfg = replace(cfg, seeds=tuple(int(s) for s in args.seeds.split(",") if s.strip()))
        if args.mc:
            cfg = replace(cfg, covariance="monte_carlo")
        if args.out:
            cfg = replace(cfg, out_dir=args.out)
        command = {"compare": cmd_compare, "layout": cmd_layout, "sweep": cmd_sweep}[args.command]
        result = command(cfg)
        for path in result["files"]:
            print(path)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
