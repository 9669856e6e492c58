"""Command-line driver: run scenario configs, list presets, check syntax.

Exit codes: 0 all scenarios passed (inconclusive allowed), 1 at least one
failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .scenarios import (
    ConfigError,
    list_presets,
    parse_config,
    preset_config_path,
    run,
)


def _load_config_text(ref: str) -> str:
    path = Path(ref)
    if path.exists():
        return path.read_text(encoding="utf-8")
    try:
        return preset_config_path(ref).read_text(encoding="utf-8")
    except KeyError:
        raise FileNotFoundError(
            f"{ref!r} is neither a config file nor a known preset "
            f"(see 'riccomp list')") from None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="riccomp",
        description="scenario driver for the comparison-theory checks")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a config file or named preset")
    p_run.add_argument("config", help="config path or preset name")
    p_run.add_argument("--out", default=None,
                       help="output directory (default: $RICCOMP_OUT or ./riccomp-out)")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="scenario-level worker count")

    sub.add_parser("list", help="print the model registry and named presets")

    p_check = sub.add_parser("check", help="parse and validate a config, run nothing")
    p_check.add_argument("config", help="config path or preset name")

    args = parser.parse_args(argv)

    if args.verb == "list":
        print(list_presets())
        return 0

    try:
        text = _load_config_text(args.config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        scenarios = parse_config(text)
    except ConfigError as exc:
        for line_no, message in exc.diagnostics:
            where = f"line {line_no}: " if line_no else ""
            print(f"config error: {where}{message}", file=sys.stderr)
        return 2

    if args.verb == "check":
        print(f"ok: {len(scenarios)} scenario(s)")
        for sc in scenarios:
            print(f"  [{sc.id}] kind={sc.kind}")
        return 0

    reports = run(scenarios, out_dir=args.out, jobs=args.jobs)
    n_fail = 0
    for rep in reports:
        line = f"{rep.status.upper():12s} {rep.scenario_id}"
        if rep.cause:
            line += f"  ({rep.cause})"
        print(line)
        if rep.status == "fail":
            n_fail += 1
    print(f"{len(reports)} scenario(s), {n_fail} failed")
    return 1 if n_fail else 0


if __name__ == "__main__":
    sys.exit(main())
