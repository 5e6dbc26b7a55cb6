"""Command line entry point ``cdwork``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import CDWorkError, ConfigInvalid, NumericalError
from .config import PRESETS, ScenarioConfig, apply_overrides, preset
from .runner import run_scenario

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdwork",
        description="Counterdiabatic driving: work, excess work and speed limits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write CSV and SVG outputs",
                         epilog="Unrecognized --key=value flags are treated as overrides.")
    run.add_argument("config", nargs="?", help="scenario JSON file")
    run.add_argument("--out", default="cdwork-out", help="output directory (default: %(default)s)")
    run.add_argument("--preset", help="start from a named preset")
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config field; dotted keys reach nested fields")

    sub.add_parser("presets", help="list preset names")
    return parser


def load_config(path: str | None, preset_name: str | None,
                overrides: list[str]) -> ScenarioConfig:
    if path is not None and preset_name is not None:
        raise ConfigInvalid("give either a config file or --preset, not both")
    if preset_name is not None:
        config = preset(preset_name)
    elif path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        config = ScenarioConfig.loads(text)
    else:
        raise ConfigInvalid("a config file or --preset is required")
    return apply_overrides(config, overrides) if overrides else config


def _run(args, extra) -> int:
    flags = [e for e in extra if e.startswith("--") and "=" in e]
    stray = [e for e in extra if e not in flags]
    if stray:
        raise ConfigInvalid(f"unrecognized arguments: {' '.join(stray)}")
    config = load_config(args.config, args.preset, args.override + flags)
    result = run_scenario(config)
    for msg in result.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    for path in result.write(args.out):
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.command == "presets":
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        for name in PRESETS:
            print(name)
        return EXIT_OK
    try:
        return _run(args, extra)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CDWorkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
