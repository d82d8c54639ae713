"""Command-line front end.

Exit codes: 0 success, 2 invalid or unreadable config, 3 failure while computing.
Errors are reported on stderr as one JSON document.
"""

from __future__ import annotations

import argparse
import json
import sys

from slowlight.config import (ConfigInvalid, load_json, parse_config, scenario_names,
                              scenario_path, validate_config)
from slowlight.errors import ConfigError, InvalidParameter
from slowlight.pipeline import STAGES, run_scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3


def _fail(code: int, kind: str, errors: list[dict], warnings: list[dict] | None = None) -> int:
    doc = {"status": "error", "error": kind, "errors": errors, "warnings": warnings or []}
    print(json.dumps(doc, indent=2, sort_keys=True), file=sys.stderr)
    return code


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output directory (default: config output_dir)")
    p.add_argument("--normalize", action="store_true",
                   help="scale exported pulse traces to unit peak intensity")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="format of mode, report and sweep tables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowlight",
        description="Slow-light cavity simulator: absorption profile, dispersion, "
                    "transmission spectrum, resonances and pulse ring-down.")
    sub = parser.add_subparsers(dest="command", required=True)

    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the pipeline up to '{stage}' and emit its output")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="scenario JSON file")
        src.add_argument("--scenario", help="name of a shipped scenario")
        _add_run_flags(p)

    p = sub.add_parser("scenario", help="run a complete scenario and emit every artifact")
    p.add_argument("name", nargs="?", help=f"shipped scenario ({', '.join(scenario_names())})")
    p.add_argument("--config", help="scenario JSON file instead of a shipped name")
    _add_run_flags(p)

    p = sub.add_parser("validate", help="check a config and list every violation")
    p.add_argument("file")

    sub.add_parser("list", help="list shipped scenarios")
    return parser


def _validate(path: str) -> int:
    try:
        rep = validate_config(path)
    except ConfigError as exc:
        return _fail(EXIT_INVALID, "ConfigError", [{"field": None, "message": str(exc)}])
    print(json.dumps(rep.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK if rep.valid else EXIT_INVALID


def _run(args, stage: str) -> int:
    try:
        if args.config:
            doc = load_json(args.config)
        else:
            name = getattr(args, "scenario", None) or getattr(args, "name", None)
            if name is None:
                raise ConfigError("give a scenario name or --config")
            doc = load_json(scenario_path(name))
        cfg = parse_config(doc)
    except ConfigError as exc:
        return _fail(EXIT_INVALID, "ConfigError", [{"field": None, "message": str(exc)}])
    except ConfigInvalid as exc:
        return _fail(EXIT_INVALID, "ValidationError", exc.report.errors, exc.report.warnings)

    try:
        _, manifest = run_scenario(cfg, args.out, stage, args.normalize, args.format)
    except InvalidParameter as exc:
        return _fail(EXIT_RUNTIME, "InvalidParameter", [{"field": exc.field, "message": str(exc)}])
    except (ArithmeticError, ValueError, OSError) as exc:
        return _fail(EXIT_RUNTIME, type(exc).__name__, [{"field": None, "message": str(exc)}])
    print(manifest)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return _validate(args.file)
    if args.command == "list":
        print("\n".join(scenario_names()))
        return EXIT_OK
    if args.command == "scenario":
        return _run(args, "all")
    return _run(args, args.command)


if __name__ == "__main__":
    sys.exit(main())
