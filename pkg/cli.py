#!/usr/bin/env python3
"""
Command-line front-end for the AGLAB nodes.

Every node class with a COMMAND becomes a subcommand ("search", "star", ...) or a kind under
"check" ("check kk", ...); its flags are generated from INPUT_TYPES. Reports are written as JSON
lines to --output or stdout. Exit status: 0 when every report passes, 1 when some report is a
violation, 2 on usage, input or budget errors.
"""

import argparse
import json
import logging
import sys
from datetime import datetime, timezone

from pydantic import ValidationError

from engine.errors import AgLabError
from engine.report import Report, all_passed
from nodes.registry import commands
from utils.family_io import write_json
from utils.run_config import RunConfig, resolve_seed

logger = logging.getLogger("aglab.cli")

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_node_arguments(parser, node_class):
    spec = node_class.INPUT_TYPES()
    for section in ("required", "optional"):
        for name, (kind, *rest) in spec.get(section, {}).items():
            options = rest[0] if rest else {}
            default = options.get("default")
            if isinstance(kind, list):
                parser.add_argument(_flag(name), dest=name, choices=kind, default=default or kind[0])
            elif kind == "BOOLEAN":
                parser.add_argument(_flag(name), dest=name, action="store_true", default=bool(default))
            elif kind == "INT":
                parser.add_argument(_flag(name), dest=name, type=int, default=default)
            elif kind == "FLOAT":
                parser.add_argument(_flag(name), dest=name, type=float, default=default)
            else:
                # RATIONAL and STRING stay text; nodes parse them exactly
                parser.add_argument(_flag(name), dest=name, type=str, default=default)


def _add_common_arguments(parser):
    parser.add_argument("--seed", type=int, default=None, help="root seed (default: $AGLAB_SEED, else 0)")
    parser.add_argument("--budget-nodes", type=int, default=None, help="search node cap per subtree task")
    parser.add_argument("--budget-seconds", type=float, default=None, help="search wall-clock cap")
    parser.add_argument("--output", default=None, help="write reports here instead of stdout")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (never changes reports)")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])


def build_parser(table=None):
    table = commands() if table is None else table
    parser = argparse.ArgumentParser(prog="aglab", description="Exact checks for forbidden-agreement families.")
    top = parser.add_subparsers(dest="command", required=True)
    check = top.add_parser("check", help="property checks")
    kinds = check.add_subparsers(dest="kind", required=True)
    for command, node_class in sorted(table.items()):
        words = command.split()
        if words[0] == "check":
            sub = kinds.add_parser(words[1], help=(node_class.__doc__ or "").strip().splitlines()[0])
        else:
            sub = top.add_parser(command, help=(node_class.__doc__ or "").strip().splitlines()[0])
        _add_node_arguments(sub, node_class)
        _add_common_arguments(sub)
        sub.set_defaults(node_class=node_class, command_name=command)
    return parser


def _node_params(args, node_class):
    spec = node_class.INPUT_TYPES()
    names = list(spec.get("required", {})) + list(spec.get("optional", {}))
    return {name: getattr(args, name) for name in names}


def _emit(reports, config, output):
    stamp = datetime.now(timezone.utc).isoformat()
    embedded = config.model_dump(mode="json", exclude={"workers"})
    lines = []
    for report in reports:
        report.config = embedded
        report.timestamp = stamp
        lines.append(report.to_json_line())
    text = "\n".join(lines) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


def run(argv=None):
    """Parse argv, run one node and write its output; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    node_class = args.node_class
    try:
        params = _node_params(args, node_class)
        config = RunConfig(
            subcommand=args.command_name,
            params={k: v for k, v in params.items() if v not in ("", None)},
            seed=resolve_seed(args.seed),
            budget_nodes=args.budget_nodes,
            budget_seconds=args.budget_seconds,
            output=args.output,
            workers=args.workers,
            trials=params.get("trials") or 0,
        )
        node = node_class(config)
        (result,) = getattr(node, node_class.FUNCTION)(**params)
    except (AgLabError, ValidationError, json.JSONDecodeError, OSError) as exc:
        print(f"aglab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    reports = [] if node_class.RETURN_TYPES != ("REPORT",) else [r for r in result if isinstance(r, Report)]
    try:
        if node_class.RETURN_TYPES != ("REPORT",):
            write_json(args.output, result)
        else:
            _emit(reports, config, args.output)
    except OSError as exc:
        print(f"aglab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if all_passed(reports) else EXIT_VIOLATION


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
