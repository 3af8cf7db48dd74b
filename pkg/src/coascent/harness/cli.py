"""Command line interface: ``coascent run | list | report``.

Exit codes: 0 all checks pass, 1 statistical failure, 2 inconclusive
(rejection cap exceeded), 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from ..stattest import VerificationReport
from .config import ConfigError, ExperimentConfig, load_config, parse_value
from .identities import CATALOG
from .runner import EXIT_CODES, USAGE_ERROR, run


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coascent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_p = sub.add_parser("run", help="run one identity check")
    run_p.add_argument("--config", help="flat key = value experiment file")
    for f in fields(ExperimentConfig):
        run_p.add_argument(f"--{f.name}", dest=f"set_{f.name}", metavar="VALUE",
                           help=f"override {f.name} (JSON or bare string)")
    run_p.add_argument("--quiet", action="store_true", help="print only the status line")

    sub.add_parser("list", help="print the identity catalog")

    rep_p = sub.add_parser("report", help="pretty-print a JSON report")
    rep_p.add_argument("path")
    return parser


def _cmd_run(args) -> int:
    overrides = {k[4:]: parse_value(v) for k, v in vars(args).items()
                 if k.startswith("set_") and v is not None}
    if args.config:
        config = load_config(args.config, **overrides)
    else:
        config = ExperimentConfig.from_mapping(overrides)
    result = run(config)
    lines = result.report.summary_lines()
    print(lines[0] if args.quiet else "\n".join(lines))
    return result.exit_code


def _cmd_list(args) -> int:
    for name, info in CATALOG.items():
        print(f"{name}")
        print(f"    anchor:   {info.anchor}")
        print(f"    claim:    {info.claim}")
        if info.defaults:
            defaults = ", ".join(f"{k}={json.dumps(v)}" for k, v in info.defaults.items())
            print(f"    defaults: {defaults}")
    return 0


def _cmd_report(args) -> int:
    try:
        with open(args.path) as fh:
            doc = json.load(fh)
        report = VerificationReport.from_dict(doc["report"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read report {args.path}: {exc}") from None
    print(f"{doc['identity']}  ({doc.get('anchor', '')})")
    config = doc.get("config", {})
    print("  config: " + ", ".join(f"{k}={json.dumps(v)}" for k, v in sorted(config.items())))
    for line in report.summary_lines():
        print(line)
    for note in report.notes:
        print(f"  note: {note}")
    return EXIT_CODES[report.status]


COMMANDS = {"run": _cmd_run, "list": _cmd_list, "report": _cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
