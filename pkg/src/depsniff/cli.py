"""Command-line entry point: ``depsniff {scan,history,corpus,badge}``.

Exit codes: 0 success, 1 operational error (bad arguments, missing or
malformed manifest, not a repository), 2 a ``--fail-on`` smell was found.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import date
from pathlib import Path
from typing import Sequence

from depsniff import __version__
from depsniff.classify import Smell
from depsniff.errors import DepsniffError
from depsniff.imports import DEFAULT_EXTENSIONS
from depsniff.report import (
    ALL_SMELLS,
    FORMATS,
    ScanConfig,
    badge_status,
    corpus_to_dict,
    emit_corpus,
    emit_history,
    emit_report,
    exit_code,
    history_to_dict,
    run_corpus,
    run_history,
    run_scan,
    utc_timestamp,
)

EXIT_OK, EXIT_ERROR, EXIT_GATED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for gating here.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def parse_smells(text: str) -> frozenset[Smell]:
    """``"S1,s7"`` -> {S1, S7}; ``"all"`` -> every smell; ``""`` -> none."""
    out = set()
    for part in text.split(","):
        part = part.strip().upper()
        if not part:
            continue
        if part == "ALL":
            out.update(Smell)
            continue
        try:
            out.add(Smell(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"unknown smell {part!r} (expected S1..S7)") from None
    return frozenset(out)


def _iso_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO-8601 date: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--smells", type=parse_smells, default=ALL_SMELLS,
                        help="comma-separated smells to report (default: all)")
    common.add_argument("--timestamped", action="store_true", help="include generation time in reports")
    common.add_argument("-o", "--output", type=Path, help="write report here instead of stdout")

    scanning = argparse.ArgumentParser(add_help=False)
    scanning.add_argument("--fail-on", type=parse_smells, default=frozenset(),
                          help="exit 2 if any of these smells is found")
    scanning.add_argument("--include-dev", action="store_true",
                          help="treat devDependencies as runtime dependencies")
    scanning.add_argument("--builtins", type=Path, help="file listing core module names (env: DEPSNIFF_BUILTINS)")
    scanning.add_argument("--extensions", default=",".join(DEFAULT_EXTENSIONS),
                          help="comma-separated source file extensions")
    scanning.add_argument("--ignore", action="append", default=[], metavar="GLOB",
                          help="skip source paths matching GLOB (repeatable)")
    scanning.add_argument("-j", "--jobs", type=int, default=1, help="worker threads")

    parser = _Parser(prog="depsniff", description="Detect dependency smells in npm projects.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("scan", parents=[common, scanning], help="scan one project").add_argument("path", type=Path)
    sub.add_parser("badge", parents=[common, scanning], help="print clean/infected").add_argument("path", type=Path)
    corpus = sub.add_parser("corpus", parents=[common, scanning], help="aggregate a directory of projects")
    corpus.add_argument("path", type=Path)
    corpus.add_argument("--history", action="store_true", help="also mine each project's git history")
    history = sub.add_parser("history", parents=[common], help="mine package.json history")
    history.add_argument("path", type=Path)
    history.add_argument("--since", type=_iso_date)
    history.add_argument("--until", type=_iso_date)
    return parser


def _config(args: argparse.Namespace) -> ScanConfig:
    extensions = tuple(e if e.startswith(".") else "." + e for e in args.extensions.split(",") if e)
    return ScanConfig(
        root=args.path,
        format=args.format,
        smell_filter=args.smells,
        fail_on=args.fail_on,
        include_dev=args.include_dev,
        extensions=extensions,
        ignore=tuple(args.ignore),
        builtins_path=args.builtins,
        timestamped=args.timestamped,
        jobs=max(1, args.jobs),
    )


def _write(data: bytes, output: Path | None) -> None:
    if output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        output.write_bytes(data)


def run(args: argparse.Namespace) -> int:
    if args.command == "history":
        result = run_history(args.path, args.since, args.until, args.smells)
        doc = history_to_dict(result, args.path.resolve().name, args.smells,
                              utc_timestamp() if args.timestamped else None)
        _write(emit_history(doc, args.format), args.output)
        return EXIT_OK

    config = _config(args)
    if args.command == "corpus":
        result = run_corpus(config, with_history=args.history)
        doc = corpus_to_dict(result, config.smell_filter, utc_timestamp() if config.timestamped else None)
        _write(emit_corpus(doc, config.format), args.output)
        found = frozenset(f.smell for r in result.reports for f in r.findings)
        return exit_code(found, config.fail_on)

    report = run_scan(config)
    if args.command == "badge":
        _write((badge_status(report) + "\n").encode(), args.output)
    else:
        _write(emit_report(report, config.format), args.output)
    return exit_code(report.found_smells, config.fail_on)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="depsniff: %(message)s")
    try:
        return run(args)
    except (DepsniffError, OSError, ValueError) as exc:
        print(f"depsniff: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
