"""Command-line interface: scan, build, redact, explain, eval."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .annotations import ValidationError
from .config import DEFAULT_CONFIG_NAME, ConfigError, load_config
from .evaluation import EvalInputError, evaluate, load_gold, predictions_from_report
from .logs import PatternError
from .parser import ParseError, ScanError, parse_file, scan_project
from .pipeline import read_lines, redactor_from_config, write_lines
from .repository import INDEX_FILE, DfgRepository, RepositoryError, build_repository

logger = logging.getLogger("logredact")

EXIT_OK, EXIT_FATAL, EXIT_FLAGGED = 0, 1, 2


def _cmd_scan(cfg, args) -> int:
    diags: list[str] = []
    files = scan_project(cfg.root, cfg.scan, diags)
    paths = frozenset(f.path for f in files)
    failures = 0
    for f in files:
        try:
            units = parse_file(f, paths)
            print(f"{f.path}\t{len(units)} units")
        except ParseError as exc:
            failures += 1
            print(f"{f.path}\tPARSE FAILURE {exc}")
    for d in diags:
        print(f"diagnostic: {d}", file=sys.stderr)
    return EXIT_FLAGGED if failures or diags else EXIT_OK


def _cmd_build(cfg, args) -> int:
    out = Path(args.out) if args.out else cfg.repository
    if out is None:
        print("error: no repository path (set 'repository' in the config or pass --out)", file=sys.stderr)
        return EXIT_FATAL
    previous = None
    if (out / INDEX_FILE).exists() and not args.full:
        try:
            previous = DfgRepository.load(out)
        except RepositoryError as exc:
            logger.warning("ignoring unreadable previous repository: %s", exc)
    repo, report = build_repository(cfg.root, cfg.scan, previous, cfg.workers)
    repo.save(out)
    print(f"built {report.functions} functions from {len(report.files)} files into {out}"
          f" ({len(report.reused)} files reused)")
    for path, err in report.parse_failures:
        print(f"parse failure: {err}", file=sys.stderr)
    return EXIT_FLAGGED if report.parse_failures else EXIT_OK


def _open_input(args):
    return sys.stdin if args.input in (None, "-") else args.input


def _cmd_redact(cfg, args) -> int:
    redactor = redactor_from_config(cfg)
    lines, trailing = read_lines(_open_input(args))
    out, report = redactor.redact_lines(lines, explain=bool(args.explain))
    write_lines(sys.stdout if args.output in (None, "-") else args.output, out, trailing)
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    if args.explain:
        Path(args.explain).write_text(
            "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in report.records), encoding="utf-8")
    summary = report.to_dict()
    print(f"{summary['input_lines']} lines in, {summary['output_lines']} out, {summary['tombstones']} tombstones, "
          f"{summary['flagged']} flagged", file=sys.stderr)
    return report.exit_code


def _cmd_explain(cfg, args) -> int:
    redactor = redactor_from_config(cfg)
    lines, _ = read_lines(_open_input(args))
    _, report = redactor.redact_lines(lines, explain=True)
    for r in report.records:
        if args.line is not None and not (r.line_no <= args.line < r.line_no + r.physical_lines):
            continue
        print(json.dumps(r.to_dict(), indent=2, sort_keys=True))
    return report.exit_code


def _cmd_eval(cfg, args) -> int:
    redactor = redactor_from_config(cfg)
    lines, _ = read_lines(_open_input(args))
    _, report = redactor.redact_lines(lines)
    gold = load_gold(args.gold)
    result = evaluate(predictions_from_report(report), gold, n_lines=len(lines))
    d = result.to_dict()
    print(json.dumps(d, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logredact", description="Redact sensitive values in logs using source analysis.")
    p.add_argument("--config", default=DEFAULT_CONFIG_NAME, help="project config file (default: %(default)s)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("scan", help="list project files and parse results")

    b = sub.add_parser("build", help="build and save the graph repository")
    b.add_argument("--out", help="repository directory (overrides the config)")
    b.add_argument("--full", action="store_true", help="ignore any previous repository")

    r = sub.add_parser("redact", help="redact a log")
    r.add_argument("input", nargs="?", help="log file (default: stdin)")
    r.add_argument("-o", "--output", help="output file (default: stdout)")
    r.add_argument("--report", help="write the run report (JSON) here")
    r.add_argument("--explain", help="write per-record provenance (JSON lines) here")

    e = sub.add_parser("explain", help="show provenance for log records")
    e.add_argument("input", nargs="?", help="log file (default: stdin)")
    e.add_argument("--line", type=int, help="only the record covering this line")

    ev = sub.add_parser("eval", help="precision and recall against gold labels")
    ev.add_argument("input", help="log file")
    ev.add_argument("--gold", required=True, help="gold labels (JSON lines)")
    return p


COMMANDS = {"scan": _cmd_scan, "build": _cmd_build, "redact": _cmd_redact, "explain": _cmd_explain,
            "eval": _cmd_eval}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValidationError, ScanError, RepositoryError, EvalInputError, PatternError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
