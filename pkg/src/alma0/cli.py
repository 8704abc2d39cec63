"""Command-line driver: ``alma run FILE`` and ``alma dump-ast FILE``."""

from __future__ import annotations

import argparse
import sys

from .engine import Limits, Tracer, run
from .errors import AlmaError, LexError, ParseError, ResolveError
from .syntax import dump, parse, resolve

EXIT_SUCCEEDED = 0
EXIT_FAILED = 1
EXIT_RUNTIME_ERROR = 2
EXIT_STATIC_ERROR = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    defaults = Limits()
    p = _Parser(prog="alma", description="Run Alma-0 programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="execute a program")
    r.add_argument("source", help="path to a .a0 file")
    r.add_argument("--trace", action="store_true", help="write EVENT lines to stderr")
    r.add_argument("--max-steps", type=_positive, default=defaults.max_steps)
    r.add_argument("--max-choicepoints", type=_positive, default=defaults.max_choicepoints)
    r.add_argument("--max-solutions", type=_positive, default=defaults.max_solutions,
                   help="top-level solutions to find before stopping (default 1)")
    d = sub.add_parser("dump-ast", help="print the parsed syntax tree")
    d.add_argument("source", help="path to a .a0 file")
    return p


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}")


def _located(path, err: AlmaError) -> str:
    sep = ":" if err.span is not None else ": "
    return f"{path}{sep}{err}"


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        source = _read(args.source)
    except UsageError as e:
        print(f"alma: usage error: {e}", file=stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_SUCCEEDED if not e.code else EXIT_USAGE

    try:
        tree = parse(source)
        if args.command == "dump-ast":
            stdout.write(dump(tree))
            return EXIT_SUCCEEDED
        checked = resolve(tree)
    except (LexError, ParseError, ResolveError) as e:
        print(_located(args.source, e), file=stderr)
        return EXIT_STATIC_ERROR

    limits = Limits(args.max_steps, args.max_choicepoints, args.max_solutions)
    tracer = Tracer(stderr) if args.trace else None
    result = run(checked, limits, out=stdout, trace=tracer)
    stdout.flush()
    if result.status == "succeeded":
        return EXIT_SUCCEEDED
    if result.status == "failed":
        print("alma: no solution", file=stderr)
        return EXIT_FAILED
    print(_located(args.source, result.error), file=stderr)
    return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
