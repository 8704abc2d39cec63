"""An interpreter for Alma-0, Modula-2 extended with backtracking."""

from .engine import Engine, Limits, RunResult, Tracer, run
from .errors import AlmaError
from .syntax import dump, parse, pretty, resolve, tokenize


def compile_source(source: str):
    """Parse and resolve ``source``; raises AlmaError subclasses on bad programs."""
    return resolve(parse(source))


def run_source(source: str, limits: Limits | None = None, out=None, trace=None) -> RunResult:
    return run(compile_source(source), limits, out, trace)


__all__ = ["Engine", "Limits", "RunResult", "Tracer", "run", "AlmaError", "dump", "parse",
           "pretty", "resolve", "tokenize", "compile_source", "run_source"]
