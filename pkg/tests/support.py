"""Helpers shared by the test modules."""

from __future__ import annotations

import io

import alma0
from alma0.engine import Engine, Limits

DEFAULT_DECLS = "VAR x, y, z, n, i, j, k: INTEGER;\n    b: BOOLEAN;\n    a: ARRAY [1..5] OF INTEGER;"


def module(body: str, decls: str = DEFAULT_DECLS, name: str = "t") -> str:
    return f"MODULE {name};\n{decls}\nBEGIN\n{body}\nEND {name}.\n"


def run_body(body: str, decls: str = DEFAULT_DECLS, limits: Limits | None = None, trace=None):
    return alma0.run_source(module(body, decls), limits, trace=trace)


def run_src(source: str, limits: Limits | None = None, trace=None):
    return alma0.run_source(source, limits, trace=trace)


def engine_for(source: str, limits: Limits | None = None, trace=None) -> Engine:
    return Engine(alma0.compile_source(source), limits, trace=trace)


class EventLog:
    """Tracer that keeps (kind, detail) pairs and can snapshot the engine on demand."""

    def __init__(self):
        self.events = []
        self.engine = None
        self.snapshots = []
        self.snap_on = ()

    def __call__(self, kind, span, detail=""):
        self.events.append((kind, detail))
        if kind in self.snap_on and self.engine is not None:
            self.snapshots.append((kind, detail, self.engine.snapshot()))


def text_trace():
    buf = io.StringIO()
    return buf, alma0.Tracer(buf)
