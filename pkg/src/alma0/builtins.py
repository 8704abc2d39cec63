"""Output formatting and the native procedures Print and PrintSolution."""

from __future__ import annotations

from .store import UNKNOWN, ArrayObject
from .syntax.types import BOOLEAN, EnumType, Type

NATIVE = ("Print", "PrintSolution")


def format_value(v, t: Type) -> str:
    """WRITE rendering: minimal decimal, TRUE/FALSE, or the enumeration identifier."""
    base = t.base()
    if base is BOOLEAN:
        return "TRUE" if v else "FALSE"
    if isinstance(base, EnumType):
        return base.members[v]
    return str(v)


def _cell_text(v, t: Type) -> str:
    return "." if v is UNKNOWN else format_value(v, t)


def _rows(arr: ArrayObject):
    width = arr.dims[-1][1] - arr.dims[-1][0] + 1
    cells = arr.cells
    for start in range(0, len(cells), width):
        yield cells[start:start + width]


def format_board(arr: ArrayObject, element: Type) -> str:
    """Print on an array: one line per combination of leading indices, cells space-separated.

    Unknown cells show as ``.``.
    """
    return "".join(" ".join(_cell_text(c.v, element) for c in row) + "\n" for row in _rows(arr))


def format_solution(timetable: ArrayObject) -> str:
    """PrintSolution: one row per course, 1 where a lecture is scheduled, 0 otherwise."""
    def bit(v):
        if v is UNKNOWN:
            return "."
        return "1" if v else "0"
    return "".join(" ".join(bit(c.v) for c in row) + "\n" for row in _rows(timetable))


def known_builtin(target) -> bool:
    if isinstance(target, ArrayObject):
        return target.known()
    return target.v is not UNKNOWN
