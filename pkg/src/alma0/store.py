"""Cells, arrays, frames and the trail.

A cell holds either a value or the ``UNKNOWN`` sentinel. Every mutation goes
through :meth:`Trail.write`, which logs the prior state so it can be rolled
back with :meth:`Trail.undo_to`.
"""

from __future__ import annotations

from .errors import AlmaRuntimeError, InternalError, UninitializedError


class _Unknown:
    __slots__ = ()

    def __repr__(self):
        return "UNKNOWN"

    def __reduce__(self):
        return "UNKNOWN"


UNKNOWN = _Unknown()


class Cell:
    __slots__ = ("v",)

    def __init__(self, v=UNKNOWN):
        self.v = v

    @property
    def known(self) -> bool:
        return self.v is not UNKNOWN

    def __repr__(self):
        return f"Cell({self.v!r})"


class ArrayObject:
    """Row-major block of cells with per-dimension inclusive bounds."""

    __slots__ = ("dims", "cells", "strides")

    def __init__(self, dims, cells=None):
        self.dims = tuple(dims)
        n = 1
        strides = []
        for lo, hi in reversed(self.dims):
            strides.append(n)
            n *= hi - lo + 1
        self.strides = tuple(reversed(strides))
        self.cells = cells if cells is not None else [Cell() for _ in range(n)]
        if len(self.cells) != n:
            raise InternalError(f"array of {n} cells built with {len(self.cells)}")

    def offset(self, indexes) -> int:
        off = 0
        for i, (lo, hi), stride in zip(indexes, self.dims, self.strides):
            if not lo <= i <= hi:
                raise AlmaRuntimeError(f"index {i} out of range [{lo}..{hi}]")
            off += (i - lo) * stride
        return off

    def cell(self, *indexes) -> Cell:
        return self.cells[self.offset(indexes)]

    def copy(self) -> "ArrayObject":
        return ArrayObject(self.dims, [Cell(c.v) for c in self.cells])

    def known(self) -> bool:
        return all(c.v is not UNKNOWN for c in self.cells)

    def values(self) -> list:
        return [c.v for c in self.cells]

    def __repr__(self):
        return f"ArrayObject({list(self.dims)}, {self.values()!r})"


class Frame:
    """Activation record. ``parent`` is the static link; ``kret`` the return continuation."""

    __slots__ = ("slots", "parent", "kret", "proc")

    def __init__(self, slots, parent=None, proc=None):
        self.slots = slots
        self.parent = parent
        self.kret = None
        self.proc = proc


class Trail:
    """Undo log of ``(cell, prior value)`` pairs. A mark is a log length."""

    __slots__ = ("entries",)

    def __init__(self):
        self.entries = []

    def __len__(self):
        return len(self.entries)

    def mark(self) -> int:
        return len(self.entries)

    def write(self, cell: Cell, v):
        self.entries.append((cell, cell.v))
        cell.v = v

    def undo_to(self, m: int):
        entries = self.entries
        if not 0 <= m <= len(entries):
            raise InternalError(f"invalid trail mark {m} (length {len(entries)})")
        while len(entries) > m:
            cell, prior = entries.pop()
            cell.v = prior


def write_cell(cell: Cell, v, trail: Trail, bounds=None):
    """Checked, trailed write. ``bounds`` is an inclusive (lo, hi) pair or None."""
    if bounds is not None and not bounds[0] <= v <= bounds[1]:
        raise AlmaRuntimeError(f"value {v} out of range [{bounds[0]}..{bounds[1]}]")
    trail.write(cell, v)


def read_cell(cell: Cell, name: str = "variable"):
    v = cell.v
    if v is UNKNOWN:
        raise UninitializedError(f"uninitialized {name}")
    return v


def known(target) -> bool:
    """KNOWN: a cell is known when it holds a value, an array when all its cells do."""
    if isinstance(target, ArrayObject):
        return target.known()
    return target.v is not UNKNOWN


def mark(trail: Trail) -> int:
    return trail.mark()


def undo_to(trail: Trail, m: int):
    trail.undo_to(m)
