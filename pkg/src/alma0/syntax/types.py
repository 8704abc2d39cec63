"""Semantic types and symbols produced by the resolver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


class Type:
    simple = True

    def base(self) -> "Type":
        return self


class _Integer(Type):
    def __repr__(self):
        return "INTEGER"


class _Boolean(Type):
    def __repr__(self):
        return "BOOLEAN"


INTEGER = _Integer()
BOOLEAN = _Boolean()


class EnumType(Type):
    def __init__(self, name: str, members: list[str]):
        self.name = name
        self.members = list(members)

    def __repr__(self):
        return f"({', '.join(self.members)})"


class SubrangeType(Type):
    def __init__(self, base: Type, lo: int, hi: int):
        self._base = base
        self.lo = lo
        self.hi = hi

    def base(self):
        return self._base

    def __repr__(self):
        return f"[{self.lo}..{self.hi}]"


class ArrayType(Type):
    simple = False

    def __init__(self, dims: list[tuple[int, int]], element: Type, index_types=None):
        self.dims = list(dims)
        self.element = element
        self.index_types = index_types or [INTEGER] * len(self.dims)

    @property
    def size(self):
        n = 1
        for lo, hi in self.dims:
            n *= hi - lo + 1
        return n

    def __repr__(self):
        return f"ARRAY {', '.join(f'[{lo}..{hi}]' for lo, hi in self.dims)} OF {self.element!r}"


def bounds(t: Type) -> Optional[tuple[int, int]]:
    """Inclusive value bounds enforced on writes, or None for unbounded INTEGER."""
    if isinstance(t, SubrangeType):
        return t.lo, t.hi
    if isinstance(t, EnumType):
        return 0, len(t.members) - 1
    return None


def compatible(a: Type, b: Type) -> bool:
    if a.simple and b.simple:
        return a.base() is b.base()
    if isinstance(a, ArrayType) and isinstance(b, ArrayType):
        return (len(a.dims) == len(b.dims)
                and all(x[1] - x[0] == y[1] - y[0] for x, y in zip(a.dims, b.dims))
                and compatible(a.element, b.element))
    return False


def same_storage(a: Type, b: Type) -> bool:
    """Whether storage of type ``b`` may be aliased by a formal of type ``a``."""
    if not compatible(a, b):
        return False
    if isinstance(a, ArrayType):
        return a.dims == b.dims and bounds(a.element) == bounds(b.element)
    return bounds(a) == bounds(b)


def ordinal(t: Type) -> bool:
    b = t.base()
    return b is INTEGER or isinstance(b, EnumType)


# symbols

@dataclass
class ConstSym:
    name: str
    value: Any
    type: Type


@dataclass
class TypeSym:
    name: str
    type: Type


@dataclass
class VarSym:
    name: str
    type: Type
    level: int
    index: int
    mode: Optional[str] = None  # parameter passing mode, None for plain variables


@dataclass
class ProcSym:
    name: str
    level: int  # nesting level of the body frame
    params: list[VarSym] = field(default_factory=list)
    result: Optional[Type] = None
    slots: list[VarSym] = field(default_factory=list)
    decl: Any = None
    builtin: bool = False

    @property
    def is_function(self):
        return self.result is not None
