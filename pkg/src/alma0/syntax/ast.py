"""AST node classes.

Spans and resolver annotations are excluded from equality so that two trees
parsed from differently formatted text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import SourceSpan


def _meta(default=None):
    return field(default=default, compare=False, repr=False)


@dataclass
class Node:
    pass


# type expressions

@dataclass
class NamedType(Node):
    name: str
    span: Optional[SourceSpan] = _meta()


@dataclass
class EnumTypeExpr(Node):
    names: list[str]
    span: Optional[SourceSpan] = _meta()


@dataclass
class SubrangeTypeExpr(Node):
    lo: "Expr"
    hi: "Expr"
    span: Optional[SourceSpan] = _meta()


@dataclass
class ArrayTypeExpr(Node):
    indexes: list[Node]
    element: Node
    span: Optional[SourceSpan] = _meta()


# expressions

@dataclass
class Expr(Node):
    pass


@dataclass
class IntLit(Expr):
    value: int
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()


@dataclass
class BoolLit(Expr):
    value: bool
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()


@dataclass
class StrLit(Expr):
    value: str
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()


@dataclass
class Name(Expr):
    name: str
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()
    sym: Any = _meta()


@dataclass
class Index(Expr):
    base: Expr
    indexes: list[Expr]
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()


@dataclass
class Call(Expr):
    name: str
    args: list[Expr]
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()
    sym: Any = _meta()


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()


@dataclass
class Unary(Expr):
    op: str
    operand: Expr
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()


@dataclass
class Known(Expr):
    arg: Expr
    span: Optional[SourceSpan] = _meta()
    type: Any = _meta()


# statements

@dataclass
class Stmt(Node):
    pass


@dataclass
class Assign(Stmt):
    target: Expr
    value: Expr
    span: Optional[SourceSpan] = _meta()


@dataclass
class ExprStmt(Stmt):
    """Boolean test, generalized equality, or procedure call in statement position."""

    expr: Expr
    span: Optional[SourceSpan] = _meta()


@dataclass
class If(Stmt):
    cond: Expr
    then: list[Stmt]
    orelse: Optional[list[Stmt]]
    span: Optional[SourceSpan] = _meta()


@dataclass
class While(Stmt):
    cond: Expr
    body: list[Stmt]
    span: Optional[SourceSpan] = _meta()


@dataclass
class For(Stmt):
    var: Name
    lo: Expr
    hi: Expr
    body: list[Stmt]
    span: Optional[SourceSpan] = _meta()


@dataclass
class Some(Stmt):
    var: Name
    lo: Expr
    hi: Expr
    body: list[Stmt]
    span: Optional[SourceSpan] = _meta()


@dataclass
class Either(Stmt):
    branches: list[list[Stmt]]
    span: Optional[SourceSpan] = _meta()


@dataclass
class Forall(Stmt):
    generator: list[Stmt]
    body: list[Stmt]
    span: Optional[SourceSpan] = _meta()


@dataclass
class Commit(Stmt):
    body: list[Stmt]
    span: Optional[SourceSpan] = _meta()


@dataclass
class Not(Stmt):
    body: Stmt
    span: Optional[SourceSpan] = _meta()


@dataclass
class Return(Stmt):
    value: Optional[Expr]
    span: Optional[SourceSpan] = _meta()


@dataclass
class Write(Stmt):
    args: list[Expr]
    newline: bool
    span: Optional[SourceSpan] = _meta()


# declarations

@dataclass
class ConstDecl(Node):
    name: str
    value: Expr
    span: Optional[SourceSpan] = _meta()


@dataclass
class TypeDecl(Node):
    name: str
    type: Node
    span: Optional[SourceSpan] = _meta()


@dataclass
class VarDecl(Node):
    names: list[str]
    type: Node
    span: Optional[SourceSpan] = _meta()


@dataclass
class Param(Node):
    mode: str  # "value" | "VAR" | "MIX"
    names: list[str]
    type: Node
    span: Optional[SourceSpan] = _meta()


@dataclass
class ProcDecl(Node):
    name: str
    params: list[Param]
    result: Optional[Node]
    decls: list[Node]
    body: list[Stmt]
    span: Optional[SourceSpan] = _meta()
    sym: Any = _meta()


@dataclass
class Program(Node):
    name: str
    decls: list[Node]
    body: list[Stmt]
    span: Optional[SourceSpan] = _meta()


def walk(node):
    """Yield ``node`` and every node below it, depth first."""
    yield node
    for f in node.__dataclass_fields__.values():
        if not f.compare:
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield from walk(value)
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, Node):
                    yield from walk(item)
                elif isinstance(item, list):
                    for sub in item:
                        yield from walk(sub)
