"""Name resolution, constant folding and light type checking."""

from __future__ import annotations

import copy
from dataclasses import dataclass

from ..errors import ResolveError
from . import ast
from .types import (BOOLEAN, INTEGER, ArrayType, ConstSym, EnumType, ProcSym,
                    SubrangeType, TypeSym, VarSym, bounds, compatible, ordinal,
                    same_storage)

# Native procedures; their names cannot be redeclared.
BUILTIN_PROCEDURES = ("Print", "PrintSolution")

_ARITH = ("+", "-", "*", "DIV", "MOD")
_ORDER = ("<", "<=", ">", ">=")


@dataclass
class CheckedProgram:
    program: ast.Program
    main: ProcSym  # pseudo-procedure owning the module-level frame
    procedures: list[ProcSym]


class Scope:
    def __init__(self, parent, level: int, owner: ProcSym | None = None):
        self.parent = parent
        self.level = level
        self.owner = owner
        self.names: dict = {}

    def lookup(self, name):
        s = self
        while s is not None:
            if name in s.names:
                return s.names[name]
            s = s.parent
        return None

    def declare(self, name, sym, span):
        if name in BUILTIN_PROCEDURES:
            raise ResolveError(f"'{name}' is a built-in procedure and cannot be redeclared", span)
        if name in self.names:
            raise ResolveError(f"duplicate declaration of '{name}'", span)
        self.names[name] = sym


def _is_designator(e) -> bool:
    if isinstance(e, ast.Index):
        return True
    return isinstance(e, ast.Name) and isinstance(e.sym, VarSym)


class Resolver:
    def __init__(self):
        self.procedures: list[ProcSym] = []
        self.proc: ProcSym | None = None
        self.barrier = 0  # depth of COMMIT/NOT/FORALL nesting in the current body

    # declarations

    def program(self, prog: ast.Program) -> CheckedProgram:
        main = ProcSym(prog.name, level=0)
        scope = Scope(None, 0, main)
        pending = self.decls(prog.decls, scope, main)
        for decl, body_scope in pending:
            self.body(decl, body_scope)
        self.proc, self.barrier = None, 0
        self.stmts(prog.body, scope)
        return CheckedProgram(prog, main, self.procedures)

    def decls(self, decls, scope: Scope, owner: ProcSym):
        """Declare everything in order; procedure bodies are returned for a second pass."""
        pending = []
        for d in decls:
            if isinstance(d, ast.ConstDecl):
                value, t = self.const_value(d.value, scope)
                scope.declare(d.name, ConstSym(d.name, value, t), d.span)
            elif isinstance(d, ast.TypeDecl):
                scope.declare(d.name, TypeSym(d.name, self.type(d.type, scope, d.name)), d.span)
            elif isinstance(d, ast.VarDecl):
                t = self.type(d.type, scope)
                for n in d.names:
                    v = VarSym(n, t, scope.level, len(owner.slots))
                    owner.slots.append(v)
                    scope.declare(n, v, d.span)
            elif isinstance(d, ast.ProcDecl):
                pending.append(self.header(d, scope))
        return pending

    def header(self, d: ast.ProcDecl, scope: Scope):
        sym = ProcSym(d.name, level=scope.level + 1, decl=d)
        d.sym = sym
        scope.declare(d.name, sym, d.span)
        inner = Scope(scope, scope.level + 1, sym)
        for p in d.params:
            t = self.type(p.type, scope)
            if p.mode == "MIX" and not t.simple:
                raise ResolveError("MIX parameters must have a simple type", p.span)
            for n in p.names:
                v = VarSym(n, t, inner.level, len(sym.slots), p.mode)
                sym.slots.append(v)
                sym.params.append(v)
                inner.declare(n, v, p.span)
        if d.result is not None:
            sym.result = self.type(d.result, scope)
        self.procedures.append(sym)
        return d, inner

    def body(self, d: ast.ProcDecl, scope: Scope):
        pending = self.decls(d.decls, scope, d.sym)
        for inner_decl, inner_scope in pending:
            self.body(inner_decl, inner_scope)
        saved = self.proc, self.barrier
        self.proc, self.barrier = d.sym, 0
        self.stmts(d.body, scope)
        self.proc, self.barrier = saved

    def type(self, node, scope: Scope, name: str = ""):
        if isinstance(node, ast.NamedType):
            if node.name == "INTEGER":
                return INTEGER
            if node.name == "BOOLEAN":
                return BOOLEAN
            sym = scope.lookup(node.name)
            if sym is None:
                raise ResolveError(f"undeclared type '{node.name}'", node.span)
            if not isinstance(sym, TypeSym):
                raise ResolveError(f"'{node.name}' is not a type", node.span)
            return sym.type
        if isinstance(node, ast.EnumTypeExpr):
            t = EnumType(name or "enum", node.names)
            for i, n in enumerate(node.names):
                scope.declare(n, ConstSym(n, i, t), node.span)
            return t
        if isinstance(node, ast.SubrangeTypeExpr):
            lo, lt = self.const_value(node.lo, scope)
            hi, ht = self.const_value(node.hi, scope)
            if not (ordinal(lt) and compatible(lt, ht)):
                raise ResolveError("subrange bounds must be constants of one ordinal type", node.span)
            if lo > hi:
                raise ResolveError(f"empty subrange [{lo}..{hi}]", node.span)
            return SubrangeType(lt.base(), lo, hi)
        if isinstance(node, ast.ArrayTypeExpr):
            dims, index_types = [], []
            for ix in node.indexes:
                it = self.type(ix, scope)
                b = bounds(it)
                if b is None:
                    raise ResolveError("array index type must be a subrange or enumeration", ix.span)
                dims.append(b)
                index_types.append(it)
            elem = self.type(node.element, scope)
            if not elem.simple:
                raise ResolveError("array elements must have a simple type", node.element.span)
            return ArrayType(dims, elem, index_types)
        raise ResolveError("bad type", getattr(node, "span", None))

    def const_value(self, e, scope: Scope):
        """Fold a constant expression to (value, type)."""
        if isinstance(e, ast.IntLit):
            return e.value, INTEGER
        if isinstance(e, ast.BoolLit):
            return e.value, BOOLEAN
        if isinstance(e, ast.Name):
            sym = scope.lookup(e.name)
            if sym is None:
                raise ResolveError(f"undeclared identifier '{e.name}'", e.span)
            if not isinstance(sym, ConstSym):
                raise ResolveError(f"'{e.name}' is not a constant", e.span)
            return sym.value, sym.type
        if isinstance(e, ast.Unary):
            v, t = self.const_value(e.operand, scope)
            if e.op == "NOT" and t is BOOLEAN:
                return not v, BOOLEAN
            if e.op in "+-" and t.base() is INTEGER:
                return (-v if e.op == "-" else v), INTEGER
        if isinstance(e, ast.Binary):
            a, at = self.const_value(e.left, scope)
            b, bt = self.const_value(e.right, scope)
            if e.op in _ARITH and at.base() is INTEGER and bt.base() is INTEGER:
                if e.op in ("DIV", "MOD") and b == 0:
                    raise ResolveError("division by zero in constant", e.span)
                return {"+": a + b, "-": a - b, "*": a * b,
                        "DIV": a // b if b else 0, "MOD": a % b if b else 0}[e.op], INTEGER
            if e.op in ("AND", "OR") and at is BOOLEAN and bt is BOOLEAN:
                return (a and b) if e.op == "AND" else (a or b), BOOLEAN
            if compatible(at, bt) and (e.op in ("=", "<>") or (e.op in _ORDER and ordinal(at))):
                return {"=": a == b, "<>": a != b, "<": a < b, "<=": a <= b,
                        ">": a > b, ">=": a >= b}[e.op], BOOLEAN
        raise ResolveError("expression is not a valid constant", getattr(e, "span", None))

    # statements

    def stmts(self, stmts, scope):
        for i, s in enumerate(stmts):
            stmts[i] = self.stmt(s, scope)

    def stmt(self, s, scope):
        if isinstance(s, ast.Assign):
            s.target = self.designator(s.target, scope, "assignment target")
            s.value = self.expr(s.value, scope)
            t, v = s.target.type, s.value.type
            if not compatible(t, v):
                raise ResolveError(f"cannot assign {v!r} to {t!r}", s.span)
            if not t.simple and not (_is_designator(s.value) or isinstance(s.value, ast.Call)):
                raise ResolveError("array assignment needs an array variable or function result", s.span)
        elif isinstance(s, ast.ExprStmt):
            s.expr = self.statement_expr(s.expr, scope)
        elif isinstance(s, ast.If):
            s.cond = self.condition(s.cond, scope)
            self.stmts(s.then, scope)
            if s.orelse is not None:
                self.stmts(s.orelse, scope)
        elif isinstance(s, ast.While):
            s.cond = self.condition(s.cond, scope)
            self.stmts(s.body, scope)
        elif isinstance(s, (ast.For, ast.Some)):
            s.var = self.designator(s.var, scope, "control variable")
            if not ordinal(s.var.type):
                raise ResolveError("control variable must have an ordinal type", s.var.span)
            s.lo = self.expr(s.lo, scope)
            s.hi = self.expr(s.hi, scope)
            for b in (s.lo, s.hi):
                if not (b.type is not None and b.type.simple and compatible(b.type, s.var.type)):
                    raise ResolveError("bound does not match control variable type", b.span)
            self.stmts(s.body, scope)
        elif isinstance(s, ast.Either):
            for b in s.branches:
                self.stmts(b, scope)
        elif isinstance(s, ast.Forall):
            self.barrier += 1
            self.stmts(s.generator, scope)
            self.stmts(s.body, scope)
            self.barrier -= 1
        elif isinstance(s, ast.Commit):
            self.barrier += 1
            self.stmts(s.body, scope)
            self.barrier -= 1
        elif isinstance(s, ast.Not):
            self.barrier += 1
            s.body = self.stmt(s.body, scope)
            self.barrier -= 1
        elif isinstance(s, ast.Return):
            self.return_stmt(s, scope)
        elif isinstance(s, ast.Write):
            for i, a in enumerate(s.args):
                if isinstance(a, ast.StrLit):
                    continue
                a = s.args[i] = self.expr(a, scope)
                if a.type is None or not a.type.simple:
                    raise ResolveError("WRITE arguments must be simple values or strings", a.span)
        else:
            raise ResolveError(f"unsupported statement {type(s).__name__}", getattr(s, "span", None))
        return s

    def return_stmt(self, s, scope):
        p = self.proc
        if p is None:
            raise ResolveError("RETURN outside a procedure", s.span)
        if self.barrier:
            raise ResolveError("RETURN inside COMMIT, NOT or FORALL is not supported", s.span)
        if p.is_function:
            if s.value is None:
                raise ResolveError(f"function '{p.name}' must return a value", s.span)
            s.value = self.expr(s.value, scope)
            if not compatible(p.result, s.value.type):
                raise ResolveError("returned value does not match the result type", s.value.span)
            if not p.result.simple and not (_is_designator(s.value) or isinstance(s.value, ast.Call)):
                raise ResolveError("array result needs an array variable or function result", s.span)
        elif s.value is not None:
            raise ResolveError(f"procedure '{p.name}' does not return a value", s.span)

    def statement_expr(self, e, scope):
        if isinstance(e, ast.Name):
            sym = scope.lookup(e.name)
            if isinstance(sym, ProcSym) or e.name in BUILTIN_PROCEDURES and sym is None:
                e = ast.Call(e.name, [], span=e.span)
        if isinstance(e, ast.Call):
            if e.name in BUILTIN_PROCEDURES:
                return self.builtin_call(e, scope)
            e = self.call(e, scope)
            if e.sym.is_function and e.type is not BOOLEAN:
                raise ResolveError(f"result of function '{e.name}' is not used", e.span)
            return e
        if isinstance(e, ast.Binary) and e.op == "=":
            e.left = self.expr(e.left, scope)
            e.right = self.expr(e.right, scope)
            lt, rt = e.left.type, e.right.type
            if not (lt.simple and rt.simple and compatible(lt, rt)):
                raise ResolveError(f"cannot compare {lt!r} with {rt!r}", e.span)
            e.type = BOOLEAN
            return e
        return self.condition(e, scope)

    def builtin_call(self, e: ast.Call, scope):
        e.args = [self.expr(a, scope) for a in e.args]
        e.sym = e.name
        if e.name == "Print":
            if len(e.args) != 1:
                raise ResolveError("Print takes one argument", e.span)
        elif e.name == "PrintSolution":
            if len(e.args) != 2 or any(a.type.simple for a in e.args):
                raise ResolveError("PrintSolution takes two arrays", e.span)
        return e

    def condition(self, e, scope):
        e = self.expr(e, scope)
        if e.type is not BOOLEAN:
            raise ResolveError(f"expected a BOOLEAN expression, got {e.type!r}", e.span)
        return e

    # expressions

    def designator(self, e, scope, what):
        e = self.expr(e, scope)
        if not _is_designator(e):
            raise ResolveError(f"{what} must be a variable", e.span)
        return e

    def expr(self, e, scope):
        if isinstance(e, ast.IntLit):
            e.type = INTEGER
        elif isinstance(e, ast.BoolLit):
            e.type = BOOLEAN
        elif isinstance(e, ast.StrLit):
            raise ResolveError("string literal outside WRITE", e.span)
        elif isinstance(e, ast.Name):
            sym = scope.lookup(e.name)
            if sym is None:
                if e.name in BUILTIN_PROCEDURES:
                    raise ResolveError(f"built-in '{e.name}' is a statement", e.span)
                raise ResolveError(f"undeclared identifier '{e.name}'", e.span)
            if isinstance(sym, ProcSym):
                return self.expr(ast.Call(e.name, [], span=e.span), scope)
            if isinstance(sym, TypeSym):
                raise ResolveError(f"type '{e.name}' used as a value", e.span)
            e.sym = sym
            e.type = sym.type
        elif isinstance(e, ast.Index):
            e.base = self.expr(e.base, scope)
            bt = e.base.type
            if not (isinstance(e.base, ast.Name) and isinstance(e.base.sym, VarSym)
                    and isinstance(bt, ArrayType)):
                raise ResolveError("indexed name is not an array variable", e.span)
            if len(e.indexes) != len(bt.dims):
                raise ResolveError(f"array needs {len(bt.dims)} index(es), got {len(e.indexes)}", e.span)
            e.indexes = [self.expr(i, scope) for i in e.indexes]
            for i, it in zip(e.indexes, bt.index_types):
                if not (i.type.simple and compatible(i.type, it)):
                    raise ResolveError("index type mismatch", i.span)
            e.type = bt.element
        elif isinstance(e, ast.Call):
            if e.name in BUILTIN_PROCEDURES:
                raise ResolveError(f"built-in '{e.name}' is a statement", e.span)
            e = self.call(e, scope)
            if not e.sym.is_function:
                e.type = BOOLEAN  # statement used as an expression
        elif isinstance(e, ast.Known):
            e.arg = self.expr(e.arg, scope)
            if not _is_designator(e.arg):
                raise ResolveError("KNOWN needs a variable", e.arg.span)
            e.type = BOOLEAN
        elif isinstance(e, ast.Unary):
            e.operand = self.expr(e.operand, scope)
            t = e.operand.type
            if e.op == "NOT":
                if t is not BOOLEAN:
                    raise ResolveError("NOT needs a BOOLEAN operand", e.span)
                e.type = BOOLEAN
            else:
                if t is None or t.base() is not INTEGER:
                    raise ResolveError(f"unary '{e.op}' needs an INTEGER operand", e.span)
                e.type = INTEGER
        elif isinstance(e, ast.Binary):
            e.left = self.expr(e.left, scope)
            e.right = self.expr(e.right, scope)
            lt, rt = e.left.type, e.right.type
            if not (lt.simple and rt.simple):
                raise ResolveError(f"operator '{e.op}' needs simple operands", e.span)
            if e.op in _ARITH:
                if lt.base() is not INTEGER or rt.base() is not INTEGER:
                    raise ResolveError(f"operator '{e.op}' needs INTEGER operands", e.span)
                e.type = INTEGER
            elif e.op in ("AND", "OR"):
                if lt is not BOOLEAN or rt is not BOOLEAN:
                    raise ResolveError(f"operator '{e.op}' needs BOOLEAN operands", e.span)
                e.type = BOOLEAN
            else:
                if not compatible(lt, rt):
                    raise ResolveError(f"cannot compare {lt!r} with {rt!r}", e.span)
                if e.op in _ORDER and not ordinal(lt):
                    raise ResolveError(f"operator '{e.op}' needs ordinal operands", e.span)
                e.type = BOOLEAN
        else:
            raise ResolveError(f"unsupported expression {type(e).__name__}", getattr(e, "span", None))
        return e

    def call(self, e: ast.Call, scope):
        sym = scope.lookup(e.name)
        if sym is None:
            raise ResolveError(f"undeclared procedure '{e.name}'", e.span)
        if not isinstance(sym, ProcSym):
            raise ResolveError(f"'{e.name}' is not a procedure", e.span)
        if len(e.args) != len(sym.params):
            raise ResolveError(f"'{e.name}' expects {len(sym.params)} argument(s), got {len(e.args)}", e.span)
        args = []
        for a, p in zip(e.args, sym.params):
            a = self.expr(a, scope)
            if p.mode == "VAR":
                if not _is_designator(a):
                    raise ResolveError(f"VAR parameter '{p.name}' needs a variable", a.span)
                if not same_storage(p.type, a.type):
                    raise ResolveError(f"argument for VAR parameter '{p.name}' has type {a.type!r}, "
                                       f"expected {p.type!r}", a.span)
            elif p.mode == "MIX":
                ok = same_storage(p.type, a.type) if _is_designator(a) else compatible(p.type, a.type)
                if not ok:
                    raise ResolveError(f"argument for MIX parameter '{p.name}' has type {a.type!r}, "
                                       f"expected {p.type!r}", a.span)
            else:
                if not compatible(p.type, a.type):
                    raise ResolveError(f"argument for '{p.name}' has type {a.type!r}, "
                                       f"expected {p.type!r}", a.span)
                if not p.type.simple and not (_is_designator(a) or isinstance(a, ast.Call)):
                    raise ResolveError("array argument must be a variable or function result", a.span)
            args.append(a)
        e.args = args
        e.sym = sym
        e.type = sym.result
        return e


def resolve(program: ast.Program) -> CheckedProgram:
    """Bind names and check a parsed program. The input tree is not modified."""
    return Resolver().program(copy.deepcopy(program))
