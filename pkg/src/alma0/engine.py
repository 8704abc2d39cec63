"""Backtracking execution engine.

The checked AST is compiled into Python closures. Every statement gets a
continuation-passing entry point ``cps(frame, k)``: success calls ``k()``,
failure returns. A choice point is therefore just a live Python stack frame
inside an EITHER or SOME loop. Before each next alternative runs, the trail
is rolled back to the mark taken when the choice point was entered.

Statements that can never leave a choice point behind also get a direct entry
point ``det(frame) -> bool``. Sequences of such statements run as plain loops,
which keeps the Python stack shallow. COMMIT, NOT and FORALL are always
deterministic from the outside. They run their body in CPS with a continuation
that escapes via an exception, which throws away every choice point the body
left on the stack.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import builtins
from .errors import (AlmaError, AlmaRuntimeError, ChoicePointLimitExceeded,
                     InternalError, StepLimitExceeded, UninitializedError)
from .store import UNKNOWN, ArrayObject, Cell, Frame, Trail
from .syntax import ast
from .syntax.resolver import CheckedProgram
from .syntax.types import ArrayType, ConstSym, ProcSym, VarSym, bounds

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

# Deep backtracking recurses once per pending continuation, so the engine runs
# on its own thread with a large C stack. The Python recursion limit is kept
# well inside that stack (measured: well under 700 bytes of C stack per frame).
_STACK_SIZES = (1024 * 1024 * 1024, 256 * 1024 * 1024, 64 * 1024 * 1024)
_BYTES_PER_FRAME = 1300


@dataclass
class Limits:
    max_steps: int = 50_000_000
    max_choicepoints: int = 1_000_000
    max_solutions: int = 1  # top-level solutions to look for before stopping


@dataclass
class RunResult:
    status: str  # "succeeded" | "failed" | "runtime-error"
    output: str
    error: Optional[AlmaError] = None
    solutions: int = 0
    steps: int = 0
    store: dict = field(default_factory=dict)

    @property
    def succeeded(self):
        return self.status == "succeeded"


class _Escape(Exception):
    """Unwinds a COMMIT/NOT/FORALL body; ``token`` names the catching activation."""

    def __init__(self, token):
        self.token = token


class _Return(Exception):
    """RETURN out of a deterministic proper procedure."""


class _Stop(Exception):
    pass


def _undo(entries, m):
    while len(entries) > m:
        cell, prior = entries.pop()
        cell.v = prior


class Code:
    """Compiled statement or expression.

    ``det`` is None when the construct may leave choice points behind.
    Contract for statements: when ``cps`` returns, or ``det`` returns False,
    every store change made on the way has been undone.
    """

    __slots__ = ("det", "cps")

    def __init__(self, det, cps):
        if cps is None:
            raise InternalError("code without a CPS entry point")
        self.det = det
        self.cps = cps

    @property
    def nd(self):
        return self.det is None


ExprCode = Code


def _lift_stmt(det, entries):
    def cps(fr, k):
        t = len(entries)
        if det(fr):
            k()
            _undo(entries, t)
    return cps


def _lift_expr(det, entries):
    # Only statements used as expressions write to the store.
    def cps(fr, kv):
        t = len(entries)
        kv(det(fr))
        if len(entries) > t:
            _undo(entries, t)
    return cps


class _ProcCode:
    """Filled in after the callee is compiled, so call sites can be built first."""

    __slots__ = ("det", "cps", "nd", "binders", "locals", "has_return")

    def __init__(self):
        self.det = None
        self.cps = None


class Tracer:
    """Formats trace events onto a text sink."""

    def __init__(self, sink):
        self.sink = sink

    def __call__(self, kind: str, span, detail: str = ""):
        loc = f"{span.line}:{span.column}" if span is not None else "0:0"
        self.sink.write(f"EVENT kind={kind} loc={loc} detail={detail}\n")


class _Output:
    def __init__(self, echo=None):
        self.parts: list[str] = []
        self.echo = echo

    def write(self, text: str):
        self.parts.append(text)
        if self.echo is not None:
            self.echo.write(text)

    def getvalue(self):
        return "".join(self.parts)


class Engine:
    """One program, one store, one output sink; single-threaded."""

    def __init__(self, program: CheckedProgram, limits: Limits | None = None,
                 out=None, trace: Callable | None = None):
        self.program = program
        self.limits = limits or Limits()
        self.out = _Output(out)
        self.trace = trace
        self.trail = Trail()
        self.steps = 0
        self.choicepoints = 0
        self.main_frame: Frame | None = None
        self._procs: dict[int, _ProcCode] = {}
        self._body = _Compiler(self).program()

    # helpers used by compiled code

    def step_limit(self):
        raise StepLimitExceeded(f"step limit of {self.limits.max_steps} exceeded")

    def choicepoint_limit(self):
        raise ChoicePointLimitExceeded(f"choice point limit of {self.limits.max_choicepoints} exceeded")

    def snapshot(self) -> dict:
        """Module-level variables by name: plain values, UNKNOWN, or lists for arrays."""
        fr = self.main_frame
        if fr is None:
            return {}
        snap = {}
        for sym, slot in zip(self.program.main.slots, fr.slots):
            snap[sym.name] = slot.values() if isinstance(slot, ArrayObject) else slot.v
        return snap

    def run(self) -> RunResult:
        box = {}

        def target(limit):
            old = sys.getrecursionlimit()
            sys.setrecursionlimit(max(old, limit))
            try:
                box["result"] = self._run()
            except BaseException as e:  # surfaced in the calling thread
                box["exc"] = e
            finally:
                sys.setrecursionlimit(old)

        old_size = threading.stack_size()
        thread = None
        try:
            for size in _STACK_SIZES:
                try:
                    threading.stack_size(size)
                    thread = threading.Thread(target=target, args=(size // _BYTES_PER_FRAME,),
                                              name="alma-engine")
                    thread.start()
                    break
                except (ValueError, RuntimeError, MemoryError):
                    thread = None
        finally:
            threading.stack_size(old_size)
        if thread is None:
            raise InternalError("could not start the engine thread")
        thread.join()
        if "exc" in box:
            raise box["exc"]
        return box["result"]

    def _run(self) -> RunResult:
        solutions = 0
        last_store: dict = {}
        limit = self.limits.max_solutions

        def done():
            nonlocal solutions, last_store
            solutions += 1
            last_store = self.snapshot()
            if solutions >= limit:
                raise _Stop

        start = self.trail.mark()
        try:
            self._body(done)
        except _Stop:
            pass
        except AlmaError as e:
            return RunResult("runtime-error", self.out.getvalue(), e, solutions, self.steps,
                             self.snapshot())
        except RecursionError:
            e = AlmaRuntimeError("nesting too deep")
            return RunResult("runtime-error", self.out.getvalue(), e, solutions, self.steps,
                             self.snapshot())
        if solutions:
            return RunResult("succeeded", self.out.getvalue(), None, solutions, self.steps, last_store)
        if self.trail.mark() != start:
            raise InternalError("trail not restored after failure")
        return RunResult("failed", self.out.getvalue(), None, 0, self.steps, self.snapshot())


class _Compiler:
    def __init__(self, eng: Engine):
        self.eng = eng
        self.entries = eng.trail.entries
        self.level = 0
        self.proc: ProcSym | None = None
        self.nd_procs: set[int] = set()

    def _c(self, det=None, cps=None) -> Code:
        if cps is None:
            cps = _lift_stmt(det, self.entries)
        return Code(det, cps)

    def _x(self, det=None, cps=None) -> Code:
        if cps is None:
            cps = _lift_expr(det, self.entries)
        return Code(det, cps)

    def _writes(self, *exprs) -> bool:
        """Whether evaluating any of ``exprs`` can change the store (a procedure used as a value)."""
        for e in exprs:
            for n in ast.walk(e):
                if isinstance(n, ast.Call) and isinstance(n.sym, ProcSym) and not n.sym.is_function:
                    return True
        return False

    def _guard(self, det):
        """Undo whatever ``det`` wrote when it reports failure."""
        entries = self.entries

        def guarded(fr):
            t = len(entries)
            if det(fr):
                return True
            _undo(entries, t)
            return False
        return guarded

    def _maybe_guard(self, det, *exprs):
        return self._guard(det) if self._writes(*exprs) else det

    def _map(self, code: Code, f) -> Code:
        if code.nd:
            c = code.cps
            return self._x(None, lambda fr, kv: c(fr, lambda v: kv(f(v))))
        d = code.det
        return self._x(lambda fr: f(d(fr)))

    def _combine(self, codes, chain) -> Code:
        if any(c.nd for c in codes):
            return self._x(None, chain)
        dets = [c.det for c in codes]
        return self._x(lambda fr: [d(fr) for d in dets])

    # top level

    def program(self):
        eng = self.eng
        prog = self.eng.program
        self._analyse(prog)
        for p in prog.procedures:
            eng._procs[id(p)] = _ProcCode()
        for p in prog.procedures:
            self._procedure(p)
        self.level, self.proc = 0, None
        body = self.seq(prog.program.body)
        factories = self._factories(prog.main.slots)

        def run(done):
            fr = Frame([f() for f in factories], None, prog.main)
            eng.main_frame = fr
            body.cps(fr, done)
        return run

    def _analyse(self, prog: CheckedProgram):
        """Least fixpoint of 'may leave choice points' over proper procedures."""
        changed = True
        while changed:
            changed = False
            for p in prog.procedures:
                if id(p) in self.nd_procs or p.is_function:
                    continue
                if any(self._stmt_nd(s) for s in p.decl.body):
                    self.nd_procs.add(id(p))
                    changed = True

    def _proc_nd(self, p: ProcSym):
        return p.is_function or id(p) in self.nd_procs

    def _expr_nd(self, e) -> bool:
        for n in ast.walk(e):
            if isinstance(n, ast.Call) and isinstance(n.sym, ProcSym) and n.sym.is_function:
                return True
        return False

    def _stmt_nd(self, s) -> bool:
        if isinstance(s, (ast.Either, ast.Some)):
            return True
        if isinstance(s, (ast.Commit, ast.Not, ast.Forall)):
            return False
        if isinstance(s, ast.Return):
            return self.proc is not None and self._proc_nd(self.proc) or (
                s.value is not None and self._expr_nd(s.value))
        if isinstance(s, ast.ExprStmt) and isinstance(s.expr, ast.Call) and isinstance(s.expr.sym, ProcSym):
            if not s.expr.sym.is_function and self._proc_nd(s.expr.sym):
                return True
            return any(self._expr_nd(a) for a in s.expr.args) or s.expr.sym.is_function
        for f in s.__dataclass_fields__.values():
            if not f.compare:
                continue
            v = getattr(s, f.name)
            if isinstance(v, ast.Expr) and self._expr_nd(v):
                return True
            if isinstance(v, ast.Stmt) and self._stmt_nd(v):
                return True
            if isinstance(v, list):
                for item in v:
                    if isinstance(item, ast.Stmt) and self._stmt_nd(item):
                        return True
                    if isinstance(item, ast.Expr) and self._expr_nd(item):
                        return True
                    if isinstance(item, list) and any(self._stmt_nd(x) for x in item):
                        return True
        return False

    def _factories(self, slots):
        out = []
        for v in slots:
            if isinstance(v.type, ArrayType):
                dims = tuple(v.type.dims)
                out.append(lambda dims=dims: ArrayObject(dims))
            else:
                out.append(Cell)
        return out

    def _procedure(self, p: ProcSym):
        eng = self.eng
        pc = eng._procs[id(p)]
        saved = self.level, self.proc
        self.level, self.proc = p.level, p
        pc.nd = self._proc_nd(p)
        pc.has_return = any(isinstance(n, ast.Return) for s in p.decl.body for n in ast.walk(s))
        pc.locals = self._factories(p.slots[len(p.params):])
        body = self.seq(p.decl.body)
        if pc.nd:
            pc.cps = body.cps
        else:
            if body.det is None:
                raise InternalError(f"procedure {p.name} classified deterministic but is not")
            pc.det = body.det
        self.level, self.proc = saved

    # storage access

    def _frame_at(self, level):
        hops = self.level - level
        if hops == 0:
            return lambda fr: fr
        if hops == 1:
            return lambda fr: fr.parent

        def walk(fr):
            for _ in range(hops):
                fr = fr.parent
            return fr
        return walk

    def loc(self, e) -> ExprCode:
        """Compile a designator to code yielding its Cell or ArrayObject."""
        if isinstance(e, ast.Name):
            sym = e.sym
            idx = sym.index
            hops = self.level - sym.level
            if hops == 0:
                return self._x(lambda fr: fr.slots[idx])
            if hops == 1:
                return self._x(lambda fr: fr.parent.slots[idx])
            up = self._frame_at(sym.level)
            return self._x(lambda fr: up(fr).slots[idx])
        if isinstance(e, ast.Index):
            base = self.loc(e.base)
            idx = [self.expr(i) for i in e.indexes]
            span = e.span
            if base.nd or any(i.nd for i in idx):
                bcps = base.cps
                icps = self._chain(idx)

                def cps(fr, kc):
                    bcps(fr, lambda arr: icps(fr, lambda vals: kc(_element(arr, vals, span))))
                return self._x(None, cps)
            bdet = base.det
            dims = e.base.sym.type.dims
            hops = self.level - e.base.sym.level
            slot = e.base.sym.index
            if len(idx) == 1:
                i0 = idx[0].det
                lo, hi = dims[0]

                def bad(i):
                    raise AlmaRuntimeError(f"index {i} out of range [{lo}..{hi}]", span)
                if hops == 0:
                    def det(fr):
                        i = i0(fr)
                        if lo <= i <= hi:
                            return fr.slots[slot].cells[i - lo]
                        bad(i)
                else:
                    def det(fr):
                        i = i0(fr)
                        if lo <= i <= hi:
                            return bdet(fr).cells[i - lo]
                        bad(i)
                return self._x(det)
            if len(idx) == 2:
                i0, i1 = idx[0].det, idx[1].det
                (lo0, hi0), (lo1, hi1) = dims
                stride = hi1 - lo1 + 1
                base_off = lo0 * stride + lo1
                if hops == 0:
                    def det(fr):
                        i = i0(fr)
                        j = i1(fr)
                        if lo0 <= i <= hi0 and lo1 <= j <= hi1:
                            return fr.slots[slot].cells[i * stride + j - base_off]
                        return _element(fr.slots[slot], (i, j), span)
                else:
                    def det(fr):
                        i = i0(fr)
                        j = i1(fr)
                        if lo0 <= i <= hi0 and lo1 <= j <= hi1:
                            return bdet(fr).cells[i * stride + j - base_off]
                        return _element(bdet(fr), (i, j), span)
                return self._x(det)
            dets = [i.det for i in idx]
            return self._x(lambda fr: _element(bdet(fr), [d(fr) for d in dets], span))
        raise InternalError(f"not a designator: {e!r}")

    def _chain(self, codes):
        """CPS evaluation of several expressions left to right into a list."""
        def build(i):
            if i == len(codes):
                return lambda fr, acc, kl: kl(acc)
            c = codes[i]
            rest = build(i + 1)
            if c.det is not None:
                d = c.det
                return lambda fr, acc, kl: rest(fr, acc + [d(fr)], kl)
            cc = c.cps
            return lambda fr, acc, kl: cc(fr, lambda v: rest(fr, acc + [v], kl))
        first = build(0)
        return lambda fr, kl: first(fr, [], kl)

    # expressions

    def expr(self, e) -> ExprCode:
        if isinstance(e, (ast.IntLit, ast.BoolLit)):
            v = e.value
            return self._x(lambda fr: v)
        if isinstance(e, ast.Name):
            sym = e.sym
            if isinstance(sym, ConstSym):
                v = sym.value
                return self._x(lambda fr: v)
            return self._read(self.loc(e), e)
        if isinstance(e, ast.Index):
            return self._read(self.loc(e), e)
        if isinstance(e, ast.Known):
            loc = self.loc(e.arg)
            if loc.nd:
                lc = loc.cps
                return self._x(None, lambda fr, kv: lc(fr, lambda t: kv(_known(t))))
            ld = loc.det
            return self._x(lambda fr: _known(ld(fr)))
        if isinstance(e, ast.Unary):
            return self._unary(e)
        if isinstance(e, ast.Binary):
            return self._binary(e)
        if isinstance(e, ast.Call):
            if e.sym.is_function:
                return self._function_call(e)
            return self._statement_as_expr(e)
        raise InternalError(f"cannot compile expression {e!r}")

    def _read(self, loc: ExprCode, e) -> ExprCode:
        name = _describe(e)
        span = e.span
        if loc.nd:
            lc = loc.cps

            def cps(fr, kv):
                def got(cell):
                    v = cell.v
                    if v is UNKNOWN:
                        raise UninitializedError(f"uninitialized variable {name}", span)
                    kv(v)
                lc(fr, got)
            return self._x(None, cps)
        ld = loc.det
        if isinstance(e, ast.Name) and self.level == e.sym.level:
            slot = e.sym.index

            def det(fr):
                v = fr.slots[slot].v
                if v is UNKNOWN:
                    raise UninitializedError(f"uninitialized variable {name}", span)
                return v
            return self._x(det)

        def det(fr):
            v = ld(fr).v
            if v is UNKNOWN:
                raise UninitializedError(f"uninitialized variable {name}", span)
            return v
        return self._x(det)

    def _unary(self, e) -> ExprCode:
        x = self.expr(e.operand)
        span = e.span
        if e.op == "NOT":
            f = _not
        elif e.op == "-":
            def f(v):
                if v == INT_MIN:
                    raise AlmaRuntimeError("integer overflow", span)
                return -v
        else:
            def f(v):
                return v
        if x.nd:
            xc = x.cps
            return self._x(None, lambda fr, kv: xc(fr, lambda v: kv(f(v))))
        xd = x.det
        return self._x(lambda fr: f(xd(fr)))

    def _binary(self, e) -> ExprCode:
        a = self.expr(e.left)
        b = self.expr(e.right)
        op = e.op
        span = e.span
        if op in ("AND", "OR"):
            is_and = op == "AND"
            if a.nd or b.nd:
                ac, bc = a.cps, b.cps

                def cps(fr, kv):
                    def left(x):
                        if x is is_and:
                            bc(fr, kv)
                        else:
                            kv(x)
                    ac(fr, left)
                return self._x(None, cps)
            ad, bd = a.det, b.det
            if is_and:
                return self._x(lambda fr: ad(fr) and bd(fr))
            return self._x(lambda fr: ad(fr) or bd(fr))
        f = _binop(op, span)
        if a.nd or b.nd:
            ac, bc = a.cps, b.cps
            return self._x(None, lambda fr, kv: ac(fr, lambda x: bc(fr, lambda y: kv(f(x, y)))))
        ad, bd = a.det, b.det
        if op == "=":
            return self._x(lambda fr: ad(fr) == bd(fr))
        if op == "<>":
            return self._x(lambda fr: ad(fr) != bd(fr))
        if op == "<":
            return self._x(lambda fr: ad(fr) < bd(fr))
        if op == "<=":
            return self._x(lambda fr: ad(fr) <= bd(fr))
        if op == ">":
            return self._x(lambda fr: ad(fr) > bd(fr))
        if op == ">=":
            return self._x(lambda fr: ad(fr) >= bd(fr))
        if op == "+":
            def add(fr):
                r = ad(fr) + bd(fr)
                if INT_MIN <= r <= INT_MAX:
                    return r
                raise AlmaRuntimeError("integer overflow", span)
            return self._x(add)
        if op == "-":
            def sub(fr):
                r = ad(fr) - bd(fr)
                if INT_MIN <= r <= INT_MAX:
                    return r
                raise AlmaRuntimeError("integer overflow", span)
            return self._x(sub)
        return self._x(lambda fr: f(ad(fr), bd(fr)))

    def _statement_as_expr(self, e: ast.Call) -> ExprCode:
        """A proper procedure call in expression position: implicit COMMIT, TRUE iff it succeeds."""
        call = self._commit(self._call(e))
        entries = self.eng.trail.entries

        def det(fr):
            t = len(entries)
            if call(fr):
                return True
            _undo(entries, t)
            return False
        return self._x(det)

    # procedure calls

    def _binders(self, e: ast.Call):
        """Per parameter: code producing the callee's slot (Cell or ArrayObject)."""
        out = []
        for a, p in zip(e.args, e.sym.params):
            if p.mode == "VAR" or (p.mode == "MIX" and _is_variable(a)):
                out.append(self.loc(a))
                continue
            if not p.type.simple:
                if isinstance(a, ast.Call):
                    out.append(self.expr(a))  # result is already a fresh array
                else:
                    src = self.loc(a)
                    out.append(self._map(src, ArrayObject.copy))
                continue
            x = self.expr(a)
            b = bounds(p.type)
            span = a.span
            name = p.name

            def fresh(v, b=b, span=span, name=name):
                if b is not None and not b[0] <= v <= b[1]:
                    raise AlmaRuntimeError(f"argument {v} for '{name}' out of range [{b[0]}..{b[1]}]", span)
                return Cell(v)
            out.append(self._map(x, fresh))
        return out

    def _call(self, e: ast.Call) -> Code:
        """Call of a proper procedure in statement position."""
        if not isinstance(e.sym, ProcSym):
            return self._builtin(e)
        eng = self.eng
        p = e.sym
        pc = eng._procs[id(p)]
        binders = self._binders(e)
        parent = self._frame_at(p.level - 1)
        span = e.span
        trace = eng.trace
        limits = eng.limits
        name = p.name
        callee_nd = self._proc_nd(p)
        args_nd = any(b.nd for b in binders)
        entries = self.entries

        def frame(fr, slots):
            return Frame(slots + [f() for f in pc.locals], parent(fr), p)

        if not callee_nd and not args_nd:
            bd = [b.det for b in binders]
            has_return = any(isinstance(n, ast.Return) for s in p.decl.body for n in ast.walk(s))

            def det(fr):
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()
                f = frame(fr, [b(fr) for b in bd])
                if trace is not None:
                    trace("call", span, name)
                if has_return:
                    try:
                        ok = pc.det(f)
                    except _Return:
                        ok = True
                else:
                    ok = pc.det(f)
                if trace is not None:
                    trace("return" if ok else "backtrack", span, name)
                return ok
            return self._c(self._maybe_guard(det, *e.args))

        chain = self._chain(binders)

        def cps(fr, k):
            eng.steps += 1
            if eng.steps > limits.max_steps:
                eng.step_limit()

            def enter(slots):
                f = frame(fr, slots)
                if trace is not None:
                    trace("call", span, name)

                    def kk(_v=None):
                        trace("return", span, name)
                        k()
                else:
                    def kk(_v=None):
                        k()
                if callee_nd:
                    f.kret = kk
                    pc.cps(f, kk)
                else:
                    t = len(entries)
                    try:
                        ok = pc.det(f)
                    except _Return:
                        ok = True
                    if ok:
                        kk()
                        _undo(entries, t)
            chain(fr, enter)
        return self._c(None, cps)

    def _function_call(self, e: ast.Call) -> ExprCode:
        eng = self.eng
        p = e.sym
        pc = eng._procs[id(p)]
        binders = self._binders(e)
        chain = self._chain(binders)
        parent = self._frame_at(p.level - 1)
        span = e.span
        trace = eng.trace
        limits = eng.limits
        name = p.name

        def missing():
            raise AlmaRuntimeError(f"function '{name}' ended without RETURN", span)

        def cps(fr, kv):
            eng.steps += 1
            if eng.steps > limits.max_steps:
                eng.step_limit()

            def enter(slots):
                f = Frame(slots + [g() for g in pc.locals], parent(fr), p)
                if trace is not None:
                    trace("call", span, name)

                    def ret(v):
                        trace("return", span, name)
                        kv(v)
                    f.kret = ret
                else:
                    f.kret = kv
                pc.cps(f, missing)
            chain(fr, enter)
        return self._x(None, cps)

    def _builtin(self, e: ast.Call) -> Code:
        out = self.eng.out
        if e.name == "Print":
            a = e.args[0]
            t = a.type
            if isinstance(t, ArrayType):
                src = self.loc(a) if _is_variable(a) else self.expr(a)
                fmt = lambda arr: builtins.format_board(arr, t.element)
            else:
                src = self.expr(a)
                fmt = lambda v: builtins.format_value(v, t) + "\n"
        else:
            srcs = [self.loc(a) if _is_variable(a) else self.expr(a) for a in e.args]
            src = self._combine(srcs, self._chain(srcs))
            fmt = lambda arrs: builtins.format_solution(arrs[1])
        if src.nd:
            sc = src.cps

            def cps(fr, k):
                def go(v):
                    out.write(fmt(v))
                    k()
                sc(fr, go)
            return self._c(None, cps)
        sd = src.det

        def det(fr):
            out.write(fmt(sd(fr)))
            return True
        return self._c(det)

    # statements

    def seq(self, stmts) -> Code:
        codes = [self.stmt(s) for s in stmts]
        groups: list[Code] = []
        run: list = []
        for c in codes:
            if c.det is not None:
                run.append(c.det)
            else:
                if run:
                    groups.append(self._c(_det_seq(run, self.entries)))
                    run = []
                groups.append(c)
        if run:
            groups.append(self._c(_det_seq(run, self.entries)))
        if not groups:
            return self._c(lambda fr: True)
        if len(groups) == 1:
            return groups[0]
        tail = groups[-1].cps
        for g in reversed(groups[:-1]):
            tail = _then(g, tail, self.entries)
        return self._c(None, tail)

    def stmt(self, s) -> Code:
        method = getattr(self, "s_" + type(s).__name__)
        return method(s)

    def s_Assign(self, s: ast.Assign) -> Code:
        eng = self.eng
        limits = eng.limits
        entries = eng.trail.entries
        target = self.loc(s.target)
        t = s.target.type
        span = s.span
        if isinstance(t, ArrayType):
            if isinstance(s.value, ast.Call):
                value = self.expr(s.value)
            else:
                value = self.loc(s.value)
            b = bounds(t.element)

            def store(dst, src):
                _copy_array(dst, src, entries, b, span)
        else:
            value = self.expr(s.value)
            b = bounds(t)

            def store(cell, v):
                if b is not None and not b[0] <= v <= b[1]:
                    raise AlmaRuntimeError(f"value {v} out of range [{b[0]}..{b[1]}]", span)
                entries.append((cell, cell.v))
                cell.v = v
        if target.nd or value.nd:
            tc, vc = target.cps, value.cps

            def cps(fr, k):
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()

                def with_target(dst):
                    def with_value(v):
                        t = len(entries)
                        store(dst, v)
                        k()
                        _undo(entries, t)
                    vc(fr, with_value)
                tc(fr, with_target)
            return self._c(None, cps)
        td, vd = target.det, value.det
        if b is None and t.simple:
            def det(fr):
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()
                v = vd(fr)
                cell = td(fr)
                entries.append((cell, cell.v))
                cell.v = v
                return True
            return self._c(det)

        def det(fr):
            eng.steps += 1
            if eng.steps > limits.max_steps:
                eng.step_limit()
            store(td(fr), vd(fr))
            return True
        return self._c(det)

    def s_ExprStmt(self, s: ast.ExprStmt) -> Code:
        e = s.expr
        if isinstance(e, ast.Call) and not (isinstance(e.sym, ProcSym) and e.sym.is_function):
            return self._call(e)
        if isinstance(e, ast.Binary) and e.op == "=":
            return self._equality(e)
        eng = self.eng
        limits = eng.limits
        x = self.expr(e)
        if x.nd:
            xc = x.cps

            def cps(fr, k):
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()

                def test(v):
                    if v:
                        k()
                xc(fr, test)
            return self._c(None, cps)
        xd = x.det

        def det(fr):
            eng.steps += 1
            if eng.steps > limits.max_steps:
                eng.step_limit()
            return xd(fr)
        return self._c(self._guard(det) if self._writes(e) else det)

    def _side(self, e):
        """(is_designator, code): designators yield their Cell so an Unknown side can be bound."""
        if _is_variable(e):
            return True, self.loc(e)
        return False, self.expr(e)

    def _equality(self, e: ast.Binary) -> Code:
        """Generalized equality: test when both sides are known, bind when one is an unknown variable."""
        eng = self.eng
        limits = eng.limits
        entries = eng.trail.entries
        trace = eng.trace
        lvar, lcode = self._side(e.left)
        rvar, rcode = self._side(e.right)
        lb = bounds(e.left.type)
        rb = bounds(e.right.type)
        span = e.span
        ltext, rtext = _describe(e.left), _describe(e.right)

        def bind(cell, v, b, text):
            if b is not None and not b[0] <= v <= b[1]:
                raise AlmaRuntimeError(f"value {v} out of range [{b[0]}..{b[1]}]", span)
            entries.append((cell, cell.v))
            cell.v = v
            if trace is not None:
                trace("bind", span, f"{text}={builtins.format_value(v, e.left.type)}")
            return True

        def decide(l, r):
            lv = l.v if lvar else l
            rv = r.v if rvar else r
            if lv is UNKNOWN:
                if rv is UNKNOWN:
                    raise UninitializedError(
                        f"both sides of '=' are uninitialized ({ltext}, {rtext})", span)
                return bind(l, rv, lb, ltext)
            if rv is UNKNOWN:
                return bind(r, lv, rb, rtext)
            return lv == rv

        if lcode.nd or rcode.nd:
            lc, rc = lcode.cps, rcode.cps

            def cps(fr, k):
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()
                t = len(entries)

                def both(l, r):
                    if decide(l, r):
                        k()
                lc(fr, lambda l: rc(fr, lambda r: both(l, r)))
                _undo(entries, t)
            return self._c(None, cps)
        ld, rd = lcode.det, rcode.det
        if lvar and not rvar:
            def det(fr):
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()
                cell = ld(fr)
                lv = cell.v
                rv = rd(fr)
                if lv is UNKNOWN:
                    return bind(cell, rv, lb, ltext)
                return lv == rv
            return self._c(self._maybe_guard(det, e.left, e.right))

        if lvar and rvar:
            def det(fr):
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()
                lc = ld(fr)
                rc = rd(fr)
                lv = lc.v
                rv = rc.v
                if lv is not UNKNOWN and rv is not UNKNOWN:
                    return lv == rv
                return decide(lc, rc)
            return self._c(self._maybe_guard(det, e.left, e.right))

        def det(fr):
            eng.steps += 1
            if eng.steps > limits.max_steps:
                eng.step_limit()
            return decide(ld(fr), rd(fr))
        return self._c(self._maybe_guard(det, e.left, e.right))

    def s_Write(self, s: ast.Write) -> Code:
        out = self.eng.out
        parts = []
        for a in s.args:
            if isinstance(a, ast.StrLit):
                text = a.value
                parts.append(self._x(lambda fr, text=text: text))
            else:
                x = self.expr(a)
                t = a.type
                parts.append(self._map(x, lambda v, t=t: builtins.format_value(v, t)))
        nl = "\n" if s.newline else ""
        if any(p.nd for p in parts):
            chain = self._chain(parts)

            def cps(fr, k):
                def emit(texts):
                    out.write("".join(texts) + nl)
                    k()
                chain(fr, emit)
            return self._c(None, cps)
        dets = [p.det for p in parts]

        def det(fr):
            out.write("".join([d(fr) for d in dets]) + nl)
            return True
        return self._c(det)

    def s_If(self, s: ast.If) -> Code:
        cond = self.expr(s.cond)
        then = self.seq(s.then)
        orelse = self.seq(s.orelse) if s.orelse is not None else None
        if not (cond.nd or then.nd or (orelse is not None and orelse.nd)):
            cd, td = cond.det, then.det
            if orelse is None:
                det = lambda fr: td(fr) if cd(fr) else True
            else:
                ed = orelse.det
                det = lambda fr: td(fr) if cd(fr) else ed(fr)
            return self._c(self._maybe_guard(det, s.cond))
        cc, tc = cond.cps, then.cps
        ec = orelse.cps if orelse is not None else None

        def cps(fr, k):
            def branch(b):
                if b:
                    tc(fr, k)
                elif ec is not None:
                    ec(fr, k)
                else:
                    k()
            cc(fr, branch)
        return self._c(None, cps)

    def s_While(self, s: ast.While) -> Code:
        eng = self.eng
        limits = eng.limits
        cond = self.expr(s.cond)
        body = self.seq(s.body)
        if not (cond.nd or body.nd):
            cd, bd = cond.det, body.det

            entries = self.entries

            def det(fr):
                t = len(entries)
                while True:
                    eng.steps += 1
                    if eng.steps > limits.max_steps:
                        eng.step_limit()
                    if not cd(fr):
                        return True
                    if not bd(fr):
                        _undo(entries, t)
                        return False
            return self._c(det)
        cc, bc = cond.cps, body.cps

        def cps(fr, k):
            def loop():
                eng.steps += 1
                if eng.steps > limits.max_steps:
                    eng.step_limit()
                cc(fr, lambda b: bc(fr, loop) if b else k())
            loop()
        return self._c(None, cps)

    def _bounds_code(self, s):
        lo, hi = self.expr(s.lo), self.expr(s.hi)
        return self.loc(s.var), lo, hi, bounds(s.var.type)

    def s_For(self, s: ast.For) -> Code:
        eng = self.eng
        limits = eng.limits
        entries = eng.trail.entries
        var, lo, hi, b = self._bounds_code(s)
        body = self.seq(s.body)
        span = s.span

        def check(v):
            if b is not None and not b[0] <= v <= b[1]:
                raise AlmaRuntimeError(f"FOR value {v} out of range [{b[0]}..{b[1]}]", span)

        if not (lo.nd or hi.nd or body.nd):
            vd, lod, hid, bd = var.det, lo.det, hi.det, body.det

            def det(fr):
                # The body leaves no choice points, so only the first write of
                # the control variable needs a trail entry.
                t = len(entries)
                cell = vd(fr)
                first = lod(fr)
                last = hid(fr)
                if first > last:
                    return True
                entries.append((cell, cell.v))
                for v in range(first, last + 1):
                    eng.steps += 1
                    if eng.steps > limits.max_steps:
                        eng.step_limit()
                    if b is not None:
                        check(v)
                    cell.v = v
                    if not bd(fr):
                        _undo(entries, t)
                        return False
                return True
            return self._c(det)
        vc, bc = var.cps, body.cps
        bounds_chain = self._chain([lo, hi])

        def cps(fr, k):
            def start(vals):
                first, last = vals

                def with_cell(cell):
                    def step(v):
                        if v > last:
                            k()
                            return
                        eng.steps += 1
                        if eng.steps > limits.max_steps:
                            eng.step_limit()
                        check(v)
                        entries.append((cell, cell.v))
                        cell.v = v
                        bc(fr, lambda: step(v + 1))
                    step(first)
                vc(fr, with_cell)
            t = len(entries)
            bounds_chain(fr, start)
            _undo(entries, t)
        return self._c(None, cps)

    def s_Some(self, s: ast.Some) -> Code:
        eng = self.eng
        limits = eng.limits
        entries = eng.trail.entries
        trace = eng.trace
        var, lo, hi, b = self._bounds_code(s)
        body = self.seq(s.body)
        span = s.span
        vc, bc, bd = var.cps, body.cps, body.det
        bounds_chain = self._chain([lo, hi])
        name = s.var.name

        def alternatives(fr, k, cell, first, last):
            if eng.choicepoints >= limits.max_choicepoints:
                eng.choicepoint_limit()
            eng.choicepoints += 1
            t = len(entries)
            if trace is not None:
                trace("choice", span, f"SOME {name} in {first}..{last}")
            try:
                for v in range(first, last + 1):
                    eng.steps += 1
                    if eng.steps > limits.max_steps:
                        eng.step_limit()
                    if v != first:
                        n = len(entries) - t
                        while len(entries) > t:
                            c, p = entries.pop()
                            c.v = p
                        if trace is not None:
                            if n:
                                trace("undo", span, str(n))
                            trace("backtrack", span, f"{name}={v}")
                    if b is not None and not b[0] <= v <= b[1]:
                        raise AlmaRuntimeError(f"SOME value {v} out of range [{b[0]}..{b[1]}]", span)
                    entries.append((cell, cell.v))
                    cell.v = v
                    if bd is None:
                        bc(fr, k)
                    elif bd(fr):
                        k()
                _undo(entries, t)
            finally:
                eng.choicepoints -= 1

        if not (lo.nd or hi.nd or var.nd):
            vd, lod, hid = var.det, lo.det, hi.det
            return self._c(None, lambda fr, k: alternatives(fr, k, vd(fr), lod(fr), hid(fr)))

        def cps(fr, k):
            bounds_chain(fr, lambda vals: vc(fr, lambda cell: alternatives(fr, k, cell, vals[0], vals[1])))
        return self._c(None, cps)

    def s_Either(self, s: ast.Either) -> Code:
        eng = self.eng
        limits = eng.limits
        entries = eng.trail.entries
        trace = eng.trace
        branches = [self.seq(b).cps for b in s.branches]
        span = s.span

        def cps(fr, k):
            if eng.choicepoints >= limits.max_choicepoints:
                eng.choicepoint_limit()
            eng.choicepoints += 1
            t = len(entries)
            if trace is not None:
                trace("choice", span, f"EITHER {len(branches)} branches")
            try:
                first = True
                for i, br in enumerate(branches):
                    eng.steps += 1
                    if eng.steps > limits.max_steps:
                        eng.step_limit()
                    if not first:
                        n = len(entries) - t
                        _undo(entries, t)
                        if trace is not None:
                            if n:
                                trace("undo", span, str(n))
                            trace("backtrack", span, f"branch {i + 1}")
                    first = False
                    br(fr, k)
                _undo(entries, t)
            finally:
                eng.choicepoints -= 1
        return self._c(None, cps)

    def _commit(self, code: Code):
        """Deterministic runner keeping the first success of ``code``."""
        if code.det is not None:
            return code.det
        body = code.cps

        def det(fr):
            token = object()

            def found():
                raise _Escape(token)
            try:
                body(fr, found)
            except _Escape as e:
                if e.token is not token:
                    raise
                return True
            return False
        return det

    def s_Commit(self, s: ast.Commit) -> Code:
        return self._c(self._commit(self.seq(s.body)))

    def s_Not(self, s: ast.Not) -> Code:
        body = self._commit(self.stmt(s.body))
        entries = self.eng.trail.entries
        trace = self.eng.trace
        span = s.span

        def det(fr):
            t = len(entries)
            ok = body(fr)
            if trace is not None and len(entries) > t:
                trace("undo", span, str(len(entries) - t))
            _undo(entries, t)
            return not ok
        return self._c(det)

    def s_Forall(self, s: ast.Forall) -> Code:
        entries = self.eng.trail.entries
        gen = self.seq(s.generator).cps
        body = self._commit(self.seq(s.body))

        def det(fr):
            token = object()
            start = len(entries)
            effects: dict = {}  # cell -> [value at FORALL entry, latest value from the DO part]

            def each():
                t0 = len(entries)
                ok = body(fr)
                if not ok:
                    raise _Escape(token)
                if len(entries) == t0:
                    return
                for cell, prior in entries[t0:]:
                    if cell not in effects:
                        effects[cell] = [_entry_value(entries, start, t0, cell, prior), None]
                for cell, _prior in entries[t0:]:
                    effects[cell][1] = cell.v
                del entries[t0:]

            try:
                gen(fr, each)
            except _Escape as e:
                if e.token is not token:
                    raise
                _undo(entries, start)
                for cell, (entry, _v) in effects.items():
                    cell.v = entry
                return False
            _undo(entries, start)
            for cell, (entry, v) in effects.items():
                entries.append((cell, entry))
                cell.v = v
            return True
        return self._c(det)

    def s_Return(self, s: ast.Return) -> Code:
        p = self.proc
        nd = self._proc_nd(p)
        if s.value is None:
            if nd:
                return self._c(None, lambda fr, k: fr.kret(None))

            def det(fr):
                raise _Return
            return self._c(det)
        if isinstance(p.result, ArrayType) and _is_variable(s.value):
            value = self._map(self.loc(s.value), ArrayObject.copy)
        else:
            value = self.expr(s.value)
        b = bounds(p.result)
        span = s.span

        def check(v):
            if b is not None and not b[0] <= v <= b[1]:
                raise AlmaRuntimeError(f"returned value {v} out of range [{b[0]}..{b[1]}]", span)
            return v
        vc = value.cps
        if b is None:
            return self._c(None, lambda fr, k: vc(fr, fr.kret))
        return self._c(None, lambda fr, k: vc(fr, lambda v: fr.kret(check(v))))


# small runtime helpers

def _not(v):
    return not v


def _binop(op, span):
    def checked(r):
        if INT_MIN <= r <= INT_MAX:
            return r
        raise AlmaRuntimeError("integer overflow", span)

    def div(a, b):
        if b == 0:
            raise AlmaRuntimeError("division by zero", span)
        return a // b

    def mod(a, b):
        if b == 0:
            raise AlmaRuntimeError("division by zero", span)
        return a % b
    return {
        "+": lambda a, b: checked(a + b),
        "-": lambda a, b: checked(a - b),
        "*": lambda a, b: checked(a * b),
        "DIV": div,
        "MOD": mod,
        "=": lambda a, b: a == b,
        "<>": lambda a, b: a != b,
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
    }[op]


def _element(arr: ArrayObject, idx, span):
    try:
        return arr.cells[arr.offset(idx)]
    except AlmaRuntimeError as e:
        raise AlmaRuntimeError(e.message, span) from None


def _known(target):
    if isinstance(target, ArrayObject):
        return target.known()
    return target.v is not UNKNOWN


def _copy_array(dst: ArrayObject, src: ArrayObject, entries, b, span):
    if dst is src:
        return
    for d, s in zip(dst.cells, src.cells):
        v = s.v
        if b is not None and v is not UNKNOWN and not b[0] <= v <= b[1]:
            raise AlmaRuntimeError(f"value {v} out of range [{b[0]}..{b[1]}]", span)
        if d.v is not v:
            entries.append((d, d.v))
            d.v = v


def _entry_value(entries, start, stop, cell, prior):
    """Value ``cell`` had when the enclosing FORALL started."""
    for i in range(start, stop):
        c, p = entries[i]
        if c is cell:
            return p
    return prior


def _det_seq(dets, entries):
    if len(dets) == 1:
        return dets[0]

    def run(fr):
        t = len(entries)
        for d in dets:
            if not d(fr):
                _undo(entries, t)
                return False
        return True
    return run


def _then(first: Code, rest, entries):
    if first.det is not None:
        d = first.det

        def cps(fr, k):
            t = len(entries)
            if d(fr):
                rest(fr, k)
                _undo(entries, t)
        return cps
    c = first.cps
    return lambda fr, k: c(fr, lambda: rest(fr, k))


def _is_variable(e) -> bool:
    return isinstance(e, ast.Index) or (isinstance(e, ast.Name) and isinstance(e.sym, VarSym))


def _describe(e) -> str:
    from .syntax.printer import expr
    try:
        return expr(e)
    except TypeError:
        return type(e).__name__


def run(program: CheckedProgram, limits: Limits | None = None, out=None,
        trace: Callable | None = None) -> RunResult:
    """Execute a resolved program; deterministic for fixed inputs."""
    return Engine(program, limits, out, trace).run()
