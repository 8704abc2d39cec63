"""Source pretty-printer and the line-oriented AST dump."""

from __future__ import annotations

from . import ast

_INDENT = "  "


def pretty(prog: ast.Program) -> str:
    out = [f"MODULE {prog.name};"]
    _decls(prog.decls, out, 0)
    out.append("BEGIN")
    _seq(prog.body, out, 1)
    out.append(f"END {prog.name}.")
    return "\n".join(out) + "\n"


def _decls(decls, out, depth):
    pad = _INDENT * depth
    for d in decls:
        if isinstance(d, ast.ConstDecl):
            out.append(f"{pad}CONST {d.name} = {expr(d.value)};")
        elif isinstance(d, ast.TypeDecl):
            out.append(f"{pad}TYPE {d.name} = {type_expr(d.type)};")
        elif isinstance(d, ast.VarDecl):
            out.append(f"{pad}VAR {', '.join(d.names)}: {type_expr(d.type)};")
        elif isinstance(d, ast.ProcDecl):
            params = "; ".join(
                ("" if p.mode == "value" else p.mode + " ") + ", ".join(p.names) + ": " + type_expr(p.type)
                for p in d.params)
            head = f"{pad}PROCEDURE {d.name}({params})"
            if d.result is not None:
                head += f": {type_expr(d.result)}"
            out.append(head + ";")
            _decls(d.decls, out, depth + 1)
            out.append(f"{pad}BEGIN")
            _seq(d.body, out, depth + 1)
            out.append(f"{pad}END {d.name};")


def type_expr(t) -> str:
    if isinstance(t, ast.NamedType):
        return t.name
    if isinstance(t, ast.EnumTypeExpr):
        return "(" + ", ".join(t.names) + ")"
    if isinstance(t, ast.SubrangeTypeExpr):
        return f"[{expr(t.lo)}..{expr(t.hi)}]"
    if isinstance(t, ast.ArrayTypeExpr):
        return "ARRAY " + ", ".join(type_expr(i) for i in t.indexes) + " OF " + type_expr(t.element)
    raise TypeError(t)


def _seq(stmts, out, depth):
    for i, s in enumerate(stmts):
        lines = stmt(s, depth)
        if i < len(stmts) - 1:
            lines[-1] += ";"
        out.extend(lines)


def _block(head, parts, depth):
    """``parts`` alternates keyword lines and statement lists."""
    pad = _INDENT * depth
    lines = [pad + head]
    for p in parts:
        if isinstance(p, str):
            lines.append(pad + p)
        else:
            _seq(p, lines, depth + 1)
    return lines


def stmt(s, depth=0) -> list[str]:
    pad = _INDENT * depth
    if isinstance(s, ast.Assign):
        return [f"{pad}{expr(s.target)} := {expr(s.value)}"]
    if isinstance(s, ast.ExprStmt):
        e = s.expr
        text = expr(e)
        if isinstance(e, ast.Unary) and e.op == "NOT":
            text = f"({text})"
        return [pad + text]
    if isinstance(s, ast.If):
        parts = [s.then]
        if s.orelse is not None:
            parts += ["ELSE", s.orelse]
        return _block(f"IF {expr(s.cond)} THEN", parts + ["END"], depth)
    if isinstance(s, ast.While):
        return _block(f"WHILE {expr(s.cond)} DO", [s.body, "END"], depth)
    if isinstance(s, (ast.For, ast.Some)):
        kw = "FOR" if isinstance(s, ast.For) else "SOME"
        return _block(f"{kw} {s.var.name} := {expr(s.lo)} TO {expr(s.hi)} DO", [s.body, "END"], depth)
    if isinstance(s, ast.Either):
        parts = [s.branches[0]]
        for b in s.branches[1:]:
            parts += ["ORELSE", b]
        return _block("EITHER", parts + ["END"], depth)
    if isinstance(s, ast.Forall):
        return _block("FORALL", [s.generator, "DO", s.body, "END"], depth)
    if isinstance(s, ast.Commit):
        return _block("COMMIT", [s.body, "END"], depth)
    if isinstance(s, ast.Not):
        inner = stmt(s.body, depth)
        inner[0] = pad + "NOT " + inner[0].lstrip()
        return inner
    if isinstance(s, ast.Return):
        return [pad + "RETURN" + ("" if s.value is None else " " + expr(s.value))]
    if isinstance(s, ast.Write):
        kw = "WRITELN" if s.newline else "WRITE"
        if not s.args and s.newline:
            return [pad + kw]
        return [f"{pad}{kw}({', '.join(expr(a) for a in s.args)})"]
    raise TypeError(s)


def expr(e) -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.BoolLit):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, ast.StrLit):
        q = '"' if "'" in e.value else "'"
        return q + e.value + q
    if isinstance(e, ast.Name):
        return e.name
    if isinstance(e, ast.Index):
        return f"{expr(e.base)}[{', '.join(expr(i) for i in e.indexes)}]"
    if isinstance(e, ast.Call):
        return f"{e.name}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, ast.Known):
        return f"KNOWN({expr(e.arg)})"
    if isinstance(e, ast.Unary):
        sep = " " if e.op == "NOT" else ""
        return f"{e.op}{sep}{_operand(e.operand)}"
    if isinstance(e, ast.Binary):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    raise TypeError(e)


def _operand(e) -> str:
    if isinstance(e, (ast.Binary, ast.Unary)):
        return f"({expr(e)})"
    return expr(e)


# dump

def dump(node) -> str:
    """Stable indented rendering: one node per line, children indented."""
    lines: list[str] = []
    _dump(node, 0, lines)
    return "\n".join(lines) + "\n"


def _label(node) -> str:
    name = type(node).__name__
    attrs = []
    for f in node.__dataclass_fields__.values():
        if not f.compare:
            continue
        v = getattr(node, f.name)
        if isinstance(v, (str, int, bool)) or v is None:
            if v is not None:
                attrs.append(f"{f.name}={v!r}")
        elif isinstance(v, list) and v and all(isinstance(x, str) for x in v):
            attrs.append(f"{f.name}={','.join(v)}")
    span = getattr(node, "span", None)
    loc = f" @{span}" if span is not None else ""
    return name + ("" if not attrs else " " + " ".join(attrs)) + loc


def _dump(node, depth, lines):
    pad = _INDENT * depth
    lines.append(pad + _label(node))
    for f in node.__dataclass_fields__.values():
        if not f.compare:
            continue
        v = getattr(node, f.name)
        if isinstance(v, ast.Node):
            lines.append(f"{pad}{_INDENT}.{f.name}")
            _dump(v, depth + 2, lines)
        elif isinstance(v, list) and v and not all(isinstance(x, str) for x in v):
            lines.append(f"{pad}{_INDENT}.{f.name}")
            for item in v:
                if isinstance(item, list):
                    lines.append(f"{pad}{_INDENT * 2}branch")
                    for sub in item:
                        _dump(sub, depth + 3, lines)
                else:
                    _dump(item, depth + 2, lines)
