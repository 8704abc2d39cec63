"""Recursive-descent parser for the Alma-0 subset.

Grammar (Modula-2 precedence for expressions)::

    program  = "MODULE" id ";" {decl} "BEGIN" stmtseq "END" id "."
    decl     = "CONST" {id "=" expr ";"}
             | "TYPE" {id "=" type ";"}
             | "VAR" {idlist ":" type ";"}
             | "PROCEDURE" id [formals] [":" type] ";" {decl}
               "BEGIN" stmtseq "END" id ";"
    stmtseq  = stmt {";" stmt}
    expr     = simple [relop simple]
    simple   = ["+" | "-"] term {("+" | "-" | "OR") term}
    term     = factor {("*" | "DIV" | "MOD" | "AND") factor}
    factor   = int | TRUE | FALSE | designator [actuals] | "(" expr ")"
             | "NOT" factor | "KNOWN" "(" expr ")"
"""

from __future__ import annotations

from ..errors import ParseError
from . import ast
from .lexer import EOF, IDENT, INT, KEYWORD, STRING, Token, tokenize

RELOPS = ("=", "#", "<>", "<", "<=", ">", ">=")
ADDOPS = ("+", "-", "OR")
MULOPS = ("*", "DIV", "MOD", "AND")

# tokens that may follow a statement, i.e. where an empty statement ends
_STMT_END = (";", "END", "ORELSE", "ELSE", "DO")


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *lexemes: str) -> bool:
        t = self.tok
        return t.kind not in (IDENT, INT, STRING, EOF) and t.lexeme in lexemes

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != EOF:
            self.i += 1
        return t

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            self.fail(f"expected '{lexeme}'")
        return self.next()

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.next()
            return True
        return False

    def ident(self) -> Token:
        if self.tok.kind != IDENT:
            self.fail("expected identifier")
        return self.next()

    def fail(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == EOF else repr(t.lexeme)
        raise ParseError(f"{msg}, found {found}", t.span)

    # program structure

    def program(self) -> ast.Program:
        start = self.expect("MODULE")
        name = self.ident().lexeme
        self.expect(";")
        decls = self.decls()
        self.expect("BEGIN")
        body = self.stmtseq()
        self.expect("END")
        end = self.ident()
        if end.lexeme != name:
            raise ParseError(f"module ends with '{end.lexeme}', expected '{name}'", end.span)
        self.expect(".")
        if self.tok.kind != EOF:
            self.fail("expected end of input")
        return ast.Program(name, decls, body, span=start.span)

    def decls(self) -> list:
        out = []
        while True:
            if self.at("CONST"):
                self.next()
                while self.tok.kind == IDENT:
                    t = self.next()
                    self.expect("=")
                    out.append(ast.ConstDecl(t.lexeme, self.expr(), span=t.span))
                    self.expect(";")
            elif self.at("TYPE"):
                self.next()
                while self.tok.kind == IDENT:
                    t = self.next()
                    self.expect("=")
                    out.append(ast.TypeDecl(t.lexeme, self.type(), span=t.span))
                    self.expect(";")
            elif self.at("VAR"):
                self.next()
                while self.tok.kind == IDENT:
                    span = self.tok.span
                    names = self.idlist()
                    self.expect(":")
                    out.append(ast.VarDecl(names, self.type(), span=span))
                    self.expect(";")
            elif self.at("PROCEDURE"):
                out.append(self.procedure())
            else:
                return out

    def idlist(self) -> list[str]:
        names = [self.ident().lexeme]
        while self.accept(","):
            names.append(self.ident().lexeme)
        return names

    def procedure(self) -> ast.ProcDecl:
        self.expect("PROCEDURE")
        t = self.ident()
        params = []
        if self.accept("("):
            if not self.at(")"):
                params.append(self.formal())
                while self.accept(";"):
                    params.append(self.formal())
            self.expect(")")
        result = None
        if self.accept(":"):
            result = self.type()
        self.expect(";")
        decls = self.decls()
        self.expect("BEGIN")
        body = self.stmtseq()
        self.expect("END")
        end = self.ident()
        if end.lexeme != t.lexeme:
            raise ParseError(f"procedure ends with '{end.lexeme}', expected '{t.lexeme}'", end.span)
        self.expect(";")
        return ast.ProcDecl(t.lexeme, params, result, decls, body, span=t.span)

    def formal(self) -> ast.Param:
        span = self.tok.span
        mode = "value"
        if self.at("VAR", "MIX"):
            mode = self.next().lexeme
        names = self.idlist()
        self.expect(":")
        return ast.Param(mode, names, self.type(), span=span)

    def type(self):
        t = self.tok
        if t.kind == IDENT or self.at("INTEGER", "BOOLEAN"):
            self.next()
            return ast.NamedType(t.lexeme, span=t.span)
        if self.accept("("):
            names = self.idlist()
            self.expect(")")
            return ast.EnumTypeExpr(names, span=t.span)
        if self.at("["):
            return self.subrange()
        if self.accept("ARRAY"):
            indexes = [self.index_type()]
            while self.accept(","):
                indexes.append(self.index_type())
            self.expect("OF")
            return ast.ArrayTypeExpr(indexes, self.type(), span=t.span)
        self.fail("expected type")

    def index_type(self):
        if self.at("["):
            return self.subrange()
        t = self.ident()
        return ast.NamedType(t.lexeme, span=t.span)

    def subrange(self) -> ast.SubrangeTypeExpr:
        t = self.expect("[")
        lo = self.expr()
        self.expect("..")
        hi = self.expr()
        self.expect("]")
        return ast.SubrangeTypeExpr(lo, hi, span=t.span)

    # statements

    def stmtseq(self) -> list:
        out = []
        s = self.stmt()
        if s is not None:
            out.append(s)
        while self.accept(";"):
            s = self.stmt()
            if s is not None:
                out.append(s)
        return out

    def stmt(self):
        t = self.tok
        if t.kind == EOF or self.at(*_STMT_END):
            return None
        if t.kind == KEYWORD:
            handler = _STMT_KEYWORDS.get(t.lexeme)
            if handler is not None:
                return handler(self)
        e = self.expr()
        if self.at(":="):
            if not isinstance(e, (ast.Name, ast.Index)):
                self.fail("left side of ':=' is not a variable")
            self.next()
            return ast.Assign(e, self.expr(), span=t.span)
        return ast.ExprStmt(e, span=t.span)

    def if_stmt(self):
        t = self.expect("IF")
        cond = self.expr()
        self.expect("THEN")
        then = self.stmtseq()
        orelse = None
        if self.accept("ELSE"):
            orelse = self.stmtseq()
        self.expect("END")
        return ast.If(cond, then, orelse, span=t.span)

    def while_stmt(self):
        t = self.expect("WHILE")
        cond = self.expr()
        self.expect("DO")
        body = self.stmtseq()
        self.expect("END")
        return ast.While(cond, body, span=t.span)

    def _ranged(self, cls):
        t = self.next()
        v = self.ident()
        self.expect(":=")
        lo = self.expr()
        self.expect("TO")
        hi = self.expr()
        self.expect("DO")
        body = self.stmtseq()
        self.expect("END")
        return cls(ast.Name(v.lexeme, span=v.span), lo, hi, body, span=t.span)

    def either_stmt(self):
        t = self.expect("EITHER")
        branches = [self.stmtseq()]
        while self.accept("ORELSE"):
            branches.append(self.stmtseq())
        if len(branches) < 2:
            self.fail("expected 'ORELSE'")
        self.expect("END")
        return ast.Either(branches, span=t.span)

    def forall_stmt(self):
        t = self.expect("FORALL")
        gen = self.stmtseq()
        self.expect("DO")
        body = self.stmtseq()
        self.expect("END")
        return ast.Forall(gen, body, span=t.span)

    def commit_stmt(self):
        t = self.expect("COMMIT")
        body = self.stmtseq()
        self.expect("END")
        return ast.Commit(body, span=t.span)

    def not_stmt(self):
        t = self.expect("NOT")
        body = self.stmt()
        if body is None:
            self.fail("expected statement after NOT")
        return ast.Not(body, span=t.span)

    def return_stmt(self):
        t = self.expect("RETURN")
        if self.tok.kind == EOF or self.at(*_STMT_END):
            return ast.Return(None, span=t.span)
        return ast.Return(self.expr(), span=t.span)

    def write_stmt(self):
        t = self.next()
        args = []
        if self.accept("("):
            if not self.at(")"):
                args.append(self.write_arg())
                while self.accept(","):
                    args.append(self.write_arg())
            self.expect(")")
        return ast.Write(args, t.lexeme == "WRITELN", span=t.span)

    def write_arg(self):
        t = self.tok
        if t.kind == STRING:
            self.next()
            return ast.StrLit(t.lexeme[1:-1], span=t.span)
        return self.expr()

    # expressions

    def expr(self):
        left = self.simple()
        if self.at(*RELOPS):
            t = self.next()
            op = "<>" if t.lexeme == "#" else t.lexeme
            left = ast.Binary(op, left, self.simple(), span=t.span)
        return left

    def simple(self):
        t = self.tok
        if self.at("+", "-"):
            self.next()
            left = ast.Unary(t.lexeme, self.term(), span=t.span)
        else:
            left = self.term()
        while self.at(*ADDOPS):
            t = self.next()
            left = ast.Binary(t.lexeme, left, self.term(), span=t.span)
        return left

    def term(self):
        left = self.factor()
        while self.at(*MULOPS):
            t = self.next()
            left = ast.Binary(t.lexeme, left, self.factor(), span=t.span)
        return left

    def factor(self):
        t = self.tok
        if t.kind == INT:
            self.next()
            return ast.IntLit(int(t.lexeme), span=t.span)
        if t.kind == IDENT:
            return self.designator_or_call()
        if self.at("TRUE", "FALSE"):
            self.next()
            return ast.BoolLit(t.lexeme == "TRUE", span=t.span)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("NOT"):
            return ast.Unary("NOT", self.factor(), span=t.span)
        if self.accept("KNOWN"):
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return ast.Known(arg, span=t.span)
        if t.kind == STRING:
            raise ParseError("string literals are only allowed as WRITE arguments", t.span)
        self.fail("expected expression")

    def designator_or_call(self):
        t = self.ident()
        if self.accept("("):
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.accept(","):
                    args.append(self.expr())
            self.expect(")")
            return ast.Call(t.lexeme, args, span=t.span)
        node = ast.Name(t.lexeme, span=t.span)
        while self.at("["):
            b = self.next()
            idx = [self.expr()]
            while self.accept(","):
                idx.append(self.expr())
            self.expect("]")
            if isinstance(node, ast.Index):
                node = ast.Index(node.base, node.indexes + idx, span=node.span)
            else:
                node = ast.Index(node, idx, span=b.span)
        return node


_STMT_KEYWORDS = {
    "IF": Parser.if_stmt,
    "WHILE": Parser.while_stmt,
    "FOR": lambda p: p._ranged(ast.For),
    "SOME": lambda p: p._ranged(ast.Some),
    "EITHER": Parser.either_stmt,
    "FORALL": Parser.forall_stmt,
    "COMMIT": Parser.commit_stmt,
    "NOT": Parser.not_stmt,
    "RETURN": Parser.return_stmt,
    "WRITE": Parser.write_stmt,
    "WRITELN": Parser.write_stmt,
}


def parse_program(tokens: list[Token]) -> ast.Program:
    return Parser(tokens).program()


def parse(source: str) -> ast.Program:
    return parse_program(tokenize(source))
