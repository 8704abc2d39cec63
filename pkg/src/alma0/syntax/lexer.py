from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError, SourceSpan

KEYWORDS = frozenset("""
    MODULE BEGIN END CONST TYPE VAR PROCEDURE ARRAY OF INTEGER BOOLEAN IF THEN
    ELSE WHILE DO FOR TO EITHER ORELSE SOME FORALL COMMIT NOT AND OR RETURN MIX
    TRUE FALSE KNOWN WRITE WRITELN DIV MOD
""".split())

# longest first
OPERATORS = (":=", "<=", ">=", "<>", "..", "+", "-", "*", "=", "#", "<", ">")
PUNCTUATION = ";,.:()[]"

KEYWORD = "keyword"
IDENT = "identifier"
INT = "integer-literal"
STRING = "string-literal"
OP = "operator"
PUNCT = "punctuation"
EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    span: SourceSpan

    def __repr__(self):
        return f"Token({self.kind}, {self.lexeme!r}, {self.span})"


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self, offset=0):
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def advance(self, n=1):
        for _ in range(n):
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1


def tokenize(source: str) -> list[Token]:
    """Split source text into tokens, ending with a single EOF token.

    Comments ``(* ... *)`` nest and are dropped.
    """
    cur = _Cursor(source)
    out: list[Token] = []
    while True:
        ch = cur.peek()
        if ch == "":
            break
        if ch in " \t\r\n\f":
            cur.advance()
            continue
        line, col = cur.line, cur.col
        if ch == "(" and cur.peek(1) == "*":
            _skip_comment(cur)
            continue
        if ch.isalpha() or ch == "_":
            start = cur.pos
            while cur.peek() and (cur.peek().isalnum() or cur.peek() == "_"):
                cur.advance()
            word = source[start:cur.pos]
            kind = KEYWORD if word in KEYWORDS else IDENT
            out.append(Token(kind, word, SourceSpan(line, col, len(word))))
            continue
        if ch.isdigit():
            start = cur.pos
            while cur.peek().isdigit():
                cur.advance()
            if cur.peek().isalpha() or cur.peek() == "_":
                raise LexError(f"malformed number {source[start:cur.pos + 1]!r}",
                               SourceSpan(line, col, cur.pos - start + 1))
            word = source[start:cur.pos]
            out.append(Token(INT, word, SourceSpan(line, col, len(word))))
            continue
        if ch in "'\"":
            out.append(_string(cur, ch))
            continue
        for op in OPERATORS:
            if source.startswith(op, cur.pos):
                cur.advance(len(op))
                out.append(Token(OP, op, SourceSpan(line, col, len(op))))
                break
        else:
            if ch in PUNCTUATION:
                cur.advance()
                out.append(Token(PUNCT, ch, SourceSpan(line, col, 1)))
            else:
                raise LexError(f"unexpected character {ch!r}", SourceSpan(line, col, 1))
    out.append(Token(EOF, "", SourceSpan(cur.line, cur.col, 1)))
    return out


def _skip_comment(cur: _Cursor):
    line, col = cur.line, cur.col
    depth = 0
    while True:
        if cur.peek() == "":
            raise LexError("unterminated comment", SourceSpan(line, col, 2))
        if cur.peek() == "(" and cur.peek(1) == "*":
            depth += 1
            cur.advance(2)
        elif cur.peek() == "*" and cur.peek(1) == ")":
            depth -= 1
            cur.advance(2)
            if depth == 0:
                return
        else:
            cur.advance()


def _string(cur: _Cursor, quote: str) -> Token:
    line, col = cur.line, cur.col
    start = cur.pos
    cur.advance()
    while True:
        ch = cur.peek()
        if ch == "" or ch == "\n":
            raise LexError("unterminated string", SourceSpan(line, col, max(1, cur.pos - start)))
        cur.advance()
        if ch == quote:
            break
    text = cur.text[start:cur.pos]
    return Token(STRING, text, SourceSpan(line, col, len(text)))
