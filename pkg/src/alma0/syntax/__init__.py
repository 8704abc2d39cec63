"""Front end: lexing, parsing, name and type resolution, printing."""

from .lexer import Token, tokenize
from .parser import parse, parse_program
from .printer import dump, pretty
from .resolver import CheckedProgram, resolve

__all__ = ["Token", "tokenize", "parse", "parse_program", "dump", "pretty",
           "CheckedProgram", "resolve"]
