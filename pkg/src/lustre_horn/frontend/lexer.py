from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, auto

from ..ast import Pos
from ..diagnostics import LEXICAL, error


class Tok(Enum):
    # keywords
    NODE = auto()
    FUNCTION = auto()
    RETURNS = auto()
    VAR = auto()
    LET = auto()
    TEL = auto()
    TYPE = auto()
    ENUM = auto()
    CLOCK = auto()
    AUTOMATON = auto()
    STATE = auto()
    UNLESS = auto()
    UNTIL = auto()
    RESTART = auto()
    RESUME = auto()
    WHEN = auto()
    MERGE = auto()
    EVERY = auto()
    PRE = auto()
    IF = auto()
    THEN = auto()
    ELSE = auto()
    NOT = auto()
    AND = auto()
    OR = auto()
    XOR = auto()
    TRUE = auto()
    FALSE = auto()
    # literals
    IDENT = auto()
    INT = auto()
    REAL = auto()
    # symbols
    ARROW = auto()  # ->
    IMPL = auto()  # =>
    NEQ = auto()  # <>
    LE = auto()
    GE = auto()
    LT = auto()
    GT = auto()
    EQ = auto()
    PLUS = auto()
    MINUS = auto()
    STAR = auto()
    SLASH = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACE = auto()
    RBRACE = auto()
    COMMA = auto()
    SEMI = auto()
    COLON = auto()
    EOF = auto()


KEYWORDS = {
    "node": Tok.NODE, "function": Tok.FUNCTION, "returns": Tok.RETURNS,
    "var": Tok.VAR, "let": Tok.LET, "tel": Tok.TEL, "type": Tok.TYPE,
    "enum": Tok.ENUM, "clock": Tok.CLOCK, "automaton": Tok.AUTOMATON,
    "state": Tok.STATE, "unless": Tok.UNLESS, "until": Tok.UNTIL,
    "restart": Tok.RESTART, "resume": Tok.RESUME, "when": Tok.WHEN,
    "merge": Tok.MERGE, "every": Tok.EVERY, "pre": Tok.PRE, "if": Tok.IF,
    "then": Tok.THEN, "else": Tok.ELSE, "not": Tok.NOT, "and": Tok.AND,
    "or": Tok.OR, "xor": Tok.XOR, "true": Tok.TRUE, "false": Tok.FALSE,
}

# Longest match first.
SYMBOLS = [
    ("->", Tok.ARROW), ("=>", Tok.IMPL), ("<>", Tok.NEQ), ("<=", Tok.LE),
    (">=", Tok.GE), ("||", Tok.OR), ("&&", Tok.AND), ("<", Tok.LT),
    (">", Tok.GT), ("=", Tok.EQ), ("+", Tok.PLUS), ("-", Tok.MINUS),
    ("*", Tok.STAR), ("/", Tok.SLASH), ("(", Tok.LPAREN), (")", Tok.RPAREN),
    ("{", Tok.LBRACE), ("}", Tok.RBRACE), (",", Tok.COMMA), (";", Tok.SEMI),
    (":", Tok.COLON),
]


@dataclass(frozen=True)
class Token:
    kind: Tok
    text: str
    pos: Pos

    def __repr__(self) -> str:
        if self.kind in (Tok.IDENT, Tok.INT, Tok.REAL):
            return f"{self.kind.name} {self.text}"
        return self.kind.name


_NUMBER = re.compile(r"\d+(\.\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def tokenize(text: str) -> list[Token]:
    """Split source text into tokens; the list always ends with ``EOF``.

    Lines and columns are 1-based. ``--`` starts a comment running to the
    end of the line.
    """
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        pos = Pos(line, col)
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            toks.append(Token(KEYWORDS.get(word, Tok.IDENT), word, pos))
        elif (m := _NUMBER.match(text, i)):
            word = m.group()
            toks.append(Token(Tok.REAL if m.group(1) else Tok.INT, word, pos))
        else:
            for sym, kind in SYMBOLS:
                if text.startswith(sym, i):
                    word = sym
                    toks.append(Token(kind, sym, pos))
                    break
            else:
                raise error(LEXICAL, f"illegal character {ch!r}", pos)
        i += len(word)
        col += len(word)
    toks.append(Token(Tok.EOF, "", Pos(line, col)))
    return toks
