"""Compiler diagnostics.

Diagnostics are plain values; stages collect them and raise a single
:class:`CompileError` so callers (and tests) can inspect codes and positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .ast import Pos

# Stable diagnostic codes.
LEXICAL = "E0001"
SYNTAX = "E0002"
DUPLICATE = "E0003"
UNKNOWN_STATE = "E0004"
UNKNOWN_IDENT = "E0005"
UNDEFINED = "E0006"
RESERVED = "E0007"
TYPE_MISMATCH = "E0101"
ARITY = "E0102"
NOT_A_FUNCTION = "E0103"
RECURSION = "E0104"
CLOCK_MISMATCH = "E0201"
CAUSALITY = "E0301"
UNLESS_MEMORY = "E0302"
STATE_WRITES = "E0401"
NAME_CLASH = "E0402"
NO_STATE = "E0501"
UNKNOWN_NODE = "E0502"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    pos: Optional[Pos] = None

    def render(self, filename: str = "<input>") -> str:
        line, col = (self.pos.line, self.pos.col) if self.pos else (0, 0)
        return f"{filename}:{line}:{col}: error[{self.code}]: {self.message}"


class CompileError(Exception):
    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.render() for d in self.diagnostics))

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


def error(code: str, message: str, pos: Optional[Pos] = None) -> CompileError:
    return CompileError([Diagnostic(code, message, pos)])


class InternalError(AssertionError):
    """A compiler invariant was violated; always a bug, never a user error."""
