"""Abstract syntax for the Lustre subset.

All nodes are frozen dataclasses. Source positions are carried along for
diagnostics but never take part in equality, so a re-parsed pretty-printed
program compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _pos() -> Optional[Pos]:
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class BoolConst:
    value: bool
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class IntConst:
    value: int
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class RealConst:
    value: Fraction
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class EnumConst:
    name: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class UnOp:
    op: str  # "not" | "-"
    arg: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Expr
    else_: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Pre:
    arg: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Arrow:
    first: Expr
    rest: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class ClockTest:
    """``C(x)`` as the condition of ``every``."""

    ctor: str
    var: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Call:
    node: str
    args: tuple[Expr, ...]
    reset: Optional[Expr] = None
    # Instance identifier; only set on normalized programs.
    uid: Optional[str] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class When:
    arg: Expr
    ctor: str
    clock: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Merge:
    clock: str
    branches: tuple[tuple[str, Expr], ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Tuple:
    items: tuple[Expr, ...]
    pos: Optional[Pos] = _pos()


Expr = Union[
    BoolConst, IntConst, RealConst, EnumConst, Var, UnOp, BinOp, If, Pre,
    Arrow, ClockTest, Call, When, Merge, Tuple,
]

CONSTANTS = (BoolConst, IntConst, RealConst, EnumConst)


def children(e: Expr) -> tuple[Expr, ...]:
    """Direct subexpressions, in evaluation-neutral source order."""
    if isinstance(e, (UnOp, Pre)):
        return (e.arg,)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, If):
        return (e.cond, e.then, e.else_)
    if isinstance(e, Arrow):
        return (e.first, e.rest)
    if isinstance(e, Call):
        return e.args + ((e.reset,) if e.reset is not None else ())
    if isinstance(e, When):
        return (e.arg,)
    if isinstance(e, Merge):
        return tuple(b for _, b in e.branches)
    if isinstance(e, Tuple):
        return e.items
    return ()


def walk(e: Expr):
    yield e
    for c in children(e):
        yield from walk(c)


def free_vars(e: Expr, *, through_pre: bool = True) -> list[str]:
    """Variables read by ``e`` in first-occurrence order.

    With ``through_pre=False``, reads under ``pre`` are skipped: the result is
    then the set of instantaneous dependencies.
    """
    seen: dict[str, None] = {}

    def go(x: Expr) -> None:
        if isinstance(x, Var):
            seen.setdefault(x.name)
        elif isinstance(x, Pre) and not through_pre:
            return
        elif isinstance(x, (When, Merge)):
            seen.setdefault(x.clock)
        elif isinstance(x, ClockTest):
            seen.setdefault(x.var)
        for c in children(x):
            go(c)

    go(e)
    return list(seen)


# ---------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str  # "bool" | "int" | "real" | enum type name
    is_clock: bool = False
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Equation:
    targets: tuple[str, ...]
    rhs: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Transition:
    guard: Expr
    restart: bool
    target: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class StateDecl:
    name: str
    strong: tuple[Transition, ...] = ()
    locals: tuple[VarDecl, ...] = ()
    equations: tuple[Equation, ...] = ()
    automata: tuple[AutomatonDecl, ...] = ()
    weak: tuple[Transition, ...] = ()
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class AutomatonDecl:
    name: str
    states: tuple[StateDecl, ...]
    pos: Optional[Pos] = _pos()

    @property
    def initial(self) -> StateDecl:
        return self.states[0]


@dataclass(frozen=True)
class NodeDecl:
    name: str
    is_function: bool
    inputs: tuple[VarDecl, ...]
    outputs: tuple[VarDecl, ...]
    locals: tuple[VarDecl, ...] = ()
    equations: tuple[Equation, ...] = ()
    automata: tuple[AutomatonDecl, ...] = ()
    pos: Optional[Pos] = _pos()

    def decls(self) -> tuple[VarDecl, ...]:
        return self.inputs + self.outputs + self.locals

    def decl(self, name: str) -> Optional[VarDecl]:
        for d in self.decls():
            if d.name == name:
                return d
        return None


@dataclass(frozen=True)
class TypeDecl:
    name: str
    constructors: tuple[str, ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Program:
    types: tuple[TypeDecl, ...]
    nodes: tuple[NodeDecl, ...]

    def node(self, name: str) -> Optional[NodeDecl]:
        for n in self.nodes:
            if n.name == name:
                return n
        return None

    def enum_of(self, ctor: str) -> Optional[TypeDecl]:
        for t in self.types:
            if ctor in t.constructors:
                return t
        return None

    def type_decl(self, name: str) -> Optional[TypeDecl]:
        for t in self.types:
            if t.name == name:
                return t
        return None


def automaton_writes(a: AutomatonDecl) -> list[str]:
    """Host-level variables defined by some state of ``a``, first-write order."""
    out: dict[str, None] = {}
    for s in a.states:
        for v in state_writes(s):
            out.setdefault(v)
    return list(out)


def state_writes(s: StateDecl) -> list[str]:
    """Variables a state defines, excluding its own locals."""
    own = {d.name for d in s.locals}
    out: dict[str, None] = {}
    for eq in s.equations:
        for t in eq.targets:
            if t not in own:
                out.setdefault(t)
    for a in s.automata:
        for t in automaton_writes(a):
            if t not in own:
                out.setdefault(t)
    return list(out)
