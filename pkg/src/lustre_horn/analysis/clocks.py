"""Clock calculus.

A clock is either the node's base clock or a sampling ``On(parent, C, x)``
of a parent clock by constructor ``C`` of the enumerated flow ``x``.
Inference is local to a node: inputs and outputs live on the base clock,
locals and constants get their clock by unification.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .. import ast as A
from ..diagnostics import CLOCK_MISMATCH, CompileError, Diagnostic


@dataclass(frozen=True)
class Base:
    def __str__(self) -> str:
        return "base"


@dataclass(frozen=True)
class On:
    parent: Clock
    ctor: str
    var: str

    def __str__(self) -> str:
        return f"{self.parent} on {self.ctor}({self.var})"


BASE = Base()


@dataclass(eq=False)
class _CVar:
    id: int


Clock = Union[Base, On]
_Term = Union[Base, On, _CVar]


def path(ck: Clock) -> list[tuple[str, str]]:
    """The (constructor, clock variable) samplings from the base clock down."""
    out = []
    while isinstance(ck, On):
        out.append((ck.ctor, ck.var))
        ck = ck.parent
    return out[::-1]


def is_prefix(outer: Clock, inner: Clock) -> bool:
    """True when ``inner`` is ``outer`` or a sub-clock of it."""
    p, q = path(outer), path(inner)
    return q[: len(p)] == p


@dataclass
class NodeClocks:
    vars: dict[str, Clock] = field(default_factory=dict)
    # id(expr) -> clock of each component of the expression
    exprs: dict[int, tuple[Clock, ...]] = field(default_factory=dict)

    def of(self, e: A.Expr) -> tuple[Clock, ...]:
        return self.exprs[id(e)]


class _Infer:
    def __init__(self, node_name: str, decls: dict[str, A.VarDecl], diags: list[Diagnostic]):
        self.node = node_name
        self.decls = decls
        self.diags = diags
        self.binding: dict[int, _Term] = {}
        self.count = 0
        self.vars: dict[str, _Term] = {}
        self.exprs: dict[int, tuple[_Term, ...]] = {}
        self.resets: list[tuple[_Term, _Term, Optional[A.Pos]]] = []

    def fresh(self) -> _CVar:
        self.count += 1
        return _CVar(self.count)

    def find(self, c: _Term) -> _Term:
        while isinstance(c, _CVar) and c.id in self.binding:
            c = self.binding[c.id]
        return c

    def occurs(self, v: _CVar, c: _Term) -> bool:
        c = self.find(c)
        if isinstance(c, _CVar):
            return c.id == v.id
        if isinstance(c, On):
            return self.occurs(v, c.parent)
        return False

    def unify(self, a: _Term, b: _Term, pos, what: str) -> bool:
        a, b = self.find(a), self.find(b)
        if isinstance(a, _CVar) and isinstance(b, _CVar) and a.id == b.id:
            return True
        if isinstance(a, _CVar) and not self.occurs(a, b):
            self.binding[a.id] = b
            return True
        if isinstance(b, _CVar) and not self.occurs(b, a):
            self.binding[b.id] = a
            return True
        if isinstance(a, Base) and isinstance(b, Base):
            return True
        if isinstance(a, On) and isinstance(b, On) and a.ctor == b.ctor and a.var == b.var:
            return self.unify(a.parent, b.parent, pos, what)
        self.diags.append(Diagnostic(
            CLOCK_MISMATCH,
            f"clock mismatch in {what}: {self.show(a)} vs {self.show(b)}", pos))
        return False

    def resolve(self, c: _Term) -> Clock:
        c = self.find(c)
        if isinstance(c, _CVar):
            self.binding[c.id] = BASE
            return BASE
        if isinstance(c, On):
            return On(self.resolve(c.parent), c.ctor, c.var)
        return c

    def show(self, c: _Term) -> str:
        c = self.find(c)
        if isinstance(c, _CVar):
            return "?"
        if isinstance(c, On):
            return f"{self.show(c.parent)} on {c.ctor}({c.var})"
        return "base"

    def var(self, name: str, pos) -> _Term:
        if name not in self.vars:
            # unknown names were reported by the type checker
            self.vars[name] = self.fresh()
        return self.vars[name]

    def clock_var(self, name: str, pos) -> _Term:
        d = self.decls.get(name)
        if d is not None and not d.is_clock:
            self.diags.append(Diagnostic(
                CLOCK_MISMATCH, f"{name!r} is used as a clock but is not declared with 'clock'", pos))
        return self.var(name, pos)

    def unify_all(self, cks: list[_Term], pos, what: str) -> _Term:
        first = cks[0] if cks else self.fresh()
        for c in cks[1:]:
            self.unify(first, c, pos, what)
        return first

    def expr(self, e: A.Expr) -> tuple[_Term, ...]:
        out = self._expr(e)
        self.exprs[id(e)] = out
        return out

    def _expr(self, e: A.Expr) -> tuple[_Term, ...]:
        if isinstance(e, A.CONSTANTS):
            return (self.fresh(),)
        if isinstance(e, A.Var):
            return (self.var(e.name, e.pos),)
        if isinstance(e, (A.UnOp, A.Pre)):
            return self.expr(e.arg)
        if isinstance(e, A.BinOp):
            (l,), (r,) = self.expr(e.left), self.expr(e.right)
            self.unify(l, r, e.pos, f"operands of {e.op!r}")
            return (l,)
        if isinstance(e, A.If):
            (c,) = self.expr(e.cond)
            t, f = self.expr(e.then), self.expr(e.else_)
            for a, b in zip(t, f):
                self.unify(c, a, e.pos, "if-then-else")
                self.unify(a, b, e.pos, "if-then-else")
            return t
        if isinstance(e, A.Arrow):
            a, b = self.expr(e.first), self.expr(e.rest)
            for x, y in zip(a, b):
                self.unify(x, y, e.pos, "'->'")
            return a
        if isinstance(e, A.Tuple):
            out: list[_Term] = []
            for x in e.items:
                out.extend(self.expr(x))
            return tuple(out)
        if isinstance(e, A.When):
            ck = self.clock_var(e.clock, e.pos)
            for c in self.expr(e.arg):
                self.unify(c, ck, e.pos, f"sampling 'when {e.ctor}({e.clock})'")
            return tuple(On(ck, e.ctor, e.clock) for _ in self.exprs[id(e.arg)])
        if isinstance(e, A.Merge):
            ck = self.clock_var(e.clock, e.pos)
            width = None
            for ctor, b in e.branches:
                cs = self.expr(b)
                width = len(cs) if width is None else width
                for c in cs:
                    self.unify(c, On(ck, ctor, e.clock), b.pos or e.pos,
                               f"branch {ctor} of merge on {e.clock!r}")
            return tuple(ck for _ in range(width or 1))
        if isinstance(e, A.Call):
            args: list[_Term] = []
            for a in e.args:
                args.extend(self.expr(a))
            ck = self.unify_all(args, e.pos, f"arguments of {e.node}")
            if e.reset is not None:
                (rc,) = self.expr(e.reset)
                self.resets.append((rc, ck, e.pos))
            return (ck,) * self.width(e)
        if isinstance(e, A.ClockTest):
            return (self.clock_var(e.var, e.pos),)
        raise TypeError(e)

    width_of: dict[str, int] = {}

    def width(self, call: A.Call) -> int:
        return self.width_of.get(call.node, 1)

    def equations(self, eqs) -> None:
        for eq in eqs:
            cs = self.expr(eq.rhs)
            for t, c in zip(eq.targets, cs):
                self.unify(self.var(t, eq.pos), c, eq.pos, f"definition of {t!r}")

    def automaton(self, a: A.AutomatonDecl) -> None:
        # State bodies and guards are written on the host's base clock.
        for s in a.states:
            for tr in s.strong + s.weak:
                (g,) = self.expr(tr.guard)
                self.unify(g, BASE, tr.pos, "transition guard")
            for d in s.locals:
                self.decls[d.name] = d
                self.vars[d.name] = self.fresh()
            self.equations(s.equations)
            for sub in s.automata:
                self.automaton(sub)

    def finish(self) -> NodeClocks:
        for rc, ck, pos in self.resets:
            r, k = self.resolve(rc), self.resolve(ck)
            if not is_prefix(r, k):
                self.diags.append(Diagnostic(
                    CLOCK_MISMATCH, f"every condition on clock {r} is not an ancestor of the call clock {k}", pos))
        return NodeClocks(
            {v: self.resolve(c) for v, c in self.vars.items()},
            {k: tuple(self.resolve(c) for c in cs) for k, cs in self.exprs.items()},
        )


def _widths(prog: A.Program) -> dict[str, int]:
    w = {n.name: len(n.outputs) for n in prog.nodes}
    w["arrow"] = 1
    return w


def infer_node(n, prog: A.Program, diags: list[Diagnostic], outputs=None) -> NodeClocks:
    """Clock inference for a source node or a normalized node."""
    decls = {d.name: d for d in n.inputs + n.outputs + n.locals}
    inf = _Infer(n.name, decls, diags)
    inf.width_of = _widths(prog)
    for d in n.inputs + n.outputs:
        inf.vars[d.name] = BASE
    for d in n.locals:
        inf.vars[d.name] = inf.fresh()
    if isinstance(n, A.NodeDecl):
        inf.equations(n.equations)
        for a in n.automata:
            inf.automaton(a)
    else:
        for eq in n.equations:
            if isinstance(eq.rhs, A.Call) and eq.rhs.node == "arrow":
                # polymorphic: as many results as targets
                args = []
                for a in eq.rhs.args:
                    args.extend(inf.expr(a))
                ck = inf.unify_all(args, eq.pos, "arguments of '->'")
                if eq.rhs.reset is not None:
                    (rc,) = inf.expr(eq.rhs.reset)
                    inf.resets.append((rc, ck, eq.pos))
                inf.exprs[id(eq.rhs)] = (ck,) * len(eq.targets)
                for t in eq.targets:
                    inf.unify(inf.var(t, eq.pos), ck, eq.pos, f"definition of {t!r}")
            else:
                inf.equations([eq])
    return inf.finish()


def clock_check(p: A.Program) -> dict[str, NodeClocks]:
    diags: list[Diagnostic] = []
    out = {n.name: infer_node(n, p, diags) for n in p.nodes}
    if diags:
        raise CompileError(diags)
    return out
