"""Type checking.

Types are flat tuples of scalar type names (``"bool"``, ``"int"``,
``"real"`` or an enum type name); a single-valued expression has a 1-tuple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import ast as A
from ..diagnostics import (
    ARITY, NOT_A_FUNCTION, RECURSION, TYPE_MISMATCH, UNKNOWN_IDENT,
    CompileError, Diagnostic,
)

Types = tuple[str, ...]

BOOL, INT, REAL = "bool", "int", "real"
NUMERIC = (INT, REAL)
_ARITH = ("+", "-", "*", "/")
_ORDER = ("<", "<=", ">", ">=")
_LOGIC = ("and", "or", "xor", "=>")


def show(ts: Types) -> str:
    return ts[0] if len(ts) == 1 else "(" + ", ".join(ts) + ")"


@dataclass
class TypedProgram:
    program: A.Program
    # node name -> variable -> type, node-level declarations only
    envs: dict[str, dict[str, str]] = field(default_factory=dict)


class _Checker:
    def __init__(self, prog: A.Program, diags: list[Diagnostic]):
        self.prog = prog
        self.diags = diags

    def err(self, code: str, msg: str, pos) -> None:
        self.diags.append(Diagnostic(code, msg, pos))

    def expect(self, got: Optional[Types], want: Types, what: str, pos) -> None:
        if got is not None and got != want:
            self.err(TYPE_MISMATCH, f"{what}: expected {show(want)}, found {show(got)}", pos)

    def infer(self, e: A.Expr, env: dict[str, str]) -> Optional[Types]:
        """Type of ``e``, or None after reporting an error."""
        if isinstance(e, A.BoolConst):
            return (BOOL,)
        if isinstance(e, A.IntConst):
            return (INT,)
        if isinstance(e, A.RealConst):
            return (REAL,)
        if isinstance(e, A.EnumConst):
            t = self.prog.enum_of(e.name)
            if t is None:
                self.err(UNKNOWN_IDENT, f"unknown constructor {e.name!r}", e.pos)
                return None
            return (t.name,)
        if isinstance(e, A.Var):
            if e.name not in env:
                self.err(UNKNOWN_IDENT, f"unknown variable {e.name!r}", e.pos)
                return None
            return (env[e.name],)
        if isinstance(e, A.UnOp):
            t = self.infer(e.arg, env)
            if t is None:
                return None
            if e.op == "not":
                self.expect(t, (BOOL,), "operand of 'not'", e.pos)
                return (BOOL,)
            if len(t) != 1 or t[0] not in NUMERIC:
                self.err(TYPE_MISMATCH, f"operand of unary '-': expected int or real, found {show(t)}", e.pos)
                return None
            return t
        if isinstance(e, A.BinOp):
            return self.binop(e, env)
        if isinstance(e, A.If):
            c = self.infer(e.cond, env)
            self.expect(c, (BOOL,), "if condition", e.pos)
            t1, t2 = self.infer(e.then, env), self.infer(e.else_, env)
            if t1 is not None and t2 is not None and t1 != t2:
                self.err(TYPE_MISMATCH, f"if branches disagree: {show(t1)} vs {show(t2)}", e.pos)
                return None
            return t1 if t1 is not None else t2
        if isinstance(e, A.Pre):
            return self.infer(e.arg, env)
        if isinstance(e, A.Arrow):
            t1, t2 = self.infer(e.first, env), self.infer(e.rest, env)
            if t1 is not None and t2 is not None and t1 != t2:
                self.err(TYPE_MISMATCH, f"'->' operands disagree: {show(t1)} vs {show(t2)}", e.pos)
                return None
            return t1 if t1 is not None else t2
        if isinstance(e, A.Tuple):
            out: list[str] = []
            for x in e.items:
                t = self.infer(x, env)
                if t is None:
                    return None
                out.extend(t)
            return tuple(out)
        if isinstance(e, A.When):
            self.clock_ctor(e.clock, e.ctor, env, e.pos)
            return self.infer(e.arg, env)
        if isinstance(e, A.Merge):
            return self.merge(e, env)
        if isinstance(e, A.Call):
            return self.call(e, env)
        if isinstance(e, A.ClockTest):
            self.clock_ctor(e.var, e.ctor, env, e.pos)
            return (BOOL,)
        raise TypeError(e)

    def clock_ctor(self, var: str, ctor: str, env, pos) -> Optional[A.TypeDecl]:
        if var not in env:
            self.err(UNKNOWN_IDENT, f"unknown clock variable {var!r}", pos)
            return None
        td = self.prog.type_decl(env[var])
        if td is None:
            self.err(TYPE_MISMATCH, f"clock {var!r} must have an enumerated type, found {env[var]}", pos)
            return None
        if ctor not in td.constructors:
            self.err(TYPE_MISMATCH, f"constructor {ctor!r} does not belong to type {td.name} of clock {var!r}", pos)
        return td

    def binop(self, e: A.BinOp, env) -> Optional[Types]:
        l, r = self.infer(e.left, env), self.infer(e.right, env)
        if l is None or r is None:
            return None
        if e.op in _LOGIC:
            self.expect(l, (BOOL,), f"left operand of {e.op!r}", e.pos)
            self.expect(r, (BOOL,), f"right operand of {e.op!r}", e.pos)
            return (BOOL,)
        if len(l) != 1 or l != r:
            self.err(TYPE_MISMATCH, f"operands of {e.op!r} disagree: {show(l)} vs {show(r)}", e.pos)
            return None
        if e.op in ("=", "<>"):
            return (BOOL,)
        if e.op == "/" and l[0] != REAL:
            self.err(TYPE_MISMATCH, f"'/' is only defined on real, found {l[0]}", e.pos)
            return None
        if l[0] not in NUMERIC:
            self.err(TYPE_MISMATCH, f"operands of {e.op!r} must be int or real, found {l[0]}", e.pos)
            return None
        return (BOOL,) if e.op in _ORDER else l

    def merge(self, e: A.Merge, env) -> Optional[Types]:
        td = self.clock_ctor(e.clock, e.branches[0][0], env, e.pos)
        if td is not None:
            ctors = [c for c, _ in e.branches]
            if sorted(ctors) != sorted(td.constructors) or len(set(ctors)) != len(ctors):
                self.err(TYPE_MISMATCH, f"merge on {e.clock!r} must list each constructor of {td.name} exactly once", e.pos)
        result: Optional[Types] = None
        for _, b in e.branches:
            t = self.infer(b, env)
            if t is None:
                continue
            if result is not None and t != result:
                self.err(TYPE_MISMATCH, f"merge branches disagree: {show(result)} vs {show(t)}", e.pos)
                return None
            result = t
        return result

    def call(self, e: A.Call, env) -> Optional[Types]:
        callee = self.prog.node(e.node)
        if callee is None:
            self.err(UNKNOWN_IDENT, f"unknown node {e.node!r}", e.pos)
            return None
        args: list[str] = []
        for a in e.args:
            t = self.infer(a, env)
            if t is None:
                return None
            args.extend(t)
        want = tuple(d.type for d in callee.inputs)
        if len(args) != len(want):
            self.err(ARITY, f"{e.node} expects {len(want)} argument(s), got {len(args)}", e.pos)
        elif tuple(args) != want:
            self.err(TYPE_MISMATCH, f"arguments of {e.node}: expected {show(want)}, found {show(tuple(args))}", e.pos)
        if e.reset is not None:
            self.expect(self.infer(e.reset, env), (BOOL,), "every condition", e.pos)
        return tuple(d.type for d in callee.outputs)

    # -- declarations --------------------------------------------------------

    def equations(self, eqs, env) -> None:
        for eq in eqs:
            t = self.infer(eq.rhs, env)
            if t is None:
                continue
            if len(t) != len(eq.targets):
                self.err(ARITY, f"equation defines {len(eq.targets)} variable(s) but its right-hand side has {len(t)} value(s)", eq.pos)
                continue
            want = tuple(env.get(x, "?") for x in eq.targets)
            self.expect(t, want, "equation " + ", ".join(eq.targets), eq.pos)

    def automaton(self, a: A.AutomatonDecl, env) -> None:
        for s in a.states:
            for tr in s.strong:
                self.expect(self.infer(tr.guard, env), (BOOL,), "unless guard", tr.pos)
            inner = dict(env)
            inner.update((d.name, d.type) for d in s.locals)
            self.equations(s.equations, inner)
            for sub in s.automata:
                self.automaton(sub, inner)
            for tr in s.weak:
                self.expect(self.infer(tr.guard, inner), (BOOL,), "until guard", tr.pos)

    def node(self, n: A.NodeDecl) -> dict[str, str]:
        env = {d.name: d.type for d in n.decls()}
        self.equations(n.equations, env)
        for a in n.automata:
            self.automaton(a, env)
        if n.is_function:
            self.function_body(n)
        return env

    def function_body(self, n: A.NodeDecl) -> None:
        if n.automata:
            self.err(NOT_A_FUNCTION, f"function {n.name} may not contain an automaton", n.automata[0].pos)
        for eq in n.equations:
            for x in A.walk(eq.rhs):
                if isinstance(x, A.Pre):
                    self.err(NOT_A_FUNCTION, f"function {n.name} may not use 'pre'", x.pos)
                elif isinstance(x, A.Arrow):
                    self.err(NOT_A_FUNCTION, f"function {n.name} may not use '->'", x.pos)
                elif isinstance(x, A.Call):
                    callee = self.prog.node(x.node)
                    if callee is not None and not callee.is_function:
                        self.err(NOT_A_FUNCTION, f"function {n.name} may not call node {x.node}", x.pos)


def calls_in_node(n: A.NodeDecl):
    def body(eqs, auts):
        for eq in eqs:
            yield from (x for x in A.walk(eq.rhs) if isinstance(x, A.Call))
        for a in auts:
            for s in a.states:
                for tr in s.strong + s.weak:
                    yield from (x for x in A.walk(tr.guard) if isinstance(x, A.Call))
                yield from body(s.equations, s.automata)
    yield from body(n.equations, n.automata)


def check_recursion(prog: A.Program, diags: list[Diagnostic]) -> None:
    graph = {n.name: [c for c in calls_in_node(n)] for n in prog.nodes}
    state: dict[str, int] = {}

    def visit(name: str, stack: list[str]) -> None:
        state[name] = 1
        for c in graph.get(name, []):
            if c.node not in graph:
                continue
            if state.get(c.node) == 1:
                cyc = stack[stack.index(c.node):] + [c.node] if c.node in stack else [name, c.node]
                diags.append(Diagnostic(RECURSION, "recursive node calls: " + " -> ".join(cyc), c.pos))
            elif c.node not in state:
                visit(c.node, stack + [c.node])
        state[name] = 2

    for n in prog.nodes:
        if n.name not in state:
            visit(n.name, [n.name])


def type_check(p: A.Program) -> TypedProgram:
    diags: list[Diagnostic] = []
    chk = _Checker(p, diags)
    out = TypedProgram(p)
    for n in p.nodes:
        out.envs[n.name] = chk.node(n)
    check_recursion(p, diags)
    if diags:
        raise CompileError(diags)
    return out


def expr_type(e: A.Expr, env: dict[str, str], prog: A.Program) -> Types:
    diags: list[Diagnostic] = []
    t = _Checker(prog, diags).infer(e, env)
    if diags or t is None:
        raise CompileError(diags)
    return t
