"""Normalization of automaton-free nodes.

After normalization every equation has one of three shapes:

* ``m = pre y`` with ``y`` a variable (a memory definition),
* ``x1, ..., xk = f<uid>(args) [every c]`` with ``c`` a variable (a call,
  ``->`` included as calls to the built-in ``arrow`` node),
* ``x = e`` with ``e`` free of ``pre``, ``->`` and calls.

Fresh variables are named ``__<node>_<kind>_<n>``; the double underscore is
reserved in user programs so they cannot collide.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional

from . import ast as A
from .analysis.schedule import schedule_node
from .analysis.typecheck import expr_type
from .diagnostics import InternalError

ARROW = "arrow"


@dataclass(frozen=True)
class NormalizedNode:
    name: str
    is_function: bool
    inputs: tuple[A.VarDecl, ...]
    outputs: tuple[A.VarDecl, ...]
    locals: tuple[A.VarDecl, ...]
    equations: tuple[A.Equation, ...]

    def decls(self) -> tuple[A.VarDecl, ...]:
        return self.inputs + self.outputs + self.locals

    def decl(self, name: str) -> Optional[A.VarDecl]:
        for d in self.decls():
            if d.name == name:
                return d
        return None

    def calls(self) -> list[A.Call]:
        return [eq.rhs for eq in self.equations if isinstance(eq.rhs, A.Call)]


@dataclass(frozen=True)
class NormalizedProgram:
    types: tuple[A.TypeDecl, ...]
    nodes: tuple[NormalizedNode, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def node(self, name: str) -> Optional[NormalizedNode]:
        for n in self.nodes:
            if n.name == name:
                return n
        return None

    def type_decl(self, name: str) -> Optional[A.TypeDecl]:
        for t in self.types:
            if t.name == name:
                return t
        return None

    def enum_of(self, ctor: str) -> Optional[A.TypeDecl]:
        for t in self.types:
            if ctor in t.constructors:
                return t
        return None


def is_memory(eq: A.Equation) -> bool:
    return isinstance(eq.rhs, A.Pre)


def is_arrow(eq: A.Equation) -> bool:
    return isinstance(eq.rhs, A.Call) and eq.rhs.node == ARROW


def arrow_parts(eq: A.Equation) -> tuple[tuple[A.Expr, ...], tuple[A.Expr, ...]]:
    """The ``first`` and ``rest`` operands of a normalized arrow call."""
    k = len(eq.targets)
    return eq.rhs.args[:k], eq.rhs.args[k:]


class _Normalizer:
    def __init__(self, n: A.NodeDecl, prog):
        self.node = n
        self.prog = prog
        self.env = {d.name: d.type for d in n.decls()}
        self.counts: Counter[str] = Counter()
        self.locals: list[A.VarDecl] = list(n.locals)
        self.eqs: list[A.Equation] = []

    def fresh(self, kind: str, ty: str) -> str:
        self.counts[kind] += 1
        name = f"__{self.node.name}_{kind}_{self.counts[kind]}"
        self.locals.append(A.VarDecl(name, ty))
        self.env[name] = ty
        return name

    def type_of(self, e: A.Expr) -> str:
        (t,) = expr_type(e, self.env, self.prog)
        return t

    def emit(self, targets, rhs, pos) -> None:
        self.eqs.append(A.Equation(tuple(targets), rhs, pos))

    # -- expressions -------------------------------------------------------

    def expr(self, e: A.Expr) -> list[A.Expr]:
        """Normalize ``e`` into simple expressions, one per tuple component."""
        if isinstance(e, (A.Var, *A.CONSTANTS)):
            return [e]
        if isinstance(e, A.UnOp):
            return [A.UnOp(e.op, self.scalar(e.arg), e.pos)]
        if isinstance(e, A.BinOp):
            return [A.BinOp(e.op, self.scalar(e.left), self.scalar(e.right), e.pos)]
        if isinstance(e, A.If):
            c = self.scalar(e.cond)
            return [A.If(c, t, f, e.pos) for t, f in zip(self.expr(e.then), self.expr(e.else_))]
        if isinstance(e, A.Tuple):
            return [x for item in e.items for x in self.expr(item)]
        if isinstance(e, A.When):
            return [A.When(x, e.ctor, e.clock, e.pos) for x in self.expr(e.arg)]
        if isinstance(e, A.Merge):
            branches = [(c, self.expr(b)) for c, b in e.branches]
            width = len(branches[0][1])
            return [A.Merge(e.clock, tuple((c, bs[i]) for c, bs in branches), e.pos) for i in range(width)]
        if isinstance(e, A.Pre):
            return [A.Var(m) for m in self.memories(e, None)]
        if isinstance(e, A.Arrow):
            first, rest = self.expr(e.first), self.expr(e.rest)
            outs = [self.fresh("arrow", self.type_of(x)) for x in first]
            self.emit(outs, A.Call(ARROW, tuple(first + rest), pos=e.pos), e.pos)
            return [A.Var(x) for x in outs]
        if isinstance(e, A.Call):
            callee = self.prog.node(e.node)
            outs = [self.fresh("call", d.type) for d in callee.outputs]
            self.emit(outs, self.call(e), e.pos)
            return [A.Var(x) for x in outs]
        raise InternalError(f"cannot normalize {e!r}")

    def scalar(self, e: A.Expr) -> A.Expr:
        (x,) = self.expr(e)
        return x

    def call(self, e: A.Call) -> A.Call:
        args = tuple(x for a in e.args for x in self.expr(a))
        reset = e.reset
        if reset is not None and not isinstance(reset, A.ClockTest):
            reset = self.scalar(reset)
        return A.Call(e.node, args, reset, None, e.pos)

    def memories(self, e: A.Pre, targets: Optional[tuple[str, ...]]) -> list[str]:
        out = []
        for i, x in enumerate(self.expr(e.arg)):
            if not isinstance(x, A.Var):
                t = self.fresh("tmp", self.type_of(x))
                self.emit([t], x, e.pos)
                x = A.Var(t)
            m = targets[i] if targets else self.fresh("mem", self.env[x.name])
            self.emit([m], A.Pre(x, e.pos), e.pos)
            out.append(m)
        return out

    # -- equations ---------------------------------------------------------

    def equation(self, eq: A.Equation) -> None:
        rhs = eq.rhs
        if isinstance(rhs, A.Call):
            self.emit(eq.targets, self.call(rhs), eq.pos)
        elif isinstance(rhs, A.Arrow):
            first, rest = self.expr(rhs.first), self.expr(rhs.rest)
            self.emit(eq.targets, A.Call(ARROW, tuple(first + rest), pos=rhs.pos), eq.pos)
        elif isinstance(rhs, A.Pre):
            self.memories(rhs, eq.targets)
        else:
            for t, x in zip(eq.targets, self.expr(rhs)):
                self.emit([t], x, eq.pos)


def normalize_node(n: A.NodeDecl, prog: A.Program) -> NormalizedNode:
    """Normalize one automaton-free node (equations in source order, no uids yet)."""
    if n.automata:
        raise InternalError(f"node {n.name} still contains automata")
    norm = _Normalizer(n, prog)
    for eq in n.equations:
        norm.equation(eq)
    out = NormalizedNode(n.name, n.is_function, n.inputs, n.outputs, tuple(norm.locals), tuple(norm.eqs))
    return lower_every(out, prog, norm)


def lower_every(n: NormalizedNode, prog=None, norm: Optional[_Normalizer] = None) -> NormalizedNode:
    """Make every reset condition a boolean variable.

    ``f(x) every C(k)`` becomes ``b = (k = C); f(x) every b`` and any other
    non-variable condition is bound to a fresh variable the same way.
    """
    counts = norm.counts if norm else Counter(
        {"cond": sum(1 for d in n.locals if d.name.startswith(f"__{n.name}_cond_"))})
    locals_ = list(n.locals)
    eqs: list[A.Equation] = []
    for eq in n.equations:
        rhs = eq.rhs
        if isinstance(rhs, A.Call) and rhs.reset is not None and not isinstance(rhs.reset, A.Var):
            r = rhs.reset
            cond = A.BinOp("=", A.Var(r.var), A.EnumConst(r.ctor), r.pos) if isinstance(r, A.ClockTest) else r
            counts["cond"] += 1
            b = f"__{n.name}_cond_{counts['cond']}"
            locals_.append(A.VarDecl(b, "bool"))
            eqs.append(A.Equation((b,), cond, eq.pos))
            rhs = replace(rhs, reset=A.Var(b))
        eqs.append(A.Equation(eq.targets, rhs, eq.pos))
    return replace(n, locals=tuple(locals_), equations=tuple(eqs))


def assign_uids(n: NormalizedNode) -> NormalizedNode:
    """Number call sites per callee in equation order: ``count_1``, ``count_2``, ..."""
    counts: Counter[str] = Counter()
    eqs = []
    for eq in n.equations:
        if isinstance(eq.rhs, A.Call):
            counts[eq.rhs.node] += 1
            eq = A.Equation(eq.targets, replace(eq.rhs, uid=f"{eq.rhs.node}_{counts[eq.rhs.node]}"), eq.pos)
        eqs.append(eq)
    return replace(n, equations=tuple(eqs))


def schedule(n: NormalizedNode) -> NormalizedNode:
    order = schedule_node(n)
    return replace(n, equations=tuple(order.apply(n.equations)))


# -- normal form linter ------------------------------------------------------

def _simple(e: A.Expr) -> bool:
    return not any(isinstance(x, (A.Pre, A.Arrow, A.Call, A.Tuple, A.ClockTest)) for x in A.walk(e))


def lint(n: NormalizedNode) -> None:
    """Check the normal form; a violation is a compiler bug."""
    uids: set[str] = set()
    declared = {d.name for d in n.decls()}
    for eq in n.equations:
        for t in eq.targets:
            if t not in declared:
                raise InternalError(f"{n.name}: undeclared target {t}")
        rhs = eq.rhs
        if isinstance(rhs, A.Pre):
            if len(eq.targets) != 1 or not isinstance(rhs.arg, A.Var):
                raise InternalError(f"{n.name}: memory over a non-variable in {eq.targets}")
        elif isinstance(rhs, A.Call):
            if rhs.uid is None or rhs.uid in uids:
                raise InternalError(f"{n.name}: missing or duplicate uid on call to {rhs.node}")
            uids.add(rhs.uid)
            if rhs.reset is not None and not isinstance(rhs.reset, A.Var):
                raise InternalError(f"{n.name}: reset condition of {rhs.uid} is not a variable")
            if not all(_simple(a) for a in rhs.args):
                raise InternalError(f"{n.name}: non-simple argument in call {rhs.uid}")
            if rhs.node == ARROW and len(rhs.args) != 2 * len(eq.targets):
                raise InternalError(f"{n.name}: malformed arrow {rhs.uid}")
        else:
            if len(eq.targets) != 1 or not _simple(rhs):
                raise InternalError(f"{n.name}: equation for {eq.targets} is not simple")


def uninitialized_reads(n: NormalizedNode) -> list[str]:
    """Memories that may be observed before they are first written.

    A memory is considered initialized when it only flows into the ``rest``
    operand of an arrow, possibly through simple equations and calls.
    """
    readers: dict[str, list[A.Equation]] = {}
    for eq in n.equations:
        for v in A.free_vars(eq.rhs):
            readers.setdefault(v, []).append(eq)
    outputs = {d.name for d in n.outputs}
    memo: dict[str, bool] = {}

    def guarded(v: str) -> bool:
        if v in memo:
            return memo[v]
        memo[v] = True  # a dependency cycle adds nothing new
        ok = v not in outputs
        for eq in readers.get(v, []):
            if not ok:
                break
            if is_memory(eq):
                ok = False
            elif is_arrow(eq):
                first, _ = arrow_parts(eq)
                if any(v in A.free_vars(x) for x in first):
                    ok = all(guarded(t) for t in eq.targets)
            elif isinstance(eq.rhs, A.Call) and eq.rhs.reset is not None and v == eq.rhs.reset.name:
                ok = False
            else:
                ok = all(guarded(t) for t in eq.targets)
        memo[v] = ok
        return ok

    return [eq.targets[0] for eq in n.equations if is_memory(eq) and not guarded(eq.targets[0])]


def normalize_program(p: A.Program) -> NormalizedProgram:
    """Normalize, schedule and number every node of an automaton-free program."""
    nodes, warnings = [], []
    for n in p.nodes:
        nn = assign_uids(schedule(normalize_node(n, p)))
        lint(nn)
        for m in uninitialized_reads(nn):
            warnings.append(f"node {n.name}: memory {m} may be read before initialization")
        nodes.append(nn)
    return NormalizedProgram(p.types, tuple(nodes), tuple(warnings))


def normalized_to_str(n: NormalizedNode) -> str:
    from .frontend.printer import node_to_str

    return node_to_str(A.NodeDecl(n.name, n.is_function, n.inputs, n.outputs, n.locals, n.equations))


def program_to_str(p: NormalizedProgram) -> str:
    parts = [f"type {t.name} = enum {{ {', '.join(t.constructors)} }};" for t in p.types]
    parts.extend(normalized_to_str(n) for n in p.nodes)
    return "\n\n".join(parts) + "\n"
