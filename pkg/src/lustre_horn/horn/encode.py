"""Modular Horn encoding of normalized programs.

Every node ``f`` gets a step relation over ``inputs ++ outputs ++ state_c ++
state_x`` and, when it has state, a reset relation over ``state_c ++
state_x``; a function (no state by construction) gets a single relation
named after it. Rule variables are prefixed with the node name, so that
the global ``declare-var`` section never mixes two nodes' variables.

Equations are guarded by their clock. Stateful equations (memories and
calls) also carry a frame condition keeping their state when the clock is
off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import ast as A
from ..analysis.clocks import NodeClocks, infer_node, path
from ..diagnostics import NAME_CLASH, NO_STATE, UNKNOWN_NODE, CompileError, Diagnostic, InternalError, error
from ..normalization import ARROW, NormalizedNode, NormalizedProgram, arrow_parts, is_memory
from ..state_model import FlatState, StateTree, compute_all, flatten
from .terms import (
    TRUE, App, Ctor, Lit, RelApp, Rule, Term, Var, conj, eq, implies, ite, neg, sort_of,
)

REACH = "Reach"
ERR = "ERR"


@dataclass
class Relation:
    name: str
    sorts: tuple[str, ...]
    node: Optional[str] = None
    kind: str = ""  # "step" | "reset" | "reach" | "err"


@dataclass
class HornSystem:
    sorts: list[A.TypeDecl] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)
    rules: list[Rule] = field(default_factory=list)
    queries: list[str] = field(default_factory=list)

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)

    def defining_rules(self, name: str) -> list[Rule]:
        return [r for r in self.rules if r.head.rel == name]


def declare_enum_sorts(p) -> list[A.TypeDecl]:
    return list(p.types)


def step_name(n) -> str:
    return n.name if n.is_function else f"{n.name}_step"


def reset_name(n) -> str:
    return f"{n.name}_reset"


def arrow_inits(t: StateTree) -> list[bool]:
    """Per flattened entry: True for arrow inits, which a reset sets to true."""
    if t.node == ARROW:
        return [True]
    out = [False] * len(t.mems)
    for child in t.children:
        out.extend(arrow_inits(child))
    return out


class NodeEncoder:
    def __init__(self, n: NormalizedNode, prog: NormalizedProgram, trees: dict[str, StateTree],
                 clocks: NodeClocks):
        self.n = n
        self.prog = prog
        self.trees = trees
        self.tree = trees[n.name]
        self.flat = flatten(self.tree)
        self.clocks = clocks
        self.types = {d.name: d.type for d in n.decls()}

    # -- naming --------------------------------------------------------------

    def var(self, name: str) -> Var:
        return Var(f"{self.n.name}.{name}", sort_of(self.types[name]))

    def state(self, label: str, prefix: str = "", flat: Optional[FlatState] = None) -> list[Var]:
        flat = self.flat if flat is None else flat
        names = flat.labeled(label, f"{self.n.name}.{prefix}")
        return [Var(nm, sort_of(ty)) for nm, ty in zip(names, flat.types)]

    def head_args(self) -> list[Var]:
        io = [self.var(d.name) for d in self.n.inputs + self.n.outputs]
        return io + self.state("c") + self.state("x")

    # -- expressions ---------------------------------------------------------

    def expr(self, e: A.Expr) -> Term:
        if isinstance(e, A.BoolConst):
            return Lit(e.value)
        if isinstance(e, A.IntConst):
            return Lit(e.value)
        if isinstance(e, A.RealConst):
            return Lit(e.value)
        if isinstance(e, A.EnumConst):
            return Ctor(e.name, self.prog.enum_of(e.name).name)
        if isinstance(e, A.Var):
            return self.var(e.name)
        if isinstance(e, A.UnOp):
            return App("not" if e.op == "not" else "-", (self.expr(e.arg),))
        if isinstance(e, A.BinOp):
            l, r = self.expr(e.left), self.expr(e.right)
            if e.op == "<>":
                return App("not", (App("=", (l, r)),))
            return App(e.op, (l, r))
        if isinstance(e, A.If):
            return ite(self.expr(e.cond), self.expr(e.then), self.expr(e.else_))
        if isinstance(e, A.When):
            # sampling only matters to the clock calculus
            return self.expr(e.arg)
        if isinstance(e, A.Merge):
            ck = self.var(e.clock)
            *init, (_, last) = e.branches
            out = self.expr(last)
            for c, b in reversed(init):
                out = ite(eq(ck, Ctor(c, ck.sort)), self.expr(b), out)
            return out
        raise InternalError(f"unexpected expression in normalized node {self.n.name}: {e!r}")

    def guard(self, target: str) -> Term:
        ck = self.clocks.vars.get(target)
        return conj(*(eq(self.var(x), Ctor(c, sort_of(self.types[x]))) for c, x in path(ck))) if ck else TRUE

    # -- equations -----------------------------------------------------------

    def encode_equation(self, e: A.Equation) -> Term:
        g = self.guard(e.targets[0])
        rhs = e.rhs
        if is_memory(e):
            m = e.targets[0]
            k = self.tree.mems.index((m, self.types[m]))
            c, x = self.state("c")[k], self.state("x")[k]
            return conj(implies(g, conj(eq(self.var(m), c), eq(x, self.var(rhs.arg.name)))),
                        self.frame(g, [x], [c]))
        if isinstance(rhs, A.Call):
            return self.encode_call(e, g)
        (x,) = e.targets
        if isinstance(rhs, A.Merge):
            ck = self.var(rhs.clock)
            body = conj(*(implies(eq(ck, Ctor(c, ck.sort)), eq(self.var(x), self.expr(b)))
                          for c, b in rhs.branches))
        else:
            body = eq(self.var(x), self.expr(rhs))
        return implies(g, body)

    def frame(self, g: Term, nxt: list[Var], cur: list[Var]) -> Term:
        if g == TRUE or not nxt:
            return TRUE
        return implies(neg(g), conj(*(eq(x, c) for x, c in zip(nxt, cur))))

    def instance_state(self, uid: str, label: str) -> list[Var]:
        return self.state(label, f"{uid}.", flatten(self.tree.child(uid)))

    def encode_call(self, e: A.Equation, g: Term) -> Term:
        call: A.Call = e.rhs
        child = self.tree.child(call.uid)
        sc, si, sx = (self.instance_state(call.uid, lbl) for lbl in ("c", "i", "x"))
        reset = self.var(call.reset.name) if call.reset is not None else None
        inter = []
        for c, i, is_init in zip(sc, si, arrow_inits(child)):
            inter.append(eq(i, ite(reset, TRUE, c) if reset is not None and is_init else c))
        outs = [self.var(t) for t in e.targets]
        if call.node == ARROW:
            first, rest = arrow_parts(e)
            (init_i,), (init_x,) = si, sx
            body = conj(
                *inter,
                eq(init_x, Lit(False)),
                implies(eq(init_i, TRUE), conj(*(eq(o, self.expr(a)) for o, a in zip(outs, first)))),
                implies(eq(init_i, Lit(False)), conj(*(eq(o, self.expr(a)) for o, a in zip(outs, rest)))),
            )
        else:
            callee = self.prog.node(call.node)
            args = [self.expr(a) for a in call.args]
            app = RelApp(step_name(callee), tuple(args + outs + si + sx), site=call.uid)
            body = conj(*inter, app)
        return conj(implies(g, body), self.frame(g, sx, sc))

    # -- rules ---------------------------------------------------------------

    def emit_step_rule(self) -> Rule:
        body = conj(*(self.encode_equation(e) for e in self.n.equations))
        return Rule(body, RelApp(step_name(self.n), tuple(self.head_args())))

    def emit_reset_rule(self) -> Optional[Rule]:
        if self.tree.is_empty:
            return None
        cur, nxt = self.state("c"), self.state("x")
        parts: list[Term] = [eq(x, c) for x, c in zip(nxt[: len(self.tree.mems)], cur)]
        for (callee, uid), child in zip(self.tree.insts, self.tree.children):
            if child.is_empty:
                continue
            sc, sx = self.instance_state(uid, "c"), self.instance_state(uid, "x")
            if callee == ARROW:
                parts.append(eq(sx[0], TRUE))
            else:
                parts.append(RelApp(reset_name(self.prog.node(callee)), tuple(sc + sx), site=uid))
        return Rule(conj(*parts), RelApp(reset_name(self.n), tuple(cur + nxt)))


def encode_equation(e: A.Equation, ctx: NodeEncoder) -> Term:
    return ctx.encode_equation(e)


def encode_call(e: A.Equation, ctx: NodeEncoder) -> Term:
    return ctx.encode_call(e, ctx.guard(e.targets[0]))


def _arrow_rules() -> list[tuple[Relation, Rule]]:
    c, x = Var("arrow.init_c", "Bool"), Var("arrow.init_x", "Bool")
    return [
        (Relation("arrow_reset", ("Bool", "Bool"), ARROW, "reset"),
         Rule(eq(x, TRUE), RelApp("arrow_reset", (c, x)))),
        (Relation("arrow_step", ("Bool", "Bool"), ARROW, "step"),
         Rule(eq(x, Lit(False)), RelApp("arrow_step", (c, x)))),
    ]


def node_clocks(p: NormalizedProgram) -> dict[str, NodeClocks]:
    diags: list[Diagnostic] = []
    out = {n.name: infer_node(n, p, diags) for n in p.nodes}
    if diags:
        raise InternalError("normalized program is not well clocked: " + "; ".join(d.message for d in diags))
    return out


def encoders(p: NormalizedProgram) -> dict[str, NodeEncoder]:
    trees = compute_all(p)
    clocks = node_clocks(p)
    return {n.name: NodeEncoder(n, p, trees, clocks[n.name]) for n in p.nodes}


def emit_collecting_semantics(enc: NodeEncoder, prove: Optional[str] = None) -> tuple[list[Relation], list[Rule], list[str]]:
    """``Reach`` rules for ``enc``'s node, plus ``ERR`` when an output is to be proven."""
    n = enc.n
    if enc.tree.is_empty or n.is_function:
        if prove is not None:
            raise error(NO_STATE, f"main node {n.name} has no state")
        return [], [], []
    cur, nxt = enc.state("c"), enc.state("x")
    sorts = tuple(v.sort for v in cur)
    step = RelApp(step_name(n), tuple(enc.head_args()))
    rels = [Relation(REACH, sorts, n.name, "reach")]
    rules = [
        Rule(RelApp(reset_name(n), tuple(cur + nxt)), RelApp(REACH, tuple(nxt))),
        Rule(conj(step, RelApp(REACH, tuple(cur))), RelApp(REACH, tuple(nxt))),
    ]
    queries = []
    if prove is not None:
        d = next((d for d in n.outputs if d.name == prove), None)
        if d is None or d.type != "bool":
            raise error(UNKNOWN_NODE, f"node {n.name} has no boolean output {prove!r}")
        rels.append(Relation(ERR, (), n.name, "err"))
        rules.append(Rule(conj(RelApp(REACH, tuple(cur)), step, neg(enc.var(prove))), RelApp(ERR, ())))
        queries.append(ERR)
    return rels, rules, queries


def encode_program(p: NormalizedProgram, main: Optional[str] = None, prove: Optional[str] = None) -> HornSystem:
    h = HornSystem(sorts=declare_enum_sorts(p))
    encs = encoders(p)
    for rel, rule in _arrow_rules():
        h.relations.append(rel)
        h.rules.append(rule)
    for n in p.nodes:
        enc = encs[n.name]
        reset = enc.emit_reset_rule()
        if reset is not None:
            h.relations.append(Relation(reset_name(n), tuple(a.sort for a in reset.head.args), n.name, "reset"))
            h.rules.append(reset)
        step = enc.emit_step_rule()
        h.relations.append(Relation(step_name(n), tuple(a.sort for a in step.head.args), n.name, "step"))
        h.rules.append(step)
    if main is not None:
        if p.node(main) is None:
            raise error(UNKNOWN_NODE, f"unknown main node {main!r}")
        rels, rules, queries = emit_collecting_semantics(encs[main], prove)
        h.relations += rels
        h.rules += rules
        h.queries += queries
    seen: set[str] = set()
    for r in h.relations:
        if r.name in seen:
            raise CompileError([Diagnostic(NAME_CLASH, f"relation name {r.name!r} is used twice")])
        seen.add(r.name)
    return h
