"""Inlining of node calls in normalized programs.

Used for the ``--inline`` option: the unless and handler nodes produced by
the automaton pass are substituted into their hosts before Horn emission.
A callee runs on the clock of its call, so its constants are sampled onto
that clock, its inputs become locals bound to the arguments, and its
outputs are the call's targets. A reset condition on the call carries over
to every stateful call inside the callee.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable

from . import ast as A
from .analysis.clocks import BASE, infer_node, path
from .diagnostics import Diagnostic, InternalError
from .normalization import NormalizedNode, NormalizedProgram, assign_uids, lint, schedule

CONSTS = (A.BoolConst, A.IntConst, A.RealConst, A.EnumConst)


def map_expr(e: A.Expr, f: Callable[[A.Expr], A.Expr]) -> A.Expr:
    """Rebuild ``e`` bottom-up, applying ``f`` to every node."""
    if isinstance(e, A.UnOp):
        e = replace(e, arg=map_expr(e.arg, f))
    elif isinstance(e, A.BinOp):
        e = replace(e, left=map_expr(e.left, f), right=map_expr(e.right, f))
    elif isinstance(e, A.If):
        e = replace(e, cond=map_expr(e.cond, f), then=map_expr(e.then, f), else_=map_expr(e.else_, f))
    elif isinstance(e, A.Pre):
        e = replace(e, arg=map_expr(e.arg, f))
    elif isinstance(e, A.Arrow):
        e = replace(e, first=map_expr(e.first, f), rest=map_expr(e.rest, f))
    elif isinstance(e, A.Call):
        e = replace(e, args=tuple(map_expr(a, f) for a in e.args),
                    reset=None if e.reset is None else map_expr(e.reset, f))
    elif isinstance(e, A.When):
        e = replace(e, arg=map_expr(e.arg, f))
    elif isinstance(e, A.Merge):
        e = replace(e, branches=tuple((c, map_expr(b, f)) for c, b in e.branches))
    elif isinstance(e, A.Tuple):
        e = replace(e, items=tuple(map_expr(i, f) for i in e.items))
    return f(e)


def sample(e: A.Expr, frm: list, to: list) -> A.Expr:
    """Sample ``e``, on clock path ``frm``, down to the longer path ``to``."""
    if to[:len(frm)] != frm:
        raise InternalError("reset condition clock is not a prefix of the call clock")
    for c, x in to[len(frm):]:
        e = A.When(e, c, x)
    return e


class _Inliner:
    def __init__(self, prog: NormalizedProgram, names: set[str]):
        self.prog = prog
        self.names = names
        self.done: dict[str, NormalizedNode] = {}

    def node(self, name: str) -> NormalizedNode:
        if name not in self.done:
            self.done[name] = self._inline(self.prog.node(name))
        return self.done[name]

    def _clocks(self, n: NormalizedNode):
        diags: list[Diagnostic] = []
        cks = infer_node(n, self.prog, diags)
        if diags:
            raise InternalError(diags[0].message)
        return cks

    def _inline(self, n: NormalizedNode) -> NormalizedNode:
        if not any(c.node in self.names for c in n.calls()):
            return n
        host_clocks = self._clocks(n)
        taken = {d.name for d in n.decls()}
        locals_ = list(n.locals)
        eqs: list[A.Equation] = []

        def fresh(base: str, ty: str, is_clock: bool = False) -> str:
            name, k = base, 1
            while name in taken:
                k += 1
                name = f"{base}_{k}"
            taken.add(name)
            locals_.append(A.VarDecl(name, ty, is_clock))
            return name

        for eq in n.equations:
            call = eq.rhs
            if not (isinstance(call, A.Call) and call.node in self.names):
                eqs.append(eq)
                continue
            callee = self.node(call.node)
            ck = path(host_clocks.vars.get(eq.targets[0], BASE))
            ren = {d.name: t for d, t in zip(callee.outputs, eq.targets)}
            for d in callee.inputs + callee.locals:
                ren[d.name] = fresh(f"__{n.name}_{call.uid}_{d.name}", d.type, d.is_clock)

            def rename(e: A.Expr, ck=ck, ren=ren) -> A.Expr:
                if isinstance(e, A.Var):
                    return replace(e, name=ren[e.name])
                if isinstance(e, CONSTS):
                    return sample(e, [], ck)
                if isinstance(e, A.When):
                    return replace(e, clock=ren[e.clock])
                if isinstance(e, A.Merge):
                    return replace(e, clock=ren[e.clock])
                return e

            for d, a in zip(callee.inputs, call.args):
                eqs.append(A.Equation((ren[d.name],), a, eq.pos))
            inner_clocks = self._clocks(callee) if call.reset is not None else None
            for ieq in callee.equations:
                rhs = map_expr(ieq.rhs, rename)
                if call.reset is not None and isinstance(rhs, A.Call):
                    rhs = self._reset(n, ieq, rhs, call.reset, ck, ren, host_clocks, inner_clocks, fresh, eqs)
                eqs.append(A.Equation(tuple(ren[t] for t in ieq.targets), rhs, ieq.pos))
        return replace(n, locals=tuple(locals_), equations=tuple(eqs))

    def _reset(self, host, ieq, rhs, outer, ck, ren, host_clocks, inner_clocks, fresh, eqs) -> A.Call:
        """The reset condition of an inner call once its caller is inlined."""
        def inner_path(v: str) -> list:
            return [(c, ren[x]) for c, x in path(inner_clocks.vars.get(v, BASE))]
        inner_ck = inner_path(ieq.targets[0])
        target = ck + inner_ck
        outer_ck = path(host_clocks.vars.get(outer.name, BASE)) if isinstance(outer, A.Var) else []
        cond = sample(outer, outer_ck, target)
        if rhs.reset is not None:
            old = ieq.rhs.reset
            old_ck = inner_path(old.name) if isinstance(old, A.Var) else []
            cond = A.BinOp("or", cond, sample(rhs.reset, ck + old_ck, target))
        name = fresh(f"__{host.name}_cond", "bool")
        eqs.append(A.Equation((name,), cond, ieq.pos))
        return replace(rhs, reset=A.Var(name))

    def run(self) -> NormalizedProgram:
        nodes = []
        for n in self.prog.nodes:
            if n.name in self.names:
                continue
            nn = self.node(n.name)
            if nn is not n:
                nn = assign_uids(schedule(nn))
                lint(nn)
            nodes.append(nn)
        return replace(self.prog, nodes=tuple(nodes))


def inline_calls(prog: NormalizedProgram, names) -> NormalizedProgram:
    """Inline every call to a node in ``names`` and drop those nodes."""
    return _Inliner(prog, set(names)).run()
