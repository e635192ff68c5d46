"""Compile automata into clocked dataflow.

Each automaton ``aut`` with states ``S_1 .. S_n`` becomes

* an enumerated clock type ``aut_type`` with one constructor per state,
* per state, a node ``S_i_unless`` computing the actual state from the
  putative one (strong transitions) and a node ``S_i_handler_until`` holding
  the state equations and computing the next putative state (weak
  transitions),
* three equation groups in the host node: the putative state memory, a
  ``merge`` over the putative state calling the unless nodes, and a ``merge``
  over the actual state calling the handler nodes.

Both generated nodes of a state receive the restart flag and the state they
are clocked on. The unless node falls back to them when no strong transition
fires, so a ``restart`` decided by a weak transition at the previous instant
still resets the handler of the state it enters.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from . import ast as A
from .analysis.causality import check_program_unless
from .diagnostics import NAME_CLASH, STATE_WRITES, CompileError, Diagnostic


@dataclass(frozen=True)
class StateVarSets:
    read_eqs: tuple[str, ...]
    write_eqs: tuple[str, ...]
    read_unless: tuple[str, ...]
    read_until: tuple[str, ...]


@dataclass
class GeneratedAutomaton:
    clock_type: A.TypeDecl
    unless_nodes: list[A.NodeDecl]
    handler_nodes: list[A.NodeDecl]
    # additions to the host: new locals and the three equation groups
    locals: list[A.VarDecl] = field(default_factory=list)
    equations: list[A.Equation] = field(default_factory=list)
    # types and nodes generated for automata nested in the states
    inner_types: list[A.TypeDecl] = field(default_factory=list)
    inner_nodes: list[A.NodeDecl] = field(default_factory=list)


def _ordered(*groups) -> list[str]:
    out: dict[str, None] = {}
    for g in groups:
        for v in g:
            out.setdefault(v)
    return list(out)


def _body_reads(eqs, auts) -> list[str]:
    reads = [v for eq in eqs for v in A.free_vars(eq.rhs)]
    for a in auts:
        for s in a.states:
            own = {d.name for d in s.locals}
            inner = [v for tr in s.strong + s.weak for v in A.free_vars(tr.guard)]
            inner += _body_reads(s.equations, s.automata)
            reads += [v for v in inner if v not in own]
    return reads


def collect_var_sets(s: A.StateDecl, host: Optional[A.NodeDecl] = None) -> StateVarSets:
    own = {d.name for d in s.locals}

    def visible(vs):
        return tuple(v for v in _ordered(vs) if v not in own)

    return StateVarSets(
        read_eqs=visible(_body_reads(s.equations, s.automata)),
        write_eqs=tuple(A.state_writes(s)),
        read_unless=visible(v for tr in s.strong for v in A.free_vars(tr.guard)),
        read_until=visible(v for tr in s.weak for v in A.free_vars(tr.guard)),
    )


def _transition_chain(transitions, ctor: dict[str, str], default: A.Expr) -> A.Expr:
    """``if g1 then (r1, T1) else ... else default``; a literal ``true`` guard ends the chain."""
    arms = []
    for tr in transitions:
        action = A.Tuple((A.BoolConst(tr.restart), A.EnumConst(ctor[tr.target])))
        if isinstance(tr.guard, A.BoolConst) and tr.guard.value:
            default = action
            break
        arms.append((tr.guard, action))
    out = default
    for guard, action in reversed(arms):
        out = A.If(guard, action, out)
    return out


def _is_stateless(eqs, nodes: dict[str, A.NodeDecl]) -> bool:
    for eq in eqs:
        for x in A.walk(eq.rhs):
            if isinstance(x, (A.Pre, A.Arrow)):
                return False
            if isinstance(x, A.Call):
                callee = nodes.get(x.node)
                if callee is None or not callee.is_function:
                    return False
    return True


def _fresh_io(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "_"
    return name


class _Expander:
    def __init__(self, prog: A.Program):
        self.prog = prog
        self.nodes: dict[str, A.NodeDecl] = {n.name: n for n in prog.nodes}
        self.type_names = {t.name for t in prog.types}
        self.ctors = {c for t in prog.types for c in t.constructors}
        self.diags: list[Diagnostic] = []

    def _pick(self, candidates, taken, what: str, pos) -> str:
        for c in candidates:
            if c not in taken:
                return c
        self.diags.append(Diagnostic(NAME_CLASH, f"cannot name the generated {what}: {candidates[-1]!r} is taken", pos))
        return candidates[-1]

    def node_name(self, host: str, aut: str, base: str, pos) -> str:
        name = self._pick([base, f"{aut}_{base}", f"{host}_{aut}_{base}"], self.nodes, "node", pos)
        return name

    def expand_state(self, s: A.StateDecl, scope: dict[str, A.VarDecl], host: str):
        """Expand the automata nested in ``s``; returns the flattened state and its generated code."""
        if not s.automata:
            return s, [], []
        inner_scope = dict(scope)
        inner_scope.update((d.name, d) for d in s.locals)
        locals_, eqs, types, nodes = list(s.locals), list(s.equations), [], []
        for sub in s.automata:
            g = self.expand(sub, inner_scope, host)
            locals_ += g.locals
            eqs += g.equations
            inner_scope.update((d.name, d) for d in g.locals)
            types += g.inner_types + [g.clock_type]
            nodes += g.inner_nodes + g.unless_nodes + g.handler_nodes
        return replace(s, locals=tuple(locals_), equations=tuple(eqs), automata=()), types, nodes

    def expand(self, a: A.AutomatonDecl, scope: dict[str, A.VarDecl], host: str) -> GeneratedAutomaton:
        inner_types: list[A.TypeDecl] = []
        inner_nodes: list[A.NodeDecl] = []
        states = []
        for s in a.states:
            flat, ts, ns = self.expand_state(s, scope, host)
            states.append(flat)
            inner_types += ts
            inner_nodes += ns

        # clock type and constructors
        ty = self._pick([f"{a.name}_type", f"{host}_{a.name}_type"], self.type_names, "clock type", a.pos)
        self.type_names.add(ty)
        ctor: dict[str, str] = {}
        for s in states:
            c = self._pick([s.name, f"{a.name}_{s.name}", f"{host}_{a.name}_{s.name}"],
                           self.ctors | set(scope) | self.type_names, "constructor", s.pos)
            self.ctors.add(c)
            ctor[s.name] = c
        clock_type = A.TypeDecl(ty, tuple(ctor[s.name] for s in states), a.pos)

        # host locals
        names = {k: f"{a.name}_{k}" for k in
                 ("restart_in", "next_restart_in", "restart_act", "state_in", "next_state_in", "state_act")}
        for v in names.values():
            if v in scope:
                self.diags.append(Diagnostic(NAME_CLASH, f"generated variable {v!r} clashes with a declaration", a.pos))
        host_locals = [
            A.VarDecl(names["restart_in"], "bool"),
            A.VarDecl(names["next_restart_in"], "bool"),
            A.VarDecl(names["restart_act"], "bool"),
            A.VarDecl(names["state_in"], ty, True),
            A.VarDecl(names["next_state_in"], ty, True),
            A.VarDecl(names["state_act"], ty, True),
        ]

        sets = [collect_var_sets(s) for s in states]
        writes = _ordered(*(vs.write_eqs for vs in sets))
        for s, vs in zip(states, sets):
            for v in writes:
                if v not in vs.write_eqs:
                    self.diags.append(Diagnostic(STATE_WRITES, f"variable {v} not defined in state {s.name}", s.pos))

        def decl(v: str) -> A.VarDecl:
            d = scope[v]
            return A.VarDecl(d.name, d.type, d.is_clock)

        unless_nodes, handler_nodes = [], []
        unless_branches, handler_branches = [], []
        for s, vs in zip(states, sets):
            c = ctor[s.name]
            # unless node
            taken = set(vs.read_unless)
            rin, sin = _fresh_io("restart_in", taken), _fresh_io("state_in", taken)
            ract, sact = _fresh_io("restart_act", taken), _fresh_io("state_act", taken)
            body = A.Equation((ract, sact), _transition_chain(
                s.strong, ctor, A.Tuple((A.Var(rin), A.Var(sin)))))
            uname = self.node_name(host, a.name, f"{s.name}_unless", s.pos)
            unless = A.NodeDecl(
                uname, _is_stateless([body], self.nodes),
                (A.VarDecl(rin, "bool"), A.VarDecl(sin, ty)) + tuple(decl(v) for v in vs.read_unless),
                (A.VarDecl(ract, "bool"), A.VarDecl(sact, ty, True)),
                (), (body,), (), s.pos)
            self.nodes[uname] = unless
            unless_nodes.append(unless)
            args = (A.Var(names["restart_in"]), A.Var(names["state_in"])) + tuple(A.Var(v) for v in vs.read_unless)
            unless_branches.append((c, A.Call(
                uname, (A.When(A.Tuple(args), c, names["state_in"]),), A.Var(names["restart_in"]))))

            # handler node
            reads = [v for v in _ordered(vs.read_eqs, vs.read_until) if v not in vs.write_eqs]
            taken = set(reads) | set(writes) | {d.name for d in s.locals}
            rin, sin = _fresh_io("restart_in", taken), _fresh_io("state_in", taken)
            ract, sact = _fresh_io("restart_act", taken), _fresh_io("state_act", taken)
            trans = A.Equation((rin, sin), _transition_chain(
                s.weak, ctor, A.Tuple((A.BoolConst(False), A.EnumConst(c)))))
            eqs = (trans,) + s.equations
            hname = self.node_name(host, a.name, f"{s.name}_handler_until", s.pos)
            handler = A.NodeDecl(
                hname, _is_stateless(eqs, self.nodes),
                (A.VarDecl(ract, "bool"), A.VarDecl(sact, ty)) + tuple(decl(v) for v in reads),
                (A.VarDecl(rin, "bool"), A.VarDecl(sin, ty, True)) + tuple(decl(v) for v in writes),
                s.locals, eqs, (), s.pos)
            self.nodes[hname] = handler
            handler_nodes.append(handler)
            args = (A.Var(names["restart_act"]), A.Var(names["state_act"])) + tuple(A.Var(v) for v in reads)
            handler_branches.append((c, A.Call(
                hname, (A.When(A.Tuple(args), c, names["state_act"]),), A.Var(names["restart_act"]))))

        first = ctor[states[0].name]
        equations = [
            A.Equation(
                (names["restart_in"], names["state_in"]),
                A.Arrow(A.Tuple((A.BoolConst(False), A.EnumConst(first))),
                        A.Pre(A.Tuple((A.Var(names["next_restart_in"]), A.Var(names["next_state_in"]))))),
                a.pos),
            A.Equation((names["restart_act"], names["state_act"]),
                       A.Merge(names["state_in"], tuple(unless_branches)), a.pos),
            A.Equation((names["next_restart_in"], names["next_state_in"], *writes),
                       A.Merge(names["state_act"], tuple(handler_branches)), a.pos),
        ]
        return GeneratedAutomaton(clock_type, unless_nodes, handler_nodes, host_locals, equations,
                                  inner_types, inner_nodes)


def build_unless_node(s: A.StateDecl, ck: A.TypeDecl, host: A.NodeDecl) -> A.NodeDecl:
    """The unless node of one state, as generated by :func:`expand_all`."""
    return _single_state(s, host, "unless")


def build_handler_node(s: A.StateDecl, ck: A.TypeDecl, host: A.NodeDecl) -> A.NodeDecl:
    """The handler node of one state, as generated by :func:`expand_all`."""
    return _single_state(s, host, "handler")


def _single_state(s: A.StateDecl, host: A.NodeDecl, kind: str) -> A.NodeDecl:
    for a in host.automata:
        if any(x is s or x == s for x in a.states):
            g = rewire_host_parts(host, a)
            for n in (g.unless_nodes if kind == "unless" else g.handler_nodes):
                if n.name.endswith(f"{s.name}_{'unless' if kind == 'unless' else 'handler_until'}"):
                    return n
    raise ValueError(f"state {s.name} is not a state of a top-level automaton of {host.name}")


def rewire_host_parts(host: A.NodeDecl, a: A.AutomatonDecl, prog: Optional[A.Program] = None) -> GeneratedAutomaton:
    prog = prog or A.Program((), (host,))
    ex = _Expander(prog)
    scope = {d.name: d for d in host.decls()}
    g = ex.expand(a, scope, host.name)
    if ex.diags:
        raise CompileError(ex.diags)
    return g


def rewire_host(host: A.NodeDecl, a: A.AutomatonDecl, gen: GeneratedAutomaton) -> A.NodeDecl:
    """Replace automaton ``a`` of ``host`` by the equations of ``gen``."""
    return replace(
        host,
        locals=host.locals + tuple(gen.locals),
        equations=host.equations + tuple(gen.equations),
        automata=tuple(x for x in host.automata if x is not a and x != a),
    )


def expand_all(p: A.Program) -> A.Program:
    """Remove every automaton; generated nodes precede the node using them."""
    check_program_unless(p)
    ex = _Expander(p)
    types = list(p.types)
    nodes: list[A.NodeDecl] = []
    for n in p.nodes:
        scope = {d.name: d for d in n.decls()}
        host = n
        for a in n.automata:
            g = ex.expand(a, scope, n.name)
            types += g.inner_types + [g.clock_type]
            nodes += g.inner_nodes + g.unless_nodes + g.handler_nodes
            host = rewire_host(host, a, g)
        nodes.append(host)
    if ex.diags:
        raise CompileError(ex.diags)
    return A.Program(tuple(types), tuple(nodes))
