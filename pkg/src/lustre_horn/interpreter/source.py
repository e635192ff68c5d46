"""Direct interpreter of source programs, automata included.

This is the independent oracle for the automaton pass and normalization:
it never looks at generated code. Evaluation is demand-driven per instant
and strict: every equation of the node and of each active state is forced,
so memories advance exactly when their clock ticks. Tuple-valued
expressions are evaluated component by component, which matches the
per-component dependencies the compiler schedules.

Automaton semantics at each instant:

1. the putative state and restart flag come from the previous instant
   (initially the first state, no restart);
2. if the restart flag is set, the putative state's unless guards are reset;
   the first true guard gives the actual state and restart flag, otherwise
   the putative ones are kept;
3. if the actual restart flag is set, the actual state's body is reset
   (arrows re-initialised, nested automata back to their first state);
   its equations run and the first true until guard gives the next
   putative state, otherwise the state stays, without restart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .. import ast as A
from ..analysis.clocks import NodeClocks, clock_check, path
from ..analysis.typecheck import _Checker
from ..diagnostics import CAUSALITY, CompileError, Diagnostic, InternalError
from .normalized import ABSENT, BINOPS, default_value


@dataclass
class _Aut:
    first: bool = True
    restart: bool = False
    state: Optional[str] = None


@dataclass
class Instance:
    node: str
    arrows: dict[int, bool] = field(default_factory=dict)
    mems: dict[tuple[int, int], Any] = field(default_factory=dict)
    calls: dict[int, Instance] = field(default_factory=dict)
    automata: dict[int, _Aut] = field(default_factory=dict)

    def reset_all(self) -> None:
        self.arrows.clear()
        for c in self.calls.values():
            c.reset_all()
        for a in self.automata.values():
            a.first = True


def _stateful(exprs) -> list:
    out = []
    for e in exprs:
        out += [x for x in A.walk(e) if isinstance(x, (A.Arrow, A.Call))]
    return out


@dataclass
class _Region:
    """Stateful occurrences a reset touches."""

    exprs: list = field(default_factory=list)
    automata: list = field(default_factory=list)

    def reset(self, inst: Instance) -> None:
        for x in self.exprs:
            if isinstance(x, A.Arrow):
                inst.arrows.pop(id(x), None)
            elif id(x) in inst.calls:
                inst.calls[id(x)].reset_all()
        for a in self.automata:
            if id(a) in inst.automata:
                inst.automata[id(a)].first = True


def _body_region(s: A.StateDecl) -> _Region:
    r = _Region(_stateful([eq.rhs for eq in s.equations] + [t.guard for t in s.weak]))
    for sub in s.automata:
        r.automata.append(sub)
        for st in sub.states:
            inner = _body_region(st)
            r.exprs += _stateful(t.guard for t in st.strong) + inner.exprs
            r.automata += inner.automata
    return r


class _Instant:
    def __init__(self, interp: SourceInterpreter, inst: Instance, inputs: dict[str, Any]):
        self.interp = interp
        self.inst = inst
        self.node = interp.prog.node(inst.node)
        self.clocks: NodeClocks = interp.clocks[inst.node]
        self.env: dict[str, Any] = dict(inputs)
        self.defs: dict[str, Callable[[], None]] = {}
        self.busy: set[str] = set()
        self.call_cache: dict[int, tuple] = {}
        self.pending: dict[Any, Callable[[], None]] = {}
        self.aut_done: set[int] = set()
        self.late: dict[tuple[int, int], tuple[Any, Callable[[], None]]] = {}
        for eq in self.node.equations:
            self.define(eq)
        for a in self.node.automata:
            self.define_automaton(a)

    # -- definitions --------------------------------------------------------

    def define(self, eq: A.Equation) -> None:
        for k, t in enumerate(eq.targets):
            self.defs[t] = (lambda t=t, k=k, rhs=eq.rhs: self.env.__setitem__(t, self.comp(rhs, k)))

    def define_automaton(self, a: A.AutomatonDecl) -> None:
        for v in A.automaton_writes(a):
            self.defs[v] = lambda a=a: self.run_automaton(a)

    def value(self, name: str) -> Any:
        if name in self.env:
            return self.env[name]
        if name in self.busy:
            raise CompileError([Diagnostic(CAUSALITY, f"instantaneous cycle through {name} in {self.node.name}")])
        if name not in self.defs:
            raise InternalError(f"no definition for {name} in {self.node.name}")
        self.busy.add(name)
        try:
            self.defs[name]()
        finally:
            self.busy.discard(name)
        if name not in self.env:
            raise InternalError(f"{name} was not defined by its equation")
        return self.env[name]

    def active(self, e: A.Expr, k: int = 0) -> bool:
        ck = self.clocks.exprs[id(e)][k]
        for c, x in path(ck):
            if self.value(x) != c:
                return False
        return True

    def width(self, e: A.Expr) -> int:
        return len(self.clocks.exprs[id(e)])

    # -- expressions --------------------------------------------------------

    def comp(self, e: A.Expr, k: int) -> Any:
        """Component ``k`` of ``e`` at this instant, or ABSENT."""
        if isinstance(e, (A.BoolConst, A.IntConst, A.RealConst)):
            return e.value
        if isinstance(e, A.EnumConst):
            return e.name
        if isinstance(e, A.Var):
            return self.value(e.name)
        if isinstance(e, A.UnOp):
            v = self.comp(e.arg, 0)
            if v is ABSENT:
                return ABSENT
            return (not v) if e.op == "not" else -v
        if isinstance(e, A.BinOp):
            l, r = self.comp(e.left, 0), self.comp(e.right, 0)
            if l is ABSENT or r is ABSENT:
                return ABSENT
            return BINOPS[e.op](l, r)
        if isinstance(e, A.If):
            c = self.comp(e.cond, 0)
            t, f = self.comp(e.then, k), self.comp(e.else_, k)
            if c is ABSENT:
                return ABSENT
            return t if c else f
        if isinstance(e, A.Tuple):
            for item in e.items:
                w = self.width(item)
                if k < w:
                    return self.comp(item, k)
                k -= w
            raise InternalError("tuple component out of range")
        if isinstance(e, A.When):
            v = self.comp(e.arg, k)
            if v is ABSENT or self.value(e.clock) != e.ctor:
                return ABSENT
            return v
        if isinstance(e, A.Merge):
            vals = {c: self.comp(b, k) for c, b in e.branches}
            ck = self.value(e.clock)
            return ABSENT if ck is ABSENT else vals[ck]
        if isinstance(e, A.Pre):
            return self.pre(e, k)
        if isinstance(e, A.Arrow):
            first, rest = self.comp(e.first, k), self.comp(e.rest, k)
            if not self.active(e, k):
                return ABSENT
            init = self.inst.arrows.get(id(e), True)
            self.pending[("arrow", id(e))] = lambda: self.inst.arrows.__setitem__(id(e), False)
            return first if init else rest
        if isinstance(e, A.Call):
            return self.call(e)[k]
        if isinstance(e, A.ClockTest):
            v = self.value(e.var)
            return ABSENT if v is ABSENT else v == e.ctor
        raise InternalError(f"unexpected expression {e!r}")

    def pre(self, e: A.Pre, k: int) -> Any:
        # the argument is only needed for the next instant, so it is
        # evaluated once the instant's other flows are known
        key = (id(e), k)
        if key in self.late:
            return self.late[key][0]
        active = self.active(e, k)
        if active and key not in self.inst.mems:
            self.inst.mems[key] = default_value(self.interp.type_of(self.node.name, e.arg, k), self.interp.prog)
        out = self.inst.mems[key] if active else ABSENT
        self.late[key] = (out, lambda: self.update(e, k, key, active))
        return out

    def update(self, e: A.Pre, k: int, key, active: bool) -> None:
        arg = self.comp(e.arg, k)
        if active:
            self.pending[("pre", key)] = lambda: self.inst.mems.__setitem__(key, arg)

    def call(self, e: A.Call) -> tuple:
        if id(e) in self.call_cache:
            return self.call_cache[id(e)]
        args = [self.comp(a, j) for a in e.args for j in range(self.width(a))]
        callee = self.interp.prog.node(e.node)
        width = len(callee.outputs)
        if not self.active(e):
            out = (ABSENT,) * width
        else:
            child = self.inst.calls.get(id(e))
            if child is None:
                child = self.inst.calls[id(e)] = Instance(e.node)
            if e.reset is not None and self.comp(e.reset, 0) is True:
                child.reset_all()
            outs = self.interp.step(child, {d.name: v for d, v in zip(callee.inputs, args)})
            out = tuple(outs[d.name] for d in callee.outputs)
        self.call_cache[id(e)] = out
        return out

    # -- automata -----------------------------------------------------------

    def run_automaton(self, a: A.AutomatonDecl) -> None:
        if id(a) in self.aut_done:
            return
        self.aut_done.add(id(a))
        st = self.inst.automata.setdefault(id(a), _Aut())
        states = {s.name: s for s in a.states}
        if st.first:
            rin, sin = False, a.states[0].name
        else:
            rin, sin = st.restart, st.state
        s = states[sin]
        if rin:
            _Region(_stateful(t.guard for t in s.strong)).reset(self.inst)
        fired = [self.comp(t.guard, 0) for t in s.strong]
        ract, sact = rin, sin
        for t, g in zip(s.strong, fired):
            if g:
                ract, sact = t.restart, t.target
                break
        s = states[sact]
        if ract:
            self.interp.region(s).reset(self.inst)
        for eq in s.equations:
            self.define(eq)
        for sub in s.automata:
            self.define_automaton(sub)
        for eq in s.equations:
            for t in eq.targets:
                self.value(t)
        for sub in s.automata:
            self.run_automaton(sub)
        fired = [self.comp(t.guard, 0) for t in s.weak]
        nr, ns = False, sact
        for t, g in zip(s.weak, fired):
            if g:
                nr, ns = t.restart, t.target
                break

        def commit():
            st.first, st.restart, st.state = False, nr, ns
        self.pending[("aut", id(a))] = commit

    def run(self) -> dict[str, Any]:
        for eq in self.node.equations:
            for t in eq.targets:
                self.value(t)
        for a in self.node.automata:
            self.run_automaton(a)
        outs = {d.name: self.value(d.name) for d in self.node.outputs}
        done: set = set()
        while len(done) < len(self.late):
            for key, (_, thunk) in list(self.late.items()):
                if key not in done:
                    done.add(key)
                    thunk()
        for commit in self.pending.values():
            commit()
        return outs


class SourceInterpreter:
    def __init__(self, prog: A.Program):
        self.prog = prog
        self.clocks = clock_check(prog)
        self._regions: dict[int, _Region] = {}
        self._types: dict[tuple[int, int], str] = {}
        self._envs: dict[str, dict[str, str]] = {}

    def region(self, s: A.StateDecl) -> _Region:
        if id(s) not in self._regions:
            self._regions[id(s)] = _body_region(s)
        return self._regions[id(s)]

    def env(self, node: str) -> dict[str, str]:
        if node not in self._envs:
            n = self.prog.node(node)
            env = {d.name: d.type for d in n.decls()}

            def add(auts):
                for a in auts:
                    for s in a.states:
                        env.update((d.name, d.type) for d in s.locals)
                        add(s.automata)
            add(n.automata)
            self._envs[node] = env
        return self._envs[node]

    def type_of(self, node: str, e: A.Expr, k: int) -> str:
        key = (id(e), k)
        if key not in self._types:
            diags: list[Diagnostic] = []
            ts = _Checker(self.prog, diags).infer(e, self.env(node))
            if ts is None:
                raise InternalError(f"cannot type {e!r}")
            self._types[key] = ts[k]
        return self._types[key]

    def instance(self, node: str) -> Instance:
        return Instance(node)

    def step(self, inst: Instance, inputs: dict[str, Any]) -> dict[str, Any]:
        return _Instant(self, inst, inputs).run()

    def run(self, node: str, inputs: list[dict[str, Any]]) -> list[dict[str, Any]]:
        inst = self.instance(node)
        return [self.step(inst, v) for v in inputs]
