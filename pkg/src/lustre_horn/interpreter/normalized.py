"""Reference executor for normalized programs.

A node's state mirrors its state tree: memory values plus one sub-state
per call site. Flows that are off their clock at an instant hold
:data:`ABSENT`. Every step returns a :class:`StepRecord` with the complete
environment, so the Horn step relation can be checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .. import ast as A
from ..analysis.clocks import NodeClocks, infer_node, path
from ..diagnostics import Diagnostic, InternalError
from ..normalization import ARROW, NormalizedNode, NormalizedProgram, arrow_parts, is_memory
from ..state_model import StateTree, compute_all, flatten


class _Absent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ABSENT"


ABSENT = _Absent()


def default_value(ty: str, types) -> Any:
    if ty == "bool":
        return False
    if ty == "int":
        return 0
    if ty == "real":
        return Fraction(0)
    return types.type_decl(ty).constructors[0]


@dataclass
class NodeState:
    mems: dict[str, Any] = field(default_factory=dict)
    insts: dict[str, NodeState] = field(default_factory=dict)

    def copy(self) -> NodeState:
        return NodeState(dict(self.mems), {k: v.copy() for k, v in self.insts.items()})

    def flat(self, tree: StateTree) -> tuple:
        """Values in the order of ``flatten(tree)``."""
        out = [self.mems[m] for m, _ in tree.mems]
        for (_, uid), child in zip(tree.insts, tree.children):
            out.extend(self.insts[uid].flat(child))
        return tuple(out)


@dataclass
class StepRecord:
    node: str
    env: dict[str, Any]
    pre: NodeState
    post: NodeState
    # per call site: the sub-state after the (optional) reset, and the callee's record
    inter: dict[str, NodeState] = field(default_factory=dict)
    children: dict[str, StepRecord] = field(default_factory=dict)


@dataclass
class Trace:
    node: str
    inputs: list[dict[str, Any]] = field(default_factory=list)
    outputs: list[dict[str, Any]] = field(default_factory=list)
    states: list[NodeState] = field(default_factory=list)  # post-states
    records: list[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.outputs)

    def column(self, name: str) -> list[Any]:
        return [o[name] for o in self.outputs]


def _div(a, b):
    return Fraction(0) if b == 0 else Fraction(a) / Fraction(b)


BINOPS = {
    "and": lambda a, b: a and b,
    "or": lambda a, b: a or b,
    "xor": lambda a, b: a != b,
    "=>": lambda a, b: (not a) or b,
    "=": lambda a, b: a == b,
    "<>": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
}


def eval_simple(e: A.Expr, env: dict[str, Any]) -> Any:
    """Value of a call-free, ``pre``-free expression."""
    if isinstance(e, (A.BoolConst, A.IntConst, A.RealConst)):
        return e.value
    if isinstance(e, A.EnumConst):
        return e.name
    if isinstance(e, A.Var):
        if e.name not in env:
            raise InternalError(f"read of undefined variable {e.name}")
        v = env[e.name]
        if v is ABSENT:
            raise InternalError(f"read of {e.name} off its clock")
        return v
    if isinstance(e, A.UnOp):
        v = eval_simple(e.arg, env)
        return (not v) if e.op == "not" else -v
    if isinstance(e, A.BinOp):
        return BINOPS[e.op](eval_simple(e.left, env), eval_simple(e.right, env))
    if isinstance(e, A.If):
        c = eval_simple(e.cond, env)
        t, f = eval_simple(e.then, env), eval_simple(e.else_, env)
        return t if c else f
    if isinstance(e, A.When):
        if env.get(e.clock) != e.ctor:
            raise InternalError(f"sampled flow read while {e.clock} is not {e.ctor}")
        return eval_simple(e.arg, env)
    if isinstance(e, A.Merge):
        k = eval_simple(A.Var(e.clock), env)
        for c, b in e.branches:
            if c == k:
                return eval_simple(b, env)
        raise InternalError(f"no merge branch for {k}")
    raise InternalError(f"not a simple expression: {e!r}")


class Interpreter:
    def __init__(self, prog: NormalizedProgram):
        self.prog = prog
        self.trees = compute_all(prog)
        self._clocks: dict[str, NodeClocks] = {}

    def clocks(self, n: NormalizedNode) -> NodeClocks:
        if n.name not in self._clocks:
            diags: list[Diagnostic] = []
            self._clocks[n.name] = infer_node(n, self.prog, diags)
            if diags:
                raise InternalError(diags[0].message)
        return self._clocks[n.name]

    def node(self, name: str) -> NormalizedNode:
        n = self.prog.node(name)
        if n is None:
            raise KeyError(name)
        return n

    # -- state -------------------------------------------------------------

    def init_state(self, name: str) -> NodeState:
        if name == ARROW:
            return NodeState({"init": True})
        n = self.node(name)
        types = {d.name: d.type for d in n.decls()}
        st = NodeState()
        for eq in n.equations:
            if is_memory(eq):
                st.mems[eq.targets[0]] = default_value(types[eq.targets[0]], self.prog)
            elif isinstance(eq.rhs, A.Call):
                st.insts[eq.rhs.uid] = self.init_state(eq.rhs.node)
        return st

    def reset(self, name: str, st: NodeState) -> NodeState:
        """The reset image: arrow inits become true, memories are kept."""
        if name == ARROW:
            return NodeState({"init": True})
        tree = self.trees[name]
        return NodeState(dict(st.mems),
                         {uid: self.reset(callee, st.insts[uid]) for callee, uid in tree.insts})

    # -- execution ---------------------------------------------------------

    def active(self, n: NormalizedNode, target: str, env) -> bool:
        ck = self.clocks(n).vars.get(target)
        return all(env.get(x) == c for c, x in path(ck)) if ck is not None else True

    def step(self, name: str, state: NodeState, inputs: dict[str, Any]) -> tuple[dict, NodeState, StepRecord]:
        n = self.node(name)
        env: dict[str, Any] = {d.name: inputs[d.name] for d in n.inputs}
        post = state.copy()
        rec = StepRecord(name, env, state, post)
        pending: list[tuple[str, str]] = []
        for eq in n.equations:
            if not self.active(n, eq.targets[0], env):
                for t in eq.targets:
                    env[t] = ABSENT
                continue
            rhs = eq.rhs
            if is_memory(eq):
                env[eq.targets[0]] = state.mems[eq.targets[0]]
                pending.append((eq.targets[0], rhs.arg.name))
            elif isinstance(rhs, A.Call):
                sub = state.insts[rhs.uid]
                if rhs.reset is not None and eval_simple(rhs.reset, env):
                    sub = self.reset(rhs.node, sub)
                rec.inter[rhs.uid] = sub
                if rhs.node == ARROW:
                    first, rest = arrow_parts(eq)
                    vals = [eval_simple(a, env) for a in (first if sub.mems["init"] else rest)]
                    post.insts[rhs.uid] = NodeState({"init": False})
                else:
                    callee = self.node(rhs.node)
                    args = [eval_simple(a, env) for a in rhs.args]
                    outs, sub_post, child = self.step(
                        rhs.node, sub, {d.name: v for d, v in zip(callee.inputs, args)})
                    vals = [outs[d.name] for d in callee.outputs]
                    post.insts[rhs.uid] = sub_post
                    rec.children[rhs.uid] = child
                for t, v in zip(eq.targets, vals):
                    env[t] = v
            else:
                env[eq.targets[0]] = eval_simple(rhs, env)
        for m, y in pending:
            if env.get(y, ABSENT) is ABSENT:
                raise InternalError(f"memory {m} of {name} reads {y} off its clock")
            post.mems[m] = env[y]
        outputs = {d.name: env[d.name] for d in n.outputs}
        return outputs, post, rec


def init_state(prog: NormalizedProgram, name: str) -> NodeState:
    return Interpreter(prog).init_state(name)


def step(prog: NormalizedProgram, name: str, state: NodeState, inputs: dict[str, Any]):
    outs, post, _ = Interpreter(prog).step(name, state, inputs)
    return outs, post


def run_trace(prog: NormalizedProgram, name: str, inputs: list[dict[str, Any]],
              interp: Optional[Interpreter] = None) -> Trace:
    interp = interp or Interpreter(prog)
    state = interp.init_state(name)
    trace = Trace(name)
    for valuation in inputs:
        outs, state, rec = interp.step(name, state, valuation)
        trace.inputs.append(valuation)
        trace.outputs.append(outs)
        trace.states.append(state)
        trace.records.append(rec)
    return trace


def flat_state(interp: Interpreter, name: str, st: NodeState) -> tuple:
    return st.flat(interp.trees[name])


def flat_names(interp: Interpreter, name: str) -> list[str]:
    return flatten(interp.trees[name]).names
