"""Memories and callee instances of normalized nodes.

``Mems(f)`` are the variables defined by ``x = pre _`` and ``Insts(f)`` the
call sites ``g<uid>(...)``. The built-in arrow node has a single boolean
memory ``init``. Flattening walks the tree in pre-order (own memories
first, then instances) and qualifies nested names with ``uid.``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ast as A
from .diagnostics import RECURSION, CompileError, Diagnostic, InternalError
from .normalization import ARROW, NormalizedNode, NormalizedProgram, is_memory

LABELS = ("c", "i", "x")


@dataclass(frozen=True)
class StateTree:
    node: str
    mems: tuple[tuple[str, str], ...]  # (memory, type)
    insts: tuple[tuple[str, str], ...]  # (callee, uid)
    children: tuple[StateTree, ...]  # one per instance

    @property
    def is_empty(self) -> bool:
        return not self.mems and all(c.is_empty for c in self.children)

    def child(self, uid: str) -> StateTree:
        for (_, u), c in zip(self.insts, self.children):
            if u == uid:
                return c
        raise KeyError(uid)


@dataclass(frozen=True)
class FlatState:
    vars: tuple[tuple[str, str], ...]  # (qualified name, type)

    def __len__(self) -> int:
        return len(self.vars)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.vars]

    @property
    def types(self) -> list[str]:
        return [t for _, t in self.vars]

    def labeled(self, label: str, prefix: str = "") -> list[str]:
        """``state^label``: every qualified name suffixed with ``_label``."""
        if label not in LABELS:
            raise ValueError(f"unknown state label {label!r}")
        return [f"{prefix}{n}_{label}" for n, _ in self.vars]


ARROW_TREE = StateTree(ARROW, (("init", "bool"),), (), ())


def compute_state_tree(f: NormalizedNode, env: NormalizedProgram,
                       memo: Optional[dict[str, StateTree]] = None,
                       _stack: tuple[str, ...] = ()) -> StateTree:
    memo = {} if memo is None else memo
    if f.name in memo:
        return memo[f.name]
    if f.name in _stack:
        cycle = " -> ".join(_stack[_stack.index(f.name):] + (f.name,))
        raise CompileError([Diagnostic(RECURSION, f"recursive node calls: {cycle}")])
    types = {d.name: d.type for d in f.decls()}
    mems, insts, children = [], [], []
    for eq in f.equations:
        if is_memory(eq):
            mems.append((eq.targets[0], types[eq.targets[0]]))
        elif isinstance(eq.rhs, A.Call):
            call = eq.rhs
            insts.append((call.node, call.uid))
            if call.node == ARROW:
                children.append(ARROW_TREE)
            else:
                callee = env.node(call.node)
                if callee is None:
                    raise InternalError(f"unknown callee {call.node}")
                children.append(compute_state_tree(callee, env, memo, _stack + (f.name,)))
    tree = StateTree(f.name, tuple(mems), tuple(insts), tuple(children))
    memo[f.name] = tree
    return tree


def flatten(t: StateTree) -> FlatState:
    out = list(t.mems)
    for (_, uid), child in zip(t.insts, t.children):
        out.extend((f"{uid}.{n}", ty) for n, ty in flatten(child).vars)
    return FlatState(tuple(out))


def compute_all(p: NormalizedProgram) -> dict[str, StateTree]:
    memo: dict[str, StateTree] = {}
    for n in p.nodes:
        compute_state_tree(n, p, memo)
    return memo


def tree_to_str(t: StateTree, indent: str = "") -> str:
    lines = [f"{indent}{t.node}"]
    for m, ty in t.mems:
        lines.append(f"{indent}  mem {m}: {ty}")
    for (callee, uid), c in zip(t.insts, t.children):
        lines.append(f"{indent}  inst {uid}: {callee}")
        lines.extend(tree_to_str(c, indent + "  ").splitlines()[1:])
    return "\n".join(lines)
