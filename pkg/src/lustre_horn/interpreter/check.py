"""Ground checking of Horn relations against interpreter runs.

For each instant of a trace, the concrete inputs, outputs, locals, pre-state
and post-state are substituted into the node's step rule. Callee relation
applications are checked the same way, recursively, with the callee's own
locals taken from the record of that call site.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

from ..horn.encode import HornSystem, NodeEncoder, reset_name, step_name
from ..horn.terms import App, RelApp, Rule, Term, Unbound, evaluate
from ..state_model import flatten
from .normalized import ABSENT, StepRecord, Trace


@dataclass(frozen=True)
class Violation:
    instant: int
    relation: str
    detail: str = ""


class StepChecker:
    def __init__(self, horn: HornSystem, encs: dict[str, NodeEncoder]):
        self.horn = horn
        self.encs = encs
        self.rules: dict[str, Rule] = {}
        for r in horn.rules:
            self.rules.setdefault(r.head.rel, r)
        self._layouts: dict[str, tuple] = {}

    def layout(self, node: str) -> tuple:
        """Qualified variable names of a node's memories and instance states."""
        if node not in self._layouts:
            tree = self.encs[node].tree
            mems = [(m, f"{node}.{m}_c", f"{node}.{m}_x") for m, _ in tree.mems]
            insts = []
            for (_, uid), child in zip(tree.insts, tree.children):
                names = flatten(child).names
                insts.append((uid, child, {lbl: [f"{node}.{uid}.{nm}_{lbl}" for nm in names] for lbl in "cix"}))
            self._layouts[node] = (mems, insts)
        return self._layouts[node]

    def rule(self, rel: str) -> Rule:
        if rel not in self.rules:
            raise Unbound(rel)
        return self.rules[rel]

    def env_for(self, rec: StepRecord) -> dict[str, Any]:
        p = rec.node
        env = {f"{p}.{k}": v for k, v in rec.env.items() if v is not ABSENT}
        mems, insts = self.layout(p)
        for m, c, x in mems:
            env[c] = rec.pre.mems[m]
            env[x] = rec.post.mems[m]
        for uid, child, names in insts:
            for label, st in (("c", rec.pre.insts[uid]), ("i", rec.inter.get(uid)), ("x", rec.post.insts[uid])):
                if st is not None:
                    env.update(zip(names[label], st.flat(child)))
        return env

    def holds(self, rel: str, values: list, rec: Optional[StepRecord]) -> bool:
        rule = self.rule(rel)
        env = self.env_for(rec) if rec is not None else {}
        for param, v in zip(rule.head.args, values):
            env[param.name] = v
        return bool(evaluate(rule.body, env, self._relation(rec)))

    def _relation(self, rec: Optional[StepRecord]):
        def apply(app: RelApp, values: list) -> bool:
            child = rec.children.get(app.site) if rec is not None and app.site is not None else None
            return self.holds(app.rel, values, child)
        return apply

    def step_holds(self, rec: StepRecord) -> bool:
        enc = self.encs[rec.node]
        env = self.env_for(rec)
        head = self.rule(step_name(enc.n)).head
        return self.holds(head.rel, [env[a.name] for a in head.args], rec)


def check_step_relation(trace: Trace, horn: HornSystem, encs: dict[str, NodeEncoder]) -> Optional[Violation]:
    """None when every instant satisfies the step relation, else the first violation."""
    chk = StepChecker(horn, encs)
    for k, rec in enumerate(trace.records):
        try:
            ok = chk.step_holds(rec)
        except Unbound as exc:
            return Violation(k, step_name(encs[rec.node].n), f"unbound {exc.args[0]}")
        if not ok:
            return Violation(k, step_name(encs[rec.node].n))
    return None


def reset_holds(horn: HornSystem, encs: dict[str, NodeEncoder], node: str, cur: tuple, nxt: tuple) -> bool:
    """Whether ``node_reset(cur, nxt)`` holds."""
    chk = StepChecker(horn, encs)
    return chk.holds(reset_name(encs[node].n), list(cur) + list(nxt), None)


def _mutate(t: Term, target: int, counter: list[int]) -> Term:
    if isinstance(t, App):
        if t.op == "=":
            counter[0] += 1
            if counter[0] - 1 == target:
                return App("not", (t,))
        return App(t.op, tuple(_mutate(a, target, counter) for a in t.args))
    return t


def mutate_equality(h: HornSystem, rel: str, index: int = 0) -> HornSystem:
    """A copy of ``h`` where the ``index``-th equality of ``rel``'s rule is negated."""
    rules = []
    for r in h.rules:
        if r.head.rel == rel:
            counter = [0]
            r = Rule(_mutate(r.body, index, counter), r.head)
        rules.append(r)
    return replace(h, rules=rules)
