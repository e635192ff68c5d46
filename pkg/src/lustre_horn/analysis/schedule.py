"""Equation scheduling (causality analysis).

Dependencies are instantaneous reads: a read under ``pre`` does not order
equations, a read of a clock variable through ``when``/``merge`` does.
The analysis is local to one node and never looks into callees.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from .. import ast as A
from ..diagnostics import CAUSALITY, CompileError, Diagnostic


@dataclass(frozen=True)
class Schedule:
    node: str
    # indices into the node's equation list, in evaluation order
    order: tuple[int, ...]

    def apply(self, equations):
        return [equations[i] for i in self.order]


def dependencies(equations) -> dict[int, set[int]]:
    defined = {}
    for i, eq in enumerate(equations):
        for t in eq.targets:
            defined[t] = i
    deps: dict[int, set[int]] = {}
    for i, eq in enumerate(equations):
        deps[i] = {defined[v] for v in A.free_vars(eq.rhs, through_pre=False) if v in defined}
    return deps


def schedule_node(n) -> Schedule:
    """Order the equations of an automaton-free node.

    Ties are broken by source order, so an already ordered node keeps its
    order and the result is deterministic.
    """
    eqs = list(n.equations)
    deps = dependencies(eqs)
    ts = TopologicalSorter(deps)
    try:
        ts.prepare()
    except CycleError as exc:
        cycle = exc.args[1]
        raise CompileError([_cycle_diagnostic(n, eqs, cycle)]) from None
    ready: list[int] = []
    order: list[int] = []
    while ts.is_active():
        for i in ts.get_ready():
            heapq.heappush(ready, i)
        i = heapq.heappop(ready)
        order.append(i)
        ts.done(i)
    return Schedule(n.name, tuple(order))


def _cycle_diagnostic(n, eqs, cycle: list[int]) -> Diagnostic:
    on_cycle = set(cycle)
    reads: set[str] = set()
    for i in on_cycle:
        reads.update(A.free_vars(eqs[i].rhs, through_pre=False))
    names: dict[str, None] = {}
    for i in sorted(on_cycle):
        for t in eqs[i].targets:
            if t in reads:
                names.setdefault(t)
    first = eqs[min(on_cycle)]
    return Diagnostic(
        CAUSALITY,
        f"causality cycle in node {n.name} through {{{', '.join(sorted(names))}}}",
        first.pos,
    )
