"""The dedicated check forbidding putative-state memories in unless guards.

A strong transition is evaluated before the state it leaves is known to be
active, so its guard may not depend on anything the automaton's own
equations define, not even through ``pre``.
"""

from __future__ import annotations

from .. import ast as A
from ..diagnostics import UNLESS_MEMORY, CompileError, Diagnostic


def _defined_in(a: A.AutomatonDecl) -> set[str]:
    out: set[str] = set()
    for s in a.states:
        for eq in s.equations:
            out.update(eq.targets)
        for d in s.locals:
            out.add(d.name)
        for sub in s.automata:
            out |= _defined_in(sub)
    return out


def _diagnostics(a: A.AutomatonDecl) -> list[Diagnostic]:
    written = _defined_in(a)
    diags = []
    for s in a.states:
        for tr in s.strong:
            for v in A.free_vars(tr.guard):
                if v in written:
                    diags.append(Diagnostic(
                        UNLESS_MEMORY, f"unless guard reads automaton-defined variable {v}",
                        tr.guard.pos or tr.pos))
        for sub in s.automata:
            diags.extend(_diagnostics(sub))
    return diags


def check_unless_memories(a: A.AutomatonDecl, host: A.NodeDecl = None) -> None:
    diags = _diagnostics(a)
    if diags:
        raise CompileError(diags)


def check_program_unless(p: A.Program) -> None:
    diags = []
    for n in p.nodes:
        for a in n.automata:
            diags.extend(_diagnostics(a))
    if diags:
        raise CompileError(diags)
