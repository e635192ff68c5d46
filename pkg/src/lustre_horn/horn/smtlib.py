"""SMT-LIB serialization in the rule format (``declare-rel``/``rule``/``query``)."""

from __future__ import annotations

import io
from typing import Optional, TextIO

from .encode import HornSystem
from .terms import Rule, to_sexpr, variables


def _rule(r: Rule) -> str:
    return f"(rule (=> {to_sexpr(r.body)} {to_sexpr(r.head)}))"


def write_smtlib(h: HornSystem, sink: Optional[TextIO] = None) -> str:
    """Render ``h``; the text is also written to ``sink`` when given.

    Order: logic header, datatypes, relations, variables, rules, queries.
    Variables are declared once, in order of first occurrence.
    """
    out = io.StringIO()
    out.write("(set-logic HORN)\n")
    for t in h.sorts:
        out.write(f"(declare-datatypes () (({t.name} {' '.join(t.constructors)})))\n")
    for r in h.relations:
        out.write(f"(declare-rel {r.name} ({' '.join(r.sorts)}))\n")
    decls: dict[str, str] = {}
    for r in h.rules:
        variables(r.body, decls)
        variables(r.head, decls)
    for name, sort in decls.items():
        out.write(f"(declare-var {name} {sort})\n")
    for r in h.rules:
        out.write(_rule(r) + "\n")
    for q in h.queries:
        out.write(f"(query {q})\n")
    text = out.getvalue()
    if sink is not None:
        sink.write(text)
    return text
