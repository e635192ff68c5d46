"""Concrete syntax for ASTs; the output re-parses to an equal tree."""

from __future__ import annotations

from .. import ast as A

# Binding strength of each construct; a child is parenthesized when its own
# level is lower than the level its position requires.
IF, ARROW, WHEN, IMPL, OR, AND, NOT, CMP, ADD, MUL, UNARY, PRIMARY = range(12)

_BIN = {
    "=>": (IMPL, "right"), "or": (OR, "left"), "xor": (OR, "left"),
    "and": (AND, "left"), "=": (CMP, "none"), "<>": (CMP, "none"),
    "<": (CMP, "none"), "<=": (CMP, "none"), ">": (CMP, "none"),
    ">=": (CMP, "none"), "+": (ADD, "left"), "-": (ADD, "left"),
    "*": (MUL, "left"), "/": (MUL, "left"),
}


def level(e: A.Expr) -> int:
    if isinstance(e, A.If):
        return IF
    if isinstance(e, A.Arrow):
        return ARROW
    if isinstance(e, A.When):
        return WHEN
    if isinstance(e, A.BinOp):
        return _BIN[e.op][0]
    if isinstance(e, A.UnOp):
        return NOT if e.op == "not" else UNARY
    if isinstance(e, A.Pre):
        return UNARY
    if isinstance(e, A.IntConst) and e.value < 0:
        return UNARY
    if isinstance(e, A.RealConst) and e.value < 0:
        return UNARY
    return PRIMARY


def _real(v) -> str:
    if v.denominator == 1:
        return f"{v.numerator}.0"
    s = f"{float(v)!r}"
    return s if "e" not in s else f"{float(v):.17f}".rstrip("0")


def expr_to_str(e: A.Expr, need: int = IF) -> str:
    s = _expr(e)
    return f"({s})" if level(e) < need else s


def _expr(e: A.Expr) -> str:
    if isinstance(e, A.BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, A.IntConst):
        return str(e.value)
    if isinstance(e, A.RealConst):
        return _real(e.value)
    if isinstance(e, (A.EnumConst, A.Var)):
        return e.name
    if isinstance(e, A.UnOp):
        if e.op == "not":
            return "not " + expr_to_str(e.arg, NOT)
        return "-" + expr_to_str(e.arg, UNARY)
    if isinstance(e, A.BinOp):
        lvl, assoc = _BIN[e.op]
        lneed = lvl if assoc == "left" else lvl + 1
        rneed = lvl if assoc == "right" else lvl + 1
        return f"{expr_to_str(e.left, lneed)} {e.op} {expr_to_str(e.right, rneed)}"
    if isinstance(e, A.If):
        return f"if {expr_to_str(e.cond)} then {expr_to_str(e.then)} else {expr_to_str(e.else_)}"
    if isinstance(e, A.Pre):
        return "pre " + expr_to_str(e.arg, UNARY)
    if isinstance(e, A.Arrow):
        return f"{expr_to_str(e.first, WHEN)} -> {expr_to_str(e.rest, ARROW)}"
    if isinstance(e, A.When):
        return f"{expr_to_str(e.arg, IMPL)} when {e.ctor}({e.clock})"
    if isinstance(e, A.Merge):
        branches = " ".join(f"({c} -> {expr_to_str(b)})" for c, b in e.branches)
        return f"merge {e.clock} {branches}"
    if isinstance(e, A.Tuple):
        return "(" + ", ".join(expr_to_str(x) for x in e.items) + ")"
    if isinstance(e, A.ClockTest):
        return f"{e.ctor}({e.var})"
    if isinstance(e, A.Call):
        name = e.node if e.uid is None else f"{e.node}<{e.uid}>"
        s = f"{name}(" + ", ".join(expr_to_str(a) for a in e.args) + ")"
        if e.reset is not None:
            s += " every " + expr_to_str(e.reset, UNARY if not isinstance(e.reset, A.ClockTest) else PRIMARY)
        return s
    raise TypeError(f"not an expression: {e!r}")


def _decls(ds) -> str:
    return "; ".join(_decl(d) for d in ds)


def _decl(d: A.VarDecl) -> str:
    return f"{d.name}: {d.type}" + (" clock" if d.is_clock else "")


def _equation(eq: A.Equation) -> str:
    lhs = eq.targets[0] if len(eq.targets) == 1 else "(" + ", ".join(eq.targets) + ")"
    return f"{lhs} = {expr_to_str(eq.rhs)};"


def _transition(kw: str, t: A.Transition) -> str:
    return f"{kw} {expr_to_str(t.guard)} {'restart' if t.restart else 'resume'} {t.target}"


def _body(eqs, auts, ind: str) -> list[str]:
    lines = [ind + _equation(eq) for eq in eqs]
    for a in auts:
        lines.extend(_automaton(a, ind))
    return lines


def _var_section(ds, ind: str) -> list[str]:
    if not ds:
        return []
    return [ind + "var"] + [f"{ind}  {_decl(d)};" for d in ds]


def _automaton(a: A.AutomatonDecl, ind: str) -> list[str]:
    lines = [f"{ind}automaton {a.name}"]
    for s in a.states:
        lines.append(f"{ind}state {s.name}:")
        inner = ind + "  "
        lines.extend(inner + _transition("unless", t) for t in s.strong)
        lines.extend(_var_section(s.locals, inner))
        body = _body(s.equations, s.automata, inner + "  ")
        if body:
            lines += [inner + "let", *body, inner + "tel"]
        else:
            lines.append(inner + "let tel")
        lines.extend(inner + _transition("until", t) for t in s.weak)
    return lines


def node_to_str(n: A.NodeDecl) -> str:
    kw = "function" if n.is_function else "node"
    lines = [f"{kw} {n.name} ({_decls(n.inputs)}) returns ({_decls(n.outputs)});"]
    lines.extend(_var_section(n.locals, ""))
    body = _body(n.equations, n.automata, "  ")
    if body:
        lines += ["let", *body, "tel"]
    else:
        lines.append("let tel")
    return "\n".join(lines)


def pretty_print(p: A.Program) -> str:
    parts = [f"type {t.name} = enum {{ {', '.join(t.constructors)} }};" for t in p.types]
    parts.extend(node_to_str(n) for n in p.nodes)
    return "\n\n".join(parts) + "\n"
