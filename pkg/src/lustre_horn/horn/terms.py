"""Terms of the Horn system and their ground evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

SORTS = {"bool": "Bool", "int": "Int", "real": "Real"}


def sort_of(ty: str) -> str:
    """SMT-LIB sort of a source type; enumerated types keep their name."""
    return SORTS.get(ty, ty)


@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class Lit:
    value: Union[bool, int, Fraction]


@dataclass(frozen=True)
class Ctor:
    name: str
    sort: str


@dataclass(frozen=True)
class App:
    op: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class RelApp:
    rel: str
    args: tuple[Term, ...]
    # call site (instance uid) the application stands for; None in heads
    site: Optional[str] = field(default=None, compare=False)


Term = Union[Var, Lit, Ctor, App, RelApp]

TRUE = Lit(True)


def conj(*terms: Term) -> Term:
    flat: list[Term] = []
    for t in terms:
        if isinstance(t, App) and t.op == "and":
            flat.extend(t.args)
        elif t != TRUE:
            flat.append(t)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else App("and", tuple(flat))


def eq(a: Term, b: Term) -> Term:
    return App("=", (a, b))


def implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    if b == TRUE:
        return TRUE
    return App("=>", (a, b))


def neg(a: Term) -> Term:
    return App("not", (a,))


def ite(c: Term, a: Term, b: Term) -> Term:
    return App("ite", (c, a, b))


@dataclass
class Rule:
    body: Term
    head: RelApp


def variables(t: Term, out: Optional[dict[str, str]] = None) -> dict[str, str]:
    """Free variables with their sorts, in first-occurrence order."""
    out = {} if out is None else out
    if isinstance(t, Var):
        out.setdefault(t.name, t.sort)
    elif isinstance(t, (App, RelApp)):
        for a in t.args:
            variables(a, out)
    return out


def relapps(t: Term):
    if isinstance(t, RelApp):
        yield t
    elif isinstance(t, App):
        for a in t.args:
            yield from relapps(a)


# -- printing ----------------------------------------------------------------

def _lit(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v) if v >= 0 else f"(- {-v})"
    v = Fraction(v)
    mag = abs(v)
    s = f"{mag.numerator}.0" if mag.denominator == 1 else f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return s if v >= 0 else f"(- {s})"


def to_sexpr(t: Term) -> str:
    if isinstance(t, (Var, Ctor)):
        return t.name
    if isinstance(t, Lit):
        return _lit(t.value)
    if isinstance(t, App):
        return f"({t.op} " + " ".join(to_sexpr(a) for a in t.args) + ")"
    if isinstance(t, RelApp):
        if not t.args:
            return t.rel
        return f"({t.rel} " + " ".join(to_sexpr(a) for a in t.args) + ")"
    raise TypeError(t)


# -- ground evaluation -------------------------------------------------------

class Unbound(KeyError):
    """A variable or relation without a value; always an emission bug."""


def _div(a, b):
    return Fraction(0) if b == 0 else Fraction(a) / Fraction(b)


_STRICT: dict[str, Callable] = {
    "not": lambda a: not a,
    "=": lambda a, b: a == b,
    "distinct": lambda a, b: a != b,
    "xor": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "*": lambda a, b: a * b,
    "/": _div,
}


def evaluate(t: Term, env: dict, relation: Optional[Callable[[RelApp, list], bool]] = None):
    """Evaluate a ground term.

    ``=>``, ``ite``, ``and`` and ``or`` only evaluate the operands they
    need, so variables that are absent off their clock are never looked up;
    a clock guard ``(and (= x A) (= y B))`` stops at the first false test. Relation
    applications are delegated to ``relation(app, argument values)``.
    """
    cls = t.__class__
    if cls is App:
        op, args = t.op, t.args
        if op == "and":
            for a in args:
                if not evaluate(a, env, relation):
                    return False
            return True
        if op == "=>":
            return (not evaluate(args[0], env, relation)) or bool(evaluate(args[1], env, relation))
        if op == "=":
            return evaluate(args[0], env, relation) == evaluate(args[1], env, relation)
        if op == "ite":
            return evaluate(args[1] if evaluate(args[0], env, relation) else args[2], env, relation)
        if op == "or":
            for a in args:
                if evaluate(a, env, relation):
                    return True
            return False
    elif cls is Var:
        try:
            return env[t.name]
        except KeyError:
            raise Unbound(t.name) from None
    elif cls is Lit:
        return t.value
    elif cls is Ctor:
        return t.name
    elif cls is RelApp:
        if relation is None:
            raise Unbound(t.rel)
        return relation(t, [evaluate(a, env, relation) for a in t.args])
    else:
        raise TypeError(f"not a term: {t!r}")
    op, args = t.op, t.args
    vals = [evaluate(a, env, relation) for a in args]
    if op == "+":
        return sum(vals[1:], vals[0])
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        out = vals[0]
        for v in vals[1:]:
            out -= v
        return out
    return _STRICT[op](*vals)
