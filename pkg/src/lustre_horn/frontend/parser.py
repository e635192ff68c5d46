"""Recursive-descent parser for the Lustre subset, automata included.

Operator precedence, loosest first::

    if-then-else  ->  when  =>  or/xor  and  not  comparisons  + -  * /
    unary - / pre  primary

``->`` and ``=>`` associate to the right, comparisons do not associate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .. import ast as A
from ..diagnostics import (
    DUPLICATE, NAME_CLASH, RESERVED, SYNTAX, UNDEFINED, UNKNOWN_IDENT, UNKNOWN_STATE,
    CompileError, Diagnostic, error,
)
from .lexer import Tok, Token, tokenize

BASE_TYPES = ("bool", "int", "real")
# The built-in initialisation node and the relations of the collecting semantics.
RESERVED_NODES = ("arrow", "Reach", "ERR")

_CMP = {Tok.EQ: "=", Tok.NEQ: "<>", Tok.LT: "<", Tok.LE: "<=", Tok.GT: ">", Tok.GE: ">="}
_ADD = {Tok.PLUS: "+", Tok.MINUS: "-"}
_MUL = {Tok.STAR: "*", Tok.SLASH: "/"}
_OR = {Tok.OR: "or", Tok.XOR: "xor"}


def _constructors(tokens: list[Token]) -> set[str]:
    out = set()
    for i, t in enumerate(tokens):
        if t.kind is Tok.ENUM and i + 1 < len(tokens) and tokens[i + 1].kind is Tok.LBRACE:
            j = i + 2
            while j < len(tokens) and tokens[j].kind in (Tok.IDENT, Tok.COMMA):
                if tokens[j].kind is Tok.IDENT:
                    out.add(tokens[j].text)
                j += 1
    return out


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0
        self.ctors = _constructors(tokens)

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *kinds: Tok) -> bool:
        return self.tok.kind in kinds

    def advance(self) -> Token:
        t = self.tok
        if t.kind is not Tok.EOF:
            self.i += 1
        return t

    def accept(self, kind: Tok) -> Optional[Token]:
        if self.tok.kind is kind:
            return self.advance()
        return None

    def expect(self, kind: Tok, what: str = "") -> Token:
        if self.tok.kind is not kind:
            found = self.tok.text or "end of input"
            raise error(SYNTAX, f"expected {what or kind.name.lower()}, found {found!r}", self.tok.pos)
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        t = self.expect(Tok.IDENT, what)
        if t.text.startswith("__"):
            raise error(RESERVED, f"identifier {t.text!r} uses the reserved '__' prefix", t.pos)
        return t

    # -- declarations ------------------------------------------------------

    def program(self) -> A.Program:
        types, nodes = [], []
        while not self.at(Tok.EOF):
            if self.at(Tok.TYPE):
                types.append(self.type_decl())
            elif self.at(Tok.NODE, Tok.FUNCTION):
                nodes.append(self.node_decl())
            else:
                raise error(SYNTAX, f"expected 'type', 'node' or 'function', found {self.tok.text!r}", self.tok.pos)
        return A.Program(tuple(types), tuple(nodes))

    def type_decl(self) -> A.TypeDecl:
        start = self.expect(Tok.TYPE)
        name = self.ident("type name").text
        self.expect(Tok.EQ, "'='")
        self.expect(Tok.ENUM, "'enum'")
        self.expect(Tok.LBRACE, "'{'")
        ctors = [self.ident("constructor").text]
        while self.accept(Tok.COMMA):
            ctors.append(self.ident("constructor").text)
        self.expect(Tok.RBRACE, "'}'")
        self.expect(Tok.SEMI, "';'")
        return A.TypeDecl(name, tuple(ctors), start.pos)

    def node_decl(self) -> A.NodeDecl:
        start = self.advance()
        is_function = start.kind is Tok.FUNCTION
        name = self.ident("node name").text
        inputs = self.params()
        self.expect(Tok.RETURNS, "'returns'")
        outputs = self.params()
        self.accept(Tok.SEMI)
        locals_ = self.var_section()
        self.expect(Tok.LET, "'let'")
        eqs, auts = self.body()
        self.expect(Tok.TEL, "'tel'")
        self.accept(Tok.SEMI)
        return A.NodeDecl(name, is_function, inputs, outputs, locals_, eqs, auts, start.pos)

    def params(self) -> tuple[A.VarDecl, ...]:
        self.expect(Tok.LPAREN, "'('")
        out: list[A.VarDecl] = []
        while not self.at(Tok.RPAREN):
            out.extend(self.decl_group())
            if not self.accept(Tok.SEMI):
                break
        self.expect(Tok.RPAREN, "')'")
        return tuple(out)

    def decl_group(self) -> list[A.VarDecl]:
        names = [self.ident("variable name")]
        while self.accept(Tok.COMMA):
            names.append(self.ident("variable name"))
        self.expect(Tok.COLON, "':'")
        ty = self.ident("type").text
        is_clock = self.accept(Tok.CLOCK) is not None
        return [A.VarDecl(n.text, ty, is_clock, n.pos) for n in names]

    def var_section(self) -> tuple[A.VarDecl, ...]:
        out: list[A.VarDecl] = []
        if self.accept(Tok.VAR):
            while self.at(Tok.IDENT):
                out.extend(self.decl_group())
                self.expect(Tok.SEMI, "';'")
        return tuple(out)

    def body(self) -> tuple[tuple[A.Equation, ...], tuple[A.AutomatonDecl, ...]]:
        eqs, auts = [], []
        while not self.at(Tok.TEL, Tok.EOF):
            if self.at(Tok.AUTOMATON):
                auts.append(self.automaton())
            else:
                eqs.append(self.equation())
        return tuple(eqs), tuple(auts)

    def equation(self) -> A.Equation:
        start = self.tok
        if self.accept(Tok.LPAREN):
            targets = [self.ident().text]
            while self.accept(Tok.COMMA):
                targets.append(self.ident().text)
            self.expect(Tok.RPAREN, "')'")
        else:
            targets = [self.ident("equation target").text]
            while self.accept(Tok.COMMA):
                targets.append(self.ident().text)
        self.expect(Tok.EQ, "'='")
        rhs = self.expr()
        self.expect(Tok.SEMI, "';'")
        return A.Equation(tuple(targets), rhs, start.pos)

    def automaton(self) -> A.AutomatonDecl:
        start = self.expect(Tok.AUTOMATON)
        name = self.ident("automaton name").text
        # Strong transitions written between the automaton header and the
        # first state belong to that first state.
        leading = []
        while self.at(Tok.UNLESS):
            leading.append(self.transition())
        states = []
        while self.at(Tok.STATE):
            states.append(self.state())
        if not states:
            raise error(SYNTAX, f"automaton {name!r} has no state", self.tok.pos)
        if leading:
            s0 = states[0]
            leading = [_retarget(t, s0.name) for t in leading]
            states[0] = A.StateDecl(s0.name, tuple(leading) + s0.strong, s0.locals,
                                    s0.equations, s0.automata, s0.weak, s0.pos)
        self.accept(Tok.SEMI)
        return A.AutomatonDecl(name, tuple(states), start.pos)

    def state(self) -> A.StateDecl:
        start = self.expect(Tok.STATE)
        name = self.ident("state name").text
        self.accept(Tok.COLON)
        strong = []
        while self.at(Tok.UNLESS):
            strong.append(self.transition())
        locals_ = self.var_section()
        self.expect(Tok.LET, "'let'")
        eqs, auts = self.body()
        self.expect(Tok.TEL, "'tel'")
        self.accept(Tok.SEMI)
        weak = []
        while self.at(Tok.UNTIL):
            weak.append(self.transition())
        strong = [_retarget(t, name) for t in strong]
        weak = [_retarget(t, name) for t in weak]
        return A.StateDecl(name, tuple(strong), locals_, eqs, auts, tuple(weak), start.pos)

    def transition(self) -> A.Transition:
        start = self.advance()  # unless / until
        guard = self.expr()
        restart = True
        if self.accept(Tok.RESUME):
            restart = False
        else:
            self.accept(Tok.RESTART)
        # A transition written without a target loops on its own state; the
        # caller fills the name in.
        target = self.ident("target state").text if self.at(Tok.IDENT) else ""
        return A.Transition(guard, restart, target, start.pos)

    # -- expressions -------------------------------------------------------

    def expr(self) -> A.Expr:
        return self.arrow()

    def arrow(self) -> A.Expr:
        left = self.when()
        if self.at(Tok.ARROW):
            pos = self.advance().pos
            return A.Arrow(left, self.arrow(), pos)
        return left

    def when(self) -> A.Expr:
        e = self.impl()
        while self.at(Tok.WHEN):
            pos = self.advance().pos
            ctor = self.ident("clock constructor").text
            self.expect(Tok.LPAREN, "'('")
            ck = self.ident("clock variable").text
            self.expect(Tok.RPAREN, "')'")
            e = A.When(e, ctor, ck, pos)
        return e

    def impl(self) -> A.Expr:
        left = self.or_()
        if self.at(Tok.IMPL):
            pos = self.advance().pos
            return A.BinOp("=>", left, self.impl(), pos)
        return left

    def or_(self) -> A.Expr:
        e = self.and_()
        while self.tok.kind in _OR:
            t = self.advance()
            e = A.BinOp(_OR[t.kind], e, self.and_(), t.pos)
        return e

    def and_(self) -> A.Expr:
        e = self.not_()
        while self.at(Tok.AND):
            pos = self.advance().pos
            e = A.BinOp("and", e, self.not_(), pos)
        return e

    def not_(self) -> A.Expr:
        if self.at(Tok.NOT):
            pos = self.advance().pos
            return A.UnOp("not", self.not_(), pos)
        return self.cmp()

    def cmp(self) -> A.Expr:
        e = self.add()
        if self.tok.kind in _CMP:
            t = self.advance()
            e = A.BinOp(_CMP[t.kind], e, self.add(), t.pos)
        return e

    def add(self) -> A.Expr:
        e = self.mul()
        while self.tok.kind in _ADD:
            t = self.advance()
            e = A.BinOp(_ADD[t.kind], e, self.mul(), t.pos)
        return e

    def mul(self) -> A.Expr:
        e = self.unary()
        while self.tok.kind in _MUL:
            t = self.advance()
            e = A.BinOp(_MUL[t.kind], e, self.unary(), t.pos)
        return e

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind is Tok.MINUS:
            self.advance()
            return A.UnOp("-", self.unary(), t.pos)
        if t.kind is Tok.PRE:
            self.advance()
            return A.Pre(self.unary(), t.pos)
        if t.kind is Tok.NOT:
            return self.not_()
        if t.kind is Tok.IF:
            self.advance()
            cond = self.expr()
            self.expect(Tok.THEN, "'then'")
            then = self.expr()
            self.expect(Tok.ELSE, "'else'")
            return A.If(cond, then, self.expr(), t.pos)
        return self.primary()

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind is Tok.INT:
            self.advance()
            return A.IntConst(int(t.text), t.pos)
        if t.kind is Tok.REAL:
            self.advance()
            return A.RealConst(Fraction(t.text), t.pos)
        if t.kind in (Tok.TRUE, Tok.FALSE):
            self.advance()
            return A.BoolConst(t.kind is Tok.TRUE, t.pos)
        if t.kind is Tok.LPAREN:
            self.advance()
            items = [self.expr()]
            while self.accept(Tok.COMMA):
                items.append(self.expr())
            self.expect(Tok.RPAREN, "')'")
            return items[0] if len(items) == 1 else A.Tuple(tuple(items), t.pos)
        if t.kind is Tok.MERGE:
            return self.merge()
        if t.kind is Tok.IDENT:
            name = self.ident().text
            if self.at(Tok.LPAREN):
                return self.call(name, t)
            if name in self.ctors:
                return A.EnumConst(name, t.pos)
            return A.Var(name, t.pos)
        raise error(SYNTAX, f"unexpected {t.text or 'end of input'!r} in expression", t.pos)

    def call(self, name: str, start: Token) -> A.Call:
        self.expect(Tok.LPAREN)
        args = []
        if not self.at(Tok.RPAREN):
            args.append(self.expr())
            while self.accept(Tok.COMMA):
                args.append(self.expr())
        self.expect(Tok.RPAREN, "')'")
        reset = None
        if self.at(Tok.EVERY):
            self.advance()
            c = self.tok
            if c.kind is Tok.IDENT and c.text in self.ctors and self.peek().kind is Tok.LPAREN:
                self.advance()
                self.advance()
                var = self.ident("clock variable").text
                self.expect(Tok.RPAREN, "')'")
                reset = A.ClockTest(c.text, var, c.pos)
            else:
                reset = self.unary()
        return A.Call(name, tuple(args), reset, None, start.pos)

    def merge(self) -> A.Merge:
        start = self.expect(Tok.MERGE)
        ck = self.ident("clock variable").text
        branches = []
        while self.at(Tok.LPAREN):
            self.advance()
            ctor = self.ident("constructor").text
            self.expect(Tok.ARROW, "'->'")
            branches.append((ctor, self.expr()))
            self.expect(Tok.RPAREN, "')'")
        if not branches:
            raise error(SYNTAX, "merge without branches", self.tok.pos)
        return A.Merge(ck, tuple(branches), start.pos)


def _retarget(t: A.Transition, state: str) -> A.Transition:
    return t if t.target else A.Transition(t.guard, t.restart, state, t.pos)


# ---------------------------------------------------------------------------
# Structural validation


def _check_body(node: A.NodeDecl, scope: dict[str, A.VarDecl], definable: set[str],
                must_define: list[A.VarDecl], eqs, auts, where: str,
                diags: list[Diagnostic]) -> None:
    defined: dict[str, A.Pos] = {}

    def define(name: str, pos) -> None:
        if name not in scope:
            diags.append(Diagnostic(UNKNOWN_IDENT, f"unknown variable {name!r} in {where}", pos))
        elif name not in definable:
            diags.append(Diagnostic(DUPLICATE, f"input {name!r} cannot be defined", pos))
        elif name in defined:
            diags.append(Diagnostic(DUPLICATE, f"variable {name!r} is defined more than once", pos))
        else:
            defined[name] = pos

    for eq in eqs:
        for t in eq.targets:
            define(t, eq.pos)
    seen_auts: set[str] = set()
    for a in auts:
        if a.name in seen_auts:
            diags.append(Diagnostic(DUPLICATE, f"duplicate automaton {a.name!r}", a.pos))
        seen_auts.add(a.name)
        for v in A.automaton_writes(a):
            define(v, a.pos)
        _check_automaton(node, scope, definable, a, diags)
    for d in must_define:
        if d.name not in defined:
            diags.append(Diagnostic(UNDEFINED, f"variable {d.name!r} is never defined in {where}", d.pos))


def _check_automaton(node, scope, definable, a: A.AutomatonDecl, diags) -> None:
    names = [s.name for s in a.states]
    for i, s in enumerate(a.states):
        if s.name in names[:i]:
            diags.append(Diagnostic(DUPLICATE, f"duplicate state {s.name!r} in automaton {a.name!r}", s.pos))
        for tr in s.strong + s.weak:
            if tr.target not in names:
                diags.append(Diagnostic(UNKNOWN_STATE, f"transition to unknown state {tr.target!r} in automaton {a.name!r}", tr.pos))
        inner = dict(scope)
        for d in s.locals:
            if d.name in scope:
                diags.append(Diagnostic(DUPLICATE, f"state local {d.name!r} shadows another variable", d.pos))
            inner[d.name] = d
        _check_body(node, inner, definable | {d.name for d in s.locals}, list(s.locals),
                    s.equations, s.automata, f"state {s.name!r}", diags)


def validate(p: A.Program) -> None:
    """Check name uniqueness and the one-definition rule; raise on failure."""
    diags: list[Diagnostic] = []
    seen: dict[str, str] = {}
    for t in p.types:
        if t.name in seen or t.name in BASE_TYPES:
            diags.append(Diagnostic(DUPLICATE, f"duplicate type {t.name!r}", t.pos))
        seen[t.name] = "type"
        for c in t.constructors:
            if c in seen:
                diags.append(Diagnostic(DUPLICATE, f"duplicate constructor {c!r}", t.pos))
            seen[c] = "constructor"
    node_names: set[str] = set()
    for n in p.nodes:
        if n.name in node_names:
            diags.append(Diagnostic(DUPLICATE, f"duplicate node {n.name!r}", n.pos))
        node_names.add(n.name)
        if n.name in RESERVED_NODES:
            diags.append(Diagnostic(NAME_CLASH, f"node name {n.name!r} is reserved", n.pos))
        scope: dict[str, A.VarDecl] = {}
        for d in n.decls():
            if d.name in scope:
                diags.append(Diagnostic(DUPLICATE, f"duplicate declaration of {d.name!r}", d.pos))
            if seen.get(d.name) == "constructor":
                diags.append(Diagnostic(DUPLICATE, f"variable {d.name!r} clashes with a constructor", d.pos))
            if d.type not in BASE_TYPES and p.type_decl(d.type) is None:
                diags.append(Diagnostic(UNKNOWN_IDENT, f"unknown type {d.type!r}", d.pos))
            scope[d.name] = d
        definable = {d.name for d in n.outputs + n.locals}
        _check_body(n, scope, definable, list(n.outputs + n.locals), n.equations, n.automata,
                    f"node {n.name!r}", diags)
    if diags:
        raise CompileError(diags)


def parse_program(tokens_or_text) -> A.Program:
    """Parse a token list (or raw text) and validate the result."""
    tokens = tokenize(tokens_or_text) if isinstance(tokens_or_text, str) else tokens_or_text
    prog = Parser(tokens).program()
    validate(prog)
    return prog


def parse_expr(text: str) -> A.Expr:
    p = Parser(tokenize(text))
    e = p.expr()
    p.expect(Tok.EOF, "end of input")
    return e
