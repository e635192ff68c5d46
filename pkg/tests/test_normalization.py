import pytest

from lustre_horn import ast as A
from lustre_horn.automaton import expand_all
from lustre_horn.diagnostics import InternalError
from lustre_horn.frontend import expr_to_str, parse_program
from lustre_horn.interpreter import SourceInterpreter, random_inputs, run_trace
from lustre_horn.normalization import (ARROW, NormalizedNode, assign_uids, lint, lower_every, normalize_node,
                                       normalize_program, normalized_to_str, uninitialized_reads)

from conftest import ACCEPTED, corpus


def eqs(n):
    out = []
    for eq in n.equations:
        lhs = eq.targets[0] if len(eq.targets) == 1 else "(" + ", ".join(eq.targets) + ")"
        out.append(f"{lhs} = {expr_to_str(eq.rhs)}")
    return out


@pytest.fixture(scope="module")
def cpt():
    return normalize_program(parse_program(corpus("cpt")))


def test_cpt_memory_and_arrow(cpt):
    n = cpt.node("cpt")
    assert eqs(n) == ["__cpt_mem_1 = pre y", "y = arrow<arrow_1>(0, if z then 0 else __cpt_mem_1 + 1)"]
    assert [(d.name, d.type) for d in n.locals] == [("__cpt_mem_1", "int")]


def test_foo_call_then_arrow(cpt):
    assert eqs(cpt.node("foo")) == ["__foo_call_1 = cpt<cpt_1>(z)", "out = arrow<arrow_1>(1, __foo_call_1)"]


def test_simple_node_unchanged_but_for_uids():
    p = parse_program("node n(a, b: int) returns (o: int); var t: int; let t = a + b; o = t * 2; tel")
    n = normalize_program(p).node("n")
    assert eqs(n) == ["t = a + b", "o = t * 2"]
    assert n.locals == p.node("n").locals


def test_pre_of_compound_expression():
    p = parse_program("node n(a, b: int) returns (o: int); let o = 0 -> pre (a + b); tel")
    assert eqs(normalize_program(p).node("n")) == [
        "__n_tmp_1 = a + b", "__n_mem_1 = pre __n_tmp_1", "o = arrow<arrow_1>(0, __n_mem_1)"]


def test_tuple_split_per_component():
    p = parse_program(corpus("solution"))
    e = expand_all(p)
    n = normalize_program(e).node("OK_handler_until")
    assert "o1 = o2" in eqs(n) and "o2 = i" in eqs(n)


def test_two_calls_get_distinct_uids():
    p = parse_program("node count(t: bool) returns (s: int); let s = 0 -> pre s + 1; tel\n"
                      "node n(t: bool) returns (a, b: int); let a = count(t); b = count(not t); tel")
    uids = [eq.rhs.uid for eq in normalize_program(p).node("n").equations if isinstance(eq.rhs, A.Call)]
    assert uids == ["count_1", "count_2"]


def test_generated_calls_have_unique_uids():
    n = normalize_program(expand_all(parse_program(corpus("auto")))).node("auto")
    uids = [c.uid for c in n.calls()]
    assert len(uids) == len(set(uids))
    assert {"Four_unless_1", "Four_handler_until_1", "arrow_1"} <= set(uids)


def test_uids_are_stable():
    text = corpus("modes")
    a = normalize_program(expand_all(parse_program(text)))
    b = normalize_program(expand_all(parse_program(text)))
    assert [normalized_to_str(n) for n in a.nodes] == [normalized_to_str(n) for n in b.nodes]


def test_every_variable_is_kept():
    n = normalize_program(parse_program(corpus("stopwatch"))).node("stopwatch")
    (call,) = [c for c in n.calls() if c.node == "count"]
    assert call.reset == A.Var("reset")


def test_every_clock_test_is_lowered():
    p = parse_program("type m = enum { Start, Stop };\n"
                      "node f(x: int) returns (y: int); let y = 0 -> pre y + x; tel\n"
                      "node n(x: int; run: m clock) returns (o: int); let o = f(x) every Start(run); tel")
    n = normalize_program(p).node("n")
    assert eqs(n)[:2] == ["__n_cond_1 = run = Start", "o = f<f_1>(x) every __n_cond_1"]


def test_call_without_every_has_no_condition(cpt):
    (call,) = [c for c in cpt.node("foo").calls() if c.node == "cpt"]
    assert call.reset is None


def test_lower_every_on_a_bare_node():
    n = NormalizedNode("n", False, (A.VarDecl("x", "int"), A.VarDecl("c", "bool")), (A.VarDecl("o", "int"),), (),
                       (A.Equation(("o",), A.Call("f", (A.Var("x"),), A.UnOp("not", A.Var("c")))),))
    out = lower_every(n)
    assert eqs(out) == ["__n_cond_1 = not c", "o = f(x) every __n_cond_1"]


def test_lint_rejects_nested_call():
    n = NormalizedNode("n", False, (A.VarDecl("x", "int"),), (A.VarDecl("o", "int"),), (),
                       (A.Equation(("o",), A.BinOp("+", A.Call("f", (A.Var("x"),), uid="f_1"), A.IntConst(1))),))
    with pytest.raises(InternalError):
        lint(n)


def test_lint_rejects_duplicate_uid():
    call = A.Call("f", (A.Var("x"),), uid="f_1")
    n = NormalizedNode("n", False, (A.VarDecl("x", "int"),), (A.VarDecl("a", "int"), A.VarDecl("b", "int")), (),
                       (A.Equation(("a",), call), A.Equation(("b",), call)))
    with pytest.raises(InternalError):
        lint(n)


@pytest.mark.parametrize("name", ACCEPTED)
def test_normal_form_holds_on_corpus(name):
    for n in normalize_program(expand_all(parse_program(corpus(name)))).nodes:
        lint(n)
        for eq in n.equations:
            if isinstance(eq.rhs, A.Call) and eq.rhs.node == ARROW:
                assert len(eq.rhs.args) == 2 * len(eq.targets)


def test_unguarded_memory_warning():
    p = parse_program("node n(x: int) returns (o, q: int); let o = pre x; q = 1 + pre x; tel")
    prog = normalize_program(p)
    assert uninitialized_reads(prog.node("n")) == ["o", "__n_mem_1"]
    assert prog.warnings == ("node n: memory o may be read before initialization",
                             "node n: memory __n_mem_1 may be read before initialization")


def test_guarded_memory_no_warning(cpt):
    assert cpt.warnings == ()


@pytest.mark.parametrize("name", ACCEPTED)
def test_semantics_preserved(name):
    """The source oracle and the normalized program agree on random traces."""
    p = parse_program(corpus(name))
    n = normalize_program(expand_all(p))
    oracle = SourceInterpreter(p)
    for node in p.nodes:
        for seed in range(100):
            ins = random_inputs(node.inputs, p, 20, seed)
            assert run_trace(n, node.name, ins).outputs == oracle.run(node.name, ins), (node.name, seed)


def test_arrow_behaviour_after_reset():
    p = parse_program("node f(x: int) returns (y: int); let y = x -> 100; tel\n"
                      "node n(x: int; r: bool) returns (o: int); let o = f(x) every r; tel")
    n = normalize_program(p)
    ins = [{"x": k, "r": r} for k, r in enumerate([False, False, True, False, True])]
    assert run_trace(n, "n", ins).column("o") == [0, 100, 2, 100, 4]


def test_normalize_node_then_assign_uids():
    p = parse_program(corpus("cpt"))
    n = normalize_node(p.node("foo"), p)
    assert all(c.uid is None for c in n.calls())
    assert sorted(c.uid for c in assign_uids(n).calls()) == ["arrow_1", "cpt_1"]
