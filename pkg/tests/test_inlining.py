import pytest

from lustre_horn import ast as A
from lustre_horn.driver import generated_nodes
from lustre_horn.horn import encoders, write_smtlib
from lustre_horn.inlining import inline_calls, sample
from lustre_horn.interpreter import Interpreter, check_step_relation, random_inputs, run_trace
from lustre_horn.frontend import parse_program
from lustre_horn.normalization import lint, normalize_program

from conftest import compiled

PROGRAMS = ["auto", "counters", "solution", "modes", "stopwatch"]


@pytest.mark.parametrize("name", PROGRAMS)
def test_generated_nodes_disappear(name):
    res = compiled(name, inline=True)
    gone = set(generated_nodes(res.source, res.expanded))
    names = {n.name for n in res.normalized.nodes}
    assert not gone & names
    for n in res.normalized.nodes:
        lint(n)
        assert not {c.node for c in n.calls()} & gone


@pytest.mark.parametrize("name", PROGRAMS)
def test_semantics_preserved(name):
    plain, inl = compiled(name), compiled(name, inline=True)
    for node in plain.source.nodes:
        for seed in range(30):
            ins = random_inputs(node.inputs, plain.source, 20, seed)
            a = run_trace(plain.normalized, node.name, ins).outputs
            b = run_trace(inl.normalized, node.name, ins).outputs
            assert a == b, (node.name, seed)


@pytest.mark.parametrize("name", PROGRAMS)
def test_step_relation_holds_when_inlined(name):
    res = compiled(name, inline=True)
    encs = encoders(res.normalized)
    interp = Interpreter(res.normalized)
    for node in res.source.nodes:
        for seed in range(20):
            tr = run_trace(res.normalized, node.name, random_inputs(node.inputs, res.source, 20, seed), interp)
            assert check_step_relation(tr, res.horn, encs) is None, (node.name, seed)


def test_no_handler_relations_when_inlined():
    h = compiled("auto", main="auto", inline=True).horn
    assert [r.name for r in h.relations] == ["arrow_reset", "arrow_step", "auto_reset", "auto_step", "Reach"]
    assert "(declare-rel auto_step" in write_smtlib(h)


def test_inner_resets_follow_outer_reset():
    # a stateful callee inlined under "every" passes the reset to its own calls
    text = ("node c(x: int) returns (y: int); let y = 0 -> pre y + x; tel\n"
            "node w(x: int) returns (y: int); let y = c(x); tel\n"
            "node top(x: int; r: bool) returns (y: int); let y = w(x) every r; tel\n")
    p = normalize_program(parse_program(text))
    q = inline_calls(p, ["w"])
    (call,) = [c for c in q.node("top").calls() if c.node == "c"]
    assert call.reset is not None
    ins = [{"x": 1, "r": r} for r in (False, False, True, False)]
    assert run_trace(q, "top", ins).column("y") == run_trace(p, "top", ins).column("y") == [0, 1, 0, 1]


def test_sample_builds_when_chain():
    e = sample(A.BoolConst(True), [], [("A", "k"), ("B", "m")])
    assert e == A.When(A.When(A.BoolConst(True), "A", "k"), "B", "m")
