import pytest

from lustre_horn import ast as A
from lustre_horn.analysis import clock_check, schedule_node, type_check
from lustre_horn.automaton import (build_handler_node, build_unless_node, collect_var_sets, expand_all,
                                   rewire_host, rewire_host_parts)
from lustre_horn.diagnostics import STATE_WRITES, UNLESS_MEMORY, CompileError
from lustre_horn.frontend import expr_to_str, parse_program, pretty_print
from lustre_horn.interpreter import Interpreter, SourceInterpreter, random_inputs, run_trace
from lustre_horn.normalization import normalize_node, normalize_program

from conftest import corpus


def state(prog, node, name):
    for a in prog.node(node).automata:
        for s in a.states:
            if s.name == name:
                return s
    raise KeyError(name)


def body(n: A.NodeDecl) -> list[str]:
    out = []
    for eq in n.equations:
        lhs = eq.targets[0] if len(eq.targets) == 1 else "(" + ", ".join(eq.targets) + ")"
        out.append(f"{lhs} = {expr_to_str(eq.rhs)}")
    return out


@pytest.fixture(scope="module")
def auto():
    return parse_program(corpus("auto"))


@pytest.fixture(scope="module")
def solution():
    return parse_program(corpus("solution"))


# -- variable sets -------------------------------------------------------------

def test_var_sets_of_four(auto):
    vs = collect_var_sets(state(auto, "auto", "Four"), auto.node("auto"))
    assert (vs.read_eqs, vs.write_eqs, vs.read_unless, vs.read_until) == ((), ("out",), (), ())


def test_var_sets_of_ok(solution):
    vs = collect_var_sets(state(solution, "solution", "OK"), solution.node("solution"))
    assert set(vs.read_eqs) == {"o2", "i"}
    assert set(vs.write_eqs) == {"o1", "o2"}
    assert set(vs.read_unless) == {"i"}


def test_var_sets_through_pre():
    p = parse_program(corpus("triangle"))
    vs = collect_var_sets(state(p, "triangle", "One"), p.node("triangle"))
    assert set(vs.read_unless) == {"r", "o"}


def test_var_sets_exclude_state_locals():
    p = parse_program(corpus("modes"))
    vs = collect_var_sets(state(p, "modes", "B"), p.node("modes"))
    assert "t" not in vs.read_eqs + vs.write_eqs
    assert set(vs.write_eqs) == {"y", "z"}


# -- generated nodes -----------------------------------------------------------

def test_unless_without_strong_transition_is_identity(auto):
    n = build_unless_node(state(auto, "auto", "Four"), None, auto.node("auto"))
    assert n.name == "Four_unless" and n.is_function
    assert [d.name for d in n.inputs] == ["restart_in", "state_in"]
    assert [d.name for d in n.outputs] == ["restart_act", "state_act"]
    assert body(n) == ["(restart_act, state_act) = (restart_in, state_in)"]


def test_unless_of_ko_resumes(solution):
    n = build_unless_node(state(solution, "solution", "KO"), None, solution.node("solution"))
    assert body(n) == ["(restart_act, state_act) = if i = 0 then (false, OK) else (restart_in, state_in)"]
    assert [d.name for d in n.inputs] == ["restart_in", "state_in", "i"]


def test_unless_priority_follows_source_order():
    p = parse_program("node n(g1, g2: bool) returns (o: int); let automaton a "
                      "state A: unless g1 restart B unless g2 resume C let o = 1; tel "
                      "state B: let o = 2; tel state C: let o = 3; tel tel")
    n = build_unless_node(state(p, "n", "A"), None, p.node("n"))
    assert body(n) == ["(restart_act, state_act) = if g1 then (true, B) else if g2 then (false, C) "
                       "else (restart_in, state_in)"]


def test_handler_of_four(auto):
    n = build_handler_node(state(auto, "auto", "Four"), None, auto.node("auto"))
    assert n.name == "Four_handler_until"
    assert [d.name for d in n.outputs] == ["restart_in", "state_in", "out"]
    assert body(n) == ["(restart_in, state_in) = (true, One)", "out = false"]


def test_handler_without_until_loops():
    p = parse_program("node n(x: int) returns (o: int); let automaton a state A: let o = x; tel tel")
    n = build_handler_node(state(p, "n", "A"), None, p.node("n"))
    assert body(n)[0] == "(restart_in, state_in) = (false, A)"


def test_handler_of_ok_keeps_equations(solution):
    n = build_handler_node(state(solution, "solution", "OK"), None, solution.node("solution"))
    # o2 is both read and written by the state: it stays internal to the handler
    assert [d.name for d in n.inputs] == ["restart_act", "state_act", "i"]
    assert "(o1, o2) = (o2, i)" in body(n)


def test_handler_with_memory_is_a_node():
    p = parse_program(corpus("modes"))
    n = build_handler_node(state(p, "modes", "B"), None, p.node("modes"))
    assert not n.is_function
    assert [d.name for d in n.locals] == ["t"]


# -- host rewiring -------------------------------------------------------------

def test_rewired_auto_matches_template(auto):
    host = auto.node("auto")
    g = rewire_host_parts(host, host.automata[0])
    assert g.clock_type == A.TypeDecl("four_states_type", ("One", "Two", "Three", "Four"))
    n = rewire_host(host, host.automata[0], g)
    assert not n.automata
    assert {d.name: d.is_clock for d in n.locals} == {
        "four_states_restart_in": False, "four_states_next_restart_in": False, "four_states_restart_act": False,
        "four_states_state_in": True, "four_states_next_state_in": True, "four_states_state_act": True,
    }
    eqs = body(n)
    assert eqs[0] == ("(four_states_restart_in, four_states_state_in) = (false, One) -> "
                      "pre (four_states_next_restart_in, four_states_next_state_in)")
    assert eqs[1].startswith("(four_states_restart_act, four_states_state_act) = merge four_states_state_in "
                             "(One -> One_unless((four_states_restart_in, four_states_state_in) "
                             "when One(four_states_state_in)) every four_states_restart_in)")
    assert eqs[2].startswith("(four_states_next_restart_in, four_states_next_state_in, out) = merge "
                             "four_states_state_act (One -> One_handler_until((four_states_restart_act, "
                             "four_states_state_act) when One(four_states_state_act)) every four_states_restart_act)")


def test_two_automata_are_independent():
    p = parse_program("node n(c: bool) returns (x, y: int); let "
                      "automaton a state A1: let x = 1; tel until c restart A2 state A2: let x = 2; tel "
                      "automaton b state B1: let y = 1; tel until c restart B2 state B2: let y = 2; tel tel")
    e = expand_all(p)
    assert [t.name for t in e.types] == ["a_type", "b_type"]
    host = e.node("n")
    assert {d.name for d in host.locals} >= {"a_state_in", "b_state_in"}
    assert len(e.nodes) == 9
    type_check(e)
    clock_check(e)


def test_heterogeneous_writes_rejected():
    p = parse_program("node n(c: bool) returns (a, b: int); let automaton m "
                      "state S: let a = 1; b = 0; tel until c restart T "
                      "state T: let a = 2; tel tel")
    with pytest.raises(CompileError) as exc:
        expand_all(p)
    (d,) = exc.value.diagnostics
    assert d.code == STATE_WRITES
    assert d.message == "variable b not defined in state T"


def test_expand_all_counts():
    p = parse_program(corpus("counters"))
    e = expand_all(p)
    generated = [n.name for n in e.nodes if p.node(n.name) is None]
    assert len(generated) == 8
    assert {"Four_unless", "Four_handler_until"} <= set(generated)
    assert len(e.nodes) == len(p.nodes) + 8
    # generated nodes precede the node that calls them
    names = [n.name for n in e.nodes]
    assert names.index("Four_handler_until") < names.index("auto")


def test_expand_all_identity_without_automata():
    p = parse_program(corpus("stopwatch"))
    assert expand_all(p) == p


def test_expand_all_is_deterministic():
    text = corpus("modes")
    assert pretty_print(expand_all(parse_program(text))) == pretty_print(expand_all(parse_program(text)))


def test_expand_all_rejects_unless_memories():
    with pytest.raises(CompileError) as exc:
        expand_all(parse_program(corpus("triangle")))
    assert exc.value.codes == [UNLESS_MEMORY]


def test_expansion_passes_checks_and_scheduling():
    for name in ["auto", "solution", "modes", "counters"]:
        e = expand_all(parse_program(corpus(name)))
        type_check(e)
        clock_check(e)
        for n in e.nodes:
            schedule_node(normalize_node(n, e))


# -- semantics -----------------------------------------------------------------

def outputs(prog, node, inputs):
    n = normalize_program(expand_all(prog))
    return run_trace(n, node, inputs).column


def test_expanded_auto_trace(auto):
    col = outputs(auto, "auto", [{"x": False}] * 8)("out")
    assert col == [False, False, True, False, False, False, True, False]


def test_solution_trace(solution):
    ins = [{"i": v} for v in [0, 3, 0, 0, 5, 7, 0]]
    # OK forwards o2 := i and o1 := previous o2 (same instant); KO swaps the roles
    src = SourceInterpreter(solution).run("solution", ins)
    n = normalize_program(expand_all(solution))
    assert run_trace(n, "solution", ins).outputs == src
    assert [o["o1"] for o in src] == [0, 3, 0, 0, 5, 7, 0]


def test_resume_keeps_state_memories():
    # two states writing the same variable from different memories
    p = parse_program("node n(c: bool) returns (o: int); let automaton m "
                      "state S: let o = 0 -> pre o + 1; tel until c resume T "
                      "state T: let o = 100; tel until c resume S tel")
    ins = [{"c": v} for v in [False, False, True, False, True, False]]
    col = outputs(p, "n", ins)("o")
    # S counts 0,1,2; T emits 100 for two instants; resuming S continues from S's own memory
    assert col == [0, 1, 2, 100, 100, 3]


def test_restart_resets_state_memories():
    p = parse_program("node n(c: bool) returns (o: int); let automaton m "
                      "state S: let o = 0 -> pre o + 1; tel until c restart T "
                      "state T: let o = 100; tel until c restart S tel")
    ins = [{"c": v} for v in [False, False, True, False, True, False]]
    assert outputs(p, "n", ins)("o") == [0, 1, 2, 100, 100, 0]


def test_unless_fires_in_the_same_instant():
    p = parse_program("node n(c: bool) returns (o: int); let automaton m "
                      "state S: unless c restart T let o = 1; tel "
                      "state T: let o = 2; tel tel")
    ins = [{"c": v} for v in [False, True, False]]
    assert outputs(p, "n", ins)("o") == [1, 2, 2]


def test_until_fires_at_the_next_instant():
    p = parse_program("node n(c: bool) returns (o: int); let automaton m "
                      "state S: let o = 1; tel until c restart T "
                      "state T: let o = 2; tel tel")
    ins = [{"c": v} for v in [False, True, False]]
    assert outputs(p, "n", ins)("o") == [1, 1, 2]


NESTED = """
node n(c, d: bool) returns (o: int);
let
  automaton outer
  state A:
  let
    automaton inner
    state I:
    let o = 1; tel until d restart J
    state J:
    let o = 2; tel
  tel until c restart B
  state B:
  let o = 3; tel until c restart A
tel
"""

# The same behaviour with one flat automaton over the product of the states.
FLAT = """
node n(c, d: bool) returns (o: int);
let
  automaton flat
  state AI:
  let o = 1; tel until c restart B until d restart AJ
  state AJ:
  let o = 2; tel until c restart B
  state B:
  let o = 3; tel until c restart AI
tel
"""


def test_nested_automaton_matches_flattened_equivalent():
    nested, flat = parse_program(NESTED), parse_program(FLAT)
    nn, fn = normalize_program(expand_all(nested)), normalize_program(expand_all(flat))
    for seed in range(50):
        ins = random_inputs(nested.node("n").inputs, nested, 20, seed)
        assert run_trace(nn, "n", ins).outputs == run_trace(fn, "n", ins).outputs


def test_exclusivity_of_generated_calls():
    p = parse_program(corpus("modes"))
    e = expand_all(p)
    n = normalize_program(e)
    interp = Interpreter(n)
    for seed in range(20):
        trace = run_trace(n, "modes", random_inputs(p.node("modes").inputs, p, 20, seed), interp)
        for rec in trace.records:
            handlers = [u for u in rec.children if "handler" in u and u.startswith(("A_", "B_"))]
            unless = [u for u in rec.children if "unless" in u and u.startswith(("A_", "B_"))]
            assert len(handlers) == 1
            assert len(unless) <= 1
