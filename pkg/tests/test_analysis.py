import pytest

from lustre_horn.analysis import BASE, On, check_unless_memories, clock_check, schedule_node, type_check
from lustre_horn.automaton import expand_all
from lustre_horn.diagnostics import (ARITY, CAUSALITY, CLOCK_MISMATCH, RECURSION, TYPE_MISMATCH, UNKNOWN_IDENT,
                                     UNLESS_MEMORY, CompileError)
from lustre_horn.frontend import parse_program
from lustre_horn.normalization import normalize_node

from conftest import corpus

ENUM = "type run_mode = enum { Start, Stop };\n"


def codes(fn, *args):
    with pytest.raises(CompileError) as exc:
        fn(*args)
    return exc.value.codes


# -- types -------------------------------------------------------------------

def test_stopwatch_types():
    typed = type_check(parse_program(corpus("stopwatch")))
    assert typed.envs["stopwatch"]["run"] == "run_mode"


def test_greycounter_types():
    typed = type_check(parse_program(corpus("greycounter")))
    assert typed.envs["greycounter"]["out"] == "bool"


def test_arrow_branch_mismatch():
    p = parse_program("node n(x:int) returns (o:int); let o = 1 -> true; tel")
    assert TYPE_MISMATCH in codes(type_check, p)


def test_unknown_identifier():
    p = parse_program("node n(x:int) returns (o:int); let o = y; tel")
    assert UNKNOWN_IDENT in codes(type_check, p)


def test_call_arity():
    p = parse_program("node f(a:int) returns (b:int); let b = a; tel\n"
                      "node n(x:int) returns (o:int); let o = f(x, x); tel")
    assert ARITY in codes(type_check, p)


def test_guards_must_be_bool():
    p = parse_program("node n(x:int) returns (o:int); let automaton a state A: let o = x; tel until x restart A tel")
    assert TYPE_MISMATCH in codes(type_check, p)


def test_recursive_node_is_rejected():
    # the two-node example exactly as printed, where foo calls itself
    src = ("node cpt (z: bool) returns (y: int);\nlet y = 0 -> if z then 0 else pre y + 1; tel\n"
           "node foo (z: bool) returns (out: int)\nlet out = 1 -> foo(z); tel\n")
    assert RECURSION in codes(type_check, parse_program(src))


# -- clocks ------------------------------------------------------------------

def merge_node(branches: str) -> str:
    return (ENUM + "node n(x, y: int; run: run_mode clock) returns (o: int);\n"
            f"let o = merge run {branches}; tel")


def test_merge_of_sampled_branches():
    p = parse_program(merge_node("(Start -> x when Start(run)) (Stop -> y when Stop(run))"))
    type_check(p)
    assert clock_check(p)["n"].vars["o"] == BASE


def test_merge_of_unsampled_branch_is_rejected():
    p = parse_program(merge_node("(Start -> x) (Stop -> y)"))
    type_check(p)
    assert CLOCK_MISMATCH in codes(clock_check, p)


def test_sampled_flow_clock():
    p = parse_program(corpus("stopwatch"))
    cks = clock_check(p)["stopwatch"]
    seconds_call = p.node("stopwatch").equations[1].rhs.branches[0][1]
    assert cks.of(seconds_call) == (On(BASE, "Start", "run"),)


def test_operands_must_share_a_clock():
    p = parse_program(ENUM + "node n(x: int; run: run_mode clock) returns (o: int);\n"
                      "let o = merge run (Start -> (x when Start(run)) + x) (Stop -> x when Stop(run)); tel")
    type_check(p)
    assert CLOCK_MISMATCH in codes(clock_check, p)


def test_clock_driver_must_be_declared_clock():
    p = parse_program(ENUM + "node n(x: int; run: run_mode) returns (o: int);\n"
                      "let o = merge run (Start -> x when Start(run)) (Stop -> x when Stop(run)); tel")
    type_check(p)
    assert CLOCK_MISMATCH in codes(clock_check, p)


def test_generated_program_is_well_clocked():
    e = expand_all(parse_program(corpus("auto")))
    type_check(e)
    cks = clock_check(e)["auto"]
    assert cks.vars["four_states_state_act"] == BASE


# -- scheduling --------------------------------------------------------------

def test_failure_cycle():
    p = parse_program(corpus("failure"))
    type_check(p)
    with pytest.raises(CompileError) as exc:
        schedule_node(normalize_node(p.node("failure"), p))
    (d,) = exc.value.diagnostics
    assert d.code == CAUSALITY
    assert "{o1, o2}" in d.message


def test_solution_expansion_is_schedulable():
    e = expand_all(parse_program(corpus("solution")))
    for n in e.nodes:
        nn = normalize_node(n, e)
        assert sorted(schedule_node(nn).order) == list(range(len(nn.equations)))


def test_self_dependency_through_pre():
    p = parse_program("node n(x:int) returns (y:int); let y = 0 -> pre y + 1; tel")
    assert schedule_node(p.node("n")).order == (0,)


def test_schedule_respects_dependencies():
    p = parse_program("node n(x:int) returns (y:int); var a, b: int; let y = b + 1; b = a * 2; a = x; tel")
    order = schedule_node(p.node("n")).order
    assert order == (2, 1, 0)


def test_instantaneous_self_loop():
    p = parse_program("node n(x:int) returns (y:int); let y = y + x; tel")
    with pytest.raises(CompileError) as exc:
        schedule_node(p.node("n"))
    assert exc.value.codes == [CAUSALITY]


# -- unless memories ---------------------------------------------------------

def test_triangle_rejected():
    p = parse_program(corpus("triangle"))
    a = p.node("triangle").automata[0]
    with pytest.raises(CompileError) as exc:
        check_unless_memories(a, p.node("triangle"))
    (d,) = exc.value.diagnostics
    assert d.code == UNLESS_MEMORY
    assert d.message == "unless guard reads automaton-defined variable o"
    assert d.pos is not None


def test_solution_accepted():
    p = parse_program(corpus("solution"))
    check_unless_memories(p.node("solution").automata[0], p.node("solution"))


def test_no_unless_accepted():
    p = parse_program(corpus("auto"))
    check_unless_memories(p.node("auto").automata[0], p.node("auto"))


def test_unless_reading_a_state_local_of_nested_automaton():
    src = ("node n(c: bool) returns (o: int); var q: int; let automaton a state A: unless (false -> pre (q > 0)) restart A "
           "let automaton inner state I: let q = 1; o = q; tel tel tel")
    p = parse_program(src)
    with pytest.raises(CompileError) as exc:
        check_unless_memories(p.node("n").automata[0], p.node("n"))
    assert exc.value.codes == [UNLESS_MEMORY]
