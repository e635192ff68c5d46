"""Reference interpreters: one for source programs, one for normalized ones."""

from .check import StepChecker, Violation, check_step_relation, mutate_equality, reset_holds
from .normalized import ABSENT, Interpreter, NodeState, StepRecord, Trace, flat_names, flat_state, init_state, run_trace, step
from .source import SourceInterpreter
from .traces import random_inputs, random_value

__all__ = [
    "ABSENT", "Interpreter", "NodeState", "SourceInterpreter", "StepChecker", "StepRecord", "Trace",
    "Violation", "check_step_relation", "flat_names", "flat_state", "init_state", "mutate_equality",
    "random_inputs", "random_value", "reset_holds", "run_trace", "step",
]
