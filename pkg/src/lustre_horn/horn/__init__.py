from .encode import (
    HornSystem, NodeEncoder, Relation, declare_enum_sorts, emit_collecting_semantics,
    encode_call, encode_equation, encode_program, encoders, reset_name, step_name,
)
from .smtlib import write_smtlib
from .terms import App, Ctor, Lit, RelApp, Rule, Term, Var, evaluate, to_sexpr

__all__ = [
    "App", "Ctor", "HornSystem", "Lit", "NodeEncoder", "RelApp", "Relation", "Rule",
    "Term", "Var", "declare_enum_sorts", "emit_collecting_semantics", "encode_call",
    "encode_equation", "encode_program", "encoders", "evaluate", "reset_name",
    "step_name", "to_sexpr", "write_smtlib",
]
