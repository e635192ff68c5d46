from .lexer import Tok, Token, tokenize
from .parser import parse_expr, parse_program, validate
from .printer import expr_to_str, node_to_str, pretty_print

__all__ = [
    "Tok", "Token", "expr_to_str", "node_to_str", "parse_expr",
    "parse_program", "pretty_print", "tokenize", "validate",
]
