"""Compile Lustre programs with hierarchical automata to modular Horn clauses."""

__version__ = "0.1.0"
