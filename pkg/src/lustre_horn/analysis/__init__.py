from .causality import check_program_unless, check_unless_memories
from .clocks import BASE, Base, NodeClocks, On, clock_check
from .schedule import Schedule, schedule_node
from .typecheck import TypedProgram, expr_type, type_check

__all__ = [
    "BASE", "Base", "NodeClocks", "On", "Schedule", "TypedProgram",
    "check_program_unless", "check_unless_memories", "clock_check",
    "expr_type", "schedule_node", "type_check",
]
