"""Random input traces for differential testing."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Any

INT_RANGE = (-8, 8)


def random_value(ty: str, types, rng: random.Random) -> Any:
    if ty == "bool":
        return rng.random() < 0.5
    if ty == "int":
        return rng.randint(*INT_RANGE)
    if ty == "real":
        return Fraction(rng.randint(*INT_RANGE))
    return rng.choice(types.type_decl(ty).constructors)


def random_inputs(inputs, types, length: int, seed: int = 0) -> list[dict[str, Any]]:
    """``length`` valuations of the declarations ``inputs``."""
    rng = random.Random(seed)
    return [{d.name: random_value(d.type, types, rng) for d in inputs} for _ in range(length)]
