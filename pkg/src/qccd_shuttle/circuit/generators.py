"""Benchmark circuit families (pre-translation form)."""
from __future__ import annotations

import math

from ..exceptions import ValidationError
from .model import Circuit


def full_register_access(n: int) -> Circuit:
    """One RX per qubit: every chain visits the processing zone once."""
    return Circuit.from_ops(n, [("RX", (q,), math.pi / 2) for q in range(n)])


def ghz(n: int) -> Circuit:
    ops = [("H", (0,))] if n else []
    ops += [("CX", (q, q + 1)) for q in range(n - 1)]
    return Circuit.from_ops(n, ops)


def graph_state(n: int) -> Circuit:
    """Graph state on a ring (a path for n < 3); CZ is written as CP(pi)."""
    ops = [("H", (q,)) for q in range(n)]
    ops += [("CP", (q, q + 1), math.pi) for q in range(n - 1)]
    if n >= 3:
        ops.append(("CP", (n - 1, 0), math.pi))
    return Circuit.from_ops(n, ops)


def qft(n: int, swaps: bool = True) -> Circuit:
    ops = []
    for i in range(n):
        ops.append(("H", (i,)))
        for j in range(i + 1, n):
            ops.append(("CP", (j, i), math.pi / 2 ** (j - i)))
    if swaps:
        ops += [("SWAP", (i, n - 1 - i)) for i in range(n // 2)]
    return Circuit.from_ops(n, ops)


FAMILIES = {"fra": full_register_access, "ghz": ghz, "graph": graph_state, "qft": qft}


def builtin(family: str, n: int) -> Circuit:
    if family not in FAMILIES:
        raise ValidationError(f"unknown circuit family {family!r}; choose from {sorted(FAMILIES)}", field="circuit")
    if n < 0:
        raise ValidationError("qubit count must be non-negative", field="circuit")
    return FAMILIES[family](n)
