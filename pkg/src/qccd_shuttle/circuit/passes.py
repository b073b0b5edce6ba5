"""Device-independent compilation passes.

``eliminate_swaps`` -> ``decompose_to_native`` -> ``peephole_optimize`` turns a
high-level circuit into one over the native set {RX, RY, RZ, RZZ}.
"""
from __future__ import annotations

import math

from ..exceptions import UnsupportedFeatureError
from .model import NATIVE, Circuit, Gate

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9


def eliminate_swaps(circuit: Circuit) -> tuple[Circuit, tuple[int, ...]]:
    """Drop every SWAP and relabel the gates after it.

    Returns the swap-free circuit and ``perm`` where ``perm[w]`` is the wire of
    the new circuit that ends up holding what original wire ``w`` would hold.
    """
    loc = list(range(circuit.qubit_count))
    ops = []
    for g in circuit.gates:
        if g.kind == "SWAP":
            a, b = g.qubits
            loc[a], loc[b] = loc[b], loc[a]
            continue
        ops.append((g.kind, tuple(loc[q] for q in g.qubits), g.angle))
    return Circuit.from_ops(circuit.qubit_count, ops), tuple(loc)


def _h(q: int) -> list[tuple]:
    return [("RZ", (q,), math.pi), ("RY", (q,), math.pi / 2)]


def _rewrite(g: Gate) -> list[tuple]:
    if g.kind in NATIVE:
        return [(g.kind, g.qubits, g.angle)]
    if g.kind == "H":
        return _h(g.qubits[0])
    if g.kind == "CX":
        c, t = g.qubits
        return [
            *_h(t),
            ("RZ", (c,), -math.pi / 2),
            ("RZ", (t,), -math.pi / 2),
            ("RZZ", (c, t), math.pi / 2),
            *_h(t),
        ]
    if g.kind == "CP":
        a, b = g.qubits
        theta = g.angle
        return [("RZ", (a,), theta / 2), ("RZ", (b,), theta / 2), ("RZZ", (a, b), -theta / 2)]
    raise UnsupportedFeatureError(f"no native rewrite for {g.kind}; run eliminate_swaps first")


def decompose_to_native(circuit: Circuit) -> Circuit:
    ops = []
    for g in circuit.gates:
        ops.extend(_rewrite(g))
    return Circuit.from_ops(circuit.qubit_count, ops)


def normalize_angle(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    if a < 0:
        a += TWO_PI
    if a < ANGLE_TOL or TWO_PI - a < ANGLE_TOL:
        return 0.0
    return a


def _peephole_pass(ops: list[list]) -> tuple[list[list], bool]:
    out: list[list | None] = []
    stacks: dict[int, list[int]] = {}
    changed = False

    def last(q: int) -> int | None:
        stack = stacks.get(q, [])
        while stack and out[stack[-1]] is None:
            stack.pop()
        return stack[-1] if stack else None

    for kind, qubits, angle in ops:
        angle = normalize_angle(angle)
        if angle == 0.0:
            changed = True
            continue
        prev = {last(q) for q in qubits}
        if len(prev) == 1:
            i = prev.pop()
            if i is not None:
                pk, pq, pa = out[i]
                if pk == kind and sorted(pq) == sorted(qubits):
                    merged = normalize_angle(pa + angle)
                    out[i] = None if merged == 0.0 else [pk, pq, merged]
                    changed = True
                    continue
        out.append([kind, qubits, angle])
        for q in qubits:
            stacks.setdefault(q, []).append(len(out) - 1)
    return [op for op in out if op is not None], changed


def peephole_optimize(circuit: Circuit) -> Circuit:
    """Merge neighbouring equal rotations and drop identities, to a fixpoint."""
    if not circuit.is_native():
        raise UnsupportedFeatureError("peephole_optimize expects a native circuit")
    ops = [[g.kind, g.qubits, g.angle] for g in circuit.gates]
    changed = True
    while changed:
        ops, changed = _peephole_pass(ops)
    return Circuit.from_ops(circuit.qubit_count, [tuple(op) for op in ops])


def compile_circuit(circuit: Circuit) -> tuple[Circuit, tuple[int, ...]]:
    """Full pass pipeline; returns the native circuit and the output permutation."""
    swap_free, perm = eliminate_swaps(circuit)
    return peephole_optimize(decompose_to_native(swap_free)), perm
