"""Commutation-aware dependency graph over native gates."""
from __future__ import annotations

from .model import DIAGONAL, Circuit, Gate


def gates_commute(a: Gate, b: Gate) -> bool:
    """Rule-based commutation check used when building the dependency graph.

    Disjoint gates commute, diagonal gates (RZ, RZZ) commute with each other,
    and equal-kind single-qubit rotations on the same qubit commute.
    """
    if not set(a.qubits) & set(b.qubits):
        return True
    if a.kind in DIAGONAL and b.kind in DIAGONAL:
        return True
    if a.kind == b.kind and len(a.qubits) == 1 and a.qubits == b.qubits:
        return True
    return False


class DependencyGraph:
    """DAG with an edge ``A -> B`` for every earlier ``A`` that does not commute with ``B``.

    Nodes are gate ids.  ``remove`` deletes a node (used while executing or
    while building the priority queue on a copy).
    """

    def __init__(self, gates: dict[int, Gate], succ: dict[int, list[int]], preds: dict[int, int]):
        self.gates = gates
        self.succ = succ
        self.pred_count = preds
        self.front = {g for g, k in preds.items() if k == 0}

    def __len__(self) -> int:
        return len(self.pred_count)

    def __contains__(self, gate_id: int) -> bool:
        return gate_id in self.pred_count

    @property
    def nodes(self) -> list[int]:
        return sorted(self.pred_count)

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in sorted(self.succ) for b in self.succ[a]]

    def copy(self) -> "DependencyGraph":
        dag = DependencyGraph.__new__(DependencyGraph)
        dag.gates = self.gates
        dag.succ = self.succ
        dag.pred_count = dict(self.pred_count)
        dag.front = set(self.front)
        return dag

    def remove(self, gate_id: int) -> None:
        if gate_id not in self.front:
            raise ValueError(f"gate {gate_id} still has unfinished predecessors")
        self.front.discard(gate_id)
        del self.pred_count[gate_id]
        for s in self.succ.get(gate_id, ()):
            if s in self.pred_count:
                self.pred_count[s] -= 1
                if self.pred_count[s] == 0:
                    self.front.add(s)

    def chains_needed_later(self, qubit: int) -> bool:
        return any(qubit in self.gates[g].qubits for g in self.pred_count)


def build_dependency_graph(circuit: Circuit) -> DependencyGraph:
    gates = {g.id: g for g in circuit.gates}
    succ: dict[int, list[int]] = {}
    preds = {g.id: 0 for g in circuit.gates}
    history: dict[int, list[Gate]] = {}
    for g in circuit.gates:
        seen = set()
        for q in g.qubits:
            for a in history.get(q, ()):
                if a.id in seen:
                    continue
                seen.add(a.id)
                if not gates_commute(a, g):
                    succ.setdefault(a.id, []).append(g.id)
                    preds[g.id] += 1
            history.setdefault(q, []).append(g)
    for a in succ:
        succ[a].sort()
    return DependencyGraph(gates, succ, preds)


def front_layer(dag: DependencyGraph) -> set[int]:
    return set(dag.front)
