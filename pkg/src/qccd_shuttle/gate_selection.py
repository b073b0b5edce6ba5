"""Pick the next gate and rank chains by when they are needed."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .arch_graph import ArchGraph
from .circuit.dag import DependencyGraph
from .circuit.model import Gate
from .placement import IonPlacement


def chain_distance(graph: ArchGraph, placement: IonPlacement, chain: int) -> int:
    """Junction crossings separating ``chain`` from the entry edge (0 inside the pass)."""
    return graph.entry_distance[placement[chain]]


def best_gate(
    front: Iterable[Gate | int],
    placement: IonPlacement,
    graph: ArchGraph,
    gates: Mapping[int, Gate] | None = None,
) -> int:
    """Front-layer gate whose chains are closest (summed) to the processing zone.

    ``front`` holds :class:`Gate` objects, or gate ids when ``gates`` maps
    ids to gates.  Ties go to the lowest gate id.
    """
    best = None
    for g in front:
        if not isinstance(g, Gate):
            if gates is None:
                raise ValueError("gate ids need the `gates` mapping")
            g = gates[g]
        key = (sum(chain_distance(graph, placement, q) for q in g.qubits), g.id)
        if best is None or key < best:
            best = key
    if best is None:
        raise ValueError("front layer is empty")
    return best[1]


@dataclass
class PriorityQueue:
    chains: list[int] = field(default_factory=list)
    max_len: int = 4
    gates: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.chains)

    def __iter__(self):
        return iter(self.chains)

    def rank(self, chain: int) -> int | None:
        try:
            return self.chains.index(chain)
        except ValueError:
            return None

    @property
    def head_gate(self) -> int | None:
        return self.gates[0] if self.gates else None


def build_priority_queue(
    dag: DependencyGraph, placement: IonPlacement, graph: ArchGraph, max_len: int
) -> PriorityQueue:
    """Repeatedly take the best gate of a shrinking DAG copy and enqueue its chains."""
    queue = PriorityQueue(max_len=max_len)
    work = dag.copy()
    seen: set[int] = set()
    while len(queue.chains) < max_len and len(work):
        gid = best_gate(work.front, placement, graph, work.gates)
        queue.gates.append(gid)
        for q in work.gates[gid].qubits:
            if q not in seen and len(queue.chains) < max_len:
                seen.add(q)
                queue.chains.append(q)
        work.remove(gid)
    return queue


def eligible_movers(queue: PriorityQueue | list[int], placement: IonPlacement, graph: ArchGraph) -> list[int]:
    """Chains allowed to move: a chain moves only if every higher-ranked chain is strictly closer."""
    chains = list(queue)
    dist = [chain_distance(graph, placement, c) for c in chains]
    out = []
    for k, c in enumerate(chains):
        if all(dist[j] < dist[k] for j in range(k)):
            out.append(c)
    return out
