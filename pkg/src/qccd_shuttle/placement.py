"""Chain positions on the architecture graph."""
from __future__ import annotations

import random
from typing import Iterator, Mapping

from .arch_graph import ArchGraph
from .exceptions import ValidationError


class IonPlacement:
    """Map chain id -> edge id (one ion per chain, chain ``j`` carries qubit ``j``).

    Every edge holds at most one chain except the processing edge, which
    holds up to the architecture's ``pz_capacity``.
    """

    def __init__(self, positions: Mapping[int, int], graph: ArchGraph | None = None):
        self.positions = {int(c): int(e) for c, e in positions.items()}
        self._occupants: dict[int, set[int]] = {}
        for c, e in self.positions.items():
            self._occupants.setdefault(e, set()).add(c)
        if graph is not None:
            self.validate(graph)

    def validate(self, graph: ArchGraph) -> "IonPlacement":
        for c, e in self.positions.items():
            graph.check_edge(e)
        for e, chains in self._occupants.items():
            if len(chains) > graph.capacity(e):
                raise ValidationError(f"edge {e} holds chains {sorted(chains)} beyond its capacity", field="placement")
        return self

    def __getitem__(self, chain: int) -> int:
        return self.positions[chain]

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.positions))

    def __len__(self) -> int:
        return len(self.positions)

    def __eq__(self, other) -> bool:
        return isinstance(other, IonPlacement) and self.positions == other.positions

    def __repr__(self) -> str:
        return f"IonPlacement({dict(sorted(self.positions.items()))})"

    def occupants(self, edge: int) -> set[int]:
        return set(self._occupants.get(edge, ()))

    def occupant(self, edge: int) -> int | None:
        chains = self._occupants.get(edge)
        if not chains:
            return None
        return min(chains)

    @property
    def occupied_edges(self) -> set[int]:
        return {e for e, cs in self._occupants.items() if cs}

    def moved(self, updates: Mapping[int, int]) -> "IonPlacement":
        new = dict(self.positions)
        new.update(updates)
        return IonPlacement(new)

    def to_dict(self) -> dict[str, int]:
        return {str(c): e for c, e in sorted(self.positions.items())}

    @classmethod
    def from_dict(cls, data: Mapping) -> "IonPlacement":
        return cls({int(c): int(e) for c, e in data.items()})


def random_placement(graph: ArchGraph, chain_count: int, seed: int) -> IonPlacement:
    """Uniformly place ``chain_count`` chains on distinct memory edges."""
    edges = list(graph.memory_edges)
    if not isinstance(chain_count, int) or chain_count < 0 or chain_count > len(edges):
        raise ValidationError(
            f"chain_count must be in 0..{len(edges)} for this architecture, got {chain_count!r}", field="chain_count"
        )
    rng = random.Random(seed)
    chosen = rng.sample(edges, chain_count)
    return IonPlacement({c: e for c, e in enumerate(chosen)})


def chains_for_occupancy(graph: ArchGraph, occupancy: float) -> int:
    if not 0.0 <= occupancy <= 1.0:
        raise ValidationError(f"occupancy must lie in [0, 1], got {occupancy}", field="occupancy")
    return int(round(occupancy * len(graph.memory_edges)))
