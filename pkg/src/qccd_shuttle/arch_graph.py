"""Graph model of a grid-type QCCD memory zone and its processing-zone interface.

Edges are trap sites (each holds one ion chain), nodes are either junctions
(``major``) or separators between neighbouring sites of one linear trap
(``minor``).  Moving a chain across a major node costs one time step; moving
across minor nodes is free.

The processing zone is a one-way pass attached to one corner junction::

    corner --entry--> A --processing--> B --exit--> corner

Only the processing edge may hold more than one chain (up to
``GridSpec.pz_capacity``).
"""
from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

from .exceptions import NoCycleError, SaturationError, UnknownElementError, ValidationError

MAJOR = "major"
MINOR = "minor"

MEMORY = "memory"
ENTRY = "entry"
PROCESSING = "processing"
EXIT = "exit"

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
INTERFACE = "interface"

CORNERS = ("top-right", "top-left", "bottom-right", "bottom-left")


@dataclass(frozen=True)
class GridSpec:
    """Dimensions of an ``m x n`` junction grid.

    ``v`` (``h``) is the number of sites on every vertical (horizontal)
    segment between two neighbouring junctions.
    """

    m: int
    n: int
    v: int
    h: int
    entry_corner: str = "top-right"
    pz_capacity: int = 2

    def validate(self) -> "GridSpec":
        for name, low in (("m", 2), ("n", 2), ("v", 1), ("h", 1), ("pz_capacity", 1)):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < low:
                raise ValidationError(f"{name} must be an integer >= {low}, got {value!r}", field=name)
        if self.entry_corner not in CORNERS:
            raise ValidationError(
                f"entry_corner must be one of {CORNERS}, got {self.entry_corner!r}", field="entry_corner"
            )
        return self

    @property
    def memory_edge_count(self) -> int:
        return self.m * (self.n - 1) * self.h + (self.m - 1) * self.n * self.v

    @property
    def label(self) -> str:
        return f"{self.m} {self.n} {self.v} {self.h}"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GridSpec":
        unknown = set(data) - {"m", "n", "v", "h", "entry_corner", "pz_capacity"}
        if unknown:
            raise ValidationError(f"unknown architecture fields: {sorted(unknown)}", field=sorted(unknown)[0])
        missing = [k for k in ("m", "n", "v", "h") if k not in data]
        if missing:
            raise ValidationError(f"missing architecture field {missing[0]!r}", field=missing[0])
        return cls(**dict(data)).validate()

    @classmethod
    def from_json(cls, path: str | Path) -> "GridSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Segment:
    """A linear run of sites between two junctions, ordered from ``a`` to ``b``."""

    id: int
    a: int
    b: int
    edges: tuple[int, ...]
    orientation: str

    @property
    def capacity(self) -> int:
        return len(self.edges)

    def end_edge(self, node: int) -> int:
        if node == self.a:
            return self.edges[0]
        if node == self.b:
            return self.edges[-1]
        raise UnknownElementError(f"node {node} is not an end of segment {self.id}")


@dataclass(frozen=True)
class Cycle:
    """Closed loop of memory edges, listed in rotation order.

    Rotating moves the chain on ``edges[i]`` to ``edges[i + 1]`` (cyclically),
    crossing ``nodes[i]``.
    """

    edges: tuple[int, ...]
    nodes: tuple[int, ...]
    mover_edge: int
    chain: int | None = None
    clockwise: bool = True

    def __len__(self) -> int:
        return len(self.edges)

    def successor(self, edge: int) -> int:
        i = self.edges.index(edge)
        return self.edges[(i + 1) % len(self.edges)]

    def rotate(self, positions: Mapping[int, int]) -> dict[int, int]:
        """Return the new chain->edge map after one rotation step."""
        on_cycle = set(self.edges)
        return {
            chain: self.successor(edge) if edge in on_cycle else edge for chain, edge in positions.items()
        }


@dataclass(eq=False)
class ArchGraph:
    """Immutable graph of one architecture; build with :func:`build_grid_graph`."""

    spec: GridSpec
    node_kind: tuple[str, ...]
    node_coord: dict[int, tuple[int, int]]
    edge_nodes: tuple[tuple[int, int], ...]
    edge_tag: tuple[str, ...]
    edge_segment: tuple[int, ...]
    edge_orientation: tuple[str, ...]
    segments: tuple[Segment, ...]
    node_edges: tuple[tuple[int, ...], ...]
    entry_edge: int
    processing_edge: int
    exit_edge: int
    pz_junction: int
    _path_cache: dict = field(default_factory=dict, repr=False)

    # -- basic queries -------------------------------------------------
    @property
    def num_nodes(self) -> int:
        return len(self.node_kind)

    @property
    def num_edges(self) -> int:
        return len(self.edge_nodes)

    @cached_property
    def memory_edges(self) -> tuple[int, ...]:
        return tuple(e for e, tag in enumerate(self.edge_tag) if tag == MEMORY)

    @cached_property
    def interface_edges(self) -> tuple[int, ...]:
        return (self.entry_edge, self.processing_edge, self.exit_edge)

    @cached_property
    def major_at(self) -> dict[tuple[int, int], int]:
        return {rc: node for node, rc in self.node_coord.items()}

    @property
    def pz_capacity(self) -> int:
        return self.spec.pz_capacity

    def check_edge(self, edge: int) -> int:
        if not isinstance(edge, int) or not 0 <= edge < len(self.edge_nodes):
            raise UnknownElementError(f"unknown edge id {edge!r}")
        return edge

    def check_node(self, node: int) -> int:
        if not isinstance(node, int) or not 0 <= node < len(self.node_kind):
            raise UnknownElementError(f"unknown node id {node!r}")
        return node

    def is_major(self, node: int) -> bool:
        return self.node_kind[node] == MAJOR

    def is_memory(self, edge: int) -> bool:
        return self.edge_tag[edge] == MEMORY

    def capacity(self, edge: int) -> int:
        return self.spec.pz_capacity if edge == self.processing_edge else 1

    def shared_node(self, e1: int, e2: int) -> int | None:
        a = self.edge_nodes[e1]
        b = self.edge_nodes[e2]
        for x in a:
            if x in b:
                return x
        return None

    def neighbors(self, edge: int) -> list[tuple[int, int]]:
        """``(node, other_edge)`` pairs for every edge sharing a node with ``edge``."""
        out = []
        for x in self.edge_nodes[edge]:
            for e2 in self.node_edges[x]:
                if e2 != edge:
                    out.append((x, e2))
        return out

    def move_allowed(self, src: int, dst: int) -> bool:
        """Whether a chain may hop from ``src`` to ``dst`` across their shared node.

        Memory edges are freely connected; the processing-zone pass is one-way
        (memory -> entry -> processing -> exit -> memory or entry).
        """
        if src == dst or self.shared_node(src, dst) is None:
            return False
        ts, td = self.edge_tag[src], self.edge_tag[dst]
        if ts == MEMORY:
            return td in (MEMORY, ENTRY)
        if ts == ENTRY:
            return td == PROCESSING
        if ts == PROCESSING:
            return td == EXIT
        return td in (MEMORY, ENTRY)  # exit edge

    # -- distances -----------------------------------------------------
    def _costs_from(self, target: int) -> list[tuple[int, int]]:
        """(crossings, hops) from every edge to ``target``; cached per target."""
        cached = self._path_cache.get(target)
        if cached is not None:
            return cached
        inf = (1 << 30, 1 << 30)
        dist = [inf] * self.num_edges
        dist[target] = (0, 0)
        heap = [(0, 0, target)]
        pe = self.processing_edge
        while heap:
            c, hops, e = heapq.heappop(heap)
            if (c, hops) != dist[e]:
                continue
            if e == pe and e != target:
                continue  # the processing edge is never an intermediate hop
            for x, e2 in self.neighbors(e):
                cand = (c + (1 if self.node_kind[x] == MAJOR else 0), hops + 1)
                if cand < dist[e2]:
                    dist[e2] = cand
                    heapq.heappush(heap, (cand[0], cand[1], e2))
        self._path_cache[target] = dist
        return dist

    def junction_distance(self, a: int, b: int) -> int:
        self.check_edge(a)
        self.check_edge(b)
        return self._costs_from(b)[a][0]

    @cached_property
    def entry_distance(self) -> tuple[int, ...]:
        """Junction crossings from every edge to the entry edge (processing edge: 0)."""
        costs = self._costs_from(self.entry_edge)
        out = [c for c, _ in costs]
        out[self.processing_edge] = 0
        return tuple(out)

    @cached_property
    def diameter(self) -> int:
        best = 0
        for e in self.memory_edges:
            costs = self._costs_from(e)
            best = max(best, max(costs[f][0] for f in self.memory_edges))
        return best

    def next_hop(self, src: int, dst: int) -> int:
        """First edge after ``src`` on the preferred shortest path to ``dst``."""
        costs = self._costs_from(dst)
        c, hops = costs[src]
        if c >= 1 << 30:
            raise UnknownElementError(f"edge {dst} is unreachable from edge {src}")
        for x, e2 in sorted(self.neighbors(src), key=lambda p: p[1]):
            if e2 == self.processing_edge and e2 != dst:
                continue
            w = 1 if self.node_kind[x] == MAJOR else 0
            c2, h2 = costs[e2]
            if c2 + w == c and h2 + 1 == hops:
                return e2
        raise UnknownElementError(f"no hop from edge {src} towards edge {dst}")

    def shortest_path(self, src: int, dst: int) -> list[int]:
        self.check_edge(src)
        self.check_edge(dst)
        path = [src]
        while path[-1] != dst:
            path.append(self.next_hop(path[-1], dst))
        return path

    @cached_property
    def far_node(self) -> int:
        """Major node farthest (in junction crossings) from the interface junction."""
        dist = {self.pz_junction: 0}
        queue = deque([self.pz_junction])
        while queue:
            x = queue.popleft()
            for y in self._major_neighbors(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return min(dist, key=lambda node: (-dist[node], node))

    def _major_neighbors(self, node: int) -> list[int]:
        out = []
        for s in self.segments:
            if s.orientation == INTERFACE:
                continue
            if s.a == node:
                out.append(s.b)
            elif s.b == node:
                out.append(s.a)
        return out

    # -- export --------------------------------------------------------
    def to_dot(self) -> str:
        lines = ["graph qccd {"]
        for node, kind in enumerate(self.node_kind):
            attrs = f'label="{node}" kind="{kind}"'
            if node in self.node_coord:
                r, c = self.node_coord[node]
                attrs += f' pos="{c},{-r}!"'
            shape = "box" if kind == MAJOR else "point"
            lines.append(f"  n{node} [{attrs} shape={shape}];")
        for e, (u, w) in enumerate(self.edge_nodes):
            lines.append(f'  n{u} -- n{w} [label="e{e}" tag="{self.edge_tag[e]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_grid_graph(spec: GridSpec) -> ArchGraph:
    """Build the graph for ``spec`` with deterministic numbering.

    Major nodes are numbered row-major (``r * n + c``), then minor nodes per
    segment, then the two interface nodes.  Memory edges follow segment order
    (horizontal segments row-major, then vertical ones), then entry,
    processing and exit.
    """
    spec.validate()
    m, n = spec.m, spec.n
    node_kind: list[str] = [MAJOR] * (m * n)
    node_coord = {r * n + c: (r, c) for r in range(m) for c in range(n)}
    edge_nodes: list[tuple[int, int]] = []
    edge_tag: list[str] = []
    edge_segment: list[int] = []
    edge_orientation: list[str] = []
    segments: list[Segment] = []

    def add_segment(a: int, b: int, length: int, orientation: str, tags: Iterable[str] | None = None) -> None:
        sid = len(segments)
        tags = list(tags) if tags is not None else [MEMORY] * length
        chain = [a]
        for _ in range(length - 1):
            node_kind.append(MINOR)
            chain.append(len(node_kind) - 1)
        chain.append(b)
        ids = []
        for i in range(length):
            ids.append(len(edge_nodes))
            edge_nodes.append((chain[i], chain[i + 1]))
            edge_tag.append(tags[i])
            edge_segment.append(sid)
            edge_orientation.append(orientation)
        segments.append(Segment(sid, a, b, tuple(ids), orientation))

    for r in range(m):
        for c in range(n - 1):
            add_segment(r * n + c, r * n + c + 1, spec.h, HORIZONTAL)
    for r in range(m - 1):
        for c in range(n):
            add_segment(r * n + c, (r + 1) * n + c, spec.v, VERTICAL)

    row = 0 if spec.entry_corner.startswith("top") else m - 1
    col = n - 1 if spec.entry_corner.endswith("right") else 0
    junction = row * n + col
    add_segment(junction, junction, 3, INTERFACE, tags=[ENTRY, PROCESSING, EXIT])
    entry, processing, exit_ = segments[-1].edges

    node_edges: list[list[int]] = [[] for _ in node_kind]
    for e, (u, w) in enumerate(edge_nodes):
        node_edges[u].append(e)
        if w != u:
            node_edges[w].append(e)

    return ArchGraph(
        spec=spec,
        node_kind=tuple(node_kind),
        node_coord=node_coord,
        edge_nodes=tuple(edge_nodes),
        edge_tag=tuple(edge_tag),
        edge_segment=tuple(edge_segment),
        edge_orientation=tuple(edge_orientation),
        segments=tuple(segments),
        node_edges=tuple(tuple(es) for es in node_edges),
        entry_edge=entry,
        processing_edge=processing,
        exit_edge=exit_,
        pz_junction=junction,
    )


def junction_distance(graph: ArchGraph, src: int, dst: int) -> int:
    """Fewest junction crossings on any edge path from ``src`` to ``dst``."""
    return graph.junction_distance(src, dst)


def shortest_path_edges(graph: ArchGraph, src: int, dst: int) -> list[int]:
    """Edge path minimising (crossings, hops); ties go to the lowest next edge id."""
    return graph.shortest_path(src, dst)


def _direction(graph: ArchGraph, segment: Segment, junction: int) -> tuple[int, int]:
    other = segment.b if segment.a == junction else segment.a
    r0, c0 = graph.node_coord[junction]
    r1, c1 = graph.node_coord[other]
    return (r1 - r0, c1 - c0)


def _rectangle_walk(graph: ArchGraph, r0: int, r1: int, c0: int, c1: int) -> list[int]:
    at = graph.major_at
    walk = [at[(r0, c)] for c in range(c0, c1)]
    walk += [at[(r, c1)] for r in range(r0, r1)]
    walk += [at[(r1, c)] for c in range(c1, c0, -1)]
    walk += [at[(r, c0)] for r in range(r1, r0, -1)]
    return walk


def _segment_between(graph: ArchGraph, u: int, w: int) -> list[int]:
    for s in graph.segments:
        if s.orientation == INTERFACE:
            continue
        if (s.a, s.b) == (u, w):
            return list(s.edges)
        if (s.a, s.b) == (w, u):
            return list(reversed(s.edges))
    raise NoCycleError(f"no segment between junctions {u} and {w}")


def rectangle_cycle_edges(graph: ArchGraph, r0: int, r1: int, c0: int, c1: int) -> tuple[list[int], list[int]]:
    """Boundary of the junction rectangle ``[r0, r1] x [c0, c1]`` as (edges, nodes).

    ``nodes[i]`` is the node between ``edges[i]`` and ``edges[i + 1]``.
    """
    m, n = graph.spec.m, graph.spec.n
    if not (0 <= r0 < r1 < m and 0 <= c0 < c1 < n):
        raise NoCycleError(f"rectangle rows {r0}..{r1}, cols {c0}..{c1} lies outside the grid")
    walk = _rectangle_walk(graph, r0, r1, c0, c1)
    edges: list[int] = []
    for i, u in enumerate(walk):
        edges.extend(_segment_between(graph, u, walk[(i + 1) % len(walk)]))
    nodes = [graph.shared_node(edges[i], edges[(i + 1) % len(edges)]) for i in range(len(edges))]
    return edges, nodes


def find_cycle(
    graph: ArchGraph, mover: int, blocked_junction: int, heading: int, chain: int | None = None
) -> Cycle:
    """Smallest rectangle loop that carries ``mover``'s segment across ``blocked_junction``.

    ``heading`` is the edge the mover wants to reach on the far side of the
    junction.  A turn at the junction needs one rectangle; going straight
    through needs two rectangles side by side, picked on the side facing the
    processing-zone junction when both exist.
    """
    graph.check_edge(mover)
    graph.check_edge(heading)
    graph.check_node(blocked_junction)
    if not graph.is_memory(mover) or not graph.is_memory(heading):
        raise NoCycleError("cycles only run through memory edges")
    if not graph.is_major(blocked_junction):
        raise NoCycleError(f"node {blocked_junction} is not a junction")
    seg_in = graph.segments[graph.edge_segment[mover]]
    seg_out = graph.segments[graph.edge_segment[heading]]
    if blocked_junction not in (seg_in.a, seg_in.b) or blocked_junction not in graph.edge_nodes[heading]:
        raise NoCycleError("mover and heading are not on either side of the junction")
    front = seg_in.end_edge(blocked_junction)
    d_in = _direction(graph, seg_in, blocked_junction)
    d_out = _direction(graph, seg_out, blocked_junction)
    r, c = graph.node_coord[blocked_junction]
    m, n = graph.spec.m, graph.spec.n
    rj, cj = graph.node_coord[graph.pz_junction]

    if d_in == d_out:
        raise NoCycleError("heading points back into the mover's own segment")
    if d_in[0] == -d_out[0] and d_in[1] == -d_out[1]:
        if d_in[0] == 0:  # straight horizontal: stack two rectangles above or below
            options = [(r - 1, r), (r, r + 1)]
            if rj > r or (rj == r and r < (m - 1) / 2):
                options.reverse()
            rects = [(r0, r1, c - 1, c + 1) for r0, r1 in options]
        else:  # straight vertical: two rectangles left or right
            options = [(c - 1, c), (c, c + 1)]
            if cj > c or (cj == c and c < (n - 1) / 2):
                options.reverse()
            rects = [(r - 1, r + 1, c0, c1) for c0, c1 in options]
    else:
        dr = d_in[0] or d_out[0]
        dc = d_in[1] or d_out[1]
        rects = [(min(r, r + dr), max(r, r + dr), min(c, c + dc), max(c, c + dc))]

    for r0, r1, c0, c1 in rects:
        if not (0 <= r0 < r1 < m and 0 <= c0 < c1 < n):
            continue
        edges, nodes = rectangle_cycle_edges(graph, r0, r1, c0, c1)
        i = edges.index(front)
        k = len(edges)
        clockwise = True
        if edges[(i + 1) % k] != heading:
            if edges[(i - 1) % k] != heading:
                continue
            edges = edges[::-1]
            nodes = [graph.shared_node(edges[j], edges[(j + 1) % k]) for j in range(k)]
            clockwise = False
        return Cycle(tuple(edges), tuple(nodes), mover_edge=mover, chain=chain, clockwise=clockwise)
    raise NoCycleError(f"no rectangle available at junction {blocked_junction}")


def free_edge_search(graph: ArchGraph, occupied: Iterable[int] | Mapping[int, object], start: int) -> int:
    """Nearest unoccupied memory edge in breadth-first order from node ``start``.

    Edges incident to ``start`` are at depth 1; ties go to the lowest edge id.
    """
    graph.check_node(start)
    taken = set(occupied)
    depth: dict[int, int] = {}
    frontier = [e for e in graph.node_edges[start] if graph.is_memory(e)]
    for e in frontier:
        depth[e] = 1
    queue = deque(sorted(frontier))
    while queue:
        e = queue.popleft()
        for _, e2 in graph.neighbors(e):
            if graph.is_memory(e2) and e2 not in depth:
                depth[e2] = depth[e] + 1
                queue.append(e2)
    free = [e for e in depth if e not in taken]
    if not free:
        raise SaturationError("every memory edge is occupied")
    return min(free, key=lambda e: (depth[e], e))
