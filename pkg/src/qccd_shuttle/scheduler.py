"""Time-stepped shuttling schedule generation.

Each time step runs three phases:

1. processing-zone interface: the chain on the exit edge leaves (back to the
   entry edge if it is needed right away, otherwise along a conveyor path into
   memory), chains no longer needed leave the processing edge, the chain on
   the entry edge moves in, and the best-placed queue chain may enter;
2. memory: queued chains slide along their segment for free, then cross one
   junction each, or rotate a rectangle cycle when the way is blocked;
3. gates: the lowest-id ready front-layer gate whose chains all sit on the
   processing edge starts, and the running gate's timer ticks.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from .arch_graph import ArchGraph, Cycle, find_cycle, free_edge_search
from .circuit.dag import DependencyGraph, build_dependency_graph
from .circuit.model import Circuit, Gate
from .exceptions import LivelockError, NoCycleError, SaturationError, ValidationError
from .gate_selection import PriorityQueue, build_priority_queue, eligible_movers
from .placement import IonPlacement

log = logging.getLogger(__name__)

Move = tuple[int, int, int]


@dataclass
class SchedulerConfig:
    """Knobs of the heuristic.

    ``None`` for ``max_queue_len`` means ``pz_capacity + 2``; ``None`` for
    ``max_steps_guard`` means ``50 * gate_count * diameter``.
    """

    duration_1q: int = 1
    duration_2q: int = 1
    max_queue_len: int | None = None
    recompute_queue_each_step: bool = False
    max_steps_guard: int | None = None

    def validate(self) -> "SchedulerConfig":
        for name in ("duration_1q", "duration_2q"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValidationError(f"{name} must be an integer >= 1, got {value!r}", field=name)
        for name in ("max_queue_len", "max_steps_guard"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or isinstance(value, bool) or value < 1):
                raise ValidationError(f"{name} must be a positive integer, got {value!r}", field=name)
        return self

    def duration(self, gate: Gate) -> int:
        return self.duration_2q if gate.is_two_qubit else self.duration_1q

    def queue_len(self, graph: ArchGraph) -> int:
        return self.max_queue_len if self.max_queue_len is not None else graph.pz_capacity + 2

    def guard(self, graph: ArchGraph, gate_count: int) -> int:
        if self.max_steps_guard is not None:
            return self.max_steps_guard
        return max(1, 50 * gate_count * max(1, graph.diameter))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SchedulerConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}", field=sorted(unknown)[0])
        return cls(**dict(data)).validate()


@dataclass
class SystemState:
    positions: dict[int, int]
    dag: DependencyGraph
    queue: PriorityQueue = field(default_factory=PriorityQueue)
    active_gate: tuple[int, int] | None = None
    clock: int = 0
    queue_stale: bool = True
    crossings: dict[int, int] = field(default_factory=dict)

    @property
    def placement(self) -> IonPlacement:
        return IonPlacement(self.positions)

    def snapshot(self) -> dict:
        return {
            "clock": self.clock,
            "positions": dict(sorted(self.positions.items())),
            "remaining_gates": self.dag.nodes,
            "front": sorted(self.dag.front),
            "queue": list(self.queue.chains),
            "active_gate": self.active_gate,
        }


@dataclass
class TimeStep:
    index: int
    moves: list[Move] = field(default_factory=list)
    cycles_rotated: list[Cycle] = field(default_factory=list)
    gates_started: list[int] = field(default_factory=list)
    gates_finished: list[int] = field(default_factory=list)


@dataclass
class Schedule:
    steps: list[TimeStep] = field(default_factory=list)
    gate_count: int = 0
    per_chain_crossings: dict[int, int] = field(default_factory=dict)

    @property
    def T_hat(self) -> int:
        return len(self.steps)

    @property
    def finished_order(self) -> list[int]:
        return [g for s in self.steps for g in s.gates_finished]

    def summary(self) -> dict:
        return {
            "T_hat": self.T_hat,
            "G": self.gate_count,
            "per_chain_crossings": {str(c): n for c, n in sorted(self.per_chain_crossings.items())},
        }


class _StepBuilder:
    """Accumulates the hops of one time step, refusing any that break the movement rules.

    A chain follows a path of adjacent hops per step with at most one
    junction crossing; each junction is crossed once per step; a separator
    node is crossed in one direction only; and a chain entering the edge
    another chain started on must trail that chain's path (no overtaking).
    """

    def __init__(self, graph: ArchGraph, positions: Mapping[int, int], locked: bool):
        self.g = graph
        self.pos = dict(positions)
        self.occ: dict[int, set[int]] = {}
        for c, e in self.pos.items():
            self.occ.setdefault(e, set()).add(c)
        self.start_at = {e: set(cs) for e, cs in self.occ.items()}
        self.paths: dict[int, list[int]] = {}
        self.crossed: set[int] = set()
        self.majors: set[int] = set()
        self.minor_dir: dict[int, tuple[int, int]] = {}
        self.follow: dict[int, list[tuple[int, int]]] = {}
        self.hops: list[Move] = []
        self.locked = locked

    def path(self, chain: int) -> list[int]:
        return self.paths.get(chain) or [self.pos[chain]]

    def occupants(self, edge: int) -> set[int]:
        return self.occ.get(edge, set())

    def free(self, edge: int) -> bool:
        return len(self.occupants(edge)) < self.g.capacity(edge)

    def moved(self, chain: int) -> bool:
        return chain in self.paths

    def hop(self, chain: int, to: int) -> bool:
        return self.group([(chain, to)])

    def group(self, moves: Sequence[tuple[int, int]]) -> bool:
        """Apply simultaneous one-edge moves if all of them together are legal."""
        g = self.g
        chains = [c for c, _ in moves]
        if len(set(chains)) != len(chains):
            return False
        pe = g.processing_edge
        new_majors: set[int] = set()
        new_dirs: dict[int, tuple[int, int]] = {}
        load: dict[int, int] = {}
        for c, to in moves:
            src = self.pos[c]
            if not g.move_allowed(src, to):
                return False
            if self.locked and pe in (src, to):
                return False
            x = g.shared_node(src, to)
            if g.is_major(x):
                if x in self.majors or x in new_majors or c in self.crossed:
                    return False
                new_majors.add(x)
            else:
                d = self.minor_dir.get(x) or new_dirs.get(x)
                if d is not None and d != (src, to):
                    return False
                new_dirs[x] = (src, to)
            load[src] = load.get(src, 0) - 1
            load[to] = load.get(to, 0) + 1
        for e, d in load.items():
            if len(self.occupants(e)) + d > g.capacity(e):
                return False
        tentative = {c: self.path(c) + [to] for c, to in moves}
        new_follow: dict[int, list[tuple[int, int]]] = {}
        for c, to in moves:
            cons = list(self.follow.get(c, ()))
            fresh = [(b, len(tentative[c]) - 1) for b in self.start_at.get(to, ()) if b != c]
            for b, i in cons + fresh:
                suffix = tentative[c][i:]
                if tentative.get(b, self.path(b))[: len(suffix)] != suffix:
                    return False
            if fresh:
                new_follow[c] = fresh
        for c, to in moves:
            src = self.pos[c]
            self.occ[src].discard(c)
        for c, to in moves:
            src = self.pos[c]
            self.occ.setdefault(to, set()).add(c)
            self.pos[c] = to
            self.paths[c] = tentative[c]
            if g.is_major(g.shared_node(src, to)):
                self.crossed.add(c)
            self.hops.append((c, src, to))
        self.majors |= new_majors
        self.minor_dir.update(new_dirs)
        for c, cons in new_follow.items():
            self.follow.setdefault(c, []).extend(cons)
        return True


def _occupant(b: _StepBuilder, edge: int) -> int | None:
    cs = b.occupants(edge)
    return min(cs) if cs else None


def _memory_occupied(b: _StepBuilder) -> set[int]:
    return {e for e, cs in b.occ.items() if cs and b.g.is_memory(e)}


def _park_target(b: _StepBuilder, graph: ArchGraph, needed_again: bool) -> int:
    start = graph.pz_junction if needed_again else graph.far_node
    return free_edge_search(graph, _memory_occupied(b), start)


def _conveyor(
    b: _StepBuilder, graph: ArchGraph, chain: int, target: int, queued: Iterable[int] = ()
) -> list[tuple[int, int]]:
    """One-edge shifts carrying ``chain`` from the exit edge towards ``target``.

    The first memory edge is chosen so the shifted block displaces as few
    queued chains (then chains at all) as possible; the route continues on a
    shortest path from there.
    """
    start = b.pos[chain]
    costs = graph._costs_from(target)
    queued = set(queued)
    best = None
    for x, e2 in graph.neighbors(start):
        if not graph.is_memory(e2) or not graph.move_allowed(start, e2):
            continue
        crossings = costs[e2][0] + (1 if graph.is_major(x) else 0)
        path = [start] + graph.shortest_path(e2, target)
        moves = []
        carrier = chain
        for e in path[1:]:
            moves.append((carrier, e))
            nxt = _occupant(b, e)
            if nxt is None:
                break
            carrier = nxt
        pushed = [c for c, _ in moves[1:]]
        key = (sum(c in queued for c in pushed), len(pushed), crossings, e2)
        if best is None or key < best[0]:
            best = (key, moves)
    return best[1] if best else []


def processing_zone_transit(state: SystemState, graph: ArchGraph, needed_again: bool) -> list[Move]:
    """Conveyor moves that clear the exit edge into memory.

    The free edge is the breadth-first nearest one from the interface
    junction when the chain is needed again, else from the junction farthest
    from it.  Only the occupied block in front of the exiting chain shifts.
    """
    b = _StepBuilder(graph, state.positions, locked=False)
    chain = _occupant(b, graph.exit_edge)
    if chain is None:
        raise ValidationError("no chain on the exit edge", field="state")
    moves = _conveyor(b, graph, chain, _park_target(b, graph, needed_again), state.queue.chains)
    return [(c, b.pos[c], to) for c, to in moves]


def _find_entrant(b: _StepBuilder, graph: ArchGraph, movers: Iterable[int]) -> tuple[int, list[int]] | None:
    """First mover one junction from the entry edge with a clear slide to the junction."""
    en = graph.entry_edge
    for c in movers:
        e = b.pos[c]
        if not graph.is_memory(e) or graph.entry_distance[e] != 1:
            continue
        path = graph.shortest_path(e, en)
        if all(not b.occupants(x) for x in path[1:-1]):
            return c, path[1:]
    return None


def _interface_phase(state: SystemState, graph: ArchGraph, b: _StepBuilder, movers: list[int]) -> None:
    en, pe, ex = graph.entry_edge, graph.processing_edge, graph.exit_edge
    cap = graph.pz_capacity
    keep = set(state.queue.chains[:cap])
    locked = b.locked
    w = _occupant(b, en)
    x = _occupant(b, ex)
    evict = sorted(c for c in b.occupants(pe) if c not in keep)
    y = evict[0] if evict else None
    entrant = _find_entrant(b, graph, movers)

    x_mode = None
    if x is not None:
        x_mode = "entry" if x in keep else "conveyor"

    def solve(x_mode: str | None, use_entrant: bool) -> dict[str, bool]:
        ok = {
            "W": w is not None and not locked,
            "Y": y is not None and not locked,
            "X": x_mode is not None,
            "E": use_entrant,
        }
        changed = True
        while changed:
            changed = False
            new = dict(ok)
            p_load = len(b.occupants(pe)) - (1 if ok["Y"] else 0) + 1
            new["W"] = ok["W"] and p_load <= cap
            new["Y"] = ok["Y"] and (x is None or ok["X"])
            entry_clear = w is None or ok["W"]
            if x_mode == "entry":
                new["X"] = ok["X"] and entry_clear
            new["E"] = ok["E"] and entry_clear
            if new != ok:
                ok, changed = new, True
        return ok

    use_entrant = entrant is not None and x_mode != "entry"
    if use_entrant and x_mode == "conveyor":
        ok = solve(None, True)
        if ok["E"]:
            x_mode = None  # the exiting chain yields the junction this step
        else:
            use_entrant = False
    ok = solve(x_mode, use_entrant and x_mode is None)
    if x_mode == "entry" and not ok["X"]:
        x_mode = "conveyor" if ok["Y"] or y is not None else None
        ok = solve(x_mode, False)

    if ok["E"]:
        c, path = entrant
        for e in path[:-1]:
            if not b.hop(c, e):
                ok["E"] = False
                break

    group: list[tuple[int, int]] = []
    if ok["W"]:
        group.append((w, pe))
    if ok["Y"]:
        group.append((y, ex))
    if ok["X"] and x_mode == "entry":
        group.append((x, en))
    elif ok["X"] and x_mode == "conveyor":
        park = _park_target(b, graph, state.dag.chains_needed_later(x))
        group.extend(_conveyor(b, graph, x, park, state.queue.chains))
    if ok["E"]:
        group.append((entrant[0], en))
    if group and not b.group(group):
        log.debug("interface group %s rejected; applying moves one by one", group)
        for mv in group:
            b.hop(*mv)
    if x_mode == "conveyor" and ok["X"] and graph.is_memory(b.pos[x]):
        _slide_towards(b, graph, x, park)
    # chains that just reached the entry edge continue in when there is room
    for c in (x if x_mode == "entry" else None, entrant[0] if ok["E"] else None):
        if c is not None and b.pos[c] == en:
            b.hop(c, pe)


def _slide(b: _StepBuilder, graph: ArchGraph, chain: int) -> bool:
    """Advance ``chain`` across separator nodes towards the entry edge.

    Chains standing in front of it on the same segment are pushed along as a
    train, front chain first.
    """
    en = graph.entry_edge
    if not graph.is_memory(b.pos[chain]):
        return False
    route = [b.pos[chain]]
    while True:
        nxt = graph.next_hop(route[-1], en)
        if graph.is_major(graph.shared_node(route[-1], nxt)):
            break
        route.append(nxt)
    moved = False
    train = [(i, min(b.occupants(e))) for i, e in enumerate(route) if b.occupants(e)]
    for i, c in reversed(train):
        while i + 1 < len(route) and b.hop(c, route[i + 1]):
            i += 1
            moved = True
    return moved


def _slide_towards(b: _StepBuilder, graph: ArchGraph, chain: int, target: int) -> None:
    """Free separator-node hops of ``chain`` along its route to ``target``."""
    while b.pos[chain] != target:
        nxt = graph.next_hop(b.pos[chain], target)
        if graph.is_major(graph.shared_node(b.pos[chain], nxt)) or not b.hop(chain, nxt):
            return


def _junction_ahead(b: _StepBuilder, graph: ArchGraph, edge: int) -> tuple[int, int, int, bool]:
    """(front edge, junction, edge beyond it, clear) along the route to the entry edge."""
    en = graph.entry_edge
    cur = edge
    clear = True
    while True:
        nxt = graph.next_hop(cur, en)
        node = graph.shared_node(cur, nxt)
        if graph.is_major(node):
            return cur, node, nxt, clear
        if b.occupants(nxt):
            clear = False
        cur = nxt


def resolve_cycle_conflicts(
    proposals: Sequence[tuple[Cycle, int]],
    queue: PriorityQueue | Sequence[int],
    used_junctions: Iterable[int] = (),
) -> list[Cycle]:
    """Greedy by queue rank: keep a cycle iff it shares no edge with a kept one
    and none of its junctions is taken by a plain crossing."""
    order = list(queue)
    rank = {c: i for i, c in enumerate(order)}
    taken_nodes = set(used_junctions)
    taken_edges: set[int] = set()
    kept: list[Cycle] = []
    for cyc, chain in sorted(proposals, key=lambda p: (rank.get(p[1], len(order)), p[1])):
        if taken_edges & set(cyc.edges) or taken_nodes & set(cyc.nodes):
            continue
        kept.append(cyc)
        taken_edges |= set(cyc.edges)
    return kept


def _majors(graph: ArchGraph, cyc: Cycle) -> set[int]:
    return {x for x in cyc.nodes if graph.is_major(x)}


def _memory_phase(
    state: SystemState, graph: ArchGraph, b: _StepBuilder, movers: list[int], step: TimeStep
) -> None:
    en, pe, j = graph.entry_edge, graph.processing_edge, graph.pz_junction
    dist = graph.entry_distance
    mem_movers = [c for c in movers if graph.is_memory(b.pos[c])]
    rank = {c: i for i, c in enumerate(state.queue.chains)}

    changed = True
    while changed:
        changed = False
        for c in mem_movers:
            if _slide(b, graph, c):
                changed = True

    accepted: list[tuple[Cycle, int]] = []
    for c in mem_movers:
        if c in b.crossed or not graph.is_memory(b.pos[c]):
            continue
        front, node, beyond, clear = _junction_ahead(b, graph, b.pos[c])
        if clear and b.pos[c] == front and node not in b.majors and b.free(beyond):
            if b.hop(c, beyond):
                if beyond == en:
                    b.hop(c, pe)
                else:
                    _slide(b, graph, c)
                continue
        heading = beyond
        if beyond == en:
            other = _occupant(b, front)
            if other is None or other == c:
                continue  # waiting for the entry edge to clear
            heading = min(e for e in graph.node_edges[j] if graph.is_memory(e) and e != front)
        try:
            cyc = find_cycle(graph, b.pos[c], node, heading, chain=c)
        except NoCycleError:
            continue
        on_cycle = set(cyc.edges)
        if any(dist[cyc.successor(b.pos[q])] > dist[b.pos[q]] for q in state.queue.chains[: rank[c]] if b.pos[q] in on_cycle):
            continue
        # rank-greedy conflict rule; plain crossings already claimed their junctions in b.majors
        if resolve_cycle_conflicts(accepted + [(cyc, c)], state.queue, b.majors - _used_by(accepted, graph))[-1:] != [cyc]:
            continue
        rotation = [(q, cyc.successor(b.pos[q])) for e in cyc.edges for q in sorted(b.occupants(e))]
        if b.group(rotation):
            accepted.append((cyc, c))
            step.cycles_rotated.append(cyc)


def _used_by(accepted: list[tuple[Cycle, int]], graph: ArchGraph) -> set[int]:
    out: set[int] = set()
    for cyc, _ in accepted:
        out |= _majors(graph, cyc)
    return out


def _gate_phase(state: SystemState, graph: ArchGraph, cfg: SchedulerConfig, step: TimeStep) -> None:
    pe = graph.processing_edge
    if state.active_gate is None:
        for gid in sorted(state.dag.front):
            gate = state.dag.gates[gid]
            if all(state.positions[q] == pe for q in gate.qubits):
                state.active_gate = (gid, cfg.duration(gate))
                step.gates_started.append(gid)
                break
    if state.active_gate is not None:
        gid, left = state.active_gate
        left -= 1
        if left == 0:
            state.dag.remove(gid)
            state.active_gate = None
            state.queue_stale = True
            step.gates_finished.append(gid)
        else:
            state.active_gate = (gid, left)


def advance_time_step(state: SystemState, graph: ArchGraph, cfg: SchedulerConfig) -> TimeStep:
    """Run one time step in place on ``state`` and return its record."""
    if state.queue_stale or cfg.recompute_queue_each_step:
        state.queue = build_priority_queue(state.dag, state.placement, graph, cfg.queue_len(graph))
        state.queue_stale = False
    step = TimeStep(index=state.clock)
    b = _StepBuilder(graph, state.positions, locked=state.active_gate is not None)
    movers = eligible_movers(state.queue, state.placement, graph)
    _interface_phase(state, graph, b, movers)
    _memory_phase(state, graph, b, movers, step)
    step.moves = list(b.hops)
    state.positions = b.pos
    for c in b.crossed:
        state.crossings[c] = state.crossings.get(c, 0) + 1
    _gate_phase(state, graph, cfg, step)
    state.clock += 1
    return step


def initial_state(graph: ArchGraph, circuit: Circuit, initial: IonPlacement) -> SystemState:
    initial.validate(graph)
    if circuit.qubit_count > len(initial):
        raise ValidationError(
            f"circuit needs {circuit.qubit_count} chains but the placement has {len(initial)}", field="placement"
        )
    missing = [q for q in range(circuit.qubit_count) if q not in initial.positions]
    if missing:
        raise ValidationError(f"qubit {missing[0]} has no chain in the placement", field="placement")
    return SystemState(positions=dict(initial.positions), dag=build_dependency_graph(circuit))


def run_schedule(
    graph: ArchGraph, circuit: Circuit, initial: IonPlacement, cfg: SchedulerConfig | None = None
) -> Schedule:
    """Schedule every gate of a native ``circuit`` starting from ``initial``.

    Raises
    ------
    ValidationError
        Non-native circuit, too few chains, or two-qubit gates with a
        processing edge that holds a single chain.
    LivelockError
        The step guard was exceeded; the error carries the stuck state.
    SaturationError
        Every memory edge is occupied at the start while gates remain, or a
        chain had to be stored later with no memory edge free.
    """
    cfg = (cfg or SchedulerConfig()).validate()
    if not circuit.is_native():
        raise ValidationError("circuit must be native (run compile_circuit first)", field="circuit")
    if graph.pz_capacity < 2 and any(g.is_two_qubit for g in circuit.gates):
        raise ValidationError("two-qubit gates need pz_capacity >= 2", field="pz_capacity")
    state = initial_state(graph, circuit, initial)
    if circuit.gates and all(initial.occupants(e) for e in graph.memory_edges):
        raise SaturationError("every memory edge is occupied; there is no room to shuttle")
    guard = cfg.guard(graph, len(circuit.gates))
    schedule = Schedule(gate_count=len(circuit.gates))
    while len(state.dag):
        if state.clock >= guard:
            raise LivelockError(f"no completion after {guard} time steps", state=state.snapshot())
        schedule.steps.append(advance_time_step(state, graph, cfg))
    schedule.per_chain_crossings = {c: state.crossings.get(c, 0) for c in sorted(state.positions)}
    return schedule
