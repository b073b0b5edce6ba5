"""Independent replay checker for shuttling schedules."""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterable

from ..arch_graph import ArchGraph
from ..circuit.dag import build_dependency_graph
from ..circuit.model import Circuit
from ..placement import IonPlacement

OCCUPANCY = "OCCUPANCY"
JUNCTION_REUSE = "JUNCTION_REUSE"
NON_ADJACENT_MOVE = "NON_ADJACENT_MOVE"
GATE_ORDER = "GATE_ORDER"
GATE_LOCATION = "GATE_LOCATION"
INCOMPLETE = "INCOMPLETE"
RULES = (OCCUPANCY, JUNCTION_REUSE, NON_ADJACENT_MOVE, GATE_ORDER, GATE_LOCATION, INCOMPLETE)


@dataclass(frozen=True)
class Violation:
    step: int
    rule: str
    description: str


@dataclass
class ViolationReport:
    violations: list[Violation] = field(default_factory=list)
    steps_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def add(self, step: int, rule: str, description: str) -> None:
        self.violations.append(Violation(step, rule, description))

    def to_text(self) -> str:
        if self.ok:
            return f"OK: {self.steps_checked} steps, no violations\n"
        return "".join(f"step {v.step} {v.rule}: {v.description}\n" for v in self.violations)

    def to_json(self) -> str:
        data = {"ok": self.ok, "steps_checked": self.steps_checked, "violations": [asdict(v) for v in self.violations]}
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _durations(durations) -> tuple[int, int] | None:
    if durations is None:
        return None
    if hasattr(durations, "duration_1q"):
        return durations.duration_1q, durations.duration_2q
    d1, d2 = durations
    return int(d1), int(d2)


def _step_fields(step) -> tuple[int, list, list, list]:
    if isinstance(step, dict):
        moves = [(m["chain"], m["from"], m["to"]) if isinstance(m, dict) else tuple(m) for m in step["moves"]]
        return step["index"], moves, list(step.get("gates_started", ())), list(step.get("gates_finished", ()))
    return step.index, [tuple(m) for m in step.moves], list(step.gates_started), list(step.gates_finished)


def verify_schedule(
    graph: ArchGraph,
    circuit: Circuit,
    initial: IonPlacement,
    schedule,
    durations=None,
) -> ViolationReport:
    """Replay ``schedule`` and report every rule it breaks.

    Parameters
    ----------
    schedule
        A :class:`~qccd_shuttle.scheduler.Schedule`, or any iterable of steps
        (objects or dicts with ``moves``, ``gates_started``, ``gates_finished``).
    durations
        Optional ``(one_qubit, two_qubit)`` step counts (or a scheduler
        config); when given, every gate must run for exactly that long.
    """
    report = ViolationReport()
    dur = _durations(durations)
    steps = list(getattr(schedule, "steps", schedule))
    pe = graph.processing_edge
    gates = {g.id: g for g in circuit.gates}
    dag = build_dependency_graph(circuit)
    preds: dict[int, set[int]] = defaultdict(set)
    for a, b_ in dag.edges():
        preds[b_].add(a)

    pos = dict(initial.positions)
    load: dict[int, int] = defaultdict(int)
    for c, e in pos.items():
        if not 0 <= e < graph.num_edges:
            report.add(-1, OCCUPANCY, f"chain {c} starts on unknown edge {e}")
            continue
        load[e] += 1
    for e, k in sorted(load.items()):
        if k > graph.capacity(e):
            report.add(-1, OCCUPANCY, f"edge {e} starts with {k} chains")

    started: dict[int, int] = {}
    finished: dict[int, int] = {}
    active: int | None = None

    for t, step in enumerate(steps):
        report.steps_checked += 1
        index, moves, g_started, g_finished = _step_fields(step)
        locked = active is not None
        start_pos = dict(pos)
        paths: dict[int, list[int]] = {}
        bad_chain: set[int] = set()
        for chain, src, dst in moves:
            if chain not in pos:
                report.add(t, NON_ADJACENT_MOVE, f"unknown chain {chain}")
                continue
            if chain in bad_chain:
                continue
            cur = paths[chain][-1] if chain in paths else pos[chain]
            if src != cur:
                report.add(t, NON_ADJACENT_MOVE, f"chain {chain} moves from edge {src} but is on edge {cur}")
                bad_chain.add(chain)
                continue
            if not (isinstance(dst, int) and 0 <= dst < graph.num_edges) or not graph.move_allowed(src, dst):
                report.add(t, NON_ADJACENT_MOVE, f"chain {chain} cannot move from edge {src} to edge {dst}")
                bad_chain.add(chain)
                continue
            if locked and pe in (src, dst):
                report.add(t, GATE_LOCATION, f"chain {chain} uses the processing edge while gate {active} runs")
            paths.setdefault(chain, [src]).append(dst)

        crossers: dict[int, list[int]] = defaultdict(list)
        minor_dirs: dict[int, set[tuple[int, int]]] = defaultdict(set)
        for chain, path in sorted(paths.items()):
            majors = 0
            for e1, e2 in zip(path, path[1:]):
                node = graph.shared_node(e1, e2)
                if graph.is_major(node):
                    majors += 1
                    crossers[node].append(chain)
                else:
                    minor_dirs[node].add((e1, e2))
            if majors > 1:
                report.add(t, JUNCTION_REUSE, f"chain {chain} crosses {majors} junctions in one step")
        for node, chains in sorted(crossers.items()):
            if len(chains) > 1:
                report.add(t, JUNCTION_REUSE, f"junction {node} crossed by chains {chains}")
        for node, dirs in sorted(minor_dirs.items()):
            if len(dirs) > 1:
                report.add(t, OCCUPANCY, f"chains swap through node {node}")

        starts: dict[int, list[int]] = defaultdict(list)
        for c, e in start_pos.items():
            starts[e].append(c)
        for a, pa in sorted(paths.items()):
            for i in range(1, len(pa)):
                for b_ in starts.get(pa[i], ()):
                    if b_ == a:
                        continue
                    pb = paths.get(b_, [start_pos[b_]])
                    tail = pa[i:]
                    if pb[: len(tail)] != tail or (len(pb) <= len(tail) and pa[-1] != pe):
                        report.add(t, OCCUPANCY, f"chain {a} overtakes chain {b_} on edge {pa[i]}")

        for chain, path in paths.items():
            pos[chain] = path[-1]
        load = defaultdict(int)
        for e in pos.values():
            load[e] += 1
        for e, k in sorted(load.items()):
            if k > graph.capacity(e):
                report.add(t, OCCUPANCY, f"edge {e} holds {k} chains (capacity {graph.capacity(e)})")

        for gid in g_started:
            if gid not in gates:
                report.add(t, GATE_ORDER, f"unknown gate {gid} started")
                continue
            if gid in started:
                report.add(t, GATE_ORDER, f"gate {gid} started twice")
                continue
            waiting = sorted(p for p in preds[gid] if p not in finished or finished[p] >= t)
            if waiting:
                report.add(t, GATE_ORDER, f"gate {gid} starts before predecessors {waiting} finished")
            if active is not None:
                report.add(t, GATE_LOCATION, f"gate {gid} overlaps running gate {active}")
            off = [q for q in gates[gid].qubits if pos.get(q) != pe]
            if off:
                report.add(t, GATE_LOCATION, f"gate {gid} starts with chains {off} outside the processing edge")
            started[gid] = t
            active = gid
        for gid in g_finished:
            if gid not in gates:
                report.add(t, GATE_ORDER, f"unknown gate {gid} finished")
                continue
            if gid not in started:
                report.add(t, GATE_ORDER, f"gate {gid} finished without starting")
                continue
            if gid in finished:
                report.add(t, GATE_ORDER, f"gate {gid} finished twice")
                continue
            off = [q for q in gates[gid].qubits if pos.get(q) != pe]
            if off:
                report.add(t, GATE_LOCATION, f"gate {gid} finishes with chains {off} outside the processing edge")
            if dur is not None:
                want = dur[1] if gates[gid].is_two_qubit else dur[0]
                got = t - started[gid] + 1
                if got != want:
                    report.add(t, GATE_ORDER, f"gate {gid} ran {got} steps, expected {want}")
            finished[gid] = t
            if active == gid:
                active = None

    missing = sorted(set(gates) - set(finished))
    if missing:
        shown = ", ".join(map(str, missing[:10])) + (" ..." if len(missing) > 10 else "")
        report.add(len(steps), INCOMPLETE, f"{len(missing)} gates never finished: {shown}")
    return report


def rules_fired(report: ViolationReport) -> Iterable[str]:
    return sorted(report.rules())
