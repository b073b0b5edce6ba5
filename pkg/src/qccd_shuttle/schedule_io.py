"""JSON schedule documents: header, per-step records and summary.

Writing is canonical (sorted keys, fixed separators) so identical runs
produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .arch_graph import Cycle, GridSpec
from .circuit.model import Circuit
from .exceptions import ScheduleFormatError, ShuttleError
from .placement import IonPlacement
from .scheduler import Schedule, SchedulerConfig, TimeStep

FORMAT_VERSION = 1


@dataclass
class ScheduleDocument:
    """Everything needed to replay and verify one scheduling run."""

    architecture: GridSpec
    circuit: Circuit
    initial: IonPlacement
    schedule: Schedule
    config: SchedulerConfig = field(default_factory=SchedulerConfig)
    seed: int | None = None

    @property
    def circuit_hash(self) -> str:
        return self.circuit.digest()


def _step_to_dict(step: TimeStep) -> dict:
    return {
        "index": step.index,
        "moves": [{"chain": c, "from": a, "to": b} for c, a, b in step.moves],
        "cycles": [list(cyc.edges) for cyc in step.cycles_rotated],
        "gates_started": list(step.gates_started),
        "gates_finished": list(step.gates_finished),
    }


def document_to_dict(doc: ScheduleDocument) -> dict:
    return {
        "format": FORMAT_VERSION,
        "header": {
            "architecture": doc.architecture.to_dict(),
            "circuit_hash": doc.circuit_hash,
            "seed": doc.seed,
            "config": doc.config.to_dict(),
            "initial_placement": doc.initial.to_dict(),
            "circuit": doc.circuit.to_dict(),
        },
        "steps": [_step_to_dict(s) for s in doc.schedule.steps],
        "summary": doc.schedule.summary(),
    }


def dumps(doc: ScheduleDocument) -> str:
    return json.dumps(document_to_dict(doc), sort_keys=True, indent=1) + "\n"


def _require(obj: Mapping, key: str, where: str) -> Any:
    if not isinstance(obj, Mapping) or key not in obj:
        raise ScheduleFormatError(f"missing {key!r} in {where}")
    return obj[key]


def _int(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScheduleFormatError(f"{where} must be an integer, got {value!r}")
    return value


def _int_list(values, where: str) -> list[int]:
    if not isinstance(values, list):
        raise ScheduleFormatError(f"{where} must be a list")
    return [_int(v, where) for v in values]


def _step_from_dict(data: Mapping, k: int) -> TimeStep:
    where = f"step {k}"
    moves = []
    for m in _require(data, "moves", where):
        moves.append(
            (
                _int(_require(m, "chain", where), f"{where} move chain"),
                _int(_require(m, "from", where), f"{where} move from"),
                _int(_require(m, "to", where), f"{where} move to"),
            )
        )
    cycles = []
    for edges in data.get("cycles", []):
        edges = tuple(_int_list(edges, f"{where} cycle"))
        if not edges:
            raise ScheduleFormatError(f"{where} lists an empty cycle")
        cycles.append(Cycle(edges=edges, nodes=(), mover_edge=edges[0]))
    return TimeStep(
        index=_int(_require(data, "index", where), f"{where} index"),
        moves=moves,
        cycles_rotated=cycles,
        gates_started=_int_list(data.get("gates_started", []), f"{where} gates_started"),
        gates_finished=_int_list(data.get("gates_finished", []), f"{where} gates_finished"),
    )


def document_from_dict(data: Mapping) -> ScheduleDocument:
    header = _require(data, "header", "document")
    try:
        arch = GridSpec.from_dict(_require(header, "architecture", "header"))
        circuit = Circuit.from_dict(_require(header, "circuit", "header"))
        config = SchedulerConfig.from_dict(header.get("config", {}))
        initial = IonPlacement.from_dict(_require(header, "initial_placement", "header"))
    except ScheduleFormatError:
        raise
    except (ShuttleError, TypeError, ValueError, KeyError, AttributeError) as exc:
        raise ScheduleFormatError(f"bad header: {exc}") from exc
    if header.get("circuit_hash") != circuit.digest():
        raise ScheduleFormatError("circuit_hash does not match the embedded circuit")
    seed = header.get("seed")
    if seed is not None:
        seed = _int(seed, "seed")
    steps_data = _require(data, "steps", "document")
    if not isinstance(steps_data, list):
        raise ScheduleFormatError("steps must be a list")
    steps = [_step_from_dict(s, k) for k, s in enumerate(steps_data)]
    summary = data.get("summary", {})
    crossings = {int(c): _int(n, "per_chain_crossings") for c, n in summary.get("per_chain_crossings", {}).items()}
    schedule = Schedule(steps=steps, gate_count=len(circuit.gates), per_chain_crossings=crossings)
    return ScheduleDocument(arch, circuit, initial, schedule, config, seed)


def loads(text: str) -> ScheduleDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(f"not valid JSON: {exc}") from exc
    return document_from_dict(data)


def write_schedule(path: str | Path, doc: ScheduleDocument) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read_schedule(path: str | Path) -> ScheduleDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScheduleFormatError(f"cannot read {path}: {exc}") from exc
    return loads(text)
