"""Gate and circuit containers."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

from ..exceptions import ValidationError

ONE_QUBIT = frozenset({"RX", "RY", "RZ", "H"})
TWO_QUBIT = frozenset({"RZZ", "CX", "CP", "SWAP"})
PARAMETERIZED = frozenset({"RX", "RY", "RZ", "RZZ", "CP"})
NATIVE = frozenset({"RX", "RY", "RZ", "RZZ"})
DIAGONAL = frozenset({"RZ", "RZZ"})
KINDS = ONE_QUBIT | TWO_QUBIT


@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}", field="kind")
        want = 1 if self.kind in ONE_QUBIT else 2
        if len(self.qubits) != want or len(set(self.qubits)) != want:
            raise ValidationError(f"{self.kind} needs {want} distinct qubits, got {self.qubits}", field="qubits")
        if self.kind in PARAMETERIZED:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValidationError(f"{self.kind} needs a finite angle", field="angle")
        elif self.angle is not None:
            raise ValidationError(f"{self.kind} takes no angle", field="angle")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def to_list(self) -> list:
        return [self.kind, list(self.qubits), self.angle]


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.qubit_count < 0:
            raise ValidationError("qubit_count must be non-negative", field="qubit_count")
        last = -1
        for g in self.gates:
            if g.id <= last:
                raise ValidationError("gate ids must be strictly increasing", field="gates")
            last = g.id
            if any(q < 0 or q >= self.qubit_count for q in g.qubits):
                raise ValidationError(f"gate {g.id} touches a qubit outside 0..{self.qubit_count - 1}")

    @classmethod
    def from_ops(cls, qubit_count: int, ops) -> "Circuit":
        """Build from ``(kind, qubits, angle)`` tuples, numbering gates 0..k-1."""
        gates = []
        for i, op in enumerate(ops):
            kind, qubits, *rest = op
            angle = rest[0] if rest else None
            gates.append(Gate(i, kind, tuple(qubits), None if angle is None else float(angle)))
        return cls(qubit_count, tuple(gates))

    def renumbered(self) -> "Circuit":
        return Circuit(self.qubit_count, tuple(replace(g, id=i) for i, g in enumerate(self.gates)))

    def __len__(self) -> int:
        return len(self.gates)

    def is_native(self) -> bool:
        return all(g.kind in NATIVE for g in self.gates)

    def to_dict(self) -> dict:
        return {"qubits": self.qubit_count, "gates": [g.to_list() for g in self.gates]}

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        return cls.from_ops(int(data["qubits"]), [tuple(x) for x in data["gates"]]).renumbered()

    def digest(self) -> str:
        text = repr((self.qubit_count, [(g.kind, g.qubits, g.angle) for g in self.gates]))
        return hashlib.sha256(text.encode()).hexdigest()
