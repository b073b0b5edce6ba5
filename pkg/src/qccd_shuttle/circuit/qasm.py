"""Reader and writer for the OpenQASM 2 subset used by the scheduler."""
from __future__ import annotations

import ast
import math
import operator
import re

from ..exceptions import QasmSyntaxError, UnsupportedFeatureError
from .model import Circuit, Gate

_GATE_NAMES = {"rx": "RX", "ry": "RY", "rz": "RZ", "rzz": "RZZ", "h": "H", "cx": "CX", "cp": "CP", "swap": "SWAP"}
_IGNORED = {"openqasm", "include", "creg", "barrier"}
_UNSUPPORTED = {"measure", "reset", "if", "gate", "opaque", "u", "u1", "u2", "u3", "cu1", "ccx", "cz", "x", "y", "z"}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_STMT = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*(.*)$", re.S)
_OPERAND = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]\s*$")


def _eval_angle(expr: str, line: int, col: int) -> float:
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError:
        raise QasmSyntaxError(f"bad parameter expression {expr!r}", line, col) from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise QasmSyntaxError(f"unsupported parameter expression {expr!r}", line, col)

    try:
        return ev(tree)
    except ZeroDivisionError:
        raise QasmSyntaxError(f"division by zero in {expr!r}", line, col) from None


def _statements(text: str):
    """Yield (statement, line, column) with comments stripped."""
    text = re.sub(r"//[^\n]*", lambda mt: " " * len(mt.group(0)), text)
    start = 0
    for i, ch in enumerate(text):
        if ch == ";":
            chunk = text[start:i]
            if chunk.strip():
                offset = start + (len(chunk) - len(chunk.lstrip()))
                line = text.count("\n", 0, offset) + 1
                col = offset - (text.rfind("\n", 0, offset) + 1) + 1
                yield chunk.strip(), line, col
            start = i + 1
    rest = text[start:]
    if rest.strip():
        offset = start + (len(rest) - len(rest.lstrip()))
        line = text.count("\n", 0, offset) + 1
        col = offset - (text.rfind("\n", 0, offset) + 1) + 1
        raise QasmSyntaxError("missing ';' at end of statement", line, col)


def parse_circuit(text: str) -> Circuit:
    """Parse OpenQASM 2 source (qreg, rx, ry, rz, rzz, h, cx, cp, swap).

    Several ``qreg`` declarations are concatenated into one index space.
    """
    registers: dict[str, tuple[int, int]] = {}
    total = 0
    ops = []
    for stmt, line, col in _statements(text):
        match = _STMT.match(stmt)
        if not match:
            raise QasmSyntaxError(f"cannot parse statement {stmt!r}", line, col)
        word, params, rest = match.groups()
        key = word.lower()
        if key in _IGNORED:
            continue
        if key == "qreg":
            reg = _OPERAND.match(rest)
            if not reg or params is not None:
                raise QasmSyntaxError(f"malformed qreg declaration {stmt!r}", line, col)
            name, size = reg.group(1), int(reg.group(2))
            if name in registers:
                raise QasmSyntaxError(f"register {name!r} declared twice", line, col)
            registers[name] = (total, size)
            total += size
            continue
        if key in _UNSUPPORTED or key not in _GATE_NAMES:
            raise UnsupportedFeatureError(f"line {line}, column {col}: unsupported statement {word!r}")
        kind = _GATE_NAMES[key]
        qubits = []
        for operand in rest.split(","):
            ref = _OPERAND.match(operand)
            if not ref:
                raise QasmSyntaxError(f"bad operand {operand.strip()!r}", line, col)
            name, index = ref.group(1), int(ref.group(2))
            if name not in registers:
                raise QasmSyntaxError(f"undeclared register {name!r}", line, col)
            base, size = registers[name]
            if index >= size:
                raise QasmSyntaxError(f"index {index} out of range for {name}[{size}]", line, col)
            qubits.append(base + index)
        angle = None
        if kind in ("RX", "RY", "RZ", "RZZ", "CP"):
            if params is None:
                raise QasmSyntaxError(f"{word} needs a parameter", line, col)
            angle = _eval_angle(params, line, col)
        elif params is not None:
            raise QasmSyntaxError(f"{word} takes no parameter", line, col)
        want = 1 if kind in ("RX", "RY", "RZ", "H") else 2
        if len(qubits) != want or len(set(qubits)) != want:
            raise QasmSyntaxError(f"{word} needs {want} distinct operands", line, col)
        ops.append((kind, tuple(qubits), angle))
    return Circuit.from_ops(total, ops)


def emit_qasm(circuit: Circuit) -> str:
    """Inverse of :func:`parse_circuit` (angles written with ``repr`` precision)."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.qubit_count}];"]
    for g in circuit.gates:
        operands = ",".join(f"q[{q}]" for q in g.qubits)
        if g.angle is None:
            lines.append(f"{g.kind.lower()} {operands};")
        else:
            lines.append(f"{g.kind.lower()}({g.angle!r}) {operands};")
    return "\n".join(lines) + "\n"
