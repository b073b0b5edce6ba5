from .dag import DependencyGraph, build_dependency_graph, front_layer, gates_commute
from .generators import FAMILIES, builtin, full_register_access, ghz, graph_state, qft
from .model import Circuit, Gate
from .passes import compile_circuit, decompose_to_native, eliminate_swaps, peephole_optimize
from .qasm import emit_qasm, parse_circuit

__all__ = [
    "Circuit",
    "DependencyGraph",
    "FAMILIES",
    "Gate",
    "build_dependency_graph",
    "builtin",
    "compile_circuit",
    "decompose_to_native",
    "eliminate_swaps",
    "emit_qasm",
    "front_layer",
    "full_register_access",
    "gates_commute",
    "ghz",
    "graph_state",
    "parse_circuit",
    "peephole_optimize",
    "qft",
]
