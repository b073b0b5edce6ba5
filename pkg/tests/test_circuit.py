import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qccd_shuttle.circuit import (
    Circuit,
    build_dependency_graph,
    builtin,
    compile_circuit,
    decompose_to_native,
    eliminate_swaps,
    emit_qasm,
    front_layer,
    gates_commute,
    parse_circuit,
    peephole_optimize,
    qft,
)
from qccd_shuttle.circuit.passes import normalize_angle
from qccd_shuttle.exceptions import QasmSyntaxError, UnsupportedFeatureError, ValidationError

from unitary import circuit_unitary, embed, equal_up_to_phase, gate_matrix, permutation_unitary

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


@st.composite
def native_ops(draw, n=3, max_gates=12):
    ops = []
    for _ in range(draw(st.integers(0, max_gates))):
        kind = draw(st.sampled_from(["RX", "RY", "RZ", "RZZ"]))
        if kind == "RZZ":
            qs = tuple(draw(st.permutations(range(n)))[:2])
        else:
            qs = (draw(st.integers(0, n - 1)),)
        # snap some angles to multiples of pi/2 so merges and removals happen
        a = draw(st.one_of(angles, st.integers(-4, 4).map(lambda k: k * math.pi / 2)))
        ops.append((kind, qs, a))
    return ops


@st.composite
def highlevel_ops(draw, n=3, max_gates=30):
    ops = []
    for _ in range(draw(st.integers(0, max_gates))):
        kind = draw(st.sampled_from(["RX", "RY", "RZ", "RZZ", "H", "CX", "CP", "SWAP"]))
        if kind in ("RZZ", "CX", "CP", "SWAP"):
            qs = tuple(draw(st.permutations(range(n)))[:2])
        else:
            qs = (draw(st.integers(0, n - 1)),)
        a = draw(angles) if kind in ("RX", "RY", "RZ", "RZZ", "CP") else None
        ops.append((kind, qs, a))
    return ops


# -- parsing --------------------------------------------------------------
def test_parse_single_rx():
    c = parse_circuit("qreg q[1]; rx(pi) q[0];")
    assert c.qubit_count == 1 and len(c) == 1
    g = c.gates[0]
    assert (g.kind, g.qubits) == ("RX", (0,)) and g.angle == pytest.approx(math.pi)


def test_parse_empty_body():
    c = parse_circuit('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\n')
    assert c.qubit_count == 3 and len(c) == 0


def test_qft3_round_trip_through_emitter():
    src = qft(3)
    text = emit_qasm(src)
    back = parse_circuit(text)
    assert len(back) == len(src) == sum(line.startswith(("h ", "cp(", "swap ")) for line in text.splitlines())
    assert back.digest() == src.digest()


def test_parse_expressions_and_registers():
    c = parse_circuit("qreg a[1];\nqreg b[2];\ncp(-pi/4) a[0], b[1];\nrzz(2*pi/3) b[0],b[1];\n")
    assert c.qubit_count == 3
    assert c.gates[0].qubits == (0, 2) and c.gates[0].angle == pytest.approx(-math.pi / 4)
    assert c.gates[1].angle == pytest.approx(2 * math.pi / 3)


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("qreg q[1];\nrx(pi q[0];", 2, 1),
        ("qreg q[1];\n  rx(pi) q[3];", 2, 3),
        ("qreg q[2];\nh q[0]", 2, 1),
        ("qreg q[1];\nrx(foo) q[0];", 2, 1),
    ],
)
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(QasmSyntaxError) as err:
        parse_circuit(text)
    assert (err.value.line, err.value.column) == (line, col)


@pytest.mark.parametrize("stmt", ["measure q[0] -> c[0];", "reset q[0];", "ccx q[0],q[1],q[2];", "u3(0,0,0) q[0];"])
def test_unsupported_statements(stmt):
    with pytest.raises(UnsupportedFeatureError):
        parse_circuit("qreg q[3];\ncreg c[3];\n" + stmt)


@settings(max_examples=40, deadline=None)
@given(highlevel_ops())
def test_emit_parse_round_trip(ops):
    c = Circuit.from_ops(3, ops)
    assert parse_circuit(emit_qasm(c)).digest() == c.digest()


def test_gate_validation():
    with pytest.raises(ValidationError):
        Circuit.from_ops(2, [("RZZ", (0, 0), 1.0)])
    with pytest.raises(ValidationError):
        Circuit.from_ops(1, [("RX", (0,), float("inf"))])
    with pytest.raises(ValidationError):
        Circuit.from_ops(1, [("RX", (1,), 1.0)])
    with pytest.raises(ValidationError):
        builtin("nope", 3)


# -- swap elimination -------------------------------------------------------
def test_no_swaps_is_unchanged():
    c = Circuit.from_ops(2, [("H", (0,)), ("CX", (0, 1))])
    out, perm = eliminate_swaps(c)
    assert out.digest() == c.digest() and perm == (0, 1)


def test_trailing_swaps_need_no_relabeling():
    c = qft(4)
    out, perm = eliminate_swaps(c)
    assert all(g.kind != "SWAP" for g in out.gates)
    assert [g.to_list() for g in out.gates] == [g.to_list() for g in qft(4, swaps=False).gates]
    assert perm == (3, 2, 1, 0)


@pytest.mark.parametrize("n", [2, 3])
def test_swap_then_rx_is_relabelled(n):
    c = Circuit.from_ops(n, [("SWAP", (0, 1)), ("RX", (0,), 0.7)])
    out, perm = eliminate_swaps(c)
    assert [g.to_list() for g in out.gates] == [["RX", [1], 0.7]]
    assert equal_up_to_phase(permutation_unitary(perm) @ circuit_unitary(out), circuit_unitary(c))


@settings(max_examples=40, deadline=None)
@given(highlevel_ops())
def test_swap_elimination_preserves_action(ops):
    c = Circuit.from_ops(3, ops)
    out, perm = eliminate_swaps(c)
    assert all(g.kind != "SWAP" for g in out.gates)
    assert equal_up_to_phase(permutation_unitary(perm) @ circuit_unitary(out), circuit_unitary(c))


# -- native decomposition ---------------------------------------------------
def test_native_gate_is_unchanged():
    c = Circuit.from_ops(1, [("RZ", (0,), 0.3)])
    assert decompose_to_native(c).digest() == c.digest()


@pytest.mark.parametrize("theta", [0.1, math.pi / 2, math.pi, -2.5])
def test_cp_rewrite(theta):
    c = Circuit.from_ops(2, [("CP", (0, 1), theta)])
    out = decompose_to_native(c)
    assert sorted(g.kind for g in out.gates) == ["RZ", "RZ", "RZZ"]
    assert equal_up_to_phase(circuit_unitary(out), gate_matrix("CP", theta))


def test_h_rewrite():
    out = decompose_to_native(Circuit.from_ops(1, [("H", (0,))]))
    assert len(out) == 2 and out.is_native()
    assert equal_up_to_phase(circuit_unitary(out), gate_matrix("H"))


@pytest.mark.parametrize("qubits", [(0, 1), (1, 0)])
def test_cx_rewrite(qubits):
    c = Circuit.from_ops(2, [("CX", qubits)])
    out = decompose_to_native(c)
    assert out.is_native() and [g.kind for g in out.gates].count("RZZ") == 1
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c))


def test_swap_has_no_native_rewrite():
    with pytest.raises(UnsupportedFeatureError):
        decompose_to_native(Circuit.from_ops(2, [("SWAP", (0, 1))]))


# -- peephole ---------------------------------------------------------------
def test_rz_merge():
    out = peephole_optimize(Circuit.from_ops(1, [("RZ", (0,), 0.2), ("RZ", (0,), 0.5)]))
    assert len(out) == 1 and out.gates[0].kind == "RZ" and out.gates[0].angle == pytest.approx(0.7)


def test_full_turn_removed():
    assert len(peephole_optimize(Circuit.from_ops(1, [("RX", (0,), 2 * math.pi)]))) == 0


def test_merge_reaching_identity_removes_both():
    ops = [("RY", (0,), 1.0), ("RZZ", (0, 1), 0.4), ("RZZ", (1, 0), -0.4), ("RY", (0,), -1.0)]
    assert len(peephole_optimize(Circuit.from_ops(2, ops))) == 0


def test_no_merge_across_blocking_gate():
    ops = [("RZ", (0,), 0.2), ("RX", (0,), 0.3), ("RZ", (0,), 0.5)]
    assert len(peephole_optimize(Circuit.from_ops(1, ops))) == 3


def test_peephole_rejects_non_native():
    with pytest.raises(UnsupportedFeatureError):
        peephole_optimize(Circuit.from_ops(1, [("H", (0,))]))


def test_normalize_angle():
    assert normalize_angle(2 * math.pi - 1e-12) == 0.0
    assert normalize_angle(-math.pi / 2) == pytest.approx(3 * math.pi / 2)
    assert 0.0 <= normalize_angle(123.4) < 2 * math.pi


@settings(max_examples=60, deadline=None)
@given(native_ops())
def test_peephole_preserves_unitary_and_is_fixpoint(ops):
    c = Circuit.from_ops(3, ops)
    out = peephole_optimize(c)
    assert len(out) <= len(c)
    assert equal_up_to_phase(circuit_unitary(out), circuit_unitary(c))
    assert peephole_optimize(out).digest() == out.digest()
    assert all(normalize_angle(g.angle) != 0.0 for g in out.gates)


@settings(max_examples=60, deadline=None)
@given(highlevel_ops())
def test_pipeline_preserves_unitary(ops):
    c = Circuit.from_ops(3, ops)
    out, perm = compile_circuit(c)
    assert out.is_native()
    assert equal_up_to_phase(permutation_unitary(perm) @ circuit_unitary(out), circuit_unitary(c))


@pytest.mark.parametrize("family", ["fra", "ghz", "graph", "qft"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pipeline_on_builtin_families(family, n):
    c = builtin(family, n)
    out, perm = compile_circuit(c)
    assert equal_up_to_phase(permutation_unitary(perm) @ circuit_unitary(out), circuit_unitary(c))


# -- dependency graph -------------------------------------------------------
def commutator_zero(a, b):
    support = sorted(set(a.qubits) | set(b.qubits))
    n = len(support)
    ma = embed(gate_matrix(a.kind, a.angle), [support.index(q) for q in a.qubits], n)
    mb = embed(gate_matrix(b.kind, b.angle), [support.index(q) for q in b.qubits], n)
    return np.allclose(ma @ mb, mb @ ma, atol=1e-9)


def test_empty_graph():
    dag = build_dependency_graph(Circuit(2))
    assert len(dag) == 0 and front_layer(dag) == set()


def test_diagonal_pair_has_no_edge():
    c = Circuit.from_ops(2, [("RZ", (0,), 0.4), ("RZZ", (0, 1), 0.9)])
    assert build_dependency_graph(c).edges() == []
    assert commutator_zero(*c.gates)


def test_rx_then_rz_has_edge():
    c = Circuit.from_ops(1, [("RX", (0,), 0.4), ("RZ", (0,), 0.9)])
    assert build_dependency_graph(c).edges() == [(0, 1)]
    assert not commutator_zero(*c.gates)


def test_linear_chain_front():
    c = Circuit.from_ops(1, [("RX", (0,), 0.1), ("RY", (0,), 0.2), ("RX", (0,), 0.3)])
    assert front_layer(build_dependency_graph(c)) == {0}


def brute_force_front(circuit):
    """Gates with no earlier non-commuting gate on a shared qubit, by matrix commutators."""
    out = set()
    for j, b in enumerate(circuit.gates):
        blocked = any(
            set(a.qubits) & set(b.qubits) and not commutator_zero(a, b) for a in circuit.gates[:j]
        )
        if not blocked:
            out.add(b.id)
    return out


def test_qft3_front_layer():
    native, _ = compile_circuit(qft(3))
    dag = build_dependency_graph(native)
    front = front_layer(dag)
    assert front == brute_force_front(native)
    # one independent starter per qubit at least; diagonal RZs from the CP
    # rewrites commute forward, so some qubits contribute more than one
    starters = {min(g for g in front if q in native.gates[g].qubits) for q in range(3)}
    assert len(starters) == 3
    assert all(len(native.gates[g].qubits) == 1 for g in starters)


@settings(max_examples=60, deadline=None)
@given(native_ops(max_gates=15))
def test_dag_soundness(ops):
    c = Circuit.from_ops(3, ops)
    dag = build_dependency_graph(c)
    edges = set(dag.edges())
    for a, b in edges:
        assert a < b  # acyclic by construction
        assert set(c.gates[a].qubits) & set(c.gates[b].qubits)
    for a, b in itertools.combinations(c.gates, 2):
        if set(a.qubits) & set(b.qubits):
            # edge iff the rules say dependent; an edge-free pair must truly commute
            assert ((a.id, b.id) in edges) == (not gates_commute(a, b))
            if (a.id, b.id) not in edges:
                assert commutator_zero(a, b)
    front = front_layer(dag)
    assert front == {g for g in dag.nodes if dag.pred_count[g] == 0}
    for a, b in itertools.combinations(sorted(front), 2):
        assert commutator_zero(c.gates[a], c.gates[b])


@settings(max_examples=30, deadline=None)
@given(native_ops(max_gates=15), st.randoms(use_true_random=False))
def test_executing_in_dag_order_preserves_unitary(ops, rnd):
    c = Circuit.from_ops(3, ops)
    dag = build_dependency_graph(c)
    order = []
    while len(dag):
        g = rnd.choice(sorted(dag.front))
        order.append(g)
        dag.remove(g)
    reordered = Circuit.from_ops(3, [(c.gates[g].kind, c.gates[g].qubits, c.gates[g].angle) for g in order])
    assert equal_up_to_phase(circuit_unitary(reordered), circuit_unitary(c), tol=1e-9)


def test_remove_requires_front_member():
    c = Circuit.from_ops(1, [("RX", (0,), 0.1), ("RY", (0,), 0.2)])
    dag = build_dependency_graph(c)
    with pytest.raises(ValueError):
        dag.remove(1)
