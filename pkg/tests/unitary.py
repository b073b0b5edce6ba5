"""Dense-matrix simulation used as an independent oracle in tests."""
import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def rot(pauli, theta):
    return np.cos(theta / 2) * np.eye(pauli.shape[0]) - 1j * np.sin(theta / 2) * pauli


def gate_matrix(kind, angle=None):
    if kind == "RX":
        return rot(X, angle)
    if kind == "RY":
        return rot(Y, angle)
    if kind == "RZ":
        return rot(Z, angle)
    if kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if kind == "RZZ":
        return rot(np.kron(Z, Z), angle)
    # two-qubit matrices below use basis |q0 q1> with q0 the first operand
    if kind == "CX":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if kind == "CP":
        return np.diag([1, 1, 1, np.exp(1j * angle)])
    if kind == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    raise ValueError(kind)


def embed(mat, qubits, n):
    """Full 2^n operator for ``mat`` acting on ``qubits`` (qubit 0 = most significant)."""
    k = len(qubits)
    op = mat.reshape([2] * (2 * k))
    full = np.eye(2 ** n, dtype=complex).reshape([2] * (2 * n))
    # apply op to the output indices of identity
    in_axes = list(range(k, 2 * k))
    out = np.tensordot(op, full, axes=(in_axes, list(qubits)))
    # tensordot puts op's output axes first; move them back into place
    rest = [a for a in range(n) if a not in qubits]
    order = list(qubits) + rest + list(range(n, 2 * n))
    inv = np.argsort(order)
    out = np.transpose(out, inv)
    return out.reshape(2 ** n, 2 ** n)


def circuit_unitary(circuit):
    n = circuit.qubit_count
    u = np.eye(2 ** n, dtype=complex)
    for g in circuit.gates:
        u = embed(gate_matrix(g.kind, g.angle), g.qubits, n) @ u
    return u


def permutation_unitary(perm):
    """Operator moving the state of wire perm[w] onto wire w."""
    n = len(perm)
    dim = 2 ** n
    p = np.zeros((dim, dim), dtype=complex)
    for src in range(dim):
        bits = [(src >> (n - 1 - q)) & 1 for q in range(n)]
        dst_bits = [bits[perm[w]] for w in range(n)]
        dst = 0
        for b in dst_bits:
            dst = (dst << 1) | b
        p[dst, src] = 1
    return p


def equal_up_to_phase(a, b, tol=1e-8):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[idx]) < 1e-12:
        return False
    phase = b[idx] / a[idx]
    phase /= abs(phase)
    return float(np.max(np.abs(a * phase - b))) <= tol


def max_phase_error(a, b):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = b[idx] / a[idx]
    phase /= abs(phase)
    return float(np.max(np.abs(a * phase - b)))
