"""Exact state-vector simulation (qubit 0 = least significant bit)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import Gate, GateKind
from .ir import Circuit

MAX_STATEVECTOR_QUBITS = 20
MAX_UNITARY_QUBITS = 6


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError("state length must be a power of two")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1
        return cls(amps)

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.amplitudes.size)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def _axes(qubits, n):
    # tensor axis of qubit q when the flat index is reshaped C-order to (2,)*n
    return [n - 1 - q for q in qubits]


def apply_matrix(amps: np.ndarray, matrix: np.ndarray, qubits, n: int) -> np.ndarray:
    """Apply a local (big-endian) matrix to ``qubits`` of a flat n-qubit vector."""
    k = len(qubits)
    psi = amps.reshape((2,) * n)
    m = matrix.reshape((2,) * (2 * k))
    axes = _axes(qubits, n)
    out = np.tensordot(m, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    n = state.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    if gate.kind is GateKind.BARRIER:
        return state
    return StateVector(apply_matrix(state.amplitudes, gate.matrix, gate.qubits, n))


def simulate_statevector(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Run all gates in order; measurements are ignored."""
    if circuit.n_qubits > MAX_STATEVECTOR_QUBITS:
        raise ValueError(f"state-vector simulation limited to {MAX_STATEVECTOR_QUBITS} qubits")
    state = StateVector.zero(circuit.n_qubits) if initial is None else initial
    amps = state.amplitudes
    for g in circuit.gates:
        for q in g.qubits:
            if not 0 <= q < circuit.n_qubits:
                raise IndexError(f"qubit {q} out of range")
        if g.kind is not GateKind.BARRIER:
            amps = apply_matrix(amps, g.matrix, g.qubits, circuit.n_qubits)
    return StateVector(amps)


def embed(matrix: np.ndarray, qubits, n: int) -> np.ndarray:
    """Full 2^n x 2^n operator of a local gate matrix."""
    dim = 2**n
    cols = np.eye(dim, dtype=complex)
    k = len(qubits)
    t = cols.reshape((2,) * n + (dim,))
    m = matrix.reshape((2,) * (2 * k))
    axes = _axes(qubits, n)
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(dim, dim)


def unitary_of_circuit(circuit: Circuit) -> np.ndarray:
    if circuit.measurements:
        raise ValueError("unitary_of_circuit needs a circuit without measurements")
    n = circuit.n_qubits
    if n > MAX_UNITARY_QUBITS:
        raise ValueError(f"unitary construction limited to {MAX_UNITARY_QUBITS} qubits")
    dim = 2**n
    # evolve all basis columns at once: treat the column index as a spectator axis
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in circuit.gates:
        if g.kind is GateKind.BARRIER:
            continue
        k = g.arity
        m = g.matrix.reshape((2,) * (2 * k))
        axes = _axes(g.qubits, n)
        u = np.tensordot(m, u, axes=(list(range(k, 2 * k)), axes))
        u = np.moveaxis(u, list(range(k)), axes)
    return u.reshape(dim, dim)


def local_unitary(gates, order) -> np.ndarray:
    """Matrix of ``gates`` restricted to the qubits in ``order``.

    Unlike :func:`unitary_of_circuit` the result is big-endian: ``order[0]``
    is the most significant bit, matching the local gate-matrix convention.
    """
    order = list(order)
    pos = {q: len(order) - 1 - i for i, q in enumerate(order)}
    relabelled = []
    for g in gates:
        if g.kind is GateKind.BARRIER:
            continue
        try:
            relabelled.append(g.on(*(pos[q] for q in g.qubits)))
        except KeyError:
            raise ValueError(f"gate {g!r} touches a qubit outside {order}") from None
    return unitary_of_circuit(Circuit(len(order), relabelled))
