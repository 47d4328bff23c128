"""Density-matrix simulation with per-gate noise channels."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .gates import Gate, GateKind
from .ir import Circuit
from .statevector import StateVector

if TYPE_CHECKING:  # pragma: no cover
    from ..noise import NoiseModel

MAX_DENSITY_QUBITS = 10


@dataclass(frozen=True, eq=False)
class DensityMatrixState:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityMatrixState":
        m = np.zeros((2**n_qubits,) * 2, dtype=complex)
        m[0, 0] = 1
        return cls(m)

    @classmethod
    def from_statevector(cls, sv: StateVector) -> "DensityMatrixState":
        return cls(sv.projector())

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.matrix.shape[0])))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.matrix)), 0.0, None)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def check(self, atol: float = 1e-10, psd_floor: float = -1e-9) -> None:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=atol, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > atol:
            raise ValueError(f"density matrix trace {np.trace(m).real:.3g} != 1")
        if np.linalg.eigvalsh(m).min() < psd_floor:
            raise ValueError("density matrix is not positive semidefinite")

    def reduced(self, keep: Sequence[int]) -> np.ndarray:
        """Reduced density matrix of ``keep`` (big-endian in the order given)."""
        n = self.n_qubits
        t = self.matrix.reshape((2,) * (2 * n))
        rows = [n - 1 - q for q in keep]
        cols = [2 * n - 1 - q for q in keep]
        k = len(keep)
        t = np.moveaxis(t, rows + cols, list(range(2 * n - 2 * k, 2 * n)))
        rest = 2 * n - 2 * k
        d_rest = 2 ** (n - k)
        t = t.reshape(d_rest, d_rest, 2**k, 2**k)
        return np.einsum("iiab->ab", t)


def _row_cols(qubits, n):
    return [n - 1 - q for q in qubits], [2 * n - 1 - q for q in qubits]


def apply_unitary_dm(t: np.ndarray, matrix: np.ndarray, qubits, n: int) -> np.ndarray:
    k = len(qubits)
    m = matrix.reshape((2,) * (2 * k))
    rows, cols = _row_cols(qubits, n)
    t = np.tensordot(m, t, axes=(list(range(k, 2 * k)), rows))
    t = np.moveaxis(t, list(range(k)), rows)
    t = np.tensordot(m.conj(), t, axes=(list(range(k, 2 * k)), cols))
    return np.moveaxis(t, list(range(k)), cols)


def apply_kraus_dm(t: np.ndarray, kraus: Sequence[np.ndarray], qubits, n: int) -> np.ndarray:
    out = np.zeros_like(t)
    for k_op in kraus:
        out += apply_unitary_dm(t, k_op, qubits, n)
    return out


def apply_depolarizing_dm(t: np.ndarray, p: float, qubits, n: int) -> np.ndarray:
    """rho -> (1-p) rho + p * Tr_q(rho) (x) I/d, equal to the Pauli Kraus form."""
    if p == 0:
        return t
    k = len(qubits)
    rows, cols = _row_cols(qubits, n)
    tail = list(range(2 * n - 2 * k, 2 * n))
    moved = np.moveaxis(t, rows + cols, tail)
    shape = moved.shape
    flat = moved.reshape(shape[: 2 * n - 2 * k] + (2**k, 2**k))
    traced = np.trace(flat, axis1=-2, axis2=-1)
    mixed = traced[..., None, None] * (np.eye(2**k) / 2**k)
    flat = (1 - p) * flat + p * mixed
    return np.moveaxis(flat.reshape(shape), tail, rows + cols)


def simulate_density(
    circuit: Circuit,
    noise: Optional["NoiseModel"] = None,
    initial: Optional[DensityMatrixState] = None,
) -> DensityMatrixState:
    """Apply every gate as: unitary, then depolarizing, then relaxation.

    With ``noise=None`` only the unitaries are applied.
    """
    n = circuit.n_qubits
    if n > MAX_DENSITY_QUBITS:
        raise ValueError(f"density simulation limited to {MAX_DENSITY_QUBITS} qubits")
    if noise is not None:
        noise.validate_for(circuit)
    rho = DensityMatrixState.zero(n) if initial is None else initial
    t = rho.matrix.reshape((2,) * (2 * n))
    for g in circuit.gates:
        if g.kind is GateKind.BARRIER:
            continue
        t = apply_unitary_dm(t, g.matrix, g.qubits, n)
        if noise is None:
            continue
        p, relax = noise.channels_for(g)
        t = apply_depolarizing_dm(t, p, g.qubits, n)
        for q, kraus in relax:
            t = apply_kraus_dm(t, kraus, (q,), n)
    dim = 2**n
    return DensityMatrixState(t.reshape(dim, dim))
