"""Gate families, their matrices and default durations.

Gate matrices use the textbook (big-endian) ordering over the gate's own
qubit list: the first listed qubit is the most significant bit of the local
matrix index.  The full-register state uses the opposite convention (qubit 0
is the least significant bit); the simulators take care of the embedding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

DEFAULT_DURATION_1Q = 35.0
DEFAULT_DURATION_2Q = 300.0
DEFAULT_DURATION_READOUT = 800.0

_SQ2 = 1 / np.sqrt(2)


class GateKind(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDG = "sdg"
    SX = "sx"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    U3 = "u3"
    CNOT = "cx"
    ECR = "ecr"
    RZZ = "rzz"
    UNITARY = "unitary"
    BARRIER = "barrier"


# (arity, number of params); None arity means "taken from the qubit list"
_SIGNATURE = {
    GateKind.X: (1, 0),
    GateKind.Y: (1, 0),
    GateKind.Z: (1, 0),
    GateKind.H: (1, 0),
    GateKind.S: (1, 0),
    GateKind.SDG: (1, 0),
    GateKind.SX: (1, 0),
    GateKind.RX: (1, 1),
    GateKind.RY: (1, 1),
    GateKind.RZ: (1, 1),
    GateKind.U3: (1, 3),
    GateKind.CNOT: (2, 0),
    GateKind.ECR: (2, 0),
    GateKind.RZZ: (2, 1),
    GateKind.UNITARY: (None, 0),
    GateKind.BARRIER: (None, 0),
}

TWO_QUBIT_KINDS = frozenset({GateKind.CNOT, GateKind.ECR, GateKind.RZZ})

X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
Y_MAT = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z_MAT = np.array([[1, 0], [0, -1]], dtype=complex)
H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
S_MAT = np.diag([1, 1j]).astype(complex)
SDG_MAT = np.diag([1, -1j]).astype(complex)
SX_MAT = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)
CNOT_MAT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
# ECR = (IX - XY)/sqrt(2), first factor on the first listed qubit
ECR_MAT = _SQ2 * (np.kron(np.eye(2), X_MAT) - np.kron(X_MAT, Y_MAT))


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def rzz(theta: float) -> np.ndarray:
    return np.diag(np.exp(-0.5j * theta * np.array([1, -1, -1, 1])))


_FIXED = {
    GateKind.X: X_MAT,
    GateKind.Y: Y_MAT,
    GateKind.Z: Z_MAT,
    GateKind.H: H_MAT,
    GateKind.S: S_MAT,
    GateKind.SDG: SDG_MAT,
    GateKind.SX: SX_MAT,
    GateKind.CNOT: CNOT_MAT,
    GateKind.ECR: ECR_MAT,
}
_PARAMETRIC = {
    GateKind.RX: rx,
    GateKind.RY: ry,
    GateKind.RZ: rz,
    GateKind.U3: u3,
    GateKind.RZZ: rzz,
}


def gate_matrix(kind: GateKind, params: Sequence[float] = ()) -> np.ndarray:
    if kind in _FIXED:
        return _FIXED[kind]
    if kind in _PARAMETRIC:
        return _PARAMETRIC[kind](*params)
    raise ValueError(f"gate kind {kind.value!r} has no intrinsic matrix")


def default_duration(kind: GateKind, arity: int) -> float:
    if kind is GateKind.BARRIER:
        return 0.0
    if arity == 1:
        return DEFAULT_DURATION_1Q
    return DEFAULT_DURATION_2Q * (arity - 1)


def is_unitary(m: np.ndarray, atol: float = 1e-12) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol, rtol=0)


@dataclass(frozen=True, eq=False)
class Gate:
    """One operation of a circuit.

    ``matrix`` is filled from ``kind``/``params`` unless the kind is
    ``UNITARY``, in which case it must be supplied.  ``duration`` (ns) falls
    back to the per-family default.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    duration: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        arity, nparams = _SIGNATURE[kind]
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.qubits}")
        if not self.qubits:
            raise ValueError("gate must act on at least one qubit")
        if arity is not None and len(self.qubits) != arity:
            raise ValueError(f"{kind.value} acts on {arity} qubit(s), got {self.qubits}")
        if len(self.params) != nparams:
            raise ValueError(f"{kind.value} takes {nparams} parameter(s), got {self.params}")
        if kind is GateKind.BARRIER:
            mat = None
        elif kind is GateKind.UNITARY:
            if self.matrix is None:
                raise ValueError("generic unitary gate needs a matrix")
            mat = np.array(self.matrix, dtype=complex)
            if mat.shape != (2 ** len(self.qubits),) * 2:
                raise ValueError(f"matrix shape {mat.shape} does not match {len(self.qubits)} qubit(s)")
            if not is_unitary(mat, atol=1e-10):
                raise ValueError("generic gate matrix is not unitary")
        else:
            mat = gate_matrix(kind, self.params)
        if mat is not None:
            mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if self.duration is None:
            object.__setattr__(self, "duration", default_duration(kind, len(self.qubits)))

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def on(self, *qubits: int) -> "Gate":
        """Same operation moved to other qubits."""
        return Gate(self.kind, qubits, self.params, self.matrix, self.duration, self.label)

    def __repr__(self) -> str:
        ps = ", ".join(f"{p:.4g}" for p in self.params)
        lbl = f" {self.label}" if self.label else ""
        return f"Gate({self.kind.value}{'(' + ps + ')' if ps else ''} {list(self.qubits)}{lbl})"
