"""Quantum Shannon decomposition down to CNOT and single-qubit gates.

The recursion splits an n-qubit unitary with a cosine-sine decomposition
into two block-diagonal factors around a multiplexed RY on the top qubit,
and demultiplexes each block-diagonal factor into two (n-1)-qubit unitaries
around a multiplexed RZ.  Two standard savings are applied:

* the multiplexed RY is built from CZ gates so its last CZ can be folded
  into the neighbouring block-diagonal factor;
* every two-qubit leaf but the last is synthesised only up to a diagonal,
  which commutes through the multiplexors and is absorbed by the next leaf.

For three qubits this gives 20 CNOTs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cossin, schur

from ..circuit.gates import Gate, GateKind, is_unitary
from ..circuit.ir import Circuit
from ..circuit.statevector import local_unitary
from .kak import SynthesisError, kak_decompose, two_cnot_up_to_diagonal
from .metrics import hs_distance
from .multiplexor import multiplexed_rotation
from .onequbit import u3_gate

MAX_QSD_QUBITS = 4
_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass
class _Leaf:
    matrix: np.ndarray  # two-qubit block on the last two positions


@dataclass
class _Mux:
    axis: str
    angles: np.ndarray
    target: int
    controls: tuple[int, ...]
    cz: bool = False


def demultiplex(a1: np.ndarray, a2: np.ndarray):
    """Write blockdiag(a1, a2) = (I (x) V) (D (+) D^+) (I (x) W).

    Returns (V, d, W) with d the diagonal of D.
    """
    t, v = schur(a1 @ a2.conj().T, output="complex")
    lam = np.diag(t)
    d = np.exp(0.5j * np.angle(lam))
    w = d[:, None] * (v.conj().T @ a2)
    return v, d, w


def _items(u: np.ndarray, offset: int, n: int, optimize: bool) -> list:
    if n == 2:
        return [_Leaf(u)]
    half = u.shape[0] // 2
    (u1, u2), theta, (v1h, v2h) = cossin(u, p=half, q=half, separate=True)
    controls = tuple(range(offset + 1, offset + n))
    if optimize:
        # the CZ left over by the multiplexed RY is folded into the left block
        u2 = u2 @ np.kron(_Z, np.eye(half // 2))
    items = _demux_items(v1h, v2h, offset, n, optimize)
    items.append(_Mux("y", 2 * theta, offset, controls, cz=optimize))
    items += _demux_items(u1, u2, offset, n, optimize)
    return items


def _demux_items(a1, a2, offset, n, optimize):
    v, d, w = demultiplex(a1, a2)
    controls = tuple(range(offset + 1, offset + n))
    items = _items(w, offset + 1, n - 1, optimize)
    items.append(_Mux("z", -2 * np.angle(d), offset, controls))
    items += _items(v, offset + 1, n - 1, optimize)
    return items


def _absorb_diagonals(items: list) -> None:
    leaves = [it for it in items if isinstance(it, _Leaf)]
    for cur, nxt in zip(leaves, leaves[1:]):
        diag, w = two_cnot_up_to_diagonal(cur.matrix)
        cur.matrix = w
        nxt.matrix = nxt.matrix @ diag


def _mux_gates(item: _Mux, qubits: Sequence[int]) -> list[Gate]:
    t = qubits[item.target]
    ctrls = [qubits[c] for c in item.controls]
    gates = multiplexed_rotation(item.angles, ctrls, t, item.axis, drop_last=item.cz)
    if not item.cz:
        return gates
    out = []
    for g in gates:
        if g.kind is GateKind.CNOT:
            out += [Gate(GateKind.H, (t,)), g, Gate(GateKind.H, (t,))]
        else:
            out.append(g)
    return out


def qsd_decompose(
    u: np.ndarray,
    qubits: Optional[Sequence[int]] = None,
    optimize: bool = True,
    verify_tol: float = 1e-9,
) -> Circuit:
    """Exact synthesis of a 2^n x 2^n unitary (n <= 4) into U3 + CNOT.

    ``qubits[0]`` carries the most significant bit of ``u``.  By default the
    qubits are (n-1, ..., 0), so ``unitary_of_circuit`` of the result
    reproduces ``u`` directly.
    """
    from .transpile import merge_single_qubit

    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    n = int(round(np.log2(dim)))
    if u.shape != (dim, dim) or 2**n != dim:
        raise ValueError("qsd_decompose needs a square matrix of size 2^n")
    if n > MAX_QSD_QUBITS:
        raise ValueError(f"qsd_decompose supports at most {MAX_QSD_QUBITS} qubits")
    if not is_unitary(u, atol=1e-9):
        raise ValueError("qsd_decompose needs a unitary matrix")
    qubits = tuple(range(n - 1, -1, -1)) if qubits is None else tuple(qubits)
    if len(qubits) != n:
        raise ValueError(f"need {n} qubit labels, got {qubits}")
    circ = Circuit(max(qubits) + 1)
    if n == 1:
        circ.append(u3_gate(u, qubits[0]))
        return circ
    if n == 2:
        return kak_decompose(u, qubits)
    items = _items(u, 0, n, optimize)
    if optimize:
        _absorb_diagonals(items)
    for it in items:
        if isinstance(it, _Leaf):
            circ.extend(kak_decompose(it.matrix, (qubits[n - 2], qubits[n - 1])).gates)
        else:
            circ.extend(_mux_gates(it, qubits))
    circ = merge_single_qubit(circ, "generic")
    dist = hs_distance(local_unitary(circ.gates, qubits), u)
    if dist > verify_tol:
        raise SynthesisError(f"Shannon decomposition failed verification (distance {dist:.2e})")
    return circ
