"""Exact two-qubit synthesis with the minimal number of CNOTs.

The construction works in the magic basis, where local unitaries become real
orthogonal matrices.  The CNOT count follows from the spectrum of
gamma(U) = u u^T (u = E^+ U E, U normalised to SU(4)):

* gamma = +-I            -> 0 CNOTs
* gamma^2 = -I           -> 1 CNOT
* Tr gamma real          -> 2 CNOTs
* otherwise              -> 3 CNOTs

For each count a fixed entangling core V with the same gamma spectrum is
built; the outer local factors then follow from simultaneously
diagonalising gamma(U) and gamma(V) with real orthogonal matrices.
"""
from __future__ import annotations

import numpy as np

from ..circuit.gates import CNOT_MAT, Gate, GateKind
from ..circuit.ir import Circuit
from ..circuit.statevector import local_unitary
from .metrics import hs_distance
from .onequbit import u3_gate

MAGIC = np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]], dtype=complex
) / np.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

CNOT01 = CNOT_MAT
CNOT10 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

_TOL = 1e-9
# generic real combination used to diagonalise Re and Im of gamma at once
_MIX = 0.6180339887498949


class SynthesisError(RuntimeError):
    pass


def to_su(u: np.ndarray) -> np.ndarray:
    det = np.linalg.det(u)
    return u * np.exp(-1j * np.angle(det) / u.shape[0])


def gamma(u: np.ndarray) -> np.ndarray:
    m = MAGIC_DAG @ to_su(u) @ MAGIC
    return m @ m.T


def num_cnots(u: np.ndarray, tol: float = _TOL) -> int:
    g = gamma(u)
    tr = np.trace(g)
    if abs(abs(tr) - 4) < tol * 4 and abs(tr.imag) < tol * 4:
        return 0
    if np.allclose(g @ g, -np.eye(4), atol=1e-7):
        return 1
    if abs(tr.imag) < 1e-7:
        return 2
    return 3


def split_tensor(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a 4x4 local unitary as A (x) B (A on the first qubit)."""
    t = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(t)
    if s[1] > 1e-6 * max(s[0], 1e-300):
        raise SynthesisError("matrix is not a tensor product")
    a = (uu[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    b = (vh[0, :] * np.sqrt(s[0])).reshape(2, 2)
    # rebalance so both factors are unitary
    na = np.sqrt(abs(np.linalg.det(a)))
    return a / na, b * na


def _real_eigvecs(g: np.ndarray) -> np.ndarray:
    _, p = np.linalg.eigh(g.real + _MIX * g.imag)
    if np.linalg.det(p) < 0:
        p[:, -1] *= -1
    return p


def _sorted_spectrum(g):
    return np.sort_complex(np.round(np.linalg.eigvals(g), 8))


def local_factors(u: np.ndarray, v: np.ndarray):
    """Find A, B, C, D with u = e^{ia} (A (x) B) v (C (x) D).

    ``u`` and ``v`` must be locally equivalent.
    """
    su = to_su(u)
    sv = to_su(v)
    mv = MAGIC_DAG @ sv @ MAGIC
    gv = mv @ mv.T
    # the SU(4) normalisation of u is fixed only up to a power of i, which
    # flips the sign of gamma; pick the one matching v's spectrum
    for k in range(4):
        mu = MAGIC_DAG @ (su * 1j**k) @ MAGIC
        gu = mu @ mu.T
        if np.allclose(_sorted_spectrum(gu), _sorted_spectrum(gv), atol=1e-6):
            break
    else:
        raise SynthesisError("operators are not locally equivalent")
    p = _real_eigvecs(gu)
    q = _real_eigvecs(gv)
    g = p @ q.T
    h = mv.conj().T @ g.T @ mu
    h = h.real
    left = MAGIC @ g @ MAGIC_DAG
    right = MAGIC @ h @ MAGIC_DAG
    a, b = split_tensor(left)
    c, d = split_tensor(right)
    return a, b, c, d


def _core_1(u):
    return [Gate(GateKind.CNOT, (0, 1))]


def _core_2(u):
    g = gamma(u)
    evs = np.linalg.eigvals(g)
    if np.allclose(np.sort(evs.real), [-1, -1, 1, 1], atol=1e-7) and np.allclose(evs.imag, 0, atol=1e-7):
        return [
            Gate(GateKind.CNOT, (1, 0)),
            Gate(GateKind.S, (0,)),
            Gate(GateKind.SX, (1,)),
            Gate(GateKind.CNOT, (1, 0)),
        ]
    x = np.angle(evs[0])
    y = np.angle(evs[1])
    if abs(x + y) < 1e-7:
        y = np.angle(evs[2])
    delta = (x + y) / 2
    phi = (x - y) / 2
    return [
        Gate(GateKind.CNOT, (1, 0)),
        Gate(GateKind.RZ, (0,), (delta,)),
        Gate(GateKind.RX, (1,), (phi,)),
        Gate(GateKind.CNOT, (1, 0)),
    ]


def _core_3(u):
    g = gamma(SWAP @ to_su(u) * np.exp(1j * np.pi / 4))
    angles = np.sort(np.angle(np.linalg.eigvals(g)))
    x, y, z = angles[:3]
    alpha = (x + y) / 2
    beta = (x + z) / 2
    delta = (z + y) / 2
    return [
        Gate(GateKind.CNOT, (1, 0)),
        Gate(GateKind.RZ, (0,), (delta,)),
        Gate(GateKind.RY, (1,), (beta,)),
        Gate(GateKind.CNOT, (0, 1)),
        Gate(GateKind.RY, (1,), (alpha,)),
        Gate(GateKind.CNOT, (1, 0)),
    ]


def _assemble(core: list[Gate], a, b, c, d, qubits) -> Circuit:
    q0, q1 = qubits
    n = max(qubits) + 1
    circ = Circuit(n)
    circ.append(u3_gate(c, q0)).append(u3_gate(d, q1))
    for g in core:
        circ.append(g.on(*(qubits[i] for i in g.qubits)))
    circ.append(u3_gate(a, q0)).append(u3_gate(b, q1))
    return circ


def _local_circuit(core: list[Gate]) -> np.ndarray:
    return local_unitary(core, (0, 1))


def kak_decompose(u: np.ndarray, qubits=(1, 0), verify_tol: float = 1e-10) -> Circuit:
    """Decompose a 4x4 unitary into at most 3 CNOTs and 8 U3 gates.

    The returned circuit acts on ``qubits`` (first = most significant bit of
    ``u``) inside a register just large enough to hold them.  The default
    (1, 0) makes ``unitary_of_circuit`` of the result equal ``u``.
    """
    from .transpile import merge_single_qubit

    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not np.allclose(u.conj().T @ u, np.eye(4), atol=1e-9):
        raise ValueError("kak_decompose needs a 4x4 unitary")
    n = num_cnots(u)
    attempts = [n] + [k for k in (2, 3) if k > n]
    for k in attempts:
        try:
            if k == 0:
                a, b = split_tensor(to_su(u))
                circ = Circuit(max(qubits) + 1)
                circ.append(u3_gate(a, qubits[0])).append(u3_gate(b, qubits[1]))
            else:
                core = {1: _core_1, 2: _core_2, 3: _core_3}[k](u)
                v = _local_circuit(core)
                a, b, c, d = local_factors(u, v)
                circ = _assemble(core, a, b, c, d, qubits)
        except SynthesisError:
            continue
        circ = merge_single_qubit(circ, "generic")
        if hs_distance(local_unitary(circ.gates, qubits), u) <= verify_tol:
            return circ
    raise SynthesisError("two-qubit decomposition failed verification")


def cnot_count(circuit: Circuit) -> int:
    return sum(1 for g in circuit.gates if g.kind is GateKind.CNOT)


def two_cnot_up_to_diagonal(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split u = D @ W with D diagonal and W needing at most two CNOTs.

    D = diag(1, 1, e^{-i psi}, e^{i psi}) is an RZ(2 psi) on the second qubit
    controlled by the first, so it can be merged into a neighbouring block.
    Returns (D, W).
    """
    su = to_su(np.asarray(u, dtype=complex))

    def trace_gamma(psi):
        m = MAGIC_DAG @ (np.diag([1, 1, np.exp(1j * psi), np.exp(-1j * psi)]) @ su) @ MAGIC
        return np.trace(m @ m.T)

    # Tr gamma(Delta(psi) u) = a e^{-i psi} + b e^{i psi}
    f0, f1 = trace_gamma(0.0), trace_gamma(np.pi / 2)
    a = (f0 + 1j * f1) / 2
    b = (f0 - 1j * f1) / 2
    psi = np.arctan2(a.imag + b.imag, a.real - b.real)
    delta = np.diag([1, 1, np.exp(1j * psi), np.exp(-1j * psi)])
    return delta.conj(), delta @ u
