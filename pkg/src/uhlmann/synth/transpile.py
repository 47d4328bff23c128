"""Lowering of circuits to the native gate set of a device family.

Pipeline: explicit measurement pre-rotations, expansion of every multi-qubit
gate into the family's entangler plus single-qubit gates, then fusion of
each run of single-qubit gates into one matrix that is re-emitted with the
family's Euler form (RZ-SX-RZ-SX-RZ for Eagle, RZ-RX-RZ for Heron, U3 for
the generic set).  Barriers fence the fusion.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from ..circuit.gates import CNOT_MAT, ECR_MAT, X_MAT, Gate, GateKind, rx, ry, rz
from ..circuit.ir import Circuit, lower_measurements
from .gateset import GateSet, get_gateset
from .kak import kak_decompose
from .metrics import hs_distance
from .onequbit import decompose_zsx, decompose_zxz, u3_gate

_ID_TOL = 1e-12


def _emit_u3(u: np.ndarray, q: int) -> list[Gate]:
    return [u3_gate(u, q)]


_EMITTERS: dict[str, Callable[[np.ndarray, int], list[Gate]]] = {
    "generic": _emit_u3,
    "eagle": decompose_zsx,
    "heron": decompose_zxz,
}


def merge_single_qubit(circuit: Circuit, family: str = "generic") -> Circuit:
    """Fuse maximal runs of single-qubit gates and re-emit them natively.

    Runs equal to the identity up to phase are dropped.
    """
    emit = _EMITTERS[family]
    out = Circuit(circuit.n_qubits)
    pending: dict[int, np.ndarray] = {}

    def flush(qs):
        for q in qs:
            m = pending.pop(q, None)
            if m is not None and hs_distance(m, np.eye(2)) > _ID_TOL:
                out.extend(emit(m, q))

    for g in circuit.gates:
        if g.kind is not GateKind.BARRIER and g.arity == 1:
            q = g.qubits[0]
            pending[q] = g.matrix @ pending.get(q, np.eye(2, dtype=complex))
            continue
        flush(g.qubits)
        out.append(g)
    flush(sorted(pending))
    for m in circuit.measurements:
        out.measure(m.qubit, m.clbit, m.basis)
    return out


@lru_cache(maxsize=None)
def _locals(source: str, dest: str):
    """Single-qubit factors with source = (a (x) b) dest (c (x) d) up to phase.

    ECR = (I (x) X) exp(-i pi/4 X (x) Z), CNOT ~ (RZ(pi/2) (x) RX(pi/2))
    exp(i pi/4 Z (x) X), and RY(pi/2) on both qubits maps Z (x) X to -X (x) Z.
    """
    q = ry(np.pi / 2)
    a = rz(np.pi / 2) @ q.conj().T
    b = rx(np.pi / 2) @ q.conj().T @ X_MAT
    c = d = q
    if (source, dest) == ("ecr", "cx"):
        a, b, c, d = a.conj().T, b.conj().T, c.conj().T, d.conj().T
    mats = {"cx": CNOT_MAT, "ecr": ECR_MAT}
    check = np.kron(a, b) @ mats[dest] @ np.kron(c, d)
    if hs_distance(check, mats[source]) > 1e-12:
        raise RuntimeError(f"{source}->{dest} identity failed")
    return a, b, c, d


def swap_entangler(gate: Gate, dest: GateKind) -> list[Gate]:
    """Rewrite a CNOT as ECR (or the reverse) with fixed local rotations."""
    a, b, c, d = _locals(gate.kind.value, dest.value)
    q0, q1 = gate.qubits
    return [
        Gate(GateKind.UNITARY, (q0,), matrix=c),
        Gate(GateKind.UNITARY, (q1,), matrix=d),
        Gate(dest, (q0, q1)),
        Gate(GateKind.UNITARY, (q0,), matrix=a),
        Gate(GateKind.UNITARY, (q1,), matrix=b),
    ]


def _expand(gate: Gate, gs: GateSet) -> list[Gate]:
    kind = gate.kind
    if kind is GateKind.BARRIER or gate.arity == 1:
        return [gate]
    if kind in gs.basis:
        return [gate]
    if kind in (GateKind.CNOT, GateKind.ECR):
        return swap_entangler(gate, gs.entangler)
    if gate.arity == 2:
        # RZZ on a family without it, or a generic two-qubit block
        circ = kak_decompose(gate.matrix, gate.qubits)
    elif kind is GateKind.UNITARY:
        from .qsd import qsd_decompose

        circ = qsd_decompose(gate.matrix, gate.qubits)
    else:
        raise ValueError(f"cannot convert gate {gate!r}")
    out = []
    for g in circ.gates:
        out += _expand(g, gs)
    return out


def transpile(circuit: Circuit, gateset: GateSet | str) -> Circuit:
    """Rewrite ``circuit`` into the native basis of ``gateset``.

    X/Y measurements become explicit basis rotations followed by Z
    measurements.  The result equals the input up to global phase.
    """
    gs = get_gateset(gateset) if isinstance(gateset, str) else gateset
    lowered = lower_measurements(circuit)
    expanded = Circuit(circuit.n_qubits)
    for g in lowered.gates:
        expanded.extend(_expand(g, gs))
    for m in lowered.measurements:
        expanded.measure(m.qubit, m.clbit, m.basis)
    out = merge_single_qubit(expanded, gs.name)
    bad = {g.kind for g in out.gates if g.kind is not GateKind.BARRIER} - gs.basis
    if bad:
        raise ValueError(f"transpilation left non-native gates {sorted(k.value for k in bad)}")
    return out
