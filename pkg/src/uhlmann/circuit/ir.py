"""Circuit container."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .gates import Gate, GateKind

BASES = ("X", "Y", "Z")


@dataclass(frozen=True)
class Measurement:
    qubit: int
    clbit: int
    basis: str = "Z"

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"measurement basis must be one of {BASES}, got {self.basis!r}")


@dataclass
class Circuit:
    """Ordered gate list on ``n_qubits`` followed by terminal measurements."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    measurements: list[Measurement] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            self._check(g)
        for m in self.measurements:
            self._check_qubit(m.qubit)

    def _check_qubit(self, q: int):
        if not 0 <= q < self.n_qubits:
            raise IndexError(f"qubit {q} out of range for {self.n_qubits}-qubit circuit")

    def _check(self, gate: Gate):
        for q in gate.qubits:
            self._check_qubit(q)

    # -- building -----------------------------------------------------------
    def append(self, gate: Gate) -> "Circuit":
        if self.measurements:
            raise ValueError("measurements must come last")
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def add(self, kind, qubits: Sequence[int], params: Sequence[float] = (), **kw) -> "Circuit":
        return self.append(Gate(GateKind(kind), tuple(qubits), tuple(params), **kw))

    def unitary(self, matrix: np.ndarray, qubits: Sequence[int], label: str = "") -> "Circuit":
        return self.append(Gate(GateKind.UNITARY, tuple(qubits), matrix=matrix, label=label))

    def measure(self, qubit: int, clbit: int, basis: str = "Z") -> "Circuit":
        self._check_qubit(qubit)
        self.measurements.append(Measurement(qubit, clbit, basis))
        return self

    def compose(self, other: "Circuit", qubit_map: Optional[Sequence[int]] = None) -> "Circuit":
        """Append ``other``'s gates, optionally relabelling its qubits."""
        qmap = list(range(other.n_qubits)) if qubit_map is None else list(qubit_map)
        if len(qmap) != other.n_qubits:
            raise ValueError("qubit map length must match the composed circuit")
        for g in other.gates:
            self.append(g.on(*(qmap[q] for q in g.qubits)))
        for m in other.measurements:
            self.measure(qmap[m.qubit], m.clbit, m.basis)
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.gates), list(self.measurements))

    def without_measurements(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.gates))

    # -- inspection ---------------------------------------------------------
    @property
    def n_clbits(self) -> int:
        return max((m.clbit for m in self.measurements), default=-1) + 1

    def count_ops(self, include_measure: bool = True) -> Counter:
        c = Counter(g.kind.value for g in self.gates if g.kind is not GateKind.BARRIER)
        if include_measure and self.measurements:
            c["measure"] = len(self.measurements)
        return c

    def size(self, include_measure: bool = True) -> int:
        return sum(self.count_ops(include_measure).values())

    def num_two_qubit(self) -> int:
        return sum(1 for g in self.gates if g.arity == 2 and g.kind is not GateKind.BARRIER)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


def basis_rotation(basis: str) -> list[tuple[GateKind, ...]]:
    """Gates (in time order) that map ``basis`` eigenstates onto Z eigenstates."""
    if basis == "X":
        return [GateKind.H]
    if basis == "Y":
        return [GateKind.SDG, GateKind.H]
    return []


def lower_measurements(circuit: Circuit) -> Circuit:
    """Make X/Y measurements explicit: pre-rotation gates plus Z measurement."""
    out = Circuit(circuit.n_qubits, list(circuit.gates))
    for m in circuit.measurements:
        for kind in basis_rotation(m.basis):
            out.append(Gate(kind, (m.qubit,)))
    for m in circuit.measurements:
        out.measure(m.qubit, m.clbit, "Z")
    return out
