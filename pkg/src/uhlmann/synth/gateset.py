"""Native gate sets of the two hardware families plus a generic synthesis basis."""
from __future__ import annotations

from dataclasses import dataclass

from ..circuit.gates import GateKind, TWO_QUBIT_KINDS


@dataclass(frozen=True)
class GateSet:
    name: str
    basis: frozenset

    def __post_init__(self):
        if not self.basis:
            raise ValueError("gate set basis is empty")
        if not self.basis & TWO_QUBIT_KINDS:
            raise ValueError(f"gate set {self.name} has no two-qubit entangler")

    def __contains__(self, kind) -> bool:
        return GateKind(kind) in self.basis

    @property
    def entangler(self) -> GateKind:
        return GateKind.CNOT if GateKind.CNOT in self.basis else GateKind.ECR


EAGLE = GateSet("eagle", frozenset({GateKind.ECR, GateKind.RZ, GateKind.X, GateKind.SX}))
HERON = GateSet(
    "heron",
    frozenset({GateKind.RZ, GateKind.RX, GateKind.CNOT, GateKind.SX, GateKind.X, GateKind.RZZ}),
)
GENERIC = GateSet("generic", frozenset({GateKind.U3, GateKind.CNOT}))

GATESETS = {g.name: g for g in (EAGLE, HERON, GENERIC)}


def get_gateset(name: str) -> GateSet:
    try:
        return GATESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown gate set {name!r}; choose from {sorted(GATESETS)}") from None
