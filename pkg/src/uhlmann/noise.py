"""Calibration ingestion and the noise channels used by the density simulator.

Every gate is followed by a depolarizing channel with the gate's calibrated
error rate and then by T1/T2 relaxation of each addressed qubit for the gate
duration.  Readout error is classical: a row-stochastic confusion matrix per
qubit (row = prepared bit, column = reported bit) applied to sampled bits.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from functools import reduce
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from .circuit.gates import DEFAULT_DURATION_1Q, DEFAULT_DURATION_2Q, Gate, GateKind
from .circuit.ir import Circuit
from .synth.gateset import GateSet

DEFAULT_T1_US = 250.0
DEFAULT_T2_US = 150.0

_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

CALIBRATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["qubits"],
    "properties": {
        "qubits": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "t1_us": {"type": "number", "exclusiveMinimum": 0},
                    "t2_us": {"type": "number", "exclusiveMinimum": 0},
                    "readout": {
                        "type": "array",
                        "minItems": 2,
                        "maxItems": 2,
                        "items": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "items": {"type": "number", "minimum": 0, "maximum": 1},
                        },
                    },
                },
            },
        },
        "gates": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["kind"],
                "properties": {
                    "kind": {"type": "string", "enum": [k.value for k in GateKind if k not in (GateKind.UNITARY, GateKind.BARRIER)]},
                    "qubits": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                    "error": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                    "duration_ns": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class QubitCalibration:
    t1_us: float = DEFAULT_T1_US
    t2_us: float = DEFAULT_T2_US
    readout: tuple = ((1.0, 0.0), (0.0, 1.0))


@dataclass(frozen=True)
class GateCalibration:
    kind: GateKind
    error: float = 0.0
    duration_ns: Optional[float] = None
    qubits: Optional[tuple] = None

    @property
    def arity(self) -> int:
        return 2 if self.kind in (GateKind.CNOT, GateKind.ECR, GateKind.RZZ) else 1

    def duration(self) -> float:
        if self.duration_ns is not None:
            return self.duration_ns
        return DEFAULT_DURATION_1Q if self.arity == 1 else DEFAULT_DURATION_2Q


@dataclass(frozen=True)
class CalibrationData:
    qubits: tuple
    gates: tuple = ()
    gates_given: bool = True

    def __post_init__(self):
        for i, q in enumerate(self.qubits):
            if q.t2_us > 2 * q.t1_us * (1 + 1e-12):
                raise CalibrationError(f"qubits[{i}]: T2={q.t2_us} exceeds 2*T1={2 * q.t1_us}")
            r = np.asarray(q.readout, dtype=float)
            if r.shape != (2, 2) or np.any(r < 0) or not np.allclose(r.sum(axis=1), 1, atol=1e-9):
                raise CalibrationError(f"qubits[{i}].readout: rows must be probability vectors")
        for i, g in enumerate(self.gates):
            if not 0 <= g.error < 1:
                raise CalibrationError(f"gates[{i}].error must lie in [0, 1)")

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def gate(self, kind: GateKind, qubits: Sequence[int] | None = None) -> Optional[GateCalibration]:
        kind = GateKind(kind)
        generic = None
        for g in self.gates:
            if g.kind is not kind:
                continue
            if g.qubits is not None and qubits is not None and tuple(g.qubits) == tuple(qubits):
                return g
            if g.qubits is None:
                generic = g
        if generic is None and not self.gates_given:
            return GateCalibration(kind)
        return generic

    def scaled(self, alpha: float) -> "CalibrationData":
        """All error rates multiplied by ``alpha`` (relaxation rates included)."""
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        qubits = []
        for q in self.qubits:
            r = np.asarray(q.readout, dtype=float)
            off = np.array([r[0, 1], r[1, 0]]) * alpha
            off = np.minimum(off, 0.5)
            readout = ((1 - off[0], off[0]), (off[1], 1 - off[1]))
            t1 = np.inf if alpha == 0 else q.t1_us / alpha
            t2 = np.inf if alpha == 0 else q.t2_us / alpha
            qubits.append(QubitCalibration(t1, t2, readout))
        gates = tuple(replace(g, error=min(g.error * alpha, 0.999)) for g in self.gates)
        return CalibrationData(tuple(qubits), gates, self.gates_given)


def parse_calibration(data: dict) -> CalibrationData:
    try:
        jsonschema.validate(data, CALIBRATION_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise CalibrationError(f"calibration schema violation at {path}: {exc.message}") from None
    qubits = tuple(
        QubitCalibration(
            float(q.get("t1_us", DEFAULT_T1_US)),
            float(q.get("t2_us", DEFAULT_T2_US)),
            tuple(tuple(float(x) for x in row) for row in q.get("readout", ((1, 0), (0, 1)))),
        )
        for q in data["qubits"]
    )
    gates = []
    for i, g in enumerate(data.get("gates", [])):
        kind = GateKind(g["kind"])
        qs = tuple(g["qubits"]) if "qubits" in g else None
        cal = GateCalibration(kind, float(g.get("error", 0.0)), g.get("duration_ns"), qs)
        if qs is not None:
            if len(qs) != cal.arity:
                raise CalibrationError(f"gates[{i}].qubits: {kind.value} acts on {cal.arity} qubit(s)")
            if max(qs) >= len(qubits):
                raise CalibrationError(f"gates[{i}].qubits: qubit {max(qs)} not calibrated")
        gates.append(cal)
    return CalibrationData(qubits, tuple(gates), gates_given="gates" in data)


def load_calibration(path) -> CalibrationData:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CalibrationError(f"{path}: invalid JSON ({exc})") from None
    return parse_calibration(data)


def bundled_calibration(name: str) -> Path:
    """Path of a shipped representative calibration file ('eagle' or 'heron')."""
    fname = {"eagle": "eagle_like.json", "heron": "heron_like.json"}[name]
    return Path(str(resources.files("uhlmann") / "data" / fname))


# -- channels ---------------------------------------------------------------

def depolarizing_channel(p: float, n_qubits: int = 1) -> list[np.ndarray]:
    """Kraus set of the n-qubit depolarizing channel; p=1 is fully depolarizing."""
    if not 0 <= p <= 1:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    d2 = 4**n_qubits
    ops = []
    for idx in itertools.product(range(4), repeat=n_qubits):
        pauli = reduce(np.kron, (_PAULIS[i] for i in idx))
        w = 1 - p * (d2 - 1) / d2 if not any(idx) else p / d2
        if w > 0:
            ops.append(np.sqrt(w) * pauli)
    return ops


def thermal_relaxation(t1: float, t2: float, duration: float) -> list[np.ndarray]:
    """Amplitude damping followed by pure dephasing.

    Populations relax as exp(-t/T1) and coherences as exp(-t/T2); all three
    arguments share one time unit.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    if t1 <= 0 or t2 <= 0 or t2 > 2 * t1 * (1 + 1e-12):
        raise ValueError(f"unphysical relaxation times T1={t1}, T2={t2}")
    gamma = 0.0 if np.isinf(t1) else 1 - np.exp(-duration / t1)
    amp = [
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
    ]
    rate_phi = (0.0 if np.isinf(t2) else 1 / t2) - (0.0 if np.isinf(t1) else 0.5 / t1)
    keep = np.exp(-duration * max(rate_phi, 0.0))
    lam = 1 - keep**2
    phase = [
        np.array([[1, 0], [0, keep]], dtype=complex),
        np.array([[0, 0], [0, np.sqrt(lam)]], dtype=complex),
    ]
    ops = [b @ a for b in phase for a in amp]
    return [k for k in ops if np.abs(k).max() > 0]


def kraus_completeness(kraus: Sequence[np.ndarray]) -> float:
    d = kraus[0].shape[0]
    s = sum(k.conj().T @ k for k in kraus)
    return float(np.abs(s - np.eye(d)).max())


@dataclass(frozen=True)
class GateNoise:
    depolarizing: float
    relaxation: tuple  # ((qubit, kraus list), ...)


@dataclass(frozen=True)
class NoiseModel:
    table: dict
    readout: tuple
    gateset: Optional[str] = None
    _identity_kinds: frozenset = field(default=frozenset({GateKind.BARRIER}))

    @property
    def n_qubits(self) -> int:
        return len(self.readout)

    def channels_for(self, gate: Gate):
        key = (gate.kind, gate.qubits)
        try:
            entry = self.table[key]
        except KeyError:
            raise KeyError(f"noise model has no channel for {gate.kind.value} on {gate.qubits}") from None
        return entry.depolarizing, entry.relaxation

    def validate_for(self, circuit: Circuit) -> None:
        if circuit.n_qubits > self.n_qubits:
            raise ValueError(
                f"noise model covers {self.n_qubits} qubits, circuit uses {circuit.n_qubits}"
            )
        missing = sorted(
            {g.kind.value for g in circuit.gates if g.kind not in self._identity_kinds and (g.kind, g.qubits) not in self.table}
        )
        if missing:
            raise ValueError(f"noise model has no channels for gate kinds {missing}")

    def confusion(self, qubit: int) -> np.ndarray:
        return np.asarray(self.readout[qubit], dtype=float)

    def kraus_sets(self):
        """All compiled Kraus sets, for completeness checks."""
        for (kind, qubits), entry in self.table.items():
            yield (kind, qubits, "depolarizing"), depolarizing_channel(entry.depolarizing, len(qubits))
            for q, kraus in entry.relaxation:
                yield (kind, qubits, f"relaxation[{q}]"), kraus


def build_noise_model(cal: CalibrationData, gateset: GateSet) -> NoiseModel:
    missing = [k.value for k in sorted(gateset.basis, key=lambda k: k.value) if cal.gate(k) is None
               and not any(g.kind is k for g in cal.gates)]
    if missing:
        raise CalibrationError(f"calibration lacks gate kinds required by {gateset.name}: {missing}")
    n = cal.n_qubits
    table = {}
    for kind in gateset.basis:
        arity = 2 if kind in (GateKind.CNOT, GateKind.ECR, GateKind.RZZ) else 1
        for qs in itertools.permutations(range(n), arity):
            g = cal.gate(kind, qs)
            if g is None:
                continue
            dur = g.duration()
            relax = tuple(
                (q, tuple(thermal_relaxation(cal.qubits[q].t1_us * 1e3, cal.qubits[q].t2_us * 1e3, dur)))
                for q in qs
            )
            table[(kind, tuple(qs))] = GateNoise(g.error, relax)
    readout = tuple(q.readout for q in cal.qubits)
    return NoiseModel(table, readout, gateset.name)
