"""OpenQASM 3 text export.

Output layout: version line, include, custom gate definitions, register
declarations, then one gate or measurement statement per line.  X and Y
measurements are written as their pre-rotation gates followed by a Z
measurement.
"""
from __future__ import annotations

import numpy as np

from .gates import Gate, GateKind
from .ir import Circuit, lower_measurements

# bodies in terms of stdgates.inc; slot 0 is the first (most significant)
# argument.  ECR_BODY reproduces gates.ECR_MAT up to global phase.
ECR_BODY = (
    ("h", (), (0,)), ("cx", (), (1, 0)), ("rz", (np.pi / 4,), (0,)), ("cx", (), (1, 0)), ("h", (), (0,)),
    ("x", (), (1,)),
    ("h", (), (0,)), ("cx", (), (1, 0)), ("rz", (-np.pi / 4,), (0,)), ("cx", (), (1, 0)), ("h", (), (0,)),
)
RZZ_BODY = (("cx", (), (0, 1)), ("rz", ("theta",), (1,)), ("cx", (), (0, 1)))

_NAMES = {
    GateKind.X: "x", GateKind.Y: "y", GateKind.Z: "z", GateKind.H: "h",
    GateKind.S: "s", GateKind.SDG: "sdg", GateKind.SX: "sx",
    GateKind.RX: "rx", GateKind.RY: "ry", GateKind.RZ: "rz", GateKind.U3: "u3",
    GateKind.CNOT: "cx", GateKind.ECR: "ecr", GateKind.RZZ: "rzz",
}


def _fmt(p) -> str:
    return p if isinstance(p, str) else repr(float(p))


def _definition(name: str, body, params: str = "") -> list[str]:
    slots = "ab"
    head = f"gate {name}{'(' + params + ')' if params else ''} a, b {{"
    lines = [head]
    for g, ps, qs in body:
        arg = f"({', '.join(_fmt(p) for p in ps)})" if ps else ""
        lines.append(f"  {g}{arg} {', '.join(slots[q] for q in qs)};")
    lines.append("}")
    return lines


def _statement(g: Gate) -> str:
    qs = ", ".join(f"q[{q}]" for q in g.qubits)
    if g.kind is GateKind.BARRIER:
        return f"barrier {qs};"
    name = _NAMES[g.kind]
    if g.params:
        return f"{name}({', '.join(_fmt(p) for p in g.params)}) {qs};"
    return f"{name} {qs};"


def to_qasm3(circuit: Circuit) -> str:
    """Serialise ``circuit``; generic unitaries must be synthesised first."""
    if any(g.kind is GateKind.UNITARY for g in circuit.gates):
        raise ValueError("generic unitary gates must be synthesised before export")
    circ = lower_measurements(circuit)
    kinds = {g.kind for g in circ.gates}
    lines = ["OPENQASM 3.0;", 'include "stdgates.inc";']
    if GateKind.ECR in kinds:
        lines += _definition("ecr", ECR_BODY)
    if GateKind.RZZ in kinds:
        lines += _definition("rzz", RZZ_BODY, "theta")
    lines.append(f"qubit[{circ.n_qubits}] q;")
    if circ.measurements:
        lines.append(f"bit[{circ.n_clbits}] c;")
    lines += [_statement(g) for g in circ.gates]
    lines += [f"c[{m.clbit}] = measure q[{m.qubit}];" for m in circ.measurements]
    return "\n".join(lines) + "\n"
