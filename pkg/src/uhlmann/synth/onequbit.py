"""Single-qubit Euler decompositions."""
from __future__ import annotations

import numpy as np

from ..circuit.gates import Gate, GateKind

_TOL = 1e-10


def zyz_angles(u: np.ndarray) -> tuple[float, float, float, float]:
    """Return (theta, phi, lam, alpha) with u = e^{i alpha} RZ(phi) RY(theta) RZ(lam)."""
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    alpha = np.angle(det) / 2
    v = u * np.exp(-1j * alpha)
    a, b = v[0, 0], v[1, 0]
    theta = 2 * np.arctan2(abs(b), abs(a))
    if abs(b) < _TOL:
        plus, minus = -2 * np.angle(a), 0.0
    elif abs(a) < _TOL:
        plus, minus = 0.0, 2 * np.angle(b)
    else:
        plus, minus = -2 * np.angle(a), 2 * np.angle(b)
    phi = (plus + minus) / 2
    lam = (plus - minus) / 2
    return float(theta), float(phi), float(lam), float(alpha)


def u3_params(u: np.ndarray) -> tuple[float, float, float]:
    """U3 angles reproducing ``u`` up to global phase."""
    theta, phi, lam, _ = zyz_angles(u)
    return theta, phi, lam


def u3_gate(u: np.ndarray, qubit: int) -> Gate:
    return Gate(GateKind.U3, (qubit,), u3_params(u))


def wrap_angle(a: float) -> float:
    """Map to (-pi, pi]."""
    a = float(np.mod(a + np.pi, 2 * np.pi) - np.pi)
    return np.pi if a == -np.pi else a


def _is_zero_angle(a: float, tol: float = _TOL) -> bool:
    return abs(wrap_angle(a)) < tol


def _rz(q, a):
    return [] if _is_zero_angle(a) else [Gate(GateKind.RZ, (q,), (wrap_angle(a),))]


def decompose_zsx(u: np.ndarray, qubit: int) -> list[Gate]:
    """RZ/SX/X sequence (Eagle and Heron natives) equal to ``u`` up to phase.

    Uses the fewest SX pulses the polar angle allows: none for diagonal
    unitaries, one for theta = pi/2, X for theta = pi, two otherwise.
    """
    theta, phi, lam, _ = zyz_angles(u)
    if abs(theta) < _TOL:
        return _rz(qubit, phi + lam)
    if abs(theta - np.pi / 2) < _TOL:
        # RY(pi/2) = RZ(pi/2) SX RZ(-pi/2)
        return _rz(qubit, lam - np.pi / 2) + [Gate(GateKind.SX, (qubit,))] + _rz(qubit, phi + np.pi / 2)
    if abs(theta - np.pi) < _TOL:
        # RY(pi) = RZ(pi/2) X RZ(-pi/2)
        return _rz(qubit, lam - np.pi / 2) + [Gate(GateKind.X, (qubit,))] + _rz(qubit, phi + np.pi / 2)
    # U3(theta, phi, lam) = RZ(phi + pi) SX RZ(theta + pi) SX RZ(lam)
    return (
        _rz(qubit, lam)
        + [Gate(GateKind.SX, (qubit,))]
        + _rz(qubit, theta + np.pi)
        + [Gate(GateKind.SX, (qubit,))]
        + _rz(qubit, phi + np.pi)
    )


def decompose_zxz(u: np.ndarray, qubit: int) -> list[Gate]:
    """RZ/RX sequence equal to ``u`` up to phase; SX or X when the angle allows."""
    theta, phi, lam, _ = zyz_angles(u)
    if abs(theta) < _TOL:
        return _rz(qubit, phi + lam)
    # RY(theta) = RZ(pi/2) RX(theta) RZ(-pi/2)
    if abs(theta - np.pi / 2) < _TOL:
        mid = Gate(GateKind.SX, (qubit,))
    elif abs(theta - np.pi) < _TOL:
        mid = Gate(GateKind.X, (qubit,))
    else:
        mid = Gate(GateKind.RX, (qubit,), (theta,))
    return _rz(qubit, lam - np.pi / 2) + [mid] + _rz(qubit, phi + np.pi / 2)
