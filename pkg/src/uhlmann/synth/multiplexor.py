"""Uniformly controlled (multiplexed) single-axis rotations.

A multiplexed rotation applies R(theta_k) to the target when the controls
hold the value k (first control = most significant bit of k).  The Gray-code
construction needs 2^m CNOTs and 2^m rotations for m controls.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..circuit.gates import Gate, GateKind

_AXIS = {"y": GateKind.RY, "z": GateKind.RZ}


def gray(j: int) -> int:
    return j ^ (j >> 1)


def gray_angles(thetas: Sequence[float]) -> np.ndarray:
    """Rotation angles of the Gray-code sequence reproducing ``thetas``."""
    thetas = np.asarray(thetas, dtype=float)
    n = thetas.size
    if n & (n - 1):
        raise ValueError("number of multiplexed angles must be a power of two")
    k = np.arange(n)
    g = np.array([gray(j) for j in range(n)])
    parity = np.array([[bin(a & b).count("1") & 1 for b in g] for a in k])
    m = 1 - 2 * parity
    return m.T @ thetas / n


def multiplexed_rotation(
    thetas: Sequence[float],
    controls: Sequence[int],
    target: int,
    axis: str = "y",
    drop_last: bool = False,
    tol: float = 0.0,
) -> list[Gate]:
    """Gate list for a multiplexed RY/RZ.

    With ``drop_last`` the final CNOT is omitted, so the list implements
    CNOT(c, target) applied after the multiplexor, where c = controls[0].
    For RY the same holds with CNOT replaced by CZ, which is what the
    Shannon recursion exploits.  Rotations with |angle| <= tol are skipped.
    """
    kind = _AXIS[axis]
    controls = list(controls)
    m = len(controls)
    if len(thetas) != 2**m:
        raise ValueError(f"{m} controls need {2**m} angles, got {len(thetas)}")
    if m == 0:
        return [] if abs(thetas[0]) <= tol else [Gate(kind, (target,), (float(thetas[0]),))]
    phis = gray_angles(thetas)
    n = 2**m
    out: list[Gate] = []
    for j in range(n):
        if abs(phis[j]) > tol:
            out.append(Gate(kind, (target,), (float(phis[j]),)))
        changed = gray(j) ^ gray((j + 1) % n)
        bit = changed.bit_length() - 1
        if drop_last and j == n - 1:
            break
        out.append(Gate(GateKind.CNOT, (controls[m - 1 - bit], target)))
    return out


def multiplexed_matrix(thetas: Sequence[float], axis: str = "y") -> np.ndarray:
    """Reference matrix, target as most significant bit, controls below it."""
    from ..circuit.gates import ry, rz

    rot = ry if axis == "y" else rz
    n = len(thetas)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for k, t in enumerate(thetas):
        r = rot(t)
        for a in range(2):
            for b in range(2):
                out[a * n + k, b * n + k] = r[a, b]
    return out
