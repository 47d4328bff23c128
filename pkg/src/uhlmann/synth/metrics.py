"""Unitary distance used as the synthesis acceptance measure."""
from __future__ import annotations

import numpy as np


def hs_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Global-phase invariant Hilbert-Schmidt distance sqrt(1 - |Tr(u^+ v)|/N).

    For unitary arguments this equals ||u - e^{i phi} v||_F / sqrt(2N) with the
    optimal phase, which is how it is evaluated: the direct formula loses
    everything below ~1e-8 to cancellation in 1 - |Tr|/N.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    n = u.shape[0]
    tr = np.vdot(v, u)  # Tr(v^+ u)
    phase = tr / abs(tr) if abs(tr) > 0 else 1.0
    d = np.linalg.norm(u - phase * v) / np.sqrt(2 * n)
    return float(min(d, 1.0))


def hs_distance_direct(u: np.ndarray, v: np.ndarray) -> float:
    """Literal sqrt(max(0, 1 - |Tr(u^+ v)|/N)); only good to ~1e-8."""
    n = u.shape[0]
    return float(np.sqrt(max(0.0, 1 - abs(np.trace(u.conj().T @ v)) / n)))
