"""Shot sampling and probe expectation values."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .density import DensityMatrixState, apply_unitary_dm
from .gates import gate_matrix
from .ir import Measurement, basis_rotation
from .statevector import StateVector, apply_matrix

State = Union[StateVector, DensityMatrixState]


@dataclass(frozen=True)
class ShotCounts:
    """Histogram of classical bitstrings (clbit 0 is the rightmost character)."""

    counts: Mapping[str, int]
    shots: int
    seed: Optional[int] = None
    n_clbits: int = field(default=1)

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected {self.shots}")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("negative count")

    def bit_counts(self, clbit: int) -> tuple[int, int]:
        """(N0, N1) for one classical bit."""
        n1 = sum(v for k, v in self.counts.items() if k[len(k) - 1 - clbit] == "1")
        return self.shots - n1, n1

    def probabilities(self) -> np.ndarray:
        p = np.zeros(2**self.n_clbits)
        for k, v in self.counts.items():
            p[int(k, 2)] = v
        return p / self.shots


def _rotated(state: State, measurements: Sequence[Measurement]) -> State:
    if isinstance(state, StateVector):
        amps = state.amplitudes
        for m in measurements:
            for kind in basis_rotation(m.basis):
                amps = apply_matrix(amps, gate_matrix(kind), (m.qubit,), state.n_qubits)
        return StateVector(amps)
    n = state.n_qubits
    t = state.matrix.reshape((2,) * (2 * n))
    for m in measurements:
        for kind in basis_rotation(m.basis):
            t = apply_unitary_dm(t, gate_matrix(kind), (m.qubit,), n)
    return DensityMatrixState(t.reshape(2**n, 2**n))


def _confusions(readout, measurements) -> Optional[list[np.ndarray]]:
    if readout is None:
        return None
    if hasattr(readout, "confusion"):
        return [readout.confusion(m.qubit) for m in measurements]
    return [np.asarray(readout.get(m.qubit, np.eye(2)), dtype=float) for m in measurements]


def outcome_distribution(
    state: State,
    measurements: Sequence[Measurement],
    readout=None,
) -> np.ndarray:
    """Exact distribution of the classical register, after readout confusion.

    Entry ``k`` is the probability of the classical word whose bit ``c`` is
    ``(k >> c) & 1``.  ``readout`` is a NoiseModel or a {qubit: confusion}
    mapping with rows indexed by the true bit.
    """
    if not measurements:
        raise ValueError("no measurements")
    clbits = [m.clbit for m in measurements]
    if len(set(clbits)) != len(clbits):
        raise ValueError("two measurements write the same classical bit")
    probs = _rotated(state, measurements).probabilities()
    probs = probs / probs.sum()
    n_cl = max(clbits) + 1
    idx = np.arange(probs.size)
    word = np.zeros(probs.size, dtype=np.int64)
    for m in measurements:
        word |= ((idx >> m.qubit) & 1) << m.clbit
    dist = np.bincount(word, weights=probs, minlength=2**n_cl)
    conf = _confusions(readout, measurements)
    if conf is not None:
        t = dist.reshape((2,) * n_cl)
        for m, c in zip(measurements, conf):
            axis = n_cl - 1 - m.clbit
            t = np.moveaxis(np.tensordot(c.T, t, axes=([1], [axis])), 0, axis)
        dist = t.reshape(-1)
    return np.clip(dist, 0.0, None) / dist.sum()


def sample_counts(
    state: State,
    measurements: Sequence[Measurement],
    shots: int,
    seed: Optional[int] = None,
    readout=None,
) -> ShotCounts:
    """Multinomial sample of the measured register.

    X and Y measurements are rotated onto Z first (H, or S-dagger then H).
    The same seed always gives the same histogram.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    dist = outcome_distribution(state, measurements, readout)
    n_cl = int(round(np.log2(dist.size)))
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, dist)
    counts = {format(k, f"0{n_cl}b"): int(v) for k, v in enumerate(draws) if v}
    return ShotCounts(counts, shots, seed, n_cl)


def _expectation(counts: ShotCounts, clbit: int) -> float:
    if counts.shots == 0:
        raise ValueError("zero shots")
    n0, n1 = counts.bit_counts(clbit)
    return (n0 - n1) / counts.shots


def expectation_xy(counts_x: ShotCounts, counts_y: ShotCounts, probe_clbit: int = 0) -> tuple[float, float]:
    """(<sigma_x>, <sigma_y>) of the probe as (N0 - N1) / N per run."""
    return _expectation(counts_x, probe_clbit), _expectation(counts_y, probe_clbit)


def exact_expectation(state: State, measurement: Measurement, readout=None) -> float:
    """Noise-free-sampling limit of (N0 - N1) / N for one measured qubit."""
    single = Measurement(measurement.qubit, 0, measurement.basis)
    p = outcome_distribution(state, [single], readout)
    return float(p[0] - p[1])


def probe_coherence(state: State, probe: int = 0) -> complex:
    """<sigma_x> + i <sigma_y> of ``probe`` from the reduced density matrix."""
    if isinstance(state, StateVector):
        state = DensityMatrixState.from_statevector(state)
    r = state.reduced([probe])
    return complex(2 * r[1, 0])
