"""Two-qubit encoding of a spin-1 and assembly of the trace-estimation circuit.

A spin-1 lives in the triplet sector of two qubits.  The unitary ``M`` maps
computational amplitudes to the physical basis ordered as
(singlet, |1,1>, |1,0>, |1,-1>), so a triplet operator A acts on the two
qubits as M^dag diag(1, A) M and never touches the singlet.

Register layout of the full circuit: qubit 0 is the probe, qubits 1-2 hold
the system and qubits 3-4 the ancilla (one qubit each for spin-1/2).
Multi-qubit local matrices list their first qubit as the most significant
bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuit.gates import DEFAULT_DURATION_1Q, Gate, GateKind, is_unitary
from .circuit.ir import Circuit
from .circuit.sampling import ShotCounts, expectation_xy
from .spinsys import (
    IndeterminatePhaseError,
    SpinParams,
    angular_momentum,
    hermitian_exp,
    physical_purification,
    state_at,
    uhlmann_process,
)
from .synth.approx import SynthesisConfig, TemplateCache
from .synth.gateset import GateSet

_R = 1 / np.sqrt(2)
SINGLET = np.array([0, _R, -_R, 0])
METHODS = ("naive", "optimized")
PREP_METHODS = ("arbitrary", "shannon")
PROBE = 0


# -- basis map -------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BasisMap:
    m: np.ndarray

    @property
    def triplet_images(self) -> np.ndarray:
        """4x3 matrix whose columns are |1,1>, |1,0>, |1,-1> in the computational basis."""
        return self.m.conj().T[:, 1:]


def m_matrix() -> BasisMap:
    m = np.array(
        [
            [0, _R, -_R, 0],
            [1, 0, 0, 0],
            [0, _R, _R, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )
    return BasisMap(m)


@dataclass(frozen=True, eq=False)
class EmbeddedOperator:
    triplet_block: np.ndarray
    full: np.ndarray


def embed_triplet(a: np.ndarray) -> EmbeddedOperator:
    """Lift a 3x3 triplet unitary to the two-qubit space, identity on the singlet."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (3, 3) or not is_unitary(a, atol=1e-10):
        raise ValueError("embed_triplet needs a 3x3 unitary")
    m = m_matrix().m
    block = np.eye(4, dtype=complex)
    block[1:, 1:] = a
    return EmbeddedOperator(a, m.conj().T @ block @ m)


def two_qubit_ry(theta: float) -> np.ndarray:
    """Spin-1 rotation exp(-i theta Jy) on the two-qubit encoding, in closed form."""
    c, s = np.cos(theta), np.sin(theta)
    r = s / 2
    return np.array(
        [
            [(1 + c) / 2, -r, -r, (1 - c) / 2],
            [r, (1 + c) / 2, -(1 - c) / 2, -r],
            [r, -(1 - c) / 2, (1 + c) / 2, -r],
            [(1 - c) / 2, r, r, (1 + c) / 2],
        ],
        dtype=complex,
    )


def controlled(u: np.ndarray) -> np.ndarray:
    """blockdiag(I, u): the control is the most significant (probe) qubit."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or not is_unitary(u, atol=1e-10):
        raise ValueError("controlled needs a unitary matrix")
    d = u.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[d:, d:] = u
    return out


# -- state preparation -----------------------------------------------------
@dataclass(frozen=True, eq=False)
class StatePrepSpec:
    """Real non-negative target amplitudes (big-endian) and a preparation method.

    With ``triplet_only`` the target must lie in the triplet (x) triplet
    subspace of a 4-qubit register.
    """

    target: np.ndarray
    method: str = "shannon"
    triplet_only: bool = False

    def __post_init__(self):
        t = np.asarray(self.target)
        if np.iscomplexobj(t):
            if np.abs(t.imag).max() > 1e-12:
                raise ValueError("target amplitudes must be real")
            t = t.real
        t = t.astype(float)
        n = int(round(np.log2(t.size))) if t.size else -1
        if t.ndim != 1 or n < 1 or 2**n != t.size:
            raise ValueError("target length must be a power of two (at least 2)")
        if t.min() < -1e-12:
            raise ValueError("target amplitudes must be non-negative")
        if abs(np.linalg.norm(t) - 1) > 1e-9:
            raise ValueError(f"target is not normalised (norm {np.linalg.norm(t):.6g})")
        if self.method not in PREP_METHODS:
            raise ValueError(f"method must be one of {PREP_METHODS}")
        if self.triplet_only:
            if t.size != 16:
                raise ValueError("triplet targets live on four qubits")
            p = triplet_projector()
            if np.linalg.norm(t - p @ t) > 1e-9:
                raise ValueError("target has weight outside the triplet (x) triplet subspace")
        object.__setattr__(self, "target", np.clip(t, 0.0, None))

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.target.size)))


def triplet_projector() -> np.ndarray:
    t3 = m_matrix().triplet_images.real
    p = t3 @ t3.T
    return np.kron(p, p)


def purified_target(temperature: float, j: float = 1.0, omega0: float = 1.0) -> np.ndarray:
    """System (x) ancilla purification as computational amplitudes, big-endian.

    Spin-1/2 gives 4 amplitudes (m = +1/2 -> |0>); spin-1 gives 16, with each
    spin embedded through the triplet images.
    """
    st = state_at(SpinParams(j, omega0), temperature)
    w = physical_purification(st)
    if np.abs(w.imag).max() > 1e-12:
        raise ValueError("purification is not real in the computational basis")
    w = w.real
    if st.dim == 2:
        return w
    t3 = m_matrix().triplet_images.real
    return np.kron(t3, t3) @ w


def _tree_angles(target: np.ndarray) -> list[np.ndarray]:
    """RY angles per level; level l holds 2^l angles indexed by the prefix."""
    n = int(round(np.log2(target.size)))
    probs = target**2
    out = []
    for level in range(n):
        blocks = probs.reshape(2**level, 2, -1).sum(axis=2)
        out.append(2 * np.arctan2(np.sqrt(blocks[:, 1]), np.sqrt(blocks[:, 0])))
    return out


def _controlled_ry_pair(phi: float, control: int, target: int) -> list[Gate]:
    return [
        Gate(GateKind.RY, (target,), (phi / 2,)),
        Gate(GateKind.CNOT, (control, target)),
        Gate(GateKind.RY, (target,), (-phi / 2,)),
        Gate(GateKind.CNOT, (control, target)),
    ]


def multi_controlled_ry(theta: float, controls: Sequence[int], target: int) -> list[Gate]:
    """RY(theta) on ``target`` when every control is |1>, by the Gray-code
    construction: 2^k - 1 singly-controlled RY(+-theta/2^(k-1)) and
    2^k - 2 CNOTs between controls, i.e. 3*2^k - 4 CNOTs in total."""
    k = len(controls)
    if k == 0:
        return [Gate(GateKind.RY, (target,), (theta,))]
    phi = theta / 2 ** (k - 1)
    state = [1 << b for b in range(k)]  # parity content of each control
    out: list[Gate] = []
    prev = 0
    for step in range(1, 2**k):
        code = step ^ (step >> 1)
        high = code.bit_length() - 1
        flipped = (code ^ prev).bit_length() - 1
        if high > 0 and state[high] != code:
            src = flipped if flipped != high else (prev & ~(1 << high)).bit_length() - 1
            out.append(Gate(GateKind.CNOT, (controls[src], controls[high])))
            state[high] ^= 1 << src
        if state[high] != code:
            raise AssertionError("Gray-code parity bookkeeping broke")
        sign = 1 if bin(code).count("1") % 2 else -1
        out += _controlled_ry_pair(sign * phi, controls[high], target)
        prev = code
    # every control ends holding its own bit again
    for h in range(k):
        if state[h] != 1 << h:
            raise AssertionError("controls were not restored")
    return out


def _basis_state_prep(index: int, qubits: Sequence[int]) -> list[Gate]:
    n = len(qubits)
    return [Gate(GateKind.X, (qubits[i],)) for i in range(n) if (index >> (n - 1 - i)) & 1]


def build_state_prep(spec: StatePrepSpec, qubits: Optional[Sequence[int]] = None, n_qubits: Optional[int] = None) -> Circuit:
    """Circuit taking |0...0> to the target; ``qubits[0]`` is the most
    significant bit of the target index (default (n-1, ..., 0)).

    arbitrary: every node of the binary tree is its own multi-controlled RY
    (zero controls selected with X conjugation), no pruning.
    shannon: one uniformly controlled RY per level, 2^n - 2 CNOTs in total.
    """
    t = spec.target
    n = spec.n_qubits
    qubits = tuple(range(n - 1, -1, -1)) if qubits is None else tuple(qubits)
    if len(qubits) != n:
        raise ValueError(f"target needs {n} qubits, got {qubits}")
    circ = Circuit(n_qubits or max(qubits) + 1)
    nonzero = np.flatnonzero(t > 1e-12)
    if nonzero.size == 1:
        return circ.extend(_basis_state_prep(int(nonzero[0]), qubits))
    from .synth.multiplexor import multiplexed_rotation

    for level, angles in enumerate(_tree_angles(t)):
        ctrls = list(qubits[:level])
        tgt = qubits[level]
        if spec.method == "shannon":
            circ.extend(multiplexed_rotation(angles, ctrls, tgt, "y"))
            continue
        for prefix, theta in enumerate(angles):
            flips = [ctrls[i] for i in range(level) if not (prefix >> (level - 1 - i)) & 1]
            circ.extend(Gate(GateKind.X, (q,)) for q in flips)
            circ.extend(multi_controlled_ry(float(theta), ctrls, tgt))
            circ.extend(Gate(GateKind.X, (q,)) for q in flips)
    return circ


# -- full circuit ----------------------------------------------------------
def register_layout(j: float) -> dict:
    if j == 0.5:
        return {"n_qubits": 3, "probe": 0, "system": (1,), "ancilla": (2,)}
    if j == 1:
        return {"n_qubits": 5, "probe": 0, "system": (1, 2), "ancilla": (3, 4)}
    raise ValueError(f"unsupported spin {j}")


@dataclass
class UhlmannBlocks:
    """The three stages of the trace-estimation circuit as separate circuits."""

    prep: Circuit
    uhlmann: Circuit
    meas_x: Circuit
    meas_y: Circuit
    g_exact: complex = 0j
    metadata: dict = field(default_factory=dict)

    def assemble(self, basis: str) -> Circuit:
        meas = self.meas_x if basis == "X" else self.meas_y
        out = self.prep.copy()
        n = out.n_qubits
        out.append(Gate(GateKind.BARRIER, tuple(range(n))))
        out.extend(self.uhlmann.gates)
        out.append(Gate(GateKind.BARRIER, tuple(range(n))))
        out.extend(meas.gates)
        for m in meas.measurements:
            out.measure(m.qubit, m.clbit, m.basis)
        return out


_DEFAULT_CACHE = TemplateCache()


def _replace_unitaries(circ: Circuit, config: SynthesisConfig, cache: TemplateCache) -> Circuit:
    out = Circuit(circ.n_qubits)
    for g in circ.gates:
        if g.kind is not GateKind.UNITARY or g.arity == 1:
            out.append(g)
            continue
        local = cache.synthesize(g.matrix, config)
        # local qubit k is bit k of the matrix index; gate.qubits[0] is the MSB
        qmap = [g.qubits[g.arity - 1 - k] for k in range(g.arity)]
        out.compose(local, qmap)
    return out


def _textbook_qsd(circ: Circuit) -> Circuit:
    from .synth.qsd import qsd_decompose

    out = Circuit(circ.n_qubits)
    for g in circ.gates:
        if g.kind is GateKind.UNITARY and g.arity > 1:
            out.extend(qsd_decompose(g.matrix, g.qubits, optimize=False).gates)
        else:
            out.append(g)
    return out


def build_uhlmann_blocks(
    temperature: float,
    j: float = 1.0,
    method: str = "optimized",
    epsilon: float = 1e-8,
    omega0: float = 1.0,
    cache: Optional[TemplateCache] = None,
    synthesis: Optional[SynthesisConfig] = None,
) -> UhlmannBlocks:
    """Logical circuits of the three stages.

    naive: arbitrary-tree state preparation and the controlled unitaries
    through the plain Shannon decomposition (no CZ folding, no diagonal
    absorption).  optimized: Shannon-cascade preparation and the
    controlled unitaries replaced by approximate synthesis at ``epsilon``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if not 0.01 <= temperature < 1.0:
        raise ValueError("temperature must lie in [0.01, 1)")
    layout = register_layout(j)
    n, probe = layout["n_qubits"], layout["probe"]
    sys_q, anc_q = layout["system"], layout["ancilla"]
    params = SpinParams(j, omega0)
    st = state_at(params, temperature)
    proc = uhlmann_process(st)

    prep_method = "arbitrary" if method == "naive" else "shannon"
    spec = StatePrepSpec(purified_target(temperature, j, omega0), prep_method, triplet_only=(j == 1))
    prep = Circuit(n).append(Gate(GateKind.H, (probe,)))
    prep.compose(build_state_prep(spec, sys_q + anc_q, n))

    uhl = Circuit(n)
    if j == 0.5:
        # Us = exp(-2 pi i Jy) = -I, so its controlled version is Z on the probe
        uhl.append(Gate(GateKind.Z, (probe,)))
        theta = proc.theta_total_ancilla
        uhl.extend(_controlled_ry_pair(theta, probe, anc_q[0]))
    else:
        cus = controlled(embed_triplet(proc.us).full)
        cua = controlled(embed_triplet(proc.ua).full)
        uhl.unitary(cus, (probe,) + sys_q, label="CUs")
        uhl.unitary(cua, (probe,) + anc_q, label="CUa")
        if method == "optimized":
            config = synthesis or SynthesisConfig(epsilon=epsilon)
            uhl = _replace_unitaries(uhl, config, cache if cache is not None else _DEFAULT_CACHE)
        else:
            uhl = _textbook_qsd(uhl)

    meas_x = Circuit(n).measure(probe, 0, "X")
    meas_y = Circuit(n).measure(probe, 0, "Y")
    from .spinsys import loschmidt_amplitude

    return UhlmannBlocks(
        prep, uhl, meas_x, meas_y, loschmidt_amplitude(st, proc),
        {"T": temperature, "j": j, "method": method, "eta": proc.eta},
    )


def build_uhlmann_circuit(
    temperature: float,
    j: float = 1.0,
    method: str = "optimized",
    dd: bool = False,
    epsilon: float = 1e-8,
    **kw,
) -> tuple[Circuit, Circuit]:
    """(circuit measuring the probe in X, circuit measuring it in Y)."""
    blocks = build_uhlmann_blocks(temperature, j, method, epsilon, **kw)
    cx, cy = blocks.assemble("X"), blocks.assemble("Y")
    if dd:
        cx, cy = insert_xy4(cx), insert_xy4(cy)
    return cx, cy


# -- dynamical decoupling --------------------------------------------------
def _xy4(q: int, gateset: Optional[GateSet], duration: float) -> list[Gate]:
    x = Gate(GateKind.X, (q,), duration=duration)
    if gateset is None or GateKind.Y in gateset.basis:
        y = [Gate(GateKind.Y, (q,), duration=duration)]
    else:
        # Y = i X Z: a virtual RZ(pi) followed by X
        y = [Gate(GateKind.RZ, (q,), (np.pi,), duration=0.0), x]
    return [x] + y + [x] + y


def idle_windows(circuit: Circuit) -> list[tuple[int, int, float, float]]:
    """ASAP idle windows as (qubit, index of the gate before, start, end).

    Only windows between two operations on a qubit count, plus the stretch
    between a measured qubit's last gate and the terminal measurements.
    """
    n = circuit.n_qubits
    free = [0.0] * n
    last_end: list[Optional[float]] = [None] * n
    last_idx: list[Optional[int]] = [None] * n
    windows = []
    for i, g in enumerate(circuit.gates):
        start = max(free[q] for q in g.qubits)
        if g.kind is GateKind.BARRIER:
            for q in g.qubits:
                free[q] = start
            continue
        for q in g.qubits:
            if last_end[q] is not None and start > last_end[q]:
                windows.append((q, last_idx[q], last_end[q], start))
        end = start + g.duration
        for q in g.qubits:
            free[q] = end
            last_end[q] = end
            last_idx[q] = i
    makespan = max(free)
    for m in circuit.measurements:
        q = m.qubit
        if last_end[q] is not None and makespan > last_end[q]:
            windows.append((q, last_idx[q], last_end[q], makespan))
    return windows


def insert_xy4(circuit: Circuit, gateset: Optional[GateSet] = None, pulse_duration: float = DEFAULT_DURATION_1Q) -> Circuit:
    """One X-Y-X-Y block at the start of every idle window longer than four
    pulses.  XYXY = -I, so the circuit unitary changes only by a global phase."""
    after: dict[int, list[Gate]] = {}
    for q, idx, start, end in idle_windows(circuit):
        if end - start > 4 * pulse_duration:
            after.setdefault(idx, []).extend(_xy4(q, gateset, pulse_duration))
    out = Circuit(circuit.n_qubits)
    for i, g in enumerate(circuit.gates):
        out.append(g)
        out.extend(after.get(i, []))
    for m in circuit.measurements:
        out.measure(m.qubit, m.clbit, m.basis)
    return out


# -- phase readout ---------------------------------------------------------
def phase_from_counts(counts_x: ShotCounts, counts_y: ShotCounts, probe_clbit: int = 0, n_sigma: float = 3.0) -> float:
    """arg(<sigma_x> + i <sigma_y>) in (-pi, pi].

    Raises IndeterminatePhaseError when both expectations are within
    ``n_sigma`` shot-noise standard deviations (1/sqrt(N)) of zero.
    """
    sx, sy = expectation_xy(counts_x, counts_y, probe_clbit)
    if abs(sx) < n_sigma / np.sqrt(counts_x.shots) and abs(sy) < n_sigma / np.sqrt(counts_y.shots):
        raise IndeterminatePhaseError(
            f"<sx>={sx:.4f}, <sy>={sy:.4f} both below the {n_sigma:g}-sigma shot-noise floor"
        )
    return phase_from_expectations(sx, sy)


def phase_from_expectations(sx: float, sy: float) -> float:
    a = float(np.arctan2(sy, sx))
    return np.pi if a <= -np.pi + 1e-15 else a


def spin_one_rotation(theta: float) -> np.ndarray:
    """exp(-i theta Jy) for spin 1 in the (m = 1, 0, -1) basis."""
    return hermitian_exp(angular_momentum(1).jy, theta)
