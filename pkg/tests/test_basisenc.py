import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_unitary
from uhlmann.basisenc import (
    SINGLET,
    StatePrepSpec,
    build_state_prep,
    build_uhlmann_blocks,
    build_uhlmann_circuit,
    controlled,
    embed_triplet,
    idle_windows,
    insert_xy4,
    m_matrix,
    multi_controlled_ry,
    phase_from_counts,
    phase_from_expectations,
    purified_target,
    register_layout,
    spin_one_rotation,
    triplet_projector,
    two_qubit_ry,
)
from uhlmann.circuit import Circuit, GateKind, ShotCounts, simulate_statevector, unitary_of_circuit
from uhlmann.circuit.gates import ry
from uhlmann.circuit.sampling import probe_coherence
from uhlmann.circuit.statevector import local_unitary
from uhlmann.spinsys import IndeterminatePhaseError, SpinParams, loschmidt_at
from uhlmann.synth.metrics import hs_distance

R = 1 / np.sqrt(2)


def test_m_matrix_entries_and_ordering():
    m = m_matrix().m
    assert np.allclose(m.conj().T @ m, np.eye(4), atol=1e-14)
    assert np.allclose(m @ np.array([0, 1, -1, 0]) * R, [1, 0, 0, 0], atol=1e-14)
    assert np.allclose(m @ np.array([1, 0, 0, 0]), [0, 1, 0, 0], atol=1e-14)
    assert np.allclose(m[2], [0, R, R, 0])


def test_embed_identity_and_pi_rotation():
    assert np.allclose(embed_triplet(np.eye(3)).full, np.eye(4), atol=1e-14)
    v = embed_triplet(spin_one_rotation(np.pi)).full
    expected = np.fliplr(np.diag([1.0, -1.0, -1.0, 1.0]))
    assert np.allclose(v, expected, atol=1e-12)


def test_embed_rejects_non_unitary():
    with pytest.raises(ValueError):
        embed_triplet(np.ones((3, 3)))
    with pytest.raises(ValueError):
        embed_triplet(np.eye(4))


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_embedded_operators_fix_singlet(seed):
    a = random_unitary(np.random.default_rng(seed), 3)
    v = embed_triplet(a).full
    assert np.allclose(v @ SINGLET, SINGLET, atol=1e-12)
    assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-12)


def test_two_qubit_ry_matches_embedding():
    for theta in np.random.default_rng(2).uniform(-2 * np.pi, 2 * np.pi, 100):
        assert np.allclose(two_qubit_ry(theta), embed_triplet(spin_one_rotation(theta)).full, atol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 2 * np.pi])
def test_two_qubit_ry_full_turns(theta):
    assert np.allclose(two_qubit_ry(theta), np.eye(4), atol=1e-12)


def test_two_qubit_ry_quarter_turn_entry():
    assert two_qubit_ry(np.pi / 2)[0, 0] == pytest.approx(0.5, abs=1e-12)


@given(st.floats(-7, 7), st.floats(-7, 7))
@settings(max_examples=40, deadline=None)
def test_two_qubit_ry_homomorphism(a, b):
    assert np.allclose(two_qubit_ry(a) @ two_qubit_ry(b), two_qubit_ry(a + b), atol=1e-12)


def test_controlled_blocks():
    assert np.allclose(controlled(np.eye(4)), np.eye(8))
    u = two_qubit_ry(np.pi)
    c = controlled(u)
    rng = np.random.default_rng(0)
    tgt = rng.normal(size=4)
    tgt /= np.linalg.norm(tgt)
    assert np.allclose(c @ np.concatenate([tgt, np.zeros(4)]), np.concatenate([tgt, np.zeros(4)]))
    out = c @ np.eye(8)[4]  # probe |1>, target |00>
    assert out[7] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        controlled(np.ones((2, 2)))


def test_state_prep_spec_validation():
    with pytest.raises(ValueError):
        StatePrepSpec(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        StatePrepSpec(np.array([0.6, -0.8]))
    with pytest.raises(ValueError):
        StatePrepSpec(np.array([1.0, 0, 0]))
    with pytest.raises(ValueError):
        StatePrepSpec(np.array([0.6, 0.8]), method="magic")
    bad = np.zeros(16)
    bad[6] = 1.0  # |0110>: system pair holds a singlet component
    with pytest.raises(ValueError):
        StatePrepSpec(bad, triplet_only=True)


@pytest.mark.parametrize("method", ["arbitrary", "shannon"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_state_prep_reaches_random_target(method, n):
    rng = np.random.default_rng(n)
    t = np.abs(rng.normal(size=2**n))
    t /= np.linalg.norm(t)
    circ = build_state_prep(StatePrepSpec(t, method))
    # default qubit order (n-1, ..., 0) makes the big-endian target the amplitude vector
    amps = simulate_statevector(circ).amplitudes
    assert abs(np.vdot(t, amps)) ** 2 >= 1 - 1e-8


@pytest.mark.parametrize("method", ["arbitrary", "shannon"])
def test_single_amplitude_prep_uses_x_only(method):
    t = np.zeros(16)
    t[0b1001] = 1.0
    circ = build_state_prep(StatePrepSpec(t, method))
    assert {g.kind for g in circ.gates} == {GateKind.X}
    assert simulate_statevector(circ).amplitudes[0b1001] == pytest.approx(1)


@pytest.mark.parametrize("method", ["arbitrary", "shannon"])
def test_uniform_spin_one_prep(method):
    t3 = m_matrix().triplet_images.real
    target = np.kron(t3, t3) @ (np.eye(3).reshape(-1) / np.sqrt(3))
    spec = StatePrepSpec(target, method, triplet_only=True)
    amps = simulate_statevector(build_state_prep(spec, (1, 2, 3, 4), 5)).amplitudes
    reg = local_state(amps, (1, 2, 3, 4))
    assert abs(np.vdot(target, reg)) ** 2 >= 1 - 1e-8
    assert 0.5 * np.abs(np.abs(reg) ** 2 - target**2).sum() <= 1e-8


def local_state(amps, order):
    """Big-endian amplitudes over ``order`` of a state where the other qubits are |0>."""
    n = int(np.log2(amps.size))
    out = np.zeros(2 ** len(order), dtype=complex)
    for k in range(out.size):
        idx = sum(((k >> (len(order) - 1 - i)) & 1) << q for i, q in enumerate(order))
        out[k] = amps[idx]
    assert np.isclose(np.linalg.norm(out), 1.0)
    return out


def test_prep_cnot_counts():
    t = purified_target(0.5)
    arb = build_state_prep(StatePrepSpec(t, "arbitrary", True)).count_ops()
    sh = build_state_prep(StatePrepSpec(t, "shannon", True)).count_ops()
    assert arb["cx"] == sum(2**k * (3 * 2**k - 4) for k in range(1, 4))
    assert sh["cx"] == 2**4 - 2


@pytest.mark.parametrize("k", [1, 2, 3])
def test_multi_controlled_ry(k):
    controls = list(range(1, k + 1))
    gates = multi_controlled_ry(0.77, controls, 0)
    assert sum(g.kind is GateKind.CNOT for g in gates) == 3 * 2**k - 4
    u = local_unitary(gates, controls + [0])
    expected = np.eye(2 ** (k + 1), dtype=complex)
    expected[-2:, -2:] = ry(0.77)
    assert np.allclose(u, expected, atol=1e-12)


def test_triplet_projector_rank():
    p = triplet_projector()
    assert np.allclose(p @ p, p) and round(np.trace(p)) == 9


def test_purified_targets_reduce_to_boltzmann_weights():
    st_half = purified_target(0.3, 0.5)
    assert np.allclose(np.linalg.norm(st_half), 1)
    assert np.count_nonzero(np.abs(st_half) > 1e-14) == 2


@pytest.mark.parametrize("j,n", [(0.5, 3), (1.0, 5)])
def test_register_layout_and_qubit_count(j, n, template_cache):
    assert register_layout(j)["n_qubits"] == n
    cx, cy = build_uhlmann_circuit(0.5, j, cache=template_cache)
    assert cx.n_qubits == n and cy.n_qubits == n
    assert [m.basis for m in cx.measurements] == ["X"]
    assert [m.basis for m in cy.measurements] == ["Y"]
    with pytest.raises(ValueError):
        register_layout(1.5)


@pytest.mark.parametrize("j", [0.5, 1.0])
@pytest.mark.parametrize("method", ["naive", "optimized"])
def test_probe_coherence_equals_loschmidt(j, method, template_cache):
    for t in (0.2, 0.41, 0.75):
        blocks = build_uhlmann_blocks(t, j, method, cache=template_cache)
        c = blocks.prep.copy().extend(blocks.uhlmann.gates)
        sv = simulate_statevector(c)
        assert abs(sv.norm() - 1) < 1e-10
        g = loschmidt_at(SpinParams(j), t)
        assert probe_coherence(sv) == pytest.approx(g, abs=1e-7 if method == "optimized" else 1e-10)


def test_temperature_range_checked():
    with pytest.raises(ValueError):
        build_uhlmann_blocks(1.0)
    with pytest.raises(ValueError):
        build_uhlmann_blocks(0.005)
    with pytest.raises(ValueError):
        build_uhlmann_blocks(0.5, method="fancy")


def test_xy4_leaves_idle_free_circuit_unchanged():
    c = Circuit(1).add(GateKind.X, (0,)).add(GateKind.SX, (0,))
    assert insert_xy4(c).gates == c.gates
    assert idle_windows(c) == []


def test_xy4_single_idle_window():
    c = Circuit(3).add(GateKind.H, (0,)).add(GateKind.CNOT, (1, 2)).add(GateKind.CNOT, (2, 0))
    assert [w[0] for w in idle_windows(c)] == [0]
    out = insert_xy4(c)
    added = out.gates[1:5]
    assert [g.kind for g in added] == [GateKind.X, GateKind.Y, GateKind.X, GateKind.Y]
    assert all(g.qubits == (0,) for g in added)
    assert len(out.gates) == len(c.gates) + 4
    assert hs_distance(unitary_of_circuit(out), unitary_of_circuit(c)) <= 1e-12


@pytest.mark.parametrize("j", [0.5, 1.0])
def test_dd_circuits_unitarily_identical(j, template_cache):
    plain = build_uhlmann_circuit(0.45, j, dd=False, cache=template_cache)
    dd = build_uhlmann_circuit(0.45, j, dd=True, cache=template_cache)
    for a, b in zip(plain, dd):
        assert len(b.gates) > len(a.gates)
        ua = unitary_of_circuit(a.without_measurements())
        ub = unitary_of_circuit(b.without_measurements())
        assert hs_distance(ua, ub) <= 1e-12


def _counts(sigma, shots=2024):
    n0 = int(round(shots * (1 + sigma) / 2))
    return ShotCounts({"0": n0, "1": shots - n0}, shots)


@pytest.mark.parametrize("sx,sy,expected", [(1, 0, 0.0), (-1, 0, np.pi), (0, 1, np.pi / 2)])
def test_phase_from_counts(sx, sy, expected):
    assert phase_from_counts(_counts(sx), _counts(sy)) == pytest.approx(expected, abs=1e-12)


def test_phase_from_counts_critical_flag():
    with pytest.raises(IndeterminatePhaseError):
        phase_from_counts(_counts(0.01), _counts(-0.02))


def test_phase_range_and_spin_half_reference():
    assert phase_from_expectations(-1.0, -0.0) == pytest.approx(np.pi)
    g = loschmidt_at(SpinParams(0.5), 0.5)  # beta = 2
    assert g.real == pytest.approx(-np.cos(np.pi / np.cosh(1.0)), abs=1e-12)
    assert g.real > 0
    assert phase_from_expectations(g.real, g.imag) == pytest.approx(0.0, abs=1e-12)
