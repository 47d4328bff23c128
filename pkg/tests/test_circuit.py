import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_unitary
from uhlmann.circuit import (
    Circuit,
    DensityMatrixState,
    Gate,
    GateKind,
    ShotCounts,
    StateVector,
    apply_gate,
    expectation_xy,
    sample_counts,
    simulate_density,
    simulate_statevector,
    to_qasm3,
    unitary_of_circuit,
)
from uhlmann.circuit.gates import ECR_MAT
from uhlmann.circuit.ir import Measurement
from uhlmann.circuit.qasm import ECR_BODY, RZZ_BODY
from uhlmann.circuit.sampling import exact_expectation, outcome_distribution, probe_coherence
from uhlmann.circuit.statevector import local_unitary
from uhlmann.noise import NoiseModel, build_noise_model, parse_calibration
from uhlmann.synth.gateset import EAGLE
from uhlmann.synth.metrics import hs_distance

ONE_Q = [GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.S, GateKind.SDG, GateKind.SX]
ROT = [GateKind.RX, GateKind.RY, GateKind.RZ]


def random_circuit(rng, n, depth):
    c = Circuit(n)
    for _ in range(depth):
        r = rng.random()
        if n > 1 and r < 0.3:
            a, b = rng.choice(n, 2, replace=False)
            kind = (GateKind.CNOT, GateKind.ECR, GateKind.RZZ)[rng.integers(3)]
            params = (rng.uniform(-np.pi, np.pi),) if kind is GateKind.RZZ else ()
            c.add(kind, (a, b), params)
        elif r < 0.6:
            c.add(ONE_Q[rng.integers(len(ONE_Q))], (rng.integers(n),))
        elif r < 0.9:
            c.add(ROT[rng.integers(3)], (rng.integers(n),), (rng.uniform(-np.pi, np.pi),))
        else:
            c.add(GateKind.U3, (rng.integers(n),), tuple(rng.uniform(-np.pi, np.pi, 3)))
    return c


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.CNOT, (0,))
    with pytest.raises(ValueError):
        Gate(GateKind.RX, (0,))
    with pytest.raises(ValueError):
        Gate(GateKind.CNOT, (1, 1))
    with pytest.raises(ValueError):
        Gate(GateKind.UNITARY, (0,), matrix=np.array([[1, 1], [0, 1]]))
    g = Gate(GateKind.RZ, (0,), (0.3,))
    assert g.duration == 35 and Gate(GateKind.ECR, (0, 1)).duration == 300
    assert not g.matrix.flags.writeable


@pytest.mark.parametrize("kind", ONE_Q + [GateKind.CNOT, GateKind.ECR])
def test_fixed_gates_unitary(kind):
    arity = 2 if kind in (GateKind.CNOT, GateKind.ECR) else 1
    m = Gate(kind, tuple(range(arity))).matrix
    assert np.allclose(m.conj().T @ m, np.eye(2**arity), atol=1e-12)


def test_circuit_rejects_out_of_range_and_bad_basis():
    with pytest.raises((ValueError, IndexError)):
        Circuit(2).add(GateKind.X, (2,))
    with pytest.raises(ValueError):
        Measurement(0, 0, "W")


def test_x_on_zero():
    s = apply_gate(StateVector.zero(1), Gate(GateKind.X, (0,)))
    assert np.allclose(s.amplitudes, [0, 1])


def test_hh_identity(rng):
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    s = StateVector(v / np.linalg.norm(v))
    out = apply_gate(apply_gate(s, Gate(GateKind.H, (1,))), Gate(GateKind.H, (1,)))
    assert np.allclose(out.amplitudes, s.amplitudes, atol=1e-12)


def test_bell_pair():
    c = Circuit(2).add(GateKind.H, (0,)).add(GateKind.CNOT, (0, 1))
    assert np.allclose(simulate_statevector(c).amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_empty_circuit_is_zero_state():
    amps = simulate_statevector(Circuit(5)).amplitudes
    assert amps[0] == 1 and np.count_nonzero(amps) == 1


def test_unitary_of_single_x_and_cnot():
    assert np.allclose(unitary_of_circuit(Circuit(1).add(GateKind.X, (0,))), [[0, 1], [1, 0]])
    u = unitary_of_circuit(Circuit(2).add(GateKind.CNOT, (0, 1)))
    # control on qubit 0 (least significant): index 1 <-> index 3
    perm = np.eye(4)[:, [0, 3, 2, 1]]
    assert np.allclose(u, perm)
    with pytest.raises(ValueError):
        unitary_of_circuit(Circuit(1).measure(0, 0))


def test_local_unitary_is_big_endian():
    c = Circuit(3).add(GateKind.CNOT, (2, 0))
    assert np.allclose(local_unitary(c.gates, (2, 0)), Gate(GateKind.CNOT, (0, 1)).matrix)


def test_unitary_matches_statevector_on_random_circuits():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        c = random_circuit(rng, n, int(rng.integers(1, 41)))
        sv = simulate_statevector(c)
        assert abs(sv.norm() - 1) < 1e-10
        assert np.allclose(unitary_of_circuit(c)[:, 0], sv.amplitudes, atol=1e-10)


def test_noise_free_density_equals_projector():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        c = random_circuit(rng, n, 25)
        rho = simulate_density(c)
        rho.check()
        assert np.allclose(rho.matrix, simulate_statevector(c).projector(), atol=1e-10)


def _single_qubit_model(error=0.0, t1=250.0, t2=150.0, x_ns=35.0):
    cal = parse_calibration({
        "qubits": [{"t1_us": t1, "t2_us": t2}],
        "gates": [{"kind": "x", "error": error, "duration_ns": x_ns}]
        + [{"kind": k, "error": error} for k in ("ecr", "rz", "sx")],
    })
    return build_noise_model(cal, EAGLE)


def test_amplitude_damping_population():
    # an X pulse lasting exactly T1 leaves e^-1 of the population in |1>
    model = _single_qubit_model(t1=50.0, t2=50.0, x_ns=50_000.0)
    rho = simulate_density(Circuit(1).add(GateKind.X, (0,)), model)
    assert rho.matrix[1, 1].real == pytest.approx(np.exp(-1), abs=1e-12)


def test_full_depolarizing_mixes_qubit():
    from uhlmann.noise import GateNoise

    model = NoiseModel({(GateKind.H, (0,)): GateNoise(1.0, ())}, (((1, 0), (0, 1)),))
    rho = simulate_density(Circuit(1).add(GateKind.H, (0,)), model)
    assert np.allclose(rho.matrix, np.eye(2) / 2, atol=1e-12)


def test_density_trace_preserved_under_noise(rng):
    model = _single_qubit_model(error=0.05, t1=1.0, t2=1.5)
    c = Circuit(1)
    for _ in range(30):
        c.add(GateKind.SX, (0,)).add(GateKind.RZ, (0,), (rng.uniform(0, 6),))
    rho = simulate_density(c, model)
    rho.check()
    assert abs(rho.trace() - 1) < 1e-10


def test_plus_in_x_basis_always_zero():
    s = simulate_statevector(Circuit(1).add(GateKind.H, (0,)))
    counts = sample_counts(s, [Measurement(0, 0, "X")], 2024, seed=3)
    assert counts.counts == {"0": 2024}


def test_zero_in_x_basis_binomial():
    counts = sample_counts(StateVector.zero(1), [Measurement(0, 0, "X")], 2024, seed=5)
    frac = counts.bit_counts(0)[0] / 2024
    assert abs(frac - 0.5) <= 5 * 0.5 / np.sqrt(2024)


def test_y_measurement_of_plus_i():
    s = simulate_statevector(Circuit(1).add(GateKind.H, (0,)).add(GateKind.S, (0,)))
    assert exact_expectation(s, Measurement(0, 0, "Y")) == pytest.approx(1.0, abs=1e-12)


def test_readout_confusion_rate():
    conf = {0: np.array([[0.99, 0.01], [0.02, 0.98]])}
    p = outcome_distribution(StateVector.zero(1), [Measurement(0, 0)], conf)
    assert p[1] == pytest.approx(0.01, abs=1e-12)
    c = sample_counts(StateVector.zero(1), [Measurement(0, 0)], 200_000, seed=1, readout=conf)
    assert c.bit_counts(0)[1] / 200_000 == pytest.approx(0.01, abs=1e-3)


def test_sampling_is_seed_deterministic():
    s = simulate_statevector(Circuit(2).add(GateKind.H, (0,)).add(GateKind.RY, (1,), (0.7,)))
    m = [Measurement(0, 0, "X"), Measurement(1, 1)]
    a = sample_counts(s, m, 2024, seed=9)
    b = sample_counts(s, m, 2024, seed=9)
    assert a.counts == b.counts and sum(a.counts.values()) == 2024
    assert all(len(k) == 2 for k in a.counts)


def test_clbit_zero_is_rightmost():
    s = simulate_statevector(Circuit(2).add(GateKind.X, (1,)))
    c = sample_counts(s, [Measurement(0, 0), Measurement(1, 1)], 10, seed=0)
    assert c.counts == {"10": 10}
    assert c.bit_counts(1) == (0, 10)


def test_counts_must_sum_to_shots():
    with pytest.raises(ValueError):
        ShotCounts({"0": 3}, 4)


@pytest.mark.parametrize(
    "n0,n1,expected", [(2024, 0, 1.0), (1012, 1012, 0.0), (1518, 506, 0.5)]
)
def test_expectation_xy(n0, n1, expected):
    c = ShotCounts({"0": n0, "1": n1}, n0 + n1)
    sx, sy = expectation_xy(c, c)
    assert sx == pytest.approx(expected) and sy == pytest.approx(expected)


@given(st.floats(-np.pi, np.pi), st.floats(0, np.pi))
@settings(max_examples=30, deadline=None)
def test_probe_coherence_matches_bloch_vector(phi, theta):
    c = Circuit(1).add(GateKind.RY, (0,), (theta,)).add(GateKind.RZ, (0,), (phi,))
    s = simulate_statevector(c)
    g = probe_coherence(s)
    sx = exact_expectation(s, Measurement(0, 0, "X"))
    sy = exact_expectation(s, Measurement(0, 0, "Y"))
    assert g == pytest.approx(complex(sx, sy), abs=1e-12)


def test_qasm_bodies_reproduce_matrices():
    def body_matrix(body, theta=0.0):
        c = Circuit(2)
        for name, ps, qs in body:
            ps = tuple(theta if p == "theta" else p for p in ps)
            c.add(GateKind(name), tuple(1 - q for q in qs), ps)
        return unitary_of_circuit(c)

    assert hs_distance(body_matrix(ECR_BODY), ECR_MAT) < 1e-12
    assert hs_distance(body_matrix(RZZ_BODY, 0.8), Gate(GateKind.RZZ, (0, 1), (0.8,)).matrix) < 1e-12


def test_qasm_layout():
    c = Circuit(2).add(GateKind.ECR, (0, 1)).add(GateKind.RZ, (1,), (0.5,)).measure(0, 0, "Y")
    text = to_qasm3(c)
    lines = text.strip().splitlines()
    assert lines[0] == "OPENQASM 3.0;"
    assert lines[1] == 'include "stdgates.inc";'
    assert "gate ecr a, b {" in lines
    assert "gate rzz" not in text
    decl = lines.index("qubit[2] q;")
    assert lines[decl + 1] == "bit[1] c;"
    body = lines[decl + 2:]
    assert body == ["ecr q[0], q[1];", "rz(0.5) q[1];", "sdg q[0];", "h q[0];", "c[0] = measure q[0];"]


def test_qasm_rejects_generic_unitary(rng):
    c = Circuit(1).unitary(random_unitary(rng, 2), (0,))
    with pytest.raises(ValueError):
        to_qasm3(c)
