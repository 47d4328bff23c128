"""Circuit IR, simulators, sampling and OpenQASM export."""
from .density import DensityMatrixState, simulate_density
from .gates import Gate, GateKind
from .ir import Circuit, Measurement
from .qasm import to_qasm3
from .sampling import ShotCounts, expectation_xy, sample_counts
from .statevector import StateVector, apply_gate, simulate_statevector, unitary_of_circuit
