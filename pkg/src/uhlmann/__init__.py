"""Finite-temperature Uhlmann phase of spin-1/2 and spin-1 systems: analytic
routes, gate-level circuits, noisy simulation and a small circuit compiler."""
from .basisenc import (
    build_state_prep,
    build_uhlmann_circuit,
    controlled,
    embed_triplet,
    insert_xy4,
    m_matrix,
    phase_from_counts,
    two_qubit_ry,
)
from .experiment import SweepConfig, run_sweep, state_prep_distance_sweep, statistical_distance
from .spinsys import (
    SpinParams,
    critical_temperatures,
    holonomy_oracle,
    loschmidt_amplitude,
    state_at,
    uhlmann_phase,
    uhlmann_process,
)

__version__ = "0.1.0"
