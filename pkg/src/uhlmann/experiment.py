"""Temperature sweeps, prepared-state diagnostics and report emission."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .basisenc import (
    METHODS,
    StatePrepSpec,
    UhlmannBlocks,
    build_state_prep,
    build_uhlmann_blocks,
    insert_xy4,
    phase_from_counts,
    phase_from_expectations,
    purified_target,
    register_layout,
)
from .circuit.density import DensityMatrixState, simulate_density
from .circuit.ir import Circuit, Measurement
from .circuit.sampling import exact_expectation, outcome_distribution, sample_counts
from .circuit.statevector import StateVector, simulate_statevector
from .noise import CalibrationData, NoiseModel, build_noise_model, bundled_calibration, load_calibration
from .spinsys import G_FLOOR, IndeterminatePhaseError, SpinParams, loschmidt_at, phase_of
from .synth.approx import TemplateCache
from .synth.gateset import get_gateset
from .synth.report import GateCountReport, count_report
from .synth.transpile import transpile

CSV_COLUMNS = (
    "T", "sx", "sy", "theta_circuit", "theta_analytic", "abs_G",
    "gates_prep", "gates_uhlmann", "gates_meas", "delta_s",
)
T_MIN, T_MAX = 0.01, 1.0

NoiseSpec = Union[None, str, Path, CalibrationData]


def default_grid(points: int = 60) -> np.ndarray:
    """``points`` uniformly spaced temperatures in [0.01, 1)."""
    if points < 1:
        raise ValueError("grid needs at least one point")
    return np.linspace(T_MIN, T_MAX, points, endpoint=False)


@dataclass(frozen=True)
class SweepConfig:
    j: float = 1.0
    temperatures: tuple = field(default_factory=lambda: tuple(default_grid()))
    shots: int = 2024
    method: str = "optimized"
    dd: bool = False
    epsilon: float = 1e-8
    gateset: str = "eagle"
    noise: NoiseSpec = None
    seed: int = 0
    # "sampled" reads expectations from shot counts, "exact" from the
    # readout-corrected outcome distribution (infinite-shot limit)
    expectation: str = "sampled"

    def __post_init__(self):
        ts = np.asarray(self.temperatures, dtype=float)
        object.__setattr__(self, "temperatures", tuple(float(t) for t in ts))
        if ts.size == 0 or np.any(np.diff(ts) <= 0):
            raise ValueError("temperature grid must be non-empty and strictly increasing")
        if ts[0] < T_MIN or ts[-1] >= T_MAX:
            raise ValueError("temperatures must lie in [0.01, 1)")
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.j not in (0.5, 1.0):
            raise ValueError("spin must be 1/2 or 1")
        if self.expectation not in ("sampled", "exact"):
            raise ValueError("expectation must be 'sampled' or 'exact'")
        get_gateset(self.gateset)

    def with_(self, **kw) -> "SweepConfig":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass
class ExperimentRecord:
    T: float
    sx: float
    sy: float
    theta_circuit: float
    theta_analytic: float
    abs_G: float
    gates_prep: int
    gates_uhlmann: int
    gates_meas: int
    delta_s: float
    seed: int = 0
    sx_exact: float = math.nan
    sy_exact: float = math.nan
    counts_x: Optional[dict] = None
    counts_y: Optional[dict] = None
    status: str = "ok"  # ok | critical | error: <message>
    metadata: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status.startswith("error")


def resolve_noise(noise: NoiseSpec, gateset: str) -> Optional[NoiseModel]:
    if noise is None or (isinstance(noise, str) and noise.lower() == "none"):
        return None
    if isinstance(noise, CalibrationData):
        cal = noise
    elif isinstance(noise, str) and noise in ("eagle", "heron"):
        cal = load_calibration(bundled_calibration(noise))
    else:
        cal = load_calibration(noise)
    return build_noise_model(cal, get_gateset(gateset))


def stream_seed(seed: int, index: int, basis: int) -> int:
    """Independent, reproducible shot-stream seed for one grid point and basis."""
    return int(np.random.SeedSequence([seed, index, basis]).generate_state(1)[0])


@dataclass
class CompiledPoint:
    blocks: UhlmannBlocks  # transpiled stages
    circuit_x: Circuit
    circuit_y: Circuit
    body: Circuit  # prep + Uhlmann stage, shared by both circuits


def compile_point(
    temperature: float,
    config: SweepConfig,
    cache: Optional[TemplateCache] = None,
) -> CompiledPoint:
    logical = build_uhlmann_blocks(temperature, config.j, config.method, config.epsilon, cache=cache)
    gs = get_gateset(config.gateset)
    native = UhlmannBlocks(
        transpile(logical.prep, gs),
        transpile(logical.uhlmann, gs),
        transpile(logical.meas_x, gs),
        transpile(logical.meas_y, gs),
        logical.g_exact,
        dict(logical.metadata),
    )
    cx, cy = native.assemble("X"), native.assemble("Y")
    if config.dd:
        cx, cy = insert_xy4(cx, gs), insert_xy4(cy, gs)
    n_meas = len(native.meas_x.gates) + 1  # pre-rotations plus barrier
    body = Circuit(cx.n_qubits, cx.gates[: len(cx.gates) - n_meas])
    return CompiledPoint(native, cx, cy, body)


def _simulate(circ: Circuit, noise: Optional[NoiseModel], initial=None):
    if noise is None:
        init = initial if isinstance(initial, StateVector) or initial is None else None
        return simulate_statevector(circ.without_measurements(), init)
    if isinstance(initial, StateVector):
        initial = DensityMatrixState.from_statevector(initial)
    return simulate_density(circ.without_measurements(), noise, initial)


def statistical_distance(p: Sequence[float], q: Sequence[float], atol: float = 1e-9) -> float:
    """Total variation distance 0.5 * sum |p - q|."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions have different support sizes")
    for name, d in (("p", p), ("q", q)):
        if np.any(d < -atol) or abs(d.sum() - 1) > atol:
            raise ValueError(f"{name} is not a normalised distribution")
    return float(min(1.0, max(0.0, 0.5 * np.abs(p - q).sum())))


def prepared_distribution(prep: Circuit, qubits: Sequence[int], noise: Optional[NoiseModel]) -> np.ndarray:
    """Z-basis outcome distribution of ``qubits`` (first = most significant)."""
    state = _simulate(prep, noise)
    k = len(qubits)
    meas = [Measurement(q, k - 1 - i) for i, q in enumerate(qubits)]
    return outcome_distribution(state, meas, noise)


def _analytic(j: float, temperature: float):
    g = loschmidt_at(SpinParams(j), temperature)
    try:
        return g, phase_of(g)
    except IndeterminatePhaseError:
        return g, math.nan


def _point(index: int, temperature: float, config: SweepConfig, noise, cache) -> ExperimentRecord:
    g, theta_a = _analytic(config.j, temperature)
    try:
        cp = compile_point(temperature, config, cache)
        layout = register_layout(config.j)
        reg = layout["system"] + layout["ancilla"]
        target = purified_target(temperature, config.j)
        dist = prepared_distribution(cp.blocks.prep, reg, noise)
        delta_s = statistical_distance(dist, target**2)

        if config.dd:
            states = [_simulate(c, noise) for c in (cp.circuit_x, cp.circuit_y)]
        else:
            body = _simulate(cp.body, noise)
            states = [_simulate(m, noise, body) for m in (cp.blocks.meas_x, cp.blocks.meas_y)]
        probe = Measurement(layout["probe"], 0, "Z")
        sx_e, sy_e = (exact_expectation(s, probe, noise) for s in states)

        status = "ok"
        counts = [None, None]
        if config.expectation == "sampled":
            cs = [
                sample_counts(s, [probe], config.shots, stream_seed(config.seed, index, b), noise)
                for b, s in enumerate(states)
            ]
            sx = (cs[0].bit_counts(0)[0] - cs[0].bit_counts(0)[1]) / cs[0].shots
            sy = (cs[1].bit_counts(0)[0] - cs[1].bit_counts(0)[1]) / cs[1].shots
            counts = [dict(c.counts) for c in cs]
            try:
                theta = phase_from_counts(cs[0], cs[1])
            except IndeterminatePhaseError:
                theta, status = math.nan, "critical"
        else:
            sx, sy = sx_e, sy_e
            if abs(sx) < G_FLOOR and abs(sy) < G_FLOOR:
                theta, status = math.nan, "critical"
            else:
                theta = phase_from_expectations(sx, sy)
        if math.isnan(theta_a) and status == "ok":
            status = "critical"
        return ExperimentRecord(
            temperature, sx, sy, theta, theta_a, abs(g),
            cp.blocks.prep.size(), cp.blocks.uhlmann.size(), cp.blocks.meas_x.size(), delta_s,
            config.seed, sx_e, sy_e, counts[0], counts[1], status,
            {"index": index, "j": config.j, "method": config.method, "dd": config.dd,
             "gateset": config.gateset, "expectation": config.expectation},
        )
    except Exception as exc:  # recorded, the sweep goes on
        nan = math.nan
        return ExperimentRecord(
            temperature, nan, nan, nan, theta_a, abs(g), 0, 0, 0, nan, config.seed,
            status=f"error: {type(exc).__name__}: {exc}", metadata={"index": index},
        )


def run_sweep(config: SweepConfig, cache: Optional[TemplateCache] = None) -> list[ExperimentRecord]:
    """One record per grid temperature; failures are recorded, not raised."""
    noise = resolve_noise(config.noise, config.gateset)
    cache = cache if cache is not None else TemplateCache()
    return [_point(i, t, config, noise, cache) for i, t in enumerate(config.temperatures)]


def exit_code(records: Sequence[ExperimentRecord]) -> int:
    return 2 if any(r.failed for r in records) else 0


@dataclass(frozen=True)
class PrepDistance:
    T: float
    arbitrary: float
    shannon: float


def state_prep_distance_sweep(config: SweepConfig) -> list[PrepDistance]:
    """Distance of the prepared register's Z distribution from the target,
    for both preparation methods, using exact outcome probabilities."""
    noise = resolve_noise(config.noise, config.gateset)
    gs = get_gateset(config.gateset)
    layout = register_layout(config.j)
    reg = layout["system"] + layout["ancilla"]
    out = []
    for t in config.temperatures:
        target = purified_target(t, config.j)
        row = {}
        for method in ("arbitrary", "shannon"):
            spec = StatePrepSpec(target, method, triplet_only=(config.j == 1))
            prep = transpile(build_state_prep(spec, reg, layout["n_qubits"]), gs)
            row[method] = statistical_distance(prepared_distribution(prep, reg, noise), target**2)
        out.append(PrepDistance(t, row["arbitrary"], row["shannon"]))
    return out


def gate_count_report(config: SweepConfig, cache: Optional[TemplateCache] = None) -> GateCountReport:
    """Mean native gate counts of the three stages over the grid."""
    cache = cache if cache is not None else TemplateCache()
    blocks = {"prep": [], "uhlmann": [], "meas": []}
    for t in config.temperatures:
        cp = compile_point(t, config, cache)
        blocks["prep"].append(cp.blocks.prep)
        blocks["uhlmann"].append(cp.blocks.uhlmann)
        blocks["meas"].append(cp.blocks.meas_x)
    return count_report(blocks, config.gateset)


# -- reports ---------------------------------------------------------------
def _cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def report(records: Sequence[ExperimentRecord], fmt: str = "csv") -> str:
    if not records:
        raise ValueError("no records to report")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "table":
        head = "".join(f"{c:>15}" for c in CSV_COLUMNS)
        lines = [head, "-" * len(head)]
        for r in records:
            lines.append("".join(
                f"{getattr(r, c):>15d}" if c.startswith("gates") else f"{getattr(r, c):>15.6f}"
                for c in CSV_COLUMNS
            ))
        totals = [sum(getattr(r, c) for r in records) for c in CSV_COLUMNS if c.startswith("gates")]
        lines.append("-" * len(head))
        lines.append(f"{'gate totals':<{15 * 6}}" + "".join(f"{t:>15d}" for t in totals))
        return "\n".join(lines) + "\n"
    raise ValueError("format must be 'csv' or 'table'")


def parse_csv(text: str) -> list[dict]:
    """Rows of a report CSV as dicts of floats / ints."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({k: int(v) if k.startswith("gates") else float(v) for k, v in row.items()})
    return rows


def prep_distance_csv(rows: Sequence[PrepDistance]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T", "delta_s_arbitrary", "delta_s_shannon"])
    for r in rows:
        w.writerow([repr(r.T), repr(r.arbitrary), repr(r.shannon)])
    return buf.getvalue()
