"""Spin-j thermal states, their purification and the Uhlmann phase.

Two independent routes to the phase are provided.  The Loschmidt route
evaluates G = <W(0)| Us (x) Ua |W(0)> with the closed-form Uhlmann
unitaries; the holonomy route parallel-transports the purification around
the loop step by step, fixing each step by the Uhlmann condition
(W_k^+ W_{k+1} Hermitian positive) through a polar decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

SUPPORTED_SPINS = (Fraction(1, 2), Fraction(1))
G_FLOOR = 1e-9
TWO_PI = 2 * np.pi


class IndeterminatePhaseError(ValueError):
    """|G| is below the floor: the temperature sits at a transition."""


class ConvergenceError(RuntimeError):
    pass


def _spin(j) -> Fraction:
    f = Fraction(j).limit_denominator(8)
    if f not in SUPPORTED_SPINS:
        raise ValueError(f"unsupported spin j={j}; this build ships j = 1/2 and j = 1")
    return f


@dataclass(frozen=True)
class SpinParams:
    j: float = 0.5
    omega0: float = 1.0
    psi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "j", float(_spin(self.j)))
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")

    @property
    def dim(self) -> int:
        return int(round(2 * self.j + 1))


@dataclass(frozen=True, eq=False)
class AngularMomentumOps:
    j: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def dim(self) -> int:
        return self.jx.shape[0]


def angular_momentum(j) -> AngularMomentumOps:
    """Spin-j matrices in the |j, m> basis ordered m = j, j-1, ..., -j."""
    jf = _spin(j)
    d = int(2 * jf + 1)
    m = np.array([float(jf) - k for k in range(d)])
    # <m+1|J+|m> = sqrt(j(j+1) - m(m+1))
    jp = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        jp[k - 1, k] = np.sqrt(float(jf) * (float(jf) + 1) - m[k] * (m[k] + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    return AngularMomentumOps(float(jf), jx, jy, jz)


def hamiltonian(params: SpinParams, theta: float) -> np.ndarray:
    ops = angular_momentum(params.j)
    st = np.sin(theta)
    return params.omega0 * (
        st * np.cos(params.psi) * ops.jx + st * np.sin(params.psi) * ops.jy + np.cos(theta) * ops.jz
    )


def hermitian_exp(generator: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i angle G) for Hermitian G via its eigen-decomposition."""
    w, v = np.linalg.eigh(generator)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def _phase_fix(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)[0]
        out[:, k] = col * np.exp(-1j * np.angle(col[nz]))
    return out


@dataclass(frozen=True, eq=False)
class ThermalSpinState:
    params: SpinParams
    beta: float
    hamiltonian: np.ndarray
    eigenvalues: np.ndarray  # Boltzmann weights, ascending energy
    eigenvectors: np.ndarray  # columns, same order
    energies: np.ndarray = field(default=None)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def temperature(self) -> float:
        return np.inf if self.beta == 0 else 1 / self.beta

    @property
    def rho(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    @property
    def partition_function(self) -> float:
        return float(np.sum(np.exp(-self.beta * self.energies)))


def _check_hermitian(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or not np.allclose(h, h.conj().T, atol=1e-12):
        raise ValueError("Hamiltonian must be a Hermitian matrix")
    return h


def _default_params(h) -> SpinParams:
    return SpinParams(j=(h.shape[0] - 1) / 2)


def thermal_state(h: np.ndarray, beta: float, params: SpinParams | None = None) -> ThermalSpinState:
    """Gibbs state e^{-beta H}/Z, weights in ascending-energy order."""
    h = _check_hermitian(h)
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError("beta must be finite and positive; use infinite_temperature_state for beta = 0")
    params = params or _default_params(h)
    e, v = np.linalg.eigh(h)
    v = _phase_fix(v)
    # shift by the ground energy so large beta does not underflow
    w = np.exp(-beta * (e - e[0]))
    lam = w / w.sum()
    if np.any(lam <= 0):
        raise ValueError("temperature too low: state is numerically rank deficient")
    return ThermalSpinState(params, float(beta), h, lam, v, e)


def infinite_temperature_state(h: np.ndarray, params: SpinParams | None = None) -> ThermalSpinState:
    h = _check_hermitian(h)
    params = params or _default_params(h)
    e, v = np.linalg.eigh(h)
    d = h.shape[0]
    return ThermalSpinState(params, 0.0, h, np.full(d, 1 / d), _phase_fix(v), e)


def state_at(params: SpinParams, temperature: float) -> ThermalSpinState:
    """Thermal state at the start of the loop (theta = 0)."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    return thermal_state(hamiltonian(params, 0.0), 1 / temperature, params)


@dataclass(frozen=True, eq=False)
class PurifiedState:
    """|W> = sum_j sqrt(lambda_j) |j>|j>, system index major."""

    amplitudes: np.ndarray
    dim: int

    def reduced_density(self, basis: np.ndarray | None = None) -> np.ndarray:
        """Partial trace over the ancilla, optionally rotated to another basis."""
        w = self.amplitudes.reshape(self.dim, self.dim)
        rho = w @ w.conj().T
        return rho if basis is None else basis @ rho @ basis.conj().T

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def purify(state: ThermalSpinState) -> PurifiedState:
    d = state.dim
    amps = np.zeros(d * d, dtype=complex)
    amps[np.arange(d) * (d + 1)] = np.sqrt(state.eigenvalues)
    return PurifiedState(amps, d)


def physical_purification(state: ThermalSpinState) -> np.ndarray:
    """|W> expressed in the |m> basis of system and ancilla: sum sqrt(l_j)|v_j>|v_j>."""
    v = state.eigenvectors
    return np.einsum("j,aj,bj->ab", np.sqrt(state.eigenvalues), v, v).reshape(-1)


def eta(beta: float, omega0: float = 1.0) -> float:
    if omega0 <= 0 or beta < 0:
        raise ValueError("need omega0 > 0 and beta >= 0")
    x = beta * omega0 / 2
    # sech written to stay finite for huge arguments
    return float(2 * np.exp(-x) / (1 + np.exp(-2 * x)))


@dataclass(frozen=True, eq=False)
class UhlmannProcess:
    eta: float
    theta_total_system: float
    theta_total_ancilla: float
    us: np.ndarray  # in the |m> basis
    ua: np.ndarray


def uhlmann_process(state: ThermalSpinState, loop_angle: float = TWO_PI) -> UhlmannProcess:
    e = eta(state.beta, state.params.omega0)
    jy = angular_momentum(state.params.j).jy
    ts, ta = loop_angle, e * loop_angle
    return UhlmannProcess(e, ts, ta, hermitian_exp(jy, ts), hermitian_exp(jy, ta))


def loschmidt_amplitude(state: ThermalSpinState, proc: UhlmannProcess) -> complex:
    """G = sum_jk sqrt(l_j l_k) <k|Us|j> <k|Ua|j> in the thermal eigenbasis."""
    if proc.us.shape != (state.dim, state.dim) or proc.ua.shape != proc.us.shape:
        raise ValueError("state and process dimensions differ")
    v = state.eigenvectors
    us = v.conj().T @ proc.us @ v
    ua = v.conj().T @ proc.ua @ v
    s = np.sqrt(state.eigenvalues)
    return complex(np.sum(np.outer(s, s) * (us * ua).T))


def phase_of(g: complex, floor: float = G_FLOOR) -> float:
    """arg g in (-pi, pi]; raises at |g| below ``floor``."""
    if abs(g) < floor:
        raise IndeterminatePhaseError(f"|G| = {abs(g):.2e} below {floor:g}: critical point")
    a = float(np.angle(g))
    return np.pi if a <= -np.pi + 1e-15 else a


def uhlmann_phase(state: ThermalSpinState, proc: UhlmannProcess | None = None, floor: float = G_FLOOR) -> float:
    proc = proc or uhlmann_process(state)
    return phase_of(loschmidt_amplitude(state, proc), floor)


def loschmidt_at(params: SpinParams, temperature: float) -> complex:
    st = state_at(params, temperature)
    return loschmidt_amplitude(st, uhlmann_process(st))


def holonomy_amplitude(state: ThermalSpinState, steps: int, loop_angle: float = TWO_PI) -> complex:
    """Tr[rho(0) U(tau)] from discrete Uhlmann parallel transport.

    The loop rho(t) = R(t) rho(0) R(t)^+, R(t) = exp(-i t Jy), is cut into
    ``steps`` equal pieces.  At each step W_{k+1} = sqrt(rho_{k+1}) V_{k+1}
    with V chosen so that W_k^+ W_{k+1} is positive; products are taken
    left to right in increasing t.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    jy = angular_momentum(state.params.j).jy
    w_jy, v_jy = np.linalg.eigh(jy)
    sqrt_rho0 = (state.eigenvectors * np.sqrt(state.eigenvalues)) @ state.eigenvectors.conj().T
    w = sqrt_rho0
    for k in range(1, steps + 1):
        t = loop_angle * k / steps
        r = (v_jy * np.exp(-1j * t * w_jy)) @ v_jy.conj().T
        sqrt_rho = r @ sqrt_rho0 @ r.conj().T
        a = w.conj().T @ sqrt_rho
        # left polar factor: a = P omega with P >= 0 and omega = U Vh
        u, _, vh = np.linalg.svd(a)
        w = sqrt_rho @ (u @ vh).conj().T
    return complex(np.trace(sqrt_rho0.conj().T @ w))


def holonomy_oracle(state: ThermalSpinState, steps: int = 10_000, tol: float = 1e-6, floor: float = G_FLOOR) -> float:
    """Uhlmann phase from the path-ordered product; checks a step doubling."""
    if steps < 100:
        raise ValueError("holonomy_oracle needs at least 100 steps")
    g1 = holonomy_amplitude(state, steps)
    g2 = holonomy_amplitude(state, 2 * steps)
    if abs(g1 - g2) > max(tol, 1e-3 * abs(g2)) and abs(abs(g1) - abs(g2)) > tol:
        raise ConvergenceError(f"holonomy not converged: G({steps})={g1}, G({2 * steps})={g2}")
    return phase_of(g2, floor)


def critical_temperatures(
    j,
    t_range: Sequence[float] = (0.01, 1.0),
    resolution: float = 1e-10,
    omega0: float = 1.0,
    samples: int = 4000,
) -> list[float]:
    """Temperatures where the real Loschmidt amplitude changes sign."""
    lo, hi = t_range
    if not 0 < lo < hi:
        raise ValueError("t_range must satisfy 0 < low < high")
    params = SpinParams(j=j, omega0=omega0)

    def g(t):
        return loschmidt_at(params, t).real

    ts = np.geomspace(lo, hi, samples)
    vals = np.array([g(t) for t in ts])
    roots = []
    for k in range(samples - 1):
        if vals[k] == 0:
            roots.append(float(ts[k]))
        elif vals[k] * vals[k + 1] < 0:
            roots.append(float(brentq(g, ts[k], ts[k + 1], xtol=resolution, rtol=4 * np.finfo(float).eps)))
    return roots
