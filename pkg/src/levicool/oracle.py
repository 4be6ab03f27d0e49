"""Truncated-Fock Lindblad evolution of the two-mode system at toy scale.

Brute-force validation layer: the full rotating-frame generator checks the
mean-field amplitude equations, and the beam-splitter generator checks the
closed-form cooling occupations.  Dense matrices only; the intended regime
is n_bar <= 3 and at most ~15 levels per mode, far below the physical bath
occupations but sufficient to exercise every approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IntegrationError, OracleError
from .model import reduce_params
from .ode import integrate_adaptive
from .physics import ModeParams
from .steady import DriveConfig

RWA = "full-rwa"
BEAM_SPLITTER = "beam-splitter"


@dataclass(frozen=True)
class Generator:
    """Hamiltonian plus thermal dissipators on a truncated two-mode Fock space.

    Each dissipator entry is (mode_label, rate, nbar); with the convention
    used here a mode's mean occupation relaxes at exactly ``rate``.
    """

    hamiltonian: np.ndarray
    dissipators: tuple[tuple[str, float, float], ...]
    flavor: str
    dims: tuple[int, int]
    _ops: dict = field(default_factory=dict, repr=False, compare=False)

    def lowering(self, mode: str) -> np.ndarray:
        return self._ops[mode]


@dataclass(frozen=True)
class FockState:
    """Density matrix on the truncated product space, with run diagnostics."""

    dims: tuple[int, int]
    rho: np.ndarray
    converged: bool = True
    leakage: float = 0.0
    trace_drift: float = 0.0
    hermiticity_drift: float = 0.0


def _destroy(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)


def _mode_ops(dims: tuple[int, int]) -> dict:
    n_t, n_y = dims
    b_t = np.kron(_destroy(n_t), np.eye(n_y))
    b_y = np.kron(np.eye(n_t), _destroy(n_y))
    return {"theta": b_t, "y": b_y}


def vacuum_state(dims: tuple[int, int]) -> FockState:
    d = dims[0] * dims[1]
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    return FockState(dims=dims, rho=rho)


def _thermal_diag(nbar: float, dim: int) -> np.ndarray:
    if nbar == 0.0:
        pops = np.zeros(dim)
        pops[0] = 1.0
        return pops
    ratio = nbar / (1.0 + nbar)
    pops = ratio ** np.arange(dim)
    return pops / pops.sum()


def thermal_state(dims: tuple[int, int], nbar_theta: float, nbar_y: float) -> FockState:
    rho = np.kron(
        np.diag(_thermal_diag(nbar_theta, dims[0])),
        np.diag(_thermal_diag(nbar_y, dims[1])),
    ).astype(complex)
    return FockState(dims=dims, rho=rho)


def fock_state(dims: tuple[int, int], n_theta: int, n_y: int) -> FockState:
    d = dims[0] * dims[1]
    idx = n_theta * dims[1] + n_y
    rho = np.zeros((d, d), dtype=complex)
    rho[idx, idx] = 1.0
    return FockState(dims=dims, rho=rho)


def build_rwa_generator(
    mode_params: ModeParams, drive: DriveConfig, truncation: tuple[int, int]
) -> Generator:
    """Rotating-frame generator with both quartic self-Kerr terms, the
    cross-Kerr coupling, and coherent drives on each mode.

    The detuning convention matches the mean-field flow, so quantum ``<b>``
    trajectories are directly comparable to the semiclassical amplitudes.
    """
    n_t, n_y = truncation
    if n_t < 4 or n_y < 4:
        raise DomainError("truncation must be at least 4 levels per mode")
    p = reduce_params(mode_params, drive)
    ops = _mode_ops(truncation)
    b_t, b_y = ops["theta"], ops["y"]
    bdt, bdy = b_t.conj().T, b_y.conj().T
    num_t = bdt @ b_t
    num_y = bdy @ b_y
    h = (
        p.delta_1 * num_t
        + p.delta_2 * num_y
        + 0.5 * p.omega_1 * (b_t + bdt)
        + 0.5 * p.omega_2 * (b_y + bdy)
        - 3.0 * p.eta_theta * (bdt @ bdt @ b_t @ b_t + b_t @ b_t @ bdt @ bdt)
        - 3.0 * p.eta_y * (bdy @ bdy @ b_y @ b_y + b_y @ b_y @ bdy @ bdy)
        - 4.0 * p.eta_thetay * (num_t @ num_y)
    )
    gen = Generator(
        hamiltonian=h,
        dissipators=(
            ("theta", p.gamma_theta, mode_params.nbar_theta),
            ("y", p.gamma_y, mode_params.nbar_y),
        ),
        flavor=RWA,
        dims=truncation,
    )
    gen._ops.update(ops)
    return gen


def build_bs_generator(
    delta: float,
    g: float,
    gammas: tuple[float, float],
    nbars: tuple[float, float],
    truncation: tuple[int, int],
) -> Generator:
    """Beam-splitter exchange generator: H = -delta n_y - g (bt' by + by' bt)."""
    if g < 0:
        raise DomainError("beam-splitter coupling must be non-negative")
    n_t, n_y = truncation
    if n_t < 4 or n_y < 4:
        raise DomainError("truncation must be at least 4 levels per mode")
    ops = _mode_ops(truncation)
    b_t, b_y = ops["theta"], ops["y"]
    bdt, bdy = b_t.conj().T, b_y.conj().T
    h = -delta * (bdy @ b_y) - g * (bdt @ b_y + bdy @ b_t)
    gen = Generator(
        hamiltonian=h,
        dissipators=(
            ("theta", gammas[0], nbars[0]),
            ("y", gammas[1], nbars[1]),
        ),
        flavor=BEAM_SPLITTER,
        dims=truncation,
    )
    gen._ops.update(ops)
    return gen


def _liouvillian_terms(gen: Generator):
    """Drift matrix and jump channels: drho = A rho + rho A^† + sum_i J_i rho J_i^†-form."""
    h = gen.hamiltonian
    drift = -1j * h.astype(complex)
    jumps = []
    for mode, gamma, nbar in gen.dissipators:
        if gamma == 0.0:
            continue
        b = gen.lowering(mode)
        bd = b.conj().T
        # Rates chosen so d<n>/dt = -gamma (<n> - nbar).
        down = gamma * (1.0 + nbar)
        up = gamma * nbar
        drift -= 0.5 * (down * (bd @ b) + up * (b @ bd))
        if down:
            jumps.append((down, b, bd))
        if up:
            jumps.append((up, bd, b))
    return drift, jumps


def evolve(
    generator: Generator,
    state: FockState,
    duration: float,
    tol: float = 1e-8,
) -> FockState:
    """Propagate the master equation for ``duration`` by adaptive stepping.

    Trace and Hermiticity drifts are recorded on the returned state; more
    than 1% population in the top two levels of either mode marks the
    result unconverged (truncation too tight for the drive).
    """
    if state.dims != generator.dims:
        raise DomainError("state and generator truncations differ")
    d = state.dims[0] * state.dims[1]
    drift, jumps = _liouvillian_terms(generator)
    drift_dag = drift.conj().T

    def rhs(_t, y):
        rho = y.reshape(d, d)
        out = drift @ rho + rho @ drift_dag
        for rate, a, ad in jumps:
            out += rate * (a @ rho @ ad)
        return out.ravel()

    try:
        _, _, y_end = integrate_adaptive(
            rhs,
            0.0,
            state.rho.ravel().copy(),
            duration,
            rtol=tol,
            atol=tol * 1e-2,
            t_eval=np.array([duration]),
        )
    except IntegrationError as exc:
        raise OracleError(f"master-equation propagation failed: {exc}") from exc
    rho = y_end.reshape(d, d)
    trace_drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    herm_drift = float(np.max(np.abs(rho - rho.conj().T)))
    if trace_drift > 1e-6:
        raise OracleError(f"trace drifted by {trace_drift:.2e} during propagation")
    leakage = _top_level_population(rho, state.dims)
    return FockState(
        dims=state.dims,
        rho=rho,
        converged=leakage <= 0.01,
        leakage=leakage,
        trace_drift=trace_drift,
        hermiticity_drift=herm_drift,
    )


def _top_level_population(rho: np.ndarray, dims: tuple[int, int]) -> float:
    pops = np.real(np.diag(rho)).reshape(dims)
    top_t = float(pops[-2:, :].sum())
    top_y = float(pops[:, -2:].sum())
    return max(top_t, top_y)


def expectations(state: FockState):
    """(⟨n_theta⟩, ⟨n_y⟩, ⟨b_theta⟩, ⟨b_y⟩) of a Fock-space state."""
    ops = _mode_ops(state.dims)
    b_t, b_y = ops["theta"], ops["y"]
    rho = state.rho
    n_t = float(np.real(np.trace(b_t.conj().T @ b_t @ rho)))
    n_y = float(np.real(np.trace(b_y.conj().T @ b_y @ rho)))
    amp_t = complex(np.trace(b_t @ rho))
    amp_y = complex(np.trace(b_y @ rho))
    return n_t, n_y, amp_t, amp_y


def settle_expectations(
    generator: Generator,
    state: FockState,
    *,
    chunk: float,
    max_chunks: int = 40,
    settle_tol: float = 1e-5,
    tol: float = 1e-8,
) -> tuple[FockState, tuple[float, float, complex, complex]]:
    """Evolve in chunks until the occupations stop moving; returns final state
    and expectations."""
    prev = expectations(state)
    for _ in range(max_chunks):
        state = evolve(generator, state, chunk, tol=tol)
        cur = expectations(state)
        move = max(
            abs(cur[0] - prev[0]) / max(abs(cur[0]), 1e-9),
            abs(cur[1] - prev[1]) / max(abs(cur[1]), 1e-9),
        )
        if move < settle_tol:
            return state, cur
        prev = cur
    return state, prev


def toy_mode_params(
    *,
    gamma_theta: float,
    gamma_y: float,
    eta_theta: float = 0.0,
    eta_y: float = 0.0,
    eta_thetay: float = 0.0,
    nbar_theta: float = 0.0,
    nbar_y: float = 0.0,
    omega_theta: float = 1.0,
    omega_y: float = 1.0,
) -> ModeParams:
    """ModeParams carrier for dimensionless toy systems (oracle / unit tests)."""
    return ModeParams(
        mass=1.0,
        volume=1.0,
        inertia=1.0,
        intensity_0=1.0,
        u0_mag=1.0,
        omega_theta=omega_theta,
        omega_y=omega_y,
        eta_theta=eta_theta,
        eta_y=eta_y,
        eta_thetay=eta_thetay,
        eta_1=0.0,
        eta_2=0.0,
        eta_3=0.0,
        gamma_theta=gamma_theta,
        gamma_y=gamma_y,
        nbar_theta=nbar_theta,
        nbar_y=nbar_y,
    )
