"""Truncated-Fock master-equation oracle for the transmission spectrum.

The dispersive Hamiltonian commutes with both sigma_z, so the populations of
the four logic states are conserved and the stationary state is
sum_kl P_kl |kl><kl| (x) rho_kl, where rho_kl is the stationary state of a
driven damped cavity detuned by shift_kl - Delta_r. Each cavity problem is
solved on its own (n_max + 1)^2 dimensional Liouville space.
"""
from typing import Tuple

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from config.device import DispersiveParams
from config.logging_config import get_logger
from config.settings import DEFAULT_CUTOFF_ATTEMPTS, DEFAULT_PHOTON_CUTOFF
from quantum.gates import SIGMA_Z
from quantum.states import TwoQubitState, expectations
from services.spectrometer import Engine, SpectrumTrace, sweep
from utils.exceptions import ConfigurationError, ConvergenceError, CutoffError

logger = get_logger("services.lindblad")

TOP_LEVEL_TOLERANCE = 1e-6
RESIDUAL_TOLERANCE = 1e-10
MIN_CUTOFF = 4
# complex entries per batched generator stack
MAX_BATCH_ENTRIES = 2 ** 22
# sectors carrying less weight than this are left out of the sum
NEGLIGIBLE_PROBABILITY = 1e-15


def cavity_operators(n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """Annihilation and number operators on Fock states 0..n_max."""
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    return a, a.conj().T @ a


def _superoperators(n_max: int, epsilon: float, kappa: float) -> Tuple[np.ndarray, np.ndarray]:
    """Split the cavity Liouvillian as L = static + detuning * number_part.

    Column-stacking convention: vec(A X B) = (B^T (x) A) vec(X).
    H = detuning * a^dag a + epsilon (a + a^dag), collapse operator sqrt(kappa) a.
    """
    a, n = cavity_operators(n_max)
    identity = np.eye(n_max + 1, dtype=complex)
    drive = epsilon * (a + a.conj().T)

    def commutator(h: np.ndarray) -> np.ndarray:
        return -1j * (np.kron(identity, h) - np.kron(h.T, identity))

    dissipator = kappa * (
        np.kron(a.conj(), a)
        - 0.5 * np.kron(identity, n)
        - 0.5 * np.kron(n.T, identity)
    )
    return commutator(drive) + dissipator, commutator(n)


def cavity_steady_states(detunings: np.ndarray, epsilon: float, kappa: float,
                         n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """Mean photon number and top-level population for each cavity detuning.

    The trace condition is added to the first row of the generator, which
    makes the stationary problem a regular linear solve.
    """
    dim = n_max + 1
    static, number_part = _superoperators(n_max, epsilon, kappa)
    trace_row = np.eye(dim, dtype=complex).reshape(-1, order="F")
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    diagonal = np.arange(dim) * (dim + 1)

    batch_size = max(1, MAX_BATCH_ENTRIES // (dim ** 4))
    photons = np.empty(detunings.size)
    top = np.empty(detunings.size)
    for start in range(0, detunings.size, batch_size):
        batch = detunings[start:start + batch_size]
        generators = static[None, :, :] + batch[:, None, None] * number_part[None, :, :]
        regularized = generators.copy()
        regularized[:, 0, :] += trace_row
        rho = np.linalg.solve(regularized, np.broadcast_to(rhs, (batch.size, dim * dim))[..., None])[..., 0]

        residual = np.max(np.abs(np.einsum("bij,bj->bi", generators, rho)))
        if residual > RESIDUAL_TOLERANCE:
            raise ConvergenceError(f"Stationary cavity state residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:.0e}")

        populations = rho[:, diagonal].real
        photons[start:start + batch.size] = populations @ np.arange(dim)
        top[start:start + batch.size] = populations[:, -1]
    return photons, top


def sector_shifts(p: DispersiveParams) -> np.ndarray:
    """Cavity pull of each logic state, the diagonal of Gamma1 sz (x) 1 + Gamma2 1 (x) sz."""
    identity = np.eye(2)
    dispersive = p.gamma1 * np.kron(SIGMA_Z, identity) + p.gamma2 * np.kron(identity, SIGMA_Z)
    return np.diag(dispersive).real.copy()


def _lindblad_values(probs: np.ndarray, p: DispersiveParams, grid: np.ndarray, n_max: int) -> np.ndarray:
    values = np.zeros(grid.size)
    for prob, shift in zip(probs, sector_shifts(p)):
        if prob < NEGLIGIBLE_PROBABILITY:
            continue
        photons, top = cavity_steady_states(shift - grid, p.epsilon, p.kappa, n_max)
        worst = float(np.max(top))
        if worst > TOP_LEVEL_TOLERANCE:
            raise CutoffError(
                f"Fock level {n_max} holds population {worst:.3e} > {TOP_LEVEL_TOLERANCE:.0e}; raise n_max"
            )
        values += prob * photons
    return values / (2 * p.epsilon)


def lindblad_spectrum(s: TwoQubitState, p: DispersiveParams, grid: np.ndarray,
                      n_max: int = DEFAULT_PHOTON_CUTOFF, workers: int = 1,
                      attempts: int = DEFAULT_CUTOFF_ATTEMPTS) -> SpectrumTrace:
    """Stationary <a^dag a> / (2 epsilon) of the damped, driven, dispersively pulled resonator.

    A CutoffError is retried with the photon cutoff doubled, up to `attempts`
    solves in total; the last CutoffError is re-raised.

    Args:
        s: Two-qubit state fixing the logic-state populations
        p: Dispersive pulls, linewidth and probe amplitude
        grid: Drive-resonator detunings in rad/ns
        n_max: Highest Fock level of the first attempt
        workers: Threads for the grid sweep
        attempts: Cutoff attempts before giving up

    Returns:
        SpectrumTrace: The oracle trace, tagged "lindblad"
    """
    if n_max < MIN_CUTOFF:
        raise ConfigurationError(f"Photon cutoff must be at least {MIN_CUTOFF}, got {n_max}")
    grid = np.asarray(grid, dtype=float)
    expect = expectations(s)

    if p.epsilon == 0:
        # an undriven cavity relaxes to vacuum
        return SpectrumTrace(grid, np.zeros(grid.size), Engine.LINDBLAD.value, expect)

    probs = np.asarray(expect.probs)
    for attempt in Retrying(stop=stop_after_attempt(attempts),
                            retry=retry_if_exception_type(CutoffError),
                            reraise=True):
        with attempt:
            cutoff = n_max * 2 ** (attempt.retry_state.attempt_number - 1)
            try:
                values = sweep(lambda chunk: _lindblad_values(probs, p, chunk, cutoff), grid, workers)
            except CutoffError as e:
                logger.warning(
                    f"Photon cutoff {cutoff} too small, retrying",
                    extra={"error_details": {"n_max": cutoff, "error": str(e)}}
                )
                raise

    logger.debug(
        "Solved Lindblad steady states",
        extra={"spectrum_details": {"n_max": cutoff, "points": int(grid.size), "probs": expect.probs}}
    )
    return SpectrumTrace(grid, values, Engine.LINDBLAD.value, expect, annotations={"n_max": str(cutoff)})
