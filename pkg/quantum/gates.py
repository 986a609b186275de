"""Single- and two-qubit gates in the exp(+i sigma theta) convention.

Gate equality is equality after global-phase alignment: both matrices are
divided by the phase of the same reference element, the largest-magnitude
element of the first matrix.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config.logging_config import get_logger
from quantum.states import EXACT_ATOL, TwoQubitState
from utils.exceptions import GateError

logger = get_logger("quantum.gates")

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
# sigma_z |0> = +|0>
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _check_unitary(m: np.ndarray, dim: int, kind: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (dim, dim):
        raise GateError(f"{kind} needs a {dim}x{dim} matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise GateError(f"{kind} matrix has non-finite entries")
    deviation = np.max(np.abs(m.conj().T @ m - np.eye(dim)))
    if deviation > EXACT_ATOL:
        raise GateError(f"{kind} matrix is not unitary (max deviation {deviation:.3e})")
    m = m.copy()
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class SingleQubitGate:
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", _check_unitary(self.m, 2, "SingleQubitGate"))

    def __matmul__(self, other: "SingleQubitGate") -> "SingleQubitGate":
        return SingleQubitGate(self.m @ other.m)


@dataclass(frozen=True)
class TwoQubitGate:
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", _check_unitary(self.m, 4, "TwoQubitGate"))

    def __matmul__(self, other: "TwoQubitGate") -> "TwoQubitGate":
        return TwoQubitGate(self.m @ other.m)

    @classmethod
    def local(cls, first: SingleQubitGate, second: SingleQubitGate) -> "TwoQubitGate":
        """first (x) second, first acting on qubit 1."""
        return cls(np.kron(first.m, second.m))


def identity() -> SingleQubitGate:
    return SingleQubitGate(I2)


def rx(theta: float) -> SingleQubitGate:
    """exp(i sigma_x theta)."""
    return SingleQubitGate(np.cos(theta) * I2 + 1j * np.sin(theta) * SIGMA_X)


def ry(theta: float) -> SingleQubitGate:
    """exp(i sigma_y theta)."""
    return SingleQubitGate(np.cos(theta) * I2 + 1j * np.sin(theta) * SIGMA_Y)


def rz(theta: float) -> SingleQubitGate:
    """exp(i sigma_z theta) = diag(e^{i theta}, e^{-i theta})."""
    return SingleQubitGate(np.diag([np.exp(1j * theta), np.exp(-1j * theta)]))


def hadamard_like(theta: float) -> SingleQubitGate:
    """Encoding rotation rz(theta/2) rx(pi/4) rz(-theta/2) in closed form."""
    return SingleQubitGate(np.array([
        [1, 1j * np.exp(1j * theta)],
        [1j * np.exp(-1j * theta), 1],
    ]) / np.sqrt(2))


def decomposed_ry(theta: float) -> SingleQubitGate:
    """The rx/rz product used on hardware for ry(3pi/4) and ry(pi/4).

    Equal to ry(theta) only up to a global phase.
    """
    if np.isclose(theta, 3 * np.pi / 4):
        return rx(np.pi / 4) @ rz(3 * np.pi / 4) @ rx(3 * np.pi / 4)
    if np.isclose(theta, np.pi / 4):
        return rz(np.pi / 4) @ rx(3 * np.pi / 4) @ rz(3 * np.pi / 4)
    raise GateError(f"No rx/rz decomposition known for ry({theta!r})")


def iswap() -> TwoQubitGate:
    return TwoQubitGate(np.array([
        [1, 0, 0, 0],
        [0, 0, 1j, 0],
        [0, 1j, 0, 0],
        [0, 0, 0, 1],
    ]))


def dispersive_phase(n_photon: float) -> float:
    """delta = 6 pi (n + 1/2) accumulated over the iSWAP duration."""
    if n_photon < 0:
        raise GateError(f"Mean photon number must be nonnegative, got {n_photon!r}")
    return 6 * np.pi * (n_photon + 0.5)


def dispersive_two_qubit_gate(n_photon: float) -> TwoQubitGate:
    """Gate generated by the dispersive XY interaction for the iSWAP duration."""
    delta = dispersive_phase(n_photon)
    return TwoQubitGate(np.array([
        [np.exp(1j * delta), 0, 0, 0],
        [0, 0, 1j, 0],
        [0, 1j, 0, 0],
        [0, 0, 0, np.exp(-1j * delta)],
    ]))


def phase_correction(n_photon: float) -> SingleQubitGate:
    """|0> -> e^{-i delta/2}|0>, |1> -> e^{i delta/2}|1>; applied to both qubits."""
    return rz(-dispersive_phase(n_photon) / 2)


def corrected_two_qubit_gate(n_photon: float) -> TwoQubitGate:
    correction = phase_correction(n_photon)
    return TwoQubitGate.local(correction, correction) @ dispersive_two_qubit_gate(n_photon)


def effective_xy_hamiltonian(g: float, delta: float, n_photon: float) -> np.ndarray:
    """Dispersive two-qubit Hamiltonian for equal couplings and detunings."""
    z_sum = np.kron(SIGMA_Z, I2) + np.kron(I2, SIGMA_Z)
    xy = np.kron(SIGMA_X, SIGMA_X) + np.kron(SIGMA_Y, SIGMA_Y)
    return -(g ** 2 / (2 * delta)) * (4 * (n_photon + 0.5) * z_sum - xy)


def evolve(hamiltonian: np.ndarray, t: float) -> TwoQubitGate:
    """exp(-i H t) for a Hermitian 4x4 Hamiltonian, via its eigendecomposition."""
    energies, vectors = np.linalg.eigh(np.asarray(hamiltonian, dtype=complex))
    return TwoQubitGate(vectors @ np.diag(np.exp(-1j * energies * t)) @ vectors.conj().T)


def embed(gate: SingleQubitGate, which: int) -> TwoQubitGate:
    """gate (x) I for qubit 1, I (x) gate for qubit 2."""
    if which == 1:
        return TwoQubitGate(np.kron(gate.m, I2))
    if which == 2:
        return TwoQubitGate(np.kron(I2, gate.m))
    raise GateError(f"Qubit index must be 1 or 2, got {which!r}")


def apply_single(gate: SingleQubitGate, which: int, s: TwoQubitState) -> TwoQubitState:
    return apply_two(embed(gate, which), s)


def apply_two(gate: TwoQubitGate, s: TwoQubitState) -> TwoQubitState:
    return TwoQubitState(gate.m @ s.amps)


def global_phase_aligned(m: np.ndarray, ref_index: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Divide m by the phase of its reference element (largest magnitude by default)."""
    m = np.asarray(m, dtype=complex)
    if ref_index is None:
        ref_index = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    ref = m[ref_index]
    if ref == 0:
        raise GateError("Cannot align the global phase on a zero reference element")
    return m / (ref / abs(ref))


def phase_deviation(a, b) -> float:
    """Max element deviation between two matrices after global-phase alignment."""
    a_m = a.m if hasattr(a, "m") else np.asarray(a, dtype=complex)
    b_m = b.m if hasattr(b, "m") else np.asarray(b, dtype=complex)
    ref_index = np.unravel_index(np.argmax(np.abs(a_m)), a_m.shape)
    return float(np.max(np.abs(global_phase_aligned(a_m, ref_index) - global_phase_aligned(b_m, ref_index))))


def equal_up_to_phase(a, b, atol: float = EXACT_ATOL) -> bool:
    deviation = phase_deviation(a, b)
    if deviation >= atol:
        logger.debug(f"Gates differ after phase alignment by {deviation:.3e}")
    return deviation < atol
