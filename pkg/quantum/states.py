"""Two-qubit state vectors and their measurement statistics.

Basis order is fixed as |00>, |01>, |10>, |11> with qubit 1 the left
(most significant) label. sigma_z has eigenvalue +1 on |0>.
"""
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from utils.exceptions import StateError

EXACT_ATOL = 1e-12

BASIS_LABELS = ("00", "01", "10", "11")

# sigma_z eigenvalues of qubit 1 and qubit 2 per basis index
Z1_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])
Z2_SIGNS = np.array([1.0, -1.0, 1.0, -1.0])
ZZ_SIGNS = Z1_SIGNS * Z2_SIGNS


class Expectations(NamedTuple):
    z1: float
    z2: float
    zz: float
    probs: Tuple[float, float, float, float]


@dataclass(frozen=True)
class TwoQubitState:
    """Normalized 4-component complex amplitude vector."""
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.shape != (4,):
            raise StateError(f"A two-qubit state needs 4 amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise StateError("State amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > EXACT_ATOL:
            raise StateError(f"State is not normalized: sum |amp|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex], normalize: bool = False) -> "TwoQubitState":
        vector = np.asarray(amps, dtype=complex)
        if normalize:
            norm = np.linalg.norm(vector)
            if norm == 0:
                raise StateError("Cannot normalize the zero vector")
            vector = vector / norm
        return cls(vector)

    @classmethod
    def basis(cls, label: str) -> "TwoQubitState":
        """Computational basis state, e.g. basis("01")."""
        if label not in BASIS_LABELS:
            raise StateError(f"Unknown basis label {label!r}; expected one of {BASIS_LABELS}")
        vector = np.zeros(4, dtype=complex)
        vector[BASIS_LABELS.index(label)] = 1.0
        return cls(vector)

    @classmethod
    def product(cls, first: Sequence[complex], second: Sequence[complex]) -> "TwoQubitState":
        """Tensor product of two normalized single-qubit vectors."""
        return cls.from_amplitudes(np.kron(np.asarray(first, dtype=complex),
                                           np.asarray(second, dtype=complex)), normalize=True)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def inner(self, other: "TwoQubitState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amps, other.amps))

    def with_phase(self, phase: float) -> "TwoQubitState":
        return TwoQubitState(self.amps * np.exp(1j * phase))


def fidelity(a: TwoQubitState, b: TwoQubitState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return abs(a.inner(b)) ** 2


def expectations(s: TwoQubitState) -> Expectations:
    """<sigma_z1>, <sigma_z2>, <sigma_z1 sigma_z2> and the basis probabilities."""
    probs = s.probabilities()
    return Expectations(
        z1=float(Z1_SIGNS @ probs),
        z2=float(Z2_SIGNS @ probs),
        zz=float(ZZ_SIGNS @ probs),
        probs=tuple(float(p) for p in probs),
    )


def random_state(rng: np.random.Generator) -> TwoQubitState:
    """Haar-random two-qubit state."""
    vector = rng.normal(size=4) + 1j * rng.normal(size=4)
    return TwoQubitState.from_amplitudes(vector, normalize=True)


def random_product_state(rng: np.random.Generator) -> TwoQubitState:
    first = rng.normal(size=2) + 1j * rng.normal(size=2)
    second = rng.normal(size=2) + 1j * rng.normal(size=2)
    return TwoQubitState.product(first / np.linalg.norm(first), second / np.linalg.norm(second))
