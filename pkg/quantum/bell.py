"""Bell-state generation, interference confirmation and the theta encoding."""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from config.logging_config import get_logger
from quantum.gates import (
    apply_single,
    apply_two,
    hadamard_like,
    iswap,
    rx,
    ry,
    rz,
)
from quantum.states import TwoQubitState, expectations

logger = get_logger("quantum.bell")

Probabilities = Tuple[float, float, float, float]


class BellLabel(str, Enum):
    PHI_PLUS = "phi-plus"
    PHI_MINUS = "phi-minus"
    PSI_PLUS = "psi-plus"
    PSI_MINUS = "psi-minus"

    @classmethod
    def parse(cls, text: str) -> "BellLabel":
        """Accept "phi-minus", "phi_minus", "phi-" or "Φ−" style names."""
        key = text.strip().lower().replace("_", "-").replace("φ", "phi").replace("ψ", "psi").replace("−", "-")
        key = key.replace("+", "-plus") if key.endswith("+") else key
        if key.endswith("-") and not key.endswith("--"):
            key = key[:-1] + "-minus"
        key = key.replace("--", "-")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"Unknown Bell label {text!r}; expected one of {[label.value for label in cls]}") from None


_BELL_VECTORS = {
    BellLabel.PHI_PLUS: np.array([1, 0, 0, 1]) / np.sqrt(2),
    BellLabel.PHI_MINUS: np.array([1, 0, 0, -1]) / np.sqrt(2),
    BellLabel.PSI_PLUS: np.array([0, 1, 1, 0]) / np.sqrt(2),
    BellLabel.PSI_MINUS: np.array([0, 1, -1, 0]) / np.sqrt(2),
}


def bell_state(label: BellLabel) -> TwoQubitState:
    """Ideal reference vector for a Bell label."""
    return TwoQubitState(_BELL_VECTORS[BellLabel(label)])


@dataclass(frozen=True)
class AngleSet:
    """Classical local variables (theta1, theta2, theta1', theta2') in radians."""
    theta1: float
    theta2: float
    theta1p: float
    theta2p: float

    def __post_init__(self):
        if not all(np.isfinite(value) for value in self.as_tuple()):
            raise ValueError(f"Angles must be finite, got {self.as_tuple()}")

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.theta1, self.theta2, self.theta1p, self.theta2p)

    def reduced(self) -> Tuple[float, float, float, float]:
        """Angles reduced mod 2 pi, for reporting only."""
        return tuple(float(np.mod(value, 2 * np.pi)) for value in self.as_tuple())

    def pairs(self) -> Dict[str, Tuple[float, float]]:
        """The four angle pairs entering the CHSH combination, keyed in report order."""
        return {
            "theta1_theta2": (self.theta1, self.theta2),
            "theta1p_theta2": (self.theta1p, self.theta2),
            "theta1_theta2p": (self.theta1, self.theta2p),
            "theta1p_theta2p": (self.theta1p, self.theta2p),
        }


def generation_trace() -> Dict[str, TwoQubitState]:
    """Named intermediate states of the three-step sequence from |00>."""
    initial = TwoQubitState.basis("00")
    step1 = apply_single(rx(np.pi / 4), 2, apply_single(rx(np.pi / 4), 1, initial))
    step2 = apply_two(iswap(), step1)
    step3 = apply_single(ry(3 * np.pi / 4), 1, step2)
    return {"initial": initial, "superposed": step1, "entangled": step2, "bell": step3}


def prepare_bell(label: BellLabel = BellLabel.PHI_MINUS) -> TwoQubitState:
    """Prepare a Bell state; Phi- by the three-step sequence, others by post-rotations.

    The sequence yields -|Phi->; the other labels follow up to global phase:
    Phi+ by rz(pi/2) on qubit 1, Psi- by rx(pi/2) on qubit 2, Psi+ by both.
    """
    label = BellLabel(label)
    state = generation_trace()["bell"]
    if label in (BellLabel.PSI_MINUS, BellLabel.PSI_PLUS):
        state = apply_single(rx(np.pi / 2), 2, state)
    if label in (BellLabel.PHI_PLUS, BellLabel.PSI_PLUS):
        state = apply_single(rz(np.pi / 2), 1, state)
    logger.debug(f"Prepared Bell state {label.value}", extra={"amplitudes": state.amps})
    return state


def rotate_for_confirmation(s: TwoQubitState) -> TwoQubitState:
    """ry(pi/4) on each qubit."""
    return apply_single(ry(np.pi / 4), 2, apply_single(ry(np.pi / 4), 1, s))


def confirm_projective(s: TwoQubitState) -> Tuple[Probabilities, Probabilities]:
    """Direct and post-rotation computational-basis probabilities."""
    direct = expectations(s).probs
    rotated = expectations(rotate_for_confirmation(s)).probs
    return direct, rotated


def confirm_mixture_baseline() -> Tuple[Probabilities, Probabilities]:
    """Confirmation statistics of the equal |00>/|11> mixture, by averaging pure-state results."""
    results = [confirm_projective(TwoQubitState.basis(label)) for label in ("00", "11")]
    direct = tuple(float(v) for v in np.mean([r[0] for r in results], axis=0))
    rotated = tuple(float(v) for v in np.mean([r[1] for r in results], axis=0))
    return direct, rotated


def encode(s: TwoQubitState, theta1: float, theta2: float) -> TwoQubitState:
    """Hadamard-like encoding of the local variables on both qubits."""
    return apply_single(hadamard_like(theta2), 2, apply_single(hadamard_like(theta1), 1, s))


def analytic_correlation(theta1: float, theta2: float) -> float:
    return float(np.cos(theta1 + theta2))
