"""Joint probabilities and correlations read off a transmission spectrum.

Two extraction methods:

naive-height
    The trace value at each expected pull, normalized over the four states.
    A state counts only when the trace has a local maximum within kappa/2 of
    its pull; an absent peak is a zero reading.
kernel-deconvolution
    Solves K P = h with K_ij = L(x_i - shift_j), x_i the grid points that were
    read and L the Lorentzian of half-width kappa/2, then clamps and
    renormalizes.
"""
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.signal import find_peaks, peak_widths

from config.device import DispersiveParams
from config.logging_config import get_logger
from quantum.states import BASIS_LABELS, ZZ_SIGNS
from services.spectrometer import SpectrumTrace, pull_array
from utils.exceptions import CoverageError, ReadoutError
from utils.units import to_mhz

logger = get_logger("services.readout")

MERGE_FRACTION = 0.1
PEAK_WINDOW_FRACTION = 0.5
MAX_KERNEL_CONDITION = 1e10


class ExtractionMethod(str, Enum):
    NAIVE = "naive-height"
    KERNEL = "kernel-deconvolution"
    # probabilities taken from the state vector, no spectrum involved
    IDEAL = "ideal"

    @classmethod
    def parse(cls, text: str) -> "ExtractionMethod":
        """Accept the full tags or the short names "naive", "kernel" and "analytic"."""
        key = str(text.value if isinstance(text, Enum) else text).strip().lower()
        if key == "analytic":
            return cls.IDEAL
        for method in cls:
            if key in (method.value, method.value.split("-")[0]):
                return method
        raise ValueError(f"Unknown extraction method {text!r}; expected naive, kernel or analytic")


class PeakRow(BaseModel):
    label: str
    shift: float
    height: float
    probability: float = Field(ge=0, le=1)


class PeakTable(BaseModel):
    """One row per logic state, or per group of coinciding pulls."""
    rows: List[PeakRow]
    method: ExtractionMethod
    annotations: List[str] = Field(default_factory=list)
    residual: Optional[float] = None
    condition_number: Optional[float] = None

    @model_validator(mode="after")
    def _probabilities_sum_to_one(self) -> "PeakTable":
        total = sum(row.probability for row in self.rows)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"Extracted probabilities sum to {total!r}, not 1")
        return self

    @property
    def merged(self) -> bool:
        return any("+" in row.label for row in self.rows)

    def probabilities(self) -> Tuple[float, float, float, float]:
        """Per-state probabilities; a merged reading is shared equally by its members."""
        probs = dict.fromkeys(BASIS_LABELS, 0.0)
        for row in self.rows:
            members = row.label.split("+")
            for label in members:
                probs[label] = row.probability / len(members)
        return tuple(probs[label] for label in BASIS_LABELS)

    def to_text(self) -> str:
        lines = [f"{'state':<8}{'shift/2pi (MHz)':>18}{'height':>16}{'probability':>14}  method"]
        for row in self.rows:
            lines.append(
                f"{row.label:<8}{to_mhz(row.shift):>18.4f}{row.height:>16.6g}{row.probability:>14.6f}  {self.method.value}"
            )
        for note in self.annotations:
            lines.append(f"# {note}")
        return "\n".join(lines)


class CorrelationEstimate(BaseModel):
    """E = (P00 + P11) - (P01 + P10) of its own probabilities."""
    value: float = Field(ge=-1, le=1)
    method: ExtractionMethod
    probs: Tuple[float, float, float, float]

    @model_validator(mode="after")
    def _value_matches_probs(self) -> "CorrelationEstimate":
        if self.value != correlation_value(self.probs):
            raise ValueError(f"Correlation {self.value!r} does not match its probabilities {self.probs}")
        return self

    @classmethod
    def from_probs(cls, probs: Sequence[float], method: ExtractionMethod) -> "CorrelationEstimate":
        probs = tuple(float(p) for p in probs)
        return cls(value=correlation_value(probs), method=method, probs=probs)


def correlation_value(probs: Sequence[float]) -> float:
    p00, p01, p10, p11 = probs
    return min(1.0, max(-1.0, (p00 + p11) - (p01 + p10)))


def _group_pulls(p: DispersiveParams) -> List[List[int]]:
    """Indices of pulls closer than kappa/10, grouped; singletons otherwise."""
    shifts = pull_array(p)
    tolerance = MERGE_FRACTION * p.kappa
    groups: List[List[int]] = []
    for index in np.argsort(shifts, kind="stable"):
        if groups and shifts[index] - shifts[groups[-1][-1]] <= tolerance:
            groups[-1].append(int(index))
        else:
            groups.append([int(index)])
    return sorted(groups, key=lambda group: min(group))


def _check_coverage(trace: SpectrumTrace, p: DispersiveParams):
    for label, shift in zip(BASIS_LABELS, pull_array(p)):
        if not trace.covers(shift):
            raise CoverageError(
                f"Grid [{to_mhz(trace.grid[0]):.3f}, {to_mhz(trace.grid[-1]):.3f}] x 2pi MHz "
                f"does not cover the |{label}> pull at {to_mhz(shift):.3f} x 2pi MHz"
            )


def _label(group: Sequence[int]) -> str:
    return "+".join(BASIS_LABELS[index] for index in group)


def find_local_peaks(trace: SpectrumTrace, prominence: Optional[float] = None) -> np.ndarray:
    """Grid indices of the local maxima of a trace."""
    indices, _ = find_peaks(trace.values, prominence=prominence)
    return indices


def peak_fwhm(trace: SpectrumTrace, index: int) -> float:
    """Full width at half maximum of the peak at a grid index, in rad/ns."""
    _, _, left, right = peak_widths(trace.values, [index], rel_height=0.5)
    positions = np.arange(trace.grid.size)
    return float(np.interp(right[0], positions, trace.grid) - np.interp(left[0], positions, trace.grid))


def _has_peak_near(peak_positions: np.ndarray, shift: float, window: float) -> bool:
    return bool(peak_positions.size) and bool(np.min(np.abs(peak_positions - shift)) <= window)


def _naive_table(trace: SpectrumTrace, p: DispersiveParams, groups: List[List[int]],
                 annotations: List[str]) -> PeakTable:
    shifts = pull_array(p)
    peak_positions = trace.grid[find_local_peaks(trace)]
    window = PEAK_WINDOW_FRACTION * p.kappa

    readings = []
    for group in groups:
        shift = float(np.mean(shifts[group]))
        height = float(trace.values[trace.nearest_index(shift)])
        present = _has_peak_near(peak_positions, shift, window)
        readings.append((group, shift, height, height if present else 0.0))
        if len(group) > 1:
            annotations.append(f"merged {_label(group)} at {to_mhz(shift):.3f} x 2pi MHz")

    total = sum(max(reading, 0.0) for *_, reading in readings)
    if not total > 0:
        raise ReadoutError("No peak found at any expected pull")

    rows = [
        PeakRow(label=_label(group), shift=shift, height=height, probability=max(reading, 0.0) / total)
        for group, shift, height, reading in readings
    ]
    return PeakTable(rows=rows, method=ExtractionMethod.NAIVE, annotations=annotations)


def extract_probs_naive(trace: SpectrumTrace, p: DispersiveParams) -> PeakTable:
    """Relative peak heights at the expected pulls.

    Args:
        trace: Spectrum on a grid covering all four pulls
        p: Dispersive parameters fixing the pulls and the linewidth

    Returns:
        PeakTable: Heights and probabilities tagged naive-height
    """
    _check_coverage(trace, p)
    table = _naive_table(trace, p, _group_pulls(p), [])
    logger.debug("Extracted naive probabilities", extra={"readout_details": table.model_dump()})
    return table


def kernel_matrix(points: np.ndarray, shifts: np.ndarray, kappa: float) -> np.ndarray:
    """K_ij = 1 / ((x_i - shift_j)^2 + kappa^2/4)."""
    return 1.0 / ((points[:, None] - shifts[None, :]) ** 2 + kappa ** 2 / 4)


def extract_probs_kernel(trace: SpectrumTrace, p: DispersiveParams) -> PeakTable:
    """Deconvolve the Lorentzian overlap out of the four height readings.

    Falls back to the merged naive reading when pulls coincide or the kernel
    is ill-conditioned; the fallback is annotated in the table.
    """
    _check_coverage(trace, p)
    groups = _group_pulls(p)
    if any(len(group) > 1 for group in groups):
        table = _naive_table(trace, p, groups, ["kernel fallback: merged peaks"])
        logger.warning("Kernel extraction fell back to naive heights", extra={"readout_details": table.annotations})
        return table

    shifts = pull_array(p)
    indices = [trace.nearest_index(shift) for shift in shifts]
    points = trace.grid[indices]
    heights = trace.values[indices]
    kernel = kernel_matrix(points, shifts, p.kappa)
    condition = float(np.linalg.cond(kernel))
    if condition > MAX_KERNEL_CONDITION:
        table = _naive_table(trace, p, groups, [f"kernel fallback: condition number {condition:.3e}"])
        logger.warning("Kernel extraction fell back to naive heights", extra={"readout_details": table.annotations})
        return table

    try:
        solved = np.linalg.solve(kernel, heights)
    except np.linalg.LinAlgError as e:
        logger.error("Kernel solve failed", extra={"error_details": {"error": str(e), "condition": condition}})
        raise ReadoutError(f"Kernel deconvolution failed: {e}") from e

    clamped = np.clip(solved, 0.0, None)
    residual = float(np.linalg.norm(kernel @ clamped - heights) / np.linalg.norm(heights))
    total = float(np.sum(clamped))
    if not total > 0:
        raise ReadoutError("Kernel deconvolution left no positive probability")

    rows = [
        PeakRow(label=label, shift=float(shift), height=float(height), probability=float(value / total))
        for label, shift, height, value in zip(BASIS_LABELS, shifts, heights, clamped)
    ]
    table = PeakTable(
        rows=rows,
        method=ExtractionMethod.KERNEL,
        residual=residual,
        condition_number=condition,
    )
    logger.debug("Extracted kernel probabilities", extra={"readout_details": table.model_dump()})
    return table


EXTRACTORS = {
    ExtractionMethod.NAIVE: extract_probs_naive,
    ExtractionMethod.KERNEL: extract_probs_kernel,
}


def correlation_from_trace(trace: SpectrumTrace, p: DispersiveParams,
                           method: str = ExtractionMethod.NAIVE) -> CorrelationEstimate:
    """E = P_same - P_diff from the chosen extraction.

    Merged readings are fine as long as every group has one parity.
    """
    method = ExtractionMethod.parse(method)
    if method is ExtractionMethod.IDEAL:
        if trace.state is None:
            raise ReadoutError("Trace does not carry the state it was generated from")
        return CorrelationEstimate.from_probs(trace.state.probs, method)
    table = EXTRACTORS[method](trace, p)
    for row in table.rows:
        parities = {ZZ_SIGNS[BASIS_LABELS.index(label)] for label in row.label.split("+")}
        if len(parities) > 1:
            raise ReadoutError(f"Merged reading {row.label} mixes same- and different-parity states")
    return CorrelationEstimate.from_probs(table.probabilities(), table.method)


def peak_report(trace: SpectrumTrace) -> Dict[str, float]:
    """Diagnostic: position and width of every local maximum, in 2pi MHz."""
    report = {}
    for index in find_local_peaks(trace):
        report[f"{to_mhz(trace.grid[index]):.3f}"] = to_mhz(peak_fwhm(trace, index))
    return report
