"""CHSH test: prepare, encode, measure the spectrum, extract E, combine.

f = |E(t1, t2) + E(t1', t2) + E(t1, t2') - E(t1', t2')|
"""
import concurrent.futures
import math
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, model_validator

from config.device import DeviceConfig, DispersiveParams
from config.logging_config import get_logger
from quantum.bell import AngleSet, analytic_correlation, encode, prepare_bell
from quantum.states import expectations
from services.readout import EXTRACTORS, CorrelationEstimate, ExtractionMethod, PeakTable, correlation_from_trace
from services.spectrometer import ClosedFormVariant, CORRECTED, Engine, Spectrometer
from utils.exceptions import ConfigurationError

logger = get_logger("services.chsh_harness")

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2 * math.sqrt(2)
# f must exceed the classical bound by more than rounding to count as a violation
VERDICT_TOLERANCE = 1e-9
MIN_SCAN_POINTS = 16

PAIR_SIGNS = {
    "theta1_theta2": 1.0,
    "theta1p_theta2": 1.0,
    "theta1_theta2p": 1.0,
    "theta1p_theta2p": -1.0,
}


def chsh_value(correlations: Dict[str, float]) -> float:
    return abs(sum(PAIR_SIGNS[key] * correlations[key] for key in PAIR_SIGNS))


def is_violation(f: float) -> bool:
    return f > CLASSICAL_BOUND + VERDICT_TOLERANCE


class ChshReport(BaseModel):
    """Four correlations, the CHSH value they give, and the analytic value for comparison."""
    angles: Tuple[float, float, float, float]
    correlations: Dict[str, CorrelationEstimate]
    f: float
    analytic_f: float
    violated: bool
    method: ExtractionMethod
    engine: Optional[str] = None

    @model_validator(mode="after")
    def _consistent(self) -> "ChshReport":
        if set(self.correlations) != set(PAIR_SIGNS):
            raise ValueError(f"Report needs correlations for {sorted(PAIR_SIGNS)}")
        if self.f != chsh_value(self.values()):
            raise ValueError(f"CHSH value {self.f!r} does not match its correlations")
        if self.violated != is_violation(self.f):
            raise ValueError("Verdict does not match the CHSH value")
        return self

    @property
    def angle_set(self) -> AngleSet:
        return AngleSet(*self.angles)

    def values(self) -> Dict[str, float]:
        return {key: estimate.value for key, estimate in self.correlations.items()}

    def to_record(self) -> Dict:
        record = self.model_dump(mode="json")
        record["angles_reduced"] = list(self.angle_set.reduced())
        return record

    def to_text(self) -> str:
        lines = ["CHSH report", ""]
        names = ("theta1", "theta2", "theta1'", "theta2'")
        for name, raw, reduced in zip(names, self.angles, self.angle_set.reduced()):
            lines.append(f"{name:<8} = {raw:.6f} rad ({reduced / math.pi:.4f} pi mod 2pi)")
        lines.append("")
        for key in PAIR_SIGNS:
            estimate = self.correlations[key]
            probs = ", ".join(f"{p:.6f}" for p in estimate.probs)
            lines.append(f"E({key:<16}) = {estimate.value:+.6f}   P = ({probs})")
        lines.append("")
        lines.append(f"method     : {self.method.value}")
        if self.engine:
            lines.append(f"engine     : {self.engine}")
        lines.append(f"f          : {self.f:.6f}")
        lines.append(f"analytic f : {self.analytic_f:.6f}")
        lines.append(f"verdict    : {'violated' if self.violated else 'not violated'} (classical bound 2)")
        return "\n".join(lines)


def chsh_analytic(a: AngleSet) -> float:
    """|cos(t1+t2) + cos(t1'+t2) + cos(t1+t2') - cos(t1'+t2')|."""
    return chsh_value({key: analytic_correlation(*pair) for key, pair in a.pairs().items()})


def _dispersive(params: Union[DeviceConfig, DispersiveParams]) -> DispersiveParams:
    return params.dispersive_params() if isinstance(params, DeviceConfig) else params


class ChshHarness:
    """Runs the measurement pipeline for angle pairs on one device."""

    def __init__(self, params: Union[DeviceConfig, DispersiveParams], method: str = ExtractionMethod.NAIVE,
                 engine: str = Engine.LORENTZIAN, grid: Optional[np.ndarray] = None, workers: int = 1,
                 variant: ClosedFormVariant = CORRECTED):
        self.params = _dispersive(params)
        self.method = ExtractionMethod.parse(method)
        self.engine = Engine(engine)
        self.spectrometer = Spectrometer(self.params, grid=grid, workers=workers, variant=variant)

    def correlation(self, theta1: float, theta2: float) -> CorrelationEstimate:
        """E for one angle pair on a freshly prepared Bell state."""
        encoded = encode(prepare_bell(), theta1, theta2)
        if self.method is ExtractionMethod.IDEAL:
            return CorrelationEstimate.from_probs(expectations(encoded).probs, self.method)
        trace = self.spectrometer.trace(encoded, self.engine)
        return correlation_from_trace(trace, self.params, self.method)

    def peak_tables(self, a: AngleSet) -> Dict[str, PeakTable]:
        """The extracted peak table behind each of the four correlations."""
        if self.method is ExtractionMethod.IDEAL:
            raise ConfigurationError("The analytic method reads no spectrum and has no peak tables")
        tables = {}
        for key, (theta1, theta2) in a.pairs().items():
            trace = self.spectrometer.trace(encode(prepare_bell(), theta1, theta2), self.engine)
            tables[key] = EXTRACTORS[self.method](trace, self.params)
        return tables

    def run(self, a: AngleSet) -> ChshReport:
        pairs = a.pairs()
        with concurrent.futures.ThreadPoolExecutor(max_workers=len(pairs)) as executor:
            futures = {key: executor.submit(self.correlation, *pair) for key, pair in pairs.items()}
            correlations = {key: futures[key].result() for key in PAIR_SIGNS}

        f = chsh_value({key: estimate.value for key, estimate in correlations.items()})
        report = ChshReport(
            angles=a.as_tuple(),
            correlations=correlations,
            f=f,
            analytic_f=chsh_analytic(a),
            violated=is_violation(f),
            method=self.method,
            engine=None if self.method is ExtractionMethod.IDEAL else self.engine.value,
        )
        logger.info(
            f"CHSH f = {f:.4f} ({self.method.value})",
            extra={"chsh_details": {"angles": a.as_tuple(), "correlations": report.values(),
                                    "f": f, "analytic_f": report.analytic_f}}
        )
        return report


def chsh_simulated(a: AngleSet, params: Union[DeviceConfig, DispersiveParams],
                   method: str = ExtractionMethod.NAIVE, engine: str = Engine.LORENTZIAN,
                   grid: Optional[np.ndarray] = None, workers: int = 1) -> ChshReport:
    """Full pipeline for the four angle pairs.

    Args:
        a: The four local variables
        params: Device config or dispersive parameters
        method: naive, kernel or analytic (ideal probabilities)
        engine: Spectrum engine for the simulated measurement
        grid: Detuning grid, defaults to the standard grid
        workers: Threads per spectrum sweep

    Returns:
        ChshReport: Correlations, f, analytic f and verdict
    """
    return ChshHarness(params, method, engine, grid, workers).run(a)


class ScanResult(BaseModel):
    best: ChshReport
    landscape: List[Tuple[float, float, float, float, float]]
    points: int
    tie_primed: bool


def scan_angles(points: int) -> np.ndarray:
    if points < MIN_SCAN_POINTS:
        raise ConfigurationError(f"A CHSH scan needs at least {MIN_SCAN_POINTS} points per angle, got {points}")
    return np.linspace(0.0, 2 * np.pi, points, endpoint=False)


def correlation_table(thetas: np.ndarray, harness: ChshHarness) -> np.ndarray:
    """E[i, j] = E(theta_i on qubit 1, theta_j on qubit 2)."""
    table = np.empty((thetas.size, thetas.size))
    for i, theta1 in enumerate(thetas):
        for j, theta2 in enumerate(thetas):
            table[i, j] = harness.correlation(theta1, theta2).value
    return table


def chsh_scan(params: Union[DeviceConfig, DispersiveParams], method: str = ExtractionMethod.IDEAL,
              points: int = MIN_SCAN_POINTS, tie_primed: bool = False,
              engine: str = Engine.LORENTZIAN, grid: Optional[np.ndarray] = None) -> ScanResult:
    """Maximize f over a uniform angle grid.

    Every angle pair is measured once; f over all angle quadruples is then
    assembled from the table of correlations. With tie_primed the primed
    angles equal the unprimed ones and f reduces to 2|E|.
    """
    harness = ChshHarness(params, method, engine, grid)
    thetas = scan_angles(points)
    table = correlation_table(thetas, harness)

    if tie_primed:
        f = np.abs(2 * table)
        i, j = np.unravel_index(int(np.argmax(f)), f.shape)
        best = AngleSet(thetas[i], thetas[j], thetas[i], thetas[j])
        landscape = [
            (float(thetas[a]), float(thetas[b]), float(thetas[a]), float(thetas[b]), float(f[a, b]))
            for a in range(points) for b in range(points)
        ]
    else:
        # axes (i, j, k, l) index theta1, theta2, theta1', theta2'
        f = np.abs(
            table[:, :, None, None]
            + table.T[None, :, :, None]
            + table[:, None, None, :]
            - table[None, None, :, :]
        )
        i, j, k, l = np.unravel_index(int(np.argmax(f)), f.shape)
        best = AngleSet(thetas[i], thetas[j], thetas[k], thetas[l])
        grids = np.meshgrid(thetas, thetas, thetas, thetas, indexing="ij")
        landscape = [tuple(float(v) for v in row) for row in
                     np.column_stack([axis.reshape(-1) for axis in grids] + [f.reshape(-1)])]

    report = harness.run(best)
    logger.info(
        f"CHSH scan maximum f = {report.f:.4f}",
        extra={"chsh_details": {"points": points, "tie_primed": tie_primed, "best": best.as_tuple()}}
    )
    return ScanResult(best=report, landscape=landscape, points=points, tie_primed=tie_primed)
