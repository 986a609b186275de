"""Steady-state transmission spectra of the dispersively pulled resonator.

Each sigma_z eigenstate |kl> shifts the resonator by shift_kl = z1*Gamma1 + z2*Gamma2,
so the spectrum is a probability-weighted sum of Lorentzians of half-width
kappa/2. The closed-form route evaluates the same sum as one rational function.
"""
import concurrent.futures
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from config.device import DispersiveParams
from config.logging_config import get_logger
from config.settings import DEFAULT_GRID_MAX_MHZ, DEFAULT_GRID_MIN_MHZ, DEFAULT_GRID_POINTS
from quantum.states import BASIS_LABELS, Expectations, TwoQubitState, Z1_SIGNS, Z2_SIGNS, expectations
from utils.exceptions import ConfigurationError, SingularPointError, TraceFormatError
from utils.units import mhz

logger = get_logger("services.spectrometer")


class Engine(str, Enum):
    CLOSED_FORM = "closed-form"
    LORENTZIAN = "lorentzian"
    LINDBLAD = "lindblad"


@dataclass(frozen=True)
class ClosedFormVariant:
    """Switches between the corrected closed form and its uncorrected variants.

    a_term: "squared" uses (Gamma1^2 - Gamma2^2)^2 as the first term of A,
        "linear" the unsquared difference.
    odd_sign: "pull" gives the sigma_z-linear terms of C and D the sign that
        puts |00> at +(Gamma1 + Gamma2); "flipped" flips them, which mirrors
        the spectrum about zero detuning.
    """
    a_term: str = "squared"
    odd_sign: str = "pull"

    def __post_init__(self):
        if self.a_term not in ("squared", "linear"):
            raise ConfigurationError(f"a_term must be 'squared' or 'linear', got {self.a_term!r}")
        if self.odd_sign not in ("pull", "flipped"):
            raise ConfigurationError(f"odd_sign must be 'pull' or 'flipped', got {self.odd_sign!r}")

    @property
    def is_corrected(self) -> bool:
        return self.a_term == "squared" and self.odd_sign == "pull"


CORRECTED = ClosedFormVariant()
UNCORRECTED = ClosedFormVariant(a_term="linear", odd_sign="flipped")


@dataclass(frozen=True)
class SpectrumTrace:
    """S_ss sampled on a strictly increasing detuning grid (rad/ns)."""
    grid: np.ndarray
    values: np.ndarray
    provenance: str
    state: Optional[Expectations] = None
    normalized: bool = False
    annotations: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if grid.size == 0:
            raise ConfigurationError("Spectrum grid is empty")
        if grid.shape != values.shape:
            raise TraceFormatError(f"Grid has {grid.size} points but trace has {values.size} values")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise TraceFormatError("Spectrum grid must be strictly increasing")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise TraceFormatError("Spectrum grid and values must be finite")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def covers(self, delta_r: float) -> bool:
        return self.grid[0] <= delta_r <= self.grid[-1]

    def nearest_index(self, delta_r: float) -> int:
        return int(np.argmin(np.abs(self.grid - delta_r)))

    def peak_position(self) -> float:
        return float(self.grid[int(np.argmax(self.values))])


def make_grid(min_mhz: float = DEFAULT_GRID_MIN_MHZ, max_mhz: float = DEFAULT_GRID_MAX_MHZ,
              points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Detuning grid in rad/ns from bounds given as ordinary frequency in MHz."""
    if points < 2:
        raise ConfigurationError(f"A spectrum grid needs at least 2 points, got {points}")
    if not max_mhz > min_mhz:
        raise ConfigurationError(f"Grid bounds must satisfy min < max, got [{min_mhz}, {max_mhz}] MHz")
    return np.linspace(mhz(min_mhz), mhz(max_mhz), points)


def default_grid() -> np.ndarray:
    """[-25, 25] x 2pi MHz in 2001 points (step kappa/40 for kappa = 2pi x 1 MHz)."""
    return make_grid()


def pulls(p: DispersiveParams) -> Dict[str, float]:
    """Resonator shift per logic state: |00> -> +G1+G2, |01> -> +G1-G2, |10> -> -G1+G2, |11> -> -G1-G2."""
    shifts = pull_array(p)
    return {label: float(shift) for label, shift in zip(BASIS_LABELS, shifts)}


def pull_array(p: DispersiveParams) -> np.ndarray:
    return Z1_SIGNS * p.gamma1 + Z2_SIGNS * p.gamma2


def lorentzian_values(probs: Sequence[float], p: DispersiveParams, grid: np.ndarray) -> np.ndarray:
    """sum_k P_k / ((delta_r - shift_k)^2 + kappa^2/4)."""
    grid = np.asarray(grid, dtype=float)
    detuning = grid[:, None] - pull_array(p)[None, :]
    return (1.0 / (detuning ** 2 + p.kappa ** 2 / 4)) @ np.asarray(probs, dtype=float)


def closed_form_values(expect: Expectations, p: DispersiveParams, grid: np.ndarray,
                       variant: ClosedFormVariant = CORRECTED) -> np.ndarray:
    """S_ss = -2(AC + BD) / (kappa (A^2 + B^2)) on every grid point."""
    x = np.asarray(grid, dtype=float)
    g1, g2, kappa = p.gamma1, p.gamma2, p.kappa
    k4 = kappa ** 2 / 4
    g_sq = g1 ** 2 + g2 ** 2
    g_diff = g1 ** 2 - g2 ** 2

    first = g_diff ** 2 if variant.a_term == "squared" else g_diff
    a = first + 2 * (k4 - x ** 2) * g_sq + (k4 - x ** 2) ** 2 - kappa ** 2 * x ** 2
    b = -2 * kappa * x * (g_sq + k4 - x ** 2)

    odd = 1.0 if variant.odd_sign == "pull" else -1.0
    z1, z2, zz = expect.z1, expect.z2, expect.zz
    c = (kappa * zz * g1 * g2
         + odd * kappa * x * (z1 * g1 + z2 * g2)
         + kappa / 2 * (3 * x ** 2 - k4 - g_sq))
    d = (-2 * zz * x * g1 * g2
         + odd * (z1 * g1 * (g1 ** 2 - g2 ** 2 + k4 - x ** 2) + z2 * g2 * (g2 ** 2 - g1 ** 2 + k4 - x ** 2))
         + x * (g_sq + 3 * k4 - x ** 2))

    denominator = a ** 2 + b ** 2
    bad = ~(denominator > 0) | ~np.isfinite(denominator)
    if np.any(bad):
        raise SingularPointError(float(x[np.argmax(bad)]))
    return -2 * (a * c + b * d) / (kappa * denominator)


def sweep(fn: Callable[[np.ndarray], np.ndarray], grid: np.ndarray, workers: int = 1) -> np.ndarray:
    """Evaluate fn over the grid split into contiguous chunks.

    Chunks may finish in any order; results are placed by chunk index so the
    assembled trace does not depend on the partitioning.
    """
    grid = np.asarray(grid, dtype=float)
    workers = max(1, min(int(workers), grid.size))
    if workers == 1:
        return np.asarray(fn(grid), dtype=float)

    chunks = np.array_split(np.arange(grid.size), workers)
    values = np.empty(grid.size, dtype=float)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(fn, grid[chunk]): chunk for chunk in chunks}
        for future in concurrent.futures.as_completed(futures):
            values[futures[future]] = future.result()
    return values


def closed_form_spectrum(s: TwoQubitState, p: DispersiveParams, grid: np.ndarray,
                         variant: ClosedFormVariant = CORRECTED, workers: int = 1) -> SpectrumTrace:
    expect = expectations(s)
    values = sweep(lambda chunk: closed_form_values(expect, p, chunk, variant), grid, workers)
    annotations = {} if variant.is_corrected else {"variant": f"a_term={variant.a_term},odd_sign={variant.odd_sign}"}
    return SpectrumTrace(grid, values, Engine.CLOSED_FORM.value, expect, annotations=annotations)


def lorentzian_spectrum(s: TwoQubitState, p: DispersiveParams, grid: np.ndarray,
                        workers: int = 1) -> SpectrumTrace:
    expect = expectations(s)
    values = sweep(lambda chunk: lorentzian_values(expect.probs, p, chunk), grid, workers)
    return SpectrumTrace(grid, values, Engine.LORENTZIAN.value, expect)


def normalize(trace: SpectrumTrace) -> SpectrumTrace:
    """Rescale so the maximum value is 1."""
    peak = float(np.max(trace.values))
    if not peak > 0:
        raise TraceFormatError(f"Cannot normalize a {trace.provenance} trace with maximum {peak!r}")
    return replace(trace, values=trace.values / peak, normalized=True)


def max_deviation(first: SpectrumTrace, second: SpectrumTrace) -> float:
    """Largest pointwise difference of two traces after normalization."""
    if first.grid.shape != second.grid.shape or not np.allclose(first.grid, second.grid, rtol=0, atol=1e-15):
        raise TraceFormatError("Traces must share a grid to be compared")
    return float(np.max(np.abs(normalize(first).values - normalize(second).values)))


def pairwise_deviations(traces: Dict[str, SpectrumTrace]) -> Dict[str, float]:
    """max_deviation for every pair of named traces, keyed "first|second"."""
    names = list(traces)
    return {
        f"{first}|{second}": max_deviation(traces[first], traces[second])
        for i, first in enumerate(names) for second in names[i + 1:]
    }


class Spectrometer:
    """Produces spectra of one device on one grid with any of the three engines."""

    def __init__(self, params: DispersiveParams, grid: Optional[np.ndarray] = None, workers: int = 1,
                 variant: ClosedFormVariant = CORRECTED, n_max: Optional[int] = None):
        self.params = params
        self.grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
        self.workers = workers
        self.variant = variant
        self.n_max = n_max

    def trace(self, s: TwoQubitState, engine: str = Engine.LORENTZIAN) -> SpectrumTrace:
        engine = Engine(engine)
        try:
            if engine is Engine.CLOSED_FORM:
                trace = closed_form_spectrum(s, self.params, self.grid, self.variant, self.workers)
            elif engine is Engine.LORENTZIAN:
                trace = lorentzian_spectrum(s, self.params, self.grid, self.workers)
            else:
                # services.lindblad imports this module
                from services.lindblad import lindblad_spectrum
                kwargs = {} if self.n_max is None else {"n_max": self.n_max}
                trace = lindblad_spectrum(s, self.params, self.grid, workers=self.workers, **kwargs)
        except SingularPointError as e:
            logger.error(
                f"Closed-form spectrum is singular at {e.delta_r!r} rad/ns",
                extra={"error_details": {"engine": engine.value, "delta_r": e.delta_r}}
            )
            raise

        logger.debug(
            f"Computed {engine.value} spectrum",
            extra={"spectrum_details": {
                "engine": engine.value,
                "points": int(self.grid.size),
                "probs": trace.state.probs if trace.state else None,
                "peak_at": trace.peak_position(),
            }}
        )
        return trace

    def compare(self, s: TwoQubitState) -> Dict[str, float]:
        """Max normalized deviation of each engine pair on the same state."""
        return pairwise_deviations({engine.value: self.trace(s, engine) for engine in Engine})
