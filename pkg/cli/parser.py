"""Argument parsing and the small text formats accepted on the command line."""
import argparse
import math
import re
from typing import Optional, Sequence

import numpy as np

from config.settings import (
    ANGLE_PRESETS,
    BELLQED_LOG_DIR,
    BELLQED_LOG_LEVEL,
    DEFAULT_GRID_MAX_MHZ,
    DEFAULT_GRID_MIN_MHZ,
    DEFAULT_GRID_POINTS,
    DEFAULT_PHOTON_CUTOFF,
    TOOL_VERSION,
    get_output_dir,
    get_sweep_workers,
    is_known_preset,
)
from quantum.bell import AngleSet, BellLabel, bell_state, encode, prepare_bell
from quantum.states import TwoQubitState, random_state
from utils.exceptions import UsageError

STATE_HELP = (
    "bell:<label> (prepared by the gate sequence), ideal:<label>, basis:<00|01|10|11>, "
    "encoded:<theta1>,<theta2>, amps:<a00>,<a01>,<a10>,<a11> (complex literals, normalized), "
    "random:<seed>"
)

_ANGLE = re.compile(r"^\s*([-+]?[0-9.]*(?:e[-+]?[0-9]+)?)\s*\*?\s*(pi)?\s*(?:/\s*([0-9.]+))?\s*$", re.IGNORECASE)


def parse_angle(text: str) -> float:
    """Radians from "0.785", "pi/4", "3pi/4", "7*pi/4" or "-pi"."""
    match = _ANGLE.match(text)
    if not match or not (match.group(1) or match.group(2)):
        raise UsageError(f"Cannot parse angle {text!r}")
    number, has_pi, divisor = match.groups()
    if number in ("", "+", "-"):
        value = -1.0 if number == "-" else 1.0
    else:
        try:
            value = float(number)
        except ValueError:
            raise UsageError(f"Cannot parse angle {text!r}") from None
    if has_pi:
        value *= math.pi
    if divisor:
        value /= float(divisor)
    return value


def parse_angle_set(preset: Optional[str], angles: Optional[Sequence[str]]) -> AngleSet:
    if preset and angles:
        raise UsageError("Give either --preset or --angles, not both")
    if preset:
        if not is_known_preset(preset):
            raise UsageError(f"Unknown preset {preset!r}; expected one of {sorted(ANGLE_PRESETS)}")
        return AngleSet(*ANGLE_PRESETS[preset.lower()])
    if angles:
        if len(angles) != 4:
            raise UsageError(f"--angles needs four values, got {len(angles)}")
        return AngleSet(*(parse_angle(angle) for angle in angles))
    raise UsageError("Give --preset set1|set2 or --angles T1 T2 T1P T2P")


def parse_state_spec(spec: str) -> TwoQubitState:
    """Build the state named by a --state argument."""
    kind, _, body = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "bell":
            return prepare_bell(BellLabel.parse(body or "phi-minus"))
        if kind == "ideal":
            return bell_state(BellLabel.parse(body))
        if kind == "basis":
            return TwoQubitState.basis(body.strip())
        if kind == "encoded":
            theta1, theta2 = (parse_angle(part) for part in body.split(","))
            return encode(prepare_bell(), theta1, theta2)
        if kind == "amps":
            amplitudes = [complex(part.strip().replace(" ", "")) for part in body.split(",")]
            return TwoQubitState.from_amplitudes(amplitudes, normalize=True)
        if kind == "random":
            return random_state(np.random.default_rng(int(body)))
    except UsageError:
        raise
    except ValueError as e:
        raise UsageError(f"Invalid state {spec!r}: {e}") from e
    raise UsageError(f"Unknown state kind {kind!r}; use {STATE_HELP}")


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="device config file (default: $BELLQED_CONFIG)")
    parser.add_argument("--output-dir", default=get_output_dir(), help="directory for traces, reports and manifests")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellqed",
        description="Bell-state generation and CHSH test with two qubits read out through a resonator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    parser.add_argument("--log-level", default=BELLQED_LOG_LEVEL, help="logging level (default: $BELLQED_LOG_LEVEL)")
    parser.add_argument("--log-dir", default=BELLQED_LOG_DIR, help="directory for rotating log files")
    parser.add_argument("--workers", type=int, default=get_sweep_workers(), help="threads per spectrum sweep")
    subparsers = parser.add_subparsers(dest="command", required=True)

    prepare = subparsers.add_parser("prepare", help="prepare a Bell state and run the confirmation protocol")
    prepare.add_argument("--bell", default="phi-minus", help="Bell label (phi-plus, phi-minus, psi-plus, psi-minus)")
    prepare.add_argument("--mixture-baseline", action="store_true",
                         help="also report the equal |00>/|11> mixture")
    prepare.add_argument("--output-dir", default=get_output_dir())

    spectrum = subparsers.add_parser("spectrum", help="compute a transmission spectrum")
    _add_common(spectrum)
    spectrum.add_argument("--state", default="bell:phi-minus", help=STATE_HELP)
    spectrum.add_argument("--engine", default="closed-form", choices=["closed-form", "lorentzian", "lindblad"])
    spectrum.add_argument("--compare", action="store_true", help="run all three engines and report deviations")
    spectrum.add_argument("--grid-min", type=float, default=DEFAULT_GRID_MIN_MHZ, help="lowest detuning / 2pi in MHz")
    spectrum.add_argument("--grid-max", type=float, default=DEFAULT_GRID_MAX_MHZ, help="highest detuning / 2pi in MHz")
    spectrum.add_argument("--points", type=int, default=DEFAULT_GRID_POINTS)
    spectrum.add_argument("--n-max", type=int, default=DEFAULT_PHOTON_CUTOFF, help="photon cutoff of the Lindblad engine")
    spectrum.add_argument("--a-term", default="squared", choices=["squared", "linear"])
    spectrum.add_argument("--odd-sign", default="pull", choices=["pull", "flipped"])

    chsh = subparsers.add_parser("chsh", help="run the CHSH test for one angle set")
    _add_common(chsh)
    chsh.add_argument("--preset", help="set1 or set2")
    chsh.add_argument("--angles", nargs=4, metavar="THETA", help="theta1 theta2 theta1' theta2' (e.g. pi/4)")
    chsh.add_argument("--method", default="naive", choices=["naive", "kernel", "analytic"])
    chsh.add_argument("--engine", default="lorentzian", choices=["closed-form", "lorentzian", "lindblad"])

    schedule = subparsers.add_parser("schedule", help="gate durations and the experiment-time budget")
    _add_common(schedule)
    schedule.add_argument("--measurement-ns", type=float, help="time per measurement (default: from config)")
    schedule.add_argument("--parallel-step1", action="store_true", help="count the two Step-1 rotations once")
    schedule.add_argument("--count-encoding", action="store_true", help="add the encoding rotations to the CHSH test")

    scan = subparsers.add_parser("scan", help="maximize the CHSH value over an angle grid")
    _add_common(scan)
    scan.add_argument("--points", type=int, default=16, help="grid points per angle")
    scan.add_argument("--method", default="analytic", choices=["naive", "kernel", "analytic"])
    scan.add_argument("--tie-primed", action="store_true", help="restrict to theta1' = theta1, theta2' = theta2")

    return parser
