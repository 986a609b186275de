"""Plain-text artifacts: spectrum traces, CHSH landscapes and JSON records."""
import json
from pathlib import Path
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np

from config.logging_config import get_logger, json_default
from utils.exceptions import TraceFormatError
from utils.units import mhz, to_mhz

logger = get_logger("utils.trace_io")

TRACE_HEADER = "delta_r_over_2pi_MHz,s_ss_normalized"
LANDSCAPE_HEADER = "theta1,theta2,theta1p,theta2p,f"
FULL_PRECISION = "%.17g"

PathLike = Union[str, Path]


def _write_csv(path: PathLike, header: str, columns: Sequence[np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack(columns), delimiter=",", header=header, comments="", fmt=FULL_PRECISION)
    return path


def _read_csv(path: PathLike, header: str) -> np.ndarray:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            first = handle.readline().strip()
    except OSError as e:
        raise TraceFormatError(f"Cannot read {path}: {e}") from e
    if first != header:
        raise TraceFormatError(f"{path}: expected header {header!r}, found {first!r}")

    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise TraceFormatError(f"{path}: {e}") from e
    columns = header.count(",") + 1
    if data.shape[1] != columns:
        raise TraceFormatError(f"{path}: expected {columns} columns, found {data.shape[1]}")
    return data


def write_trace(path: PathLike, grid: np.ndarray, values: np.ndarray) -> Path:
    """Write detunings as ordinary frequency in MHz next to the trace values."""
    written = _write_csv(path, TRACE_HEADER, [to_mhz(np.asarray(grid, dtype=float)), np.asarray(values, dtype=float)])
    logger.debug(f"Wrote trace to {written}", extra={"points": int(np.size(grid))})
    return written


def read_trace(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """Grid in rad/ns and the trace values."""
    data = _read_csv(path, TRACE_HEADER)
    return mhz(data[:, 0]), data[:, 1]


def write_landscape(path: PathLike, rows: Iterable[Sequence[float]]) -> Path:
    data = np.asarray(list(rows), dtype=float).reshape(-1, 5)
    return _write_csv(path, LANDSCAPE_HEADER, [data[:, i] for i in range(5)])


def read_landscape(path: PathLike) -> np.ndarray:
    return _read_csv(path, LANDSCAPE_HEADER)


def write_json(path: PathLike, record: Dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, default=json_default) + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise TraceFormatError(f"Cannot read record {path}: {e}") from e


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")
    return path
