"""Device parameters and the key-value config file reader.

Config files use ordinary frequencies with a unit suffix (``omega_r = 6.442 GHz``);
everything is converted to rad/ns and ns at this boundary.
"""
import math
import re
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.logging_config import get_logger
from utils.exceptions import ConfigurationError
from utils.units import FREQUENCY_UNITS, TIME_UNITS, ghz, mhz

logger = get_logger("config.device")

DISPERSIVE_RATIO_LIMIT = 0.1

REQUIRED_KEYS = (
    "omega_r", "omega_1", "omega_2", "g_1", "g_2",
    "epsilon", "kappa", "t1_relax", "t2_dephase",
)

FREQUENCY_KEYS = {
    "omega_r", "omega_1", "omega_2", "g_1", "g_2", "epsilon", "kappa",
    "omega_d_rx", "omega_d_rz", "iswap_delta", "gamma_1", "gamma_2", "probe_epsilon",
}
TIME_KEYS = {"t1_relax", "t2_dephase", "measurement_ns"}

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([-+0-9.eE]+)\s*([^\s#]*)\s*(?:#.*)?$")


class DispersiveParams(BaseModel):
    """Dispersive pulls, resonator linewidth and probe amplitude, all in rad/ns."""
    model_config = ConfigDict(frozen=True)

    gamma1: float
    gamma2: float
    kappa: float = Field(gt=0)
    epsilon: float = Field(default=mhz(0.05), ge=0)

    @model_validator(mode="after")
    def _finite(self) -> "DispersiveParams":
        for name in ("gamma1", "gamma2", "kappa", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self

    @classmethod
    def from_mhz(cls, gamma1: float, gamma2: float, kappa: float,
                 epsilon: float = 0.05) -> "DispersiveParams":
        """Build from ordinary frequencies in MHz, the way the spectra are quoted."""
        return cls(gamma1=mhz(gamma1), gamma2=mhz(gamma2), kappa=mhz(kappa), epsilon=mhz(epsilon))

    def with_kappa(self, kappa: float) -> "DispersiveParams":
        return self.model_copy(update={"kappa": kappa})


class DeviceConfig(BaseModel):
    """Resonator, qubit and drive parameters. Frequencies in rad/ns, times in ns."""
    model_config = ConfigDict(frozen=True)

    omega_r: float = Field(gt=0)
    omega_1: float = Field(gt=0)
    omega_2: float = Field(gt=0)
    g_1: float = Field(gt=0)
    g_2: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    kappa: float = Field(gt=0)
    t1_relax: float = Field(gt=0)
    t2_dephase: float = Field(gt=0)
    omega_d_rx: float = Field(default=ghz(4.491), gt=0)
    omega_d_rz: float = Field(default=ghz(4.0), gt=0)
    iswap_delta: float = Field(default=ghz(1.18))
    measurement_ns: float = Field(default=40.0, ge=0)
    gamma_1: Optional[float] = None
    gamma_2: Optional[float] = None
    probe_epsilon: float = Field(default=mhz(0.05), ge=0)

    def coupling(self, qubit: int) -> float:
        return {1: self.g_1, 2: self.g_2}[_check_qubit(qubit)]

    def qubit_frequency(self, qubit: int) -> float:
        return {1: self.omega_1, 2: self.omega_2}[_check_qubit(qubit)]

    def qubit_detuning(self, qubit: int) -> float:
        """Delta_j = omega_j - omega_r."""
        return self.qubit_frequency(qubit) - self.omega_r

    def dispersive_ratios(self) -> Tuple[float, float]:
        """|g_j / Delta_j| per qubit; warns when the dispersive regime is doubtful."""
        ratios = tuple(abs(self.coupling(q) / self.qubit_detuning(q)) for q in (1, 2))
        for qubit, ratio in zip((1, 2), ratios):
            if ratio >= DISPERSIVE_RATIO_LIMIT:
                logger.warning(
                    f"Qubit {qubit} is weakly dispersive: |g/Delta| = {ratio:.3f}",
                    extra={"qubit": qubit, "ratio": ratio, "limit": DISPERSIVE_RATIO_LIMIT}
                )
        return ratios

    def dispersive_params(self) -> DispersiveParams:
        """Gamma_j from explicit overrides, else g_j^2 / Delta_j."""
        gamma1 = self.gamma_1 if self.gamma_1 is not None else self.g_1 ** 2 / self.qubit_detuning(1)
        gamma2 = self.gamma_2 if self.gamma_2 is not None else self.g_2 ** 2 / self.qubit_detuning(2)
        return DispersiveParams(gamma1=gamma1, gamma2=gamma2, kappa=self.kappa, epsilon=self.probe_epsilon)


def _check_qubit(qubit: int) -> int:
    if qubit not in (1, 2):
        raise ConfigurationError(f"Qubit index must be 1 or 2, got {qubit!r}")
    return qubit


def parse_quantity(key: str, number: str, unit: str) -> float:
    """Convert one config value to internal units."""
    value = float(number)
    unit_key = unit.strip().lower()
    if key in FREQUENCY_KEYS:
        if unit_key not in FREQUENCY_UNITS:
            raise ConfigurationError(f"{key}: unknown frequency unit {unit!r}; use one of {sorted(FREQUENCY_UNITS)}")
        return value * FREQUENCY_UNITS[unit_key]
    if key in TIME_KEYS:
        if unit_key not in TIME_UNITS:
            raise ConfigurationError(f"{key}: unknown time unit {unit!r}; use one of {sorted(TIME_UNITS)}")
        return value * TIME_UNITS[unit_key]
    raise ConfigurationError(f"Unknown config key {key!r}")


def parse_config_text(text: str, source: str = "<string>") -> DeviceConfig:
    values: Dict[str, float] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _LINE.match(line)
        if not match:
            raise ConfigurationError(f"{source}:{line_number}: cannot parse {raw!r}")
        key, number, unit = match.groups()
        try:
            values[key] = parse_quantity(key, number, unit)
        except ValueError as e:
            raise ConfigurationError(f"{source}:{line_number}: {e}") from e

    missing = [key for key in REQUIRED_KEYS if key not in values]
    if missing:
        raise ConfigurationError(f"{source}: missing required config keys: {', '.join(missing)}")

    try:
        config = DeviceConfig(**values)
    except ValidationError as e:
        raise ConfigurationError(f"{source}: invalid device config: {e}") from e

    logger.debug(
        f"Loaded device config from {source}",
        extra={"run_details": {"source": source, "values": values}}
    )
    return config


def load_config(path: Union[str, Path]) -> DeviceConfig:
    """Read a device config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}") from e
    return parse_config_text(text, source=str(path))
