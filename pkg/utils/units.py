"""Unit conversions at the configuration boundary.

Internally frequencies are angular and measured in rad/ns, times in ns.
Config files and CSV exports use ordinary frequency (GHz/MHz), i.e. ω/2π.
"""
import math

TWO_PI = 2.0 * math.pi

# multiplier turning "<value> <unit>" into rad/ns
FREQUENCY_UNITS = {
    "ghz": TWO_PI,
    "mhz": TWO_PI * 1e-3,
    "khz": TWO_PI * 1e-6,
    "rad/ns": 1.0,
}

# multiplier turning "<value> <unit>" into ns
TIME_UNITS = {
    "ns": 1.0,
    "us": 1e3,
    "µs": 1e3,
    "ms": 1e6,
}


def ghz(value: float) -> float:
    """Angular frequency in rad/ns for an ordinary frequency in GHz."""
    return TWO_PI * value


def mhz(value: float) -> float:
    """Angular frequency in rad/ns for an ordinary frequency in MHz."""
    return TWO_PI * value * 1e-3


def to_mhz(omega: float) -> float:
    """Ordinary frequency in MHz for an angular frequency in rad/ns."""
    return omega / (TWO_PI * 1e-3)


def to_ghz(omega: float) -> float:
    return omega / TWO_PI
