from dotenv import load_dotenv
import math
import os
from pathlib import Path

# Load environment variables
load_dotenv()

PACKAGE_ROOT = Path(__file__).resolve().parent.parent

# Device configuration
BELLQED_CONFIG = os.getenv("BELLQED_CONFIG", str(PACKAGE_ROOT / "config" / "presets" / "reference.cfg"))

# Logging configuration
BELLQED_LOG_LEVEL = os.getenv("BELLQED_LOG_LEVEL", "INFO").upper()
BELLQED_LOG_DIR = os.getenv("BELLQED_LOG_DIR")

# Output configuration
BELLQED_OUTPUT_DIR = os.getenv("BELLQED_OUTPUT_DIR", "runs")

# Sweep configuration
BELLQED_SWEEP_WORKERS = int(os.getenv("BELLQED_SWEEP_WORKERS", "1"))

# Spectrometer defaults (ordinary frequency in MHz, as plotted)
DEFAULT_GRID_MIN_MHZ = -25.0
DEFAULT_GRID_MAX_MHZ = 25.0
DEFAULT_GRID_POINTS = 2001

# Lindblad oracle defaults
DEFAULT_PHOTON_CUTOFF = 8
DEFAULT_CUTOFF_ATTEMPTS = 3

# Named angle presets for the CHSH test
ANGLE_PRESETS = {
    "set1": (math.pi / 4, 3 * math.pi / 4, math.pi / 2, math.pi),
    "set2": (math.pi / 4, 0.0, 7 * math.pi / 4, 3 * math.pi / 2),
}

TOOL_VERSION = "0.3.0"


def get_default_config_path() -> str:
    """Get the device-config path used when a command gets no --config."""
    return BELLQED_CONFIG


def get_sweep_workers() -> int:
    """Get the number of workers a spectrum sweep may use."""
    return max(1, BELLQED_SWEEP_WORKERS)


def get_output_dir() -> str:
    """Get the default directory for traces, reports and manifests."""
    return BELLQED_OUTPUT_DIR


def is_known_preset(name: str) -> bool:
    """Check if an angle preset name is known."""
    return name.lower() in ANGLE_PRESETS
