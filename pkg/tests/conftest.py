from pathlib import Path

import numpy as np
import pytest

from config.device import DispersiveParams, load_config
from config.settings import PACKAGE_ROOT
from services.spectrometer import default_grid, make_grid

REFERENCE_CONFIG = PACKAGE_ROOT / "config" / "presets" / "reference.cfg"

REFERENCE_CONFIG_TEXT = """
omega_r     = 6.442 GHz
omega_1     = 4.5 GHz
omega_2     = 4.85 GHz
g_1         = 0.133 GHz
g_2         = 0.133 GHz
epsilon     = 1.2 GHz
kappa       = 1 MHz
t1_relax    = 7.3 us
t2_dephase  = 500 ns
gamma_1     = 13 MHz
gamma_2     = 4 MHz
"""


@pytest.fixture
def reference_config_text():
    return REFERENCE_CONFIG_TEXT


@pytest.fixture
def reference_config():
    return load_config(REFERENCE_CONFIG)


@pytest.fixture
def readout_params():
    """(Gamma1, Gamma2, kappa) = 2pi x (13, 4, 1) MHz."""
    return DispersiveParams.from_mhz(13.0, 4.0, 1.0)


@pytest.fixture
def grid():
    return default_grid()


@pytest.fixture
def coarse_grid():
    """Cheap grid for the Lindblad oracle; still resolves kappa = 2pi x 1 MHz."""
    return make_grid(-25.0, 25.0, 401)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def write_config(tmp_path):
    """Write config text to a temporary file and return its path."""
    def _write(text: str, name: str = "device.cfg") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
