import logging

import pytest

from config.device import (
    DISPERSIVE_RATIO_LIMIT,
    DeviceConfig,
    DispersiveParams,
    load_config,
    parse_config_text,
    parse_quantity,
)
from utils.exceptions import ConfigurationError
from utils.units import ghz, mhz, to_mhz


def set_line(text, key, line=None):
    """Replace (or drop, with line=None) the config line for key."""
    lines = [l for l in text.splitlines() if l.split("=")[0].strip() != key]
    if line is not None:
        lines.append(line)
    return "\n".join(lines) + "\n"


class TestParsing:

    def test_units_are_converted(self, reference_config_text):
        cfg = parse_config_text(reference_config_text)
        assert cfg.omega_r == pytest.approx(ghz(6.442))
        assert cfg.kappa == pytest.approx(mhz(1.0))
        assert cfg.t1_relax == pytest.approx(7300.0)
        assert cfg.t2_dephase == pytest.approx(500.0)
        assert to_mhz(cfg.gamma_1) == pytest.approx(13.0)

    def test_defaults_for_optional_keys(self, reference_config_text):
        cfg = parse_config_text(reference_config_text)
        assert cfg.omega_d_rx == pytest.approx(ghz(4.491))
        assert cfg.omega_d_rz == pytest.approx(ghz(4.0))
        assert cfg.iswap_delta == pytest.approx(ghz(1.18))
        assert cfg.measurement_ns == 40.0

    def test_preset_file_matches_text(self, reference_config, reference_config_text):
        assert reference_config.model_dump() == pytest.approx(parse_config_text(reference_config_text).model_dump())

    def test_comments_and_blank_lines(self, reference_config_text):
        text = "# device\n\n" + set_line(reference_config_text, "omega_r", "omega_r = 6.442 GHz  # resonator")
        assert parse_config_text(text).omega_r == pytest.approx(ghz(6.442))

    def test_missing_key_is_named(self, reference_config_text):
        with pytest.raises(ConfigurationError, match="missing required config keys: g_1"):
            parse_config_text(set_line(reference_config_text, "g_1"))

    def test_unknown_unit(self, reference_config_text):
        with pytest.raises(ConfigurationError, match="unknown frequency unit"):
            parse_config_text(set_line(reference_config_text, "kappa", "kappa = 1 Hz"))

    def test_unknown_key(self, reference_config_text):
        with pytest.raises(ConfigurationError, match="Unknown config key"):
            parse_config_text(reference_config_text + "flux_bias = 3 GHz\n")

    def test_unparseable_line_reports_line_number(self):
        with pytest.raises(ConfigurationError, match=r"cfg:3: cannot parse"):
            parse_config_text("omega_r = 6 GHz\nomega_1 = 4.5 GHz\nnot a line\n", source="cfg")

    def test_invalid_value(self, reference_config_text):
        with pytest.raises(ConfigurationError, match="invalid device config"):
            parse_config_text(set_line(reference_config_text, "kappa", "kappa = -1 MHz"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="Cannot read config file"):
            load_config(tmp_path / "absent.cfg")

    def test_load_from_file(self, write_config, reference_config_text):
        cfg = load_config(write_config(reference_config_text))
        assert cfg.g_1 == pytest.approx(ghz(0.133))

    @pytest.mark.parametrize("key,number,unit,expected", [
        ("kappa", "1", "MHz", mhz(1.0)),
        ("kappa", "1000", "kHz", mhz(1.0)),
        ("kappa", "0.001", "GHz", mhz(1.0)),
        ("kappa", "0.5", "rad/ns", 0.5),
        ("t1_relax", "7.3", "us", 7300.0),
        ("t1_relax", "0.0073", "ms", 7300.0),
    ])
    def test_parse_quantity(self, key, number, unit, expected):
        assert parse_quantity(key, number, unit) == pytest.approx(expected)

    def test_time_key_rejects_frequency_unit(self):
        with pytest.raises(ConfigurationError, match="unknown time unit"):
            parse_quantity("t2_dephase", "500", "MHz")


class TestDeviceConfig:

    def test_detunings(self, reference_config):
        assert reference_config.qubit_detuning(1) == pytest.approx(ghz(4.5 - 6.442))
        assert reference_config.qubit_detuning(2) == pytest.approx(ghz(4.85 - 6.442))

    def test_bad_qubit_index(self, reference_config):
        with pytest.raises(ConfigurationError):
            reference_config.coupling(3)

    def test_dispersive_ratios(self, reference_config):
        ratio_1, ratio_2 = reference_config.dispersive_ratios()
        assert ratio_1 == pytest.approx(0.0685, abs=1e-4)
        assert ratio_2 == pytest.approx(0.0835, abs=1e-4)
        assert max(ratio_1, ratio_2) < DISPERSIVE_RATIO_LIMIT

    def test_weak_dispersion_warns(self, reference_config, caplog):
        cfg = reference_config.model_copy(update={"g_1": ghz(0.3)})
        with caplog.at_level(logging.WARNING, logger="bellqed"):
            ratio_1, _ = cfg.dispersive_ratios()
        assert ratio_1 > DISPERSIVE_RATIO_LIMIT
        assert any("weakly dispersive" in record.getMessage() for record in caplog.records)

    def test_no_warning_in_dispersive_regime(self, reference_config, caplog):
        with caplog.at_level(logging.WARNING, logger="bellqed"):
            reference_config.dispersive_ratios()
        assert not caplog.records

    def test_dispersive_params_from_overrides(self, reference_config):
        params = reference_config.dispersive_params()
        assert to_mhz(params.gamma1) == pytest.approx(13.0)
        assert to_mhz(params.gamma2) == pytest.approx(4.0)
        assert params.kappa == pytest.approx(mhz(1.0))

    def test_dispersive_params_from_couplings(self, reference_config):
        cfg = reference_config.model_copy(update={"gamma_1": None, "gamma_2": None})
        params = cfg.dispersive_params()
        assert params.gamma1 == pytest.approx(ghz(0.133) ** 2 / ghz(4.5 - 6.442))
        assert params.gamma1 < 0

    def test_frozen(self, reference_config):
        with pytest.raises(Exception):
            reference_config.kappa = 1.0


class TestDispersiveParams:

    def test_from_mhz(self):
        params = DispersiveParams.from_mhz(13, 4, 1)
        assert params.gamma1 == pytest.approx(mhz(13))
        assert params.epsilon == pytest.approx(mhz(0.05))

    def test_with_kappa(self, readout_params):
        wider = readout_params.with_kappa(mhz(4))
        assert wider.kappa == pytest.approx(mhz(4))
        assert wider.gamma1 == readout_params.gamma1

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            DispersiveParams(gamma1=1.0, gamma2=1.0, kappa=0.0)
        with pytest.raises(ValueError):
            DispersiveParams(gamma1=float("nan"), gamma2=1.0, kappa=1.0)

    def test_device_config_validation(self):
        with pytest.raises(ValueError):
            DeviceConfig(
                omega_r=1, omega_1=1, omega_2=1, g_1=1, g_2=1,
                epsilon=1, kappa=1, t1_relax=1, t2_dephase=-1,
            )
