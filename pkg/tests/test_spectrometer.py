import logging

import numpy as np
import pytest
from scipy.integrate import trapezoid

from quantum.bell import encode, prepare_bell
from quantum.states import TwoQubitState, expectations, random_state
from services.spectrometer import (
    CORRECTED,
    UNCORRECTED,
    ClosedFormVariant,
    Engine,
    Spectrometer,
    SpectrumTrace,
    closed_form_spectrum,
    closed_form_values,
    lorentzian_spectrum,
    make_grid,
    max_deviation,
    normalize,
    pulls,
    sweep,
)
from utils.exceptions import ConfigurationError, SingularPointError, TraceFormatError
from utils.units import mhz, to_mhz


def local_maxima_mhz(trace, threshold=0.1):
    """Grid positions (MHz) of interior local maxima above threshold * max."""
    v = trace.values
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]) & (v[1:-1] > threshold * v.max())
    return sorted(round(to_mhz(x), 2) for x in trace.grid[1:-1][inner])


class TestPulls:

    def test_reference_pulls(self, readout_params):
        shifts = {label: to_mhz(value) for label, value in pulls(readout_params).items()}
        assert shifts == pytest.approx({"00": 17.0, "01": 9.0, "10": -9.0, "11": -17.0})

    def test_pulls_sum_to_zero(self, readout_params):
        assert sum(pulls(readout_params).values()) == pytest.approx(0.0, abs=1e-15)


class TestClosedForm:

    def test_matches_lorentzian_sum(self, readout_params, grid, rng):
        for _ in range(5):
            state = random_state(rng)
            closed = closed_form_spectrum(state, readout_params, grid)
            summed = lorentzian_spectrum(state, readout_params, grid)
            np.testing.assert_allclose(closed.values, summed.values, rtol=1e-6)

    @pytest.mark.parametrize("label", ["00", "01", "10", "11"])
    def test_basis_states(self, readout_params, grid, label):
        state = TwoQubitState.basis(label)
        closed = closed_form_spectrum(state, readout_params, grid)
        summed = lorentzian_spectrum(state, readout_params, grid)
        np.testing.assert_allclose(closed.values, summed.values, rtol=1e-6)

    def test_linear_a_term_disagrees(self, readout_params, grid):
        state = prepare_bell()
        summed = lorentzian_spectrum(state, readout_params, grid)
        linear = closed_form_spectrum(state, readout_params, grid, ClosedFormVariant(a_term="linear"))
        assert np.max(np.abs(linear.values - summed.values)) > 0.01 * np.max(summed.values)
        assert linear.annotations["variant"] == "a_term=linear,odd_sign=pull"

    def test_flipped_odd_sign_mirrors_spectrum(self, readout_params, grid):
        state = TwoQubitState.basis("00")
        corrected = closed_form_spectrum(state, readout_params, grid)
        mirrored = closed_form_spectrum(state, readout_params, grid, ClosedFormVariant(odd_sign="flipped"))
        np.testing.assert_allclose(mirrored.values, corrected.values[::-1], rtol=1e-9)
        assert to_mhz(corrected.peak_position()) == pytest.approx(17.0, abs=0.03)
        assert to_mhz(mirrored.peak_position()) == pytest.approx(-17.0, abs=0.03)

    def test_variant_flags(self):
        assert CORRECTED.is_corrected
        assert not UNCORRECTED.is_corrected
        with pytest.raises(ConfigurationError):
            ClosedFormVariant(a_term="cubed")

    def test_singular_point(self, readout_params):
        expect = expectations(prepare_bell())
        with pytest.raises(SingularPointError) as excinfo:
            closed_form_values(expect, readout_params, np.array([0.0, 1e80]))
        assert excinfo.value.delta_r == 1e80

    def test_spectrometer_logs_singular_point(self, readout_params, caplog):
        spectrometer = Spectrometer(readout_params, grid=np.array([0.0, 1e80]))
        with caplog.at_level(logging.ERROR, logger="bellqed"):
            with pytest.raises(SingularPointError):
                spectrometer.trace(prepare_bell(), Engine.CLOSED_FORM)
        assert any("singular" in record.getMessage() for record in caplog.records)


class TestSpectrumShape:

    def test_bell_state_peaks(self, readout_params, grid):
        trace = closed_form_spectrum(prepare_bell(), readout_params, grid)
        assert local_maxima_mhz(trace) == pytest.approx([-17.0, 17.0], abs=0.03)

    def test_encoded_state_shows_inner_peaks(self, readout_params, grid):
        state = encode(prepare_bell(), np.pi / 4, np.pi / 4)
        trace = lorentzian_spectrum(state, readout_params, grid)
        assert local_maxima_mhz(trace) == pytest.approx([-17.0, -9.0, 9.0, 17.0], abs=0.03)

    def test_bell_spectrum_is_symmetric(self, readout_params, grid):
        trace = closed_form_spectrum(prepare_bell(), readout_params, grid)
        np.testing.assert_allclose(trace.values, trace.values[::-1], rtol=1e-9)

    @pytest.mark.parametrize("engine", [closed_form_spectrum, lorentzian_spectrum])
    def test_reversed_probabilities_mirror_spectrum(self, readout_params, grid, rng, engine):
        for _ in range(10):
            state = random_state(rng)
            reversed_state = TwoQubitState(state.amps[::-1])
            trace = engine(state, readout_params, grid)
            mirrored = engine(reversed_state, readout_params, grid)
            np.testing.assert_allclose(mirrored.values, trace.values[::-1], rtol=1e-9)

    def test_peak_height_and_width(self, readout_params, grid):
        trace = lorentzian_spectrum(TwoQubitState.basis("11"), readout_params, grid)
        kappa = readout_params.kappa
        assert trace.values.max() == pytest.approx(4 / kappa ** 2, rel=1e-3)
        above = trace.grid[trace.values >= trace.values.max() / 2 * (1 - 1e-9)]
        assert to_mhz(above[-1] - above[0]) == pytest.approx(1.0, rel=0.05)

    def test_sum_rule(self, readout_params, rng):
        wide = make_grid(-500.0, 500.0, 200001)
        trace = lorentzian_spectrum(random_state(rng), readout_params, wide)
        assert trapezoid(trace.values, trace.grid) == pytest.approx(2 * np.pi / readout_params.kappa, rel=2e-3)


class TestTraces:

    def test_normalize(self, readout_params, grid):
        trace = normalize(lorentzian_spectrum(prepare_bell(), readout_params, grid))
        assert trace.normalized
        assert trace.values.max() == 1.0

    def test_normalize_rejects_zero_trace(self):
        with pytest.raises(TraceFormatError):
            normalize(SpectrumTrace(np.array([0.0, 1.0]), np.zeros(2), "test"))

    def test_trace_validation(self):
        with pytest.raises(ConfigurationError):
            SpectrumTrace(np.array([]), np.array([]), "test")
        with pytest.raises(TraceFormatError):
            SpectrumTrace(np.array([0.0, 1.0]), np.array([1.0]), "test")
        with pytest.raises(TraceFormatError):
            SpectrumTrace(np.array([1.0, 0.0]), np.array([1.0, 1.0]), "test")
        with pytest.raises(TraceFormatError):
            SpectrumTrace(np.array([0.0, 1.0]), np.array([1.0, np.nan]), "test")

    def test_trace_is_read_only(self, readout_params, grid):
        trace = lorentzian_spectrum(prepare_bell(), readout_params, grid)
        with pytest.raises(ValueError):
            trace.values[0] = 0.0

    def test_grid_validation(self):
        with pytest.raises(ConfigurationError):
            make_grid(-1.0, 1.0, 1)
        with pytest.raises(ConfigurationError):
            make_grid(1.0, 1.0, 11)

    def test_grid_units(self):
        g = make_grid(-25.0, 25.0, 2001)
        assert g[0] == pytest.approx(mhz(-25.0))
        assert to_mhz(g[1] - g[0]) == pytest.approx(0.025)

    def test_max_deviation_needs_shared_grid(self, readout_params):
        first = lorentzian_spectrum(prepare_bell(), readout_params, make_grid(-25, 25, 101))
        second = lorentzian_spectrum(prepare_bell(), readout_params, make_grid(-25, 25, 201))
        with pytest.raises(TraceFormatError):
            max_deviation(first, second)


class TestSweep:

    @pytest.mark.parametrize("workers", [2, 3, 7])
    def test_partitioning_does_not_change_values(self, readout_params, grid, workers):
        state = prepare_bell()
        serial = closed_form_spectrum(state, readout_params, grid, workers=1)
        parallel = closed_form_spectrum(state, readout_params, grid, workers=workers)
        assert np.array_equal(serial.values, parallel.values)

    def test_more_workers_than_points(self):
        values = sweep(lambda chunk: chunk * 2, np.array([1.0, 2.0]), workers=8)
        np.testing.assert_array_equal(values, [2.0, 4.0])

    def test_spectrometer_compare_closed_forms(self, readout_params, grid):
        spectrometer = Spectrometer(readout_params, grid=grid, workers=2)
        closed = spectrometer.trace(prepare_bell(), "closed-form")
        summed = spectrometer.trace(prepare_bell(), "lorentzian")
        assert max_deviation(closed, summed) < 1e-6
