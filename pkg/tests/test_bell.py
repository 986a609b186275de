import numpy as np
import pytest

from quantum.bell import (
    AngleSet,
    BellLabel,
    analytic_correlation,
    bell_state,
    confirm_mixture_baseline,
    confirm_projective,
    encode,
    generation_trace,
    prepare_bell,
    rotate_for_confirmation,
)
from quantum.gates import apply_single, decomposed_ry
from quantum.states import TwoQubitState, expectations, fidelity


class TestPrepareBell:

    def test_prepares_phi_minus(self):
        state = prepare_bell()
        assert fidelity(state, bell_state(BellLabel.PHI_MINUS)) == pytest.approx(1.0, abs=1e-12)

    def test_global_phase_is_minus_one(self):
        np.testing.assert_allclose(prepare_bell().amps, -bell_state(BellLabel.PHI_MINUS).amps, atol=1e-12)

    def test_no_support_on_odd_parity(self):
        probs = prepare_bell().probabilities()
        assert probs[1] < 1e-15
        assert probs[2] < 1e-15
        np.testing.assert_allclose(expectations(prepare_bell()).probs, (0.5, 0, 0, 0.5), atol=1e-12)

    def test_intermediate_after_iswap(self):
        trace = generation_trace()
        np.testing.assert_allclose(trace["entangled"].amps, np.array([1, -1, -1, -1]) / 2, atol=1e-12)

    def test_superposed_step_is_product_state(self):
        superposed = generation_trace()["superposed"]
        single = np.array([np.cos(np.pi / 4), 1j * np.sin(np.pi / 4)])
        np.testing.assert_allclose(superposed.amps, np.kron(single, single), atol=1e-12)

    @pytest.mark.parametrize("label", list(BellLabel))
    def test_every_label_by_post_rotation(self, label):
        assert fidelity(prepare_bell(label), bell_state(label)) == pytest.approx(1.0, abs=1e-12)

    def test_hardware_decomposition_gives_same_state(self):
        trace = generation_trace()
        decomposed = apply_single(decomposed_ry(3 * np.pi / 4), 1, trace["entangled"])
        assert fidelity(decomposed, bell_state(BellLabel.PHI_MINUS)) == pytest.approx(1.0, abs=1e-12)

    def test_label_parsing(self):
        assert BellLabel.parse("phi-minus") is BellLabel.PHI_MINUS
        assert BellLabel.parse("PHI_PLUS") is BellLabel.PHI_PLUS
        assert BellLabel.parse("psi+") is BellLabel.PSI_PLUS
        assert BellLabel.parse("Ψ−") is BellLabel.PSI_MINUS
        with pytest.raises(ValueError, match="Unknown Bell label"):
            BellLabel.parse("chi-plus")


class TestConfirmation:

    def test_bell_state_statistics(self):
        direct, rotated = confirm_projective(prepare_bell())
        np.testing.assert_allclose(direct, (0.5, 0, 0, 0.5), atol=1e-12)
        np.testing.assert_allclose(rotated, (0, 0.5, 0.5, 0), atol=1e-12)

    def test_mixture_is_distinguished(self):
        bell_direct, bell_rotated = confirm_projective(prepare_bell())
        mixture_direct, mixture_rotated = confirm_mixture_baseline()
        np.testing.assert_allclose(mixture_direct, bell_direct, atol=1e-12)
        np.testing.assert_allclose(mixture_rotated, (0.25, 0.25, 0.25, 0.25), atol=1e-12)
        assert np.max(np.abs(np.subtract(mixture_rotated, bell_rotated))) > 0.2

    def test_basis_state(self):
        direct, _ = confirm_projective(TwoQubitState.basis("00"))
        assert direct == (1.0, 0.0, 0.0, 0.0)

    def test_rotation_turns_phi_minus_into_psi_plus(self):
        rotated = rotate_for_confirmation(bell_state(BellLabel.PHI_MINUS))
        assert fidelity(rotated, bell_state(BellLabel.PSI_PLUS)) == pytest.approx(1.0, abs=1e-12)


class TestEncoding:

    def test_encoded_probabilities(self):
        theta1, theta2 = 0.4, 1.9
        c = np.cos(theta1 + theta2)
        probs = expectations(encode(prepare_bell(), theta1, theta2)).probs
        np.testing.assert_allclose(probs, ((1 + c) / 4, (1 - c) / 4, (1 - c) / 4, (1 + c) / 4), atol=1e-12)

    def test_zero_angles(self):
        probs = expectations(encode(prepare_bell(), 0.0, 0.0)).probs
        np.testing.assert_allclose(probs, (0.5, 0, 0, 0.5), atol=1e-12)

    def test_angle_sum_pi(self):
        probs = expectations(encode(prepare_bell(), np.pi / 4, 3 * np.pi / 4)).probs
        np.testing.assert_allclose(probs, (0, 0.5, 0.5, 0), atol=1e-12)

    def test_correlation_on_grid(self):
        thetas = np.linspace(0, 2 * np.pi, 32, endpoint=False)
        bell = prepare_bell()
        for theta1 in thetas:
            for theta2 in thetas:
                e = expectations(encode(bell, theta1, theta2))
                assert abs(e.zz - analytic_correlation(theta1, theta2)) < 1e-12
                assert abs(e.probs[0] - e.probs[3]) < 1e-12
                assert abs(e.probs[1] - e.probs[2]) < 1e-12

    def test_only_the_sum_matters(self, rng):
        bell = prepare_bell()
        for _ in range(20):
            theta1, theta2, shift = rng.uniform(-np.pi, 3 * np.pi, size=3)
            base = expectations(encode(bell, theta1, theta2)).probs
            moved = expectations(encode(bell, theta1 + shift, theta2 - shift)).probs
            np.testing.assert_allclose(moved, base, atol=1e-12)

    def test_analytic_examples(self):
        assert analytic_correlation(np.pi / 4, 3 * np.pi / 4) == pytest.approx(-1.0, abs=1e-15)
        assert analytic_correlation(np.pi / 4, 0) == pytest.approx(np.sqrt(2) / 2, abs=1e-15)
        assert analytic_correlation(0, 0) == 1.0


class TestAngleSet:

    def test_pairs_order(self):
        a = AngleSet(0.1, 0.2, 0.3, 0.4)
        assert list(a.pairs().values()) == [(0.1, 0.2), (0.3, 0.2), (0.1, 0.4), (0.3, 0.4)]

    def test_reduced_keeps_raw_values(self):
        a = AngleSet(-np.pi / 4, 9 * np.pi / 4, 0.0, 2 * np.pi)
        assert a.theta1 == -np.pi / 4
        np.testing.assert_allclose(a.reduced(), (7 * np.pi / 4, np.pi / 4, 0.0, 0.0), atol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            AngleSet(np.inf, 0, 0, 0)
