import numpy as np
import pytest
from scipy.stats import unitary_group

from quantum.gates import (
    SIGMA_X,
    SIGMA_Z,
    SingleQubitGate,
    TwoQubitGate,
    apply_single,
    apply_two,
    corrected_two_qubit_gate,
    decomposed_ry,
    dispersive_phase,
    dispersive_two_qubit_gate,
    effective_xy_hamiltonian,
    embed,
    equal_up_to_phase,
    evolve,
    hadamard_like,
    identity,
    iswap,
    phase_correction,
    phase_deviation,
    rx,
    ry,
    rz,
)
from quantum.states import TwoQubitState
from utils.exceptions import GateError
from utils.units import ghz


class TestSingleQubitGates:

    def test_rotation_matrices(self):
        theta = 0.37
        c, s = np.cos(theta), np.sin(theta)
        np.testing.assert_allclose(rx(theta).m, [[c, 1j * s], [1j * s, c]], atol=1e-15)
        np.testing.assert_allclose(ry(theta).m, [[c, s], [-s, c]], atol=1e-15)
        np.testing.assert_allclose(rz(theta).m, np.diag([np.exp(1j * theta), np.exp(-1j * theta)]), atol=1e-15)

    def test_rotations_compose_additively(self):
        for gate in (rx, ry, rz):
            np.testing.assert_allclose((gate(0.3) @ gate(0.5)).m, gate(0.8).m, atol=1e-14)

    def test_full_turn_is_minus_identity(self):
        for gate in (rx, ry, rz):
            np.testing.assert_allclose(gate(np.pi).m, -np.eye(2), atol=1e-14)

    def test_hadamard_like_matches_rotation_product(self):
        for theta in np.linspace(0, 2 * np.pi, 9):
            product = rz(theta / 2) @ rx(np.pi / 4) @ rz(-theta / 2)
            np.testing.assert_allclose(hadamard_like(theta).m, product.m, atol=1e-14)

    def test_rejects_non_unitary(self):
        with pytest.raises(GateError, match="not unitary"):
            SingleQubitGate(np.array([[1, 1], [0, 1]]))

    def test_rejects_wrong_shape(self):
        with pytest.raises(GateError):
            SingleQubitGate(np.eye(3))

    def test_random_unitaries_accepted(self):
        for seed in range(5):
            TwoQubitGate(unitary_group.rvs(4, random_state=seed))


class TestDecompositions:

    @pytest.mark.parametrize("theta", [np.pi / 4, 3 * np.pi / 4])
    def test_decomposed_ry_equals_ry_up_to_phase(self, theta):
        assert equal_up_to_phase(decomposed_ry(theta), ry(theta), atol=1e-12)

    def test_unknown_decomposition(self):
        with pytest.raises(GateError):
            decomposed_ry(0.1)

    def test_phase_deviation_detects_difference(self):
        assert phase_deviation(rx(0.1), rx(0.2)) > 1e-3
        assert not equal_up_to_phase(rx(0.1), ry(0.1))

    def test_global_phase_is_ignored(self):
        assert equal_up_to_phase(rx(0.4).m * np.exp(0.7j), rx(0.4).m)


class TestTwoQubitGates:

    def test_iswap_action(self):
        out = apply_two(iswap(), TwoQubitState.basis("01"))
        np.testing.assert_allclose(out.amps, [0, 0, 1j, 0], atol=0)

    def test_identity_leaves_state(self):
        state = TwoQubitState.basis("10")
        np.testing.assert_allclose(apply_single(identity(), 1, state).amps, state.amps, atol=0)

    def test_embed_orders_qubits(self):
        np.testing.assert_allclose(embed(rx(0.2), 1).m, np.kron(rx(0.2).m, np.eye(2)), atol=0)
        np.testing.assert_allclose(embed(rx(0.2), 2).m, np.kron(np.eye(2), rx(0.2).m), atol=0)

    def test_embed_rejects_bad_index(self):
        with pytest.raises(GateError):
            embed(rx(0.2), 3)

    def test_dispersive_phase(self):
        assert dispersive_phase(0) == pytest.approx(3 * np.pi)
        assert dispersive_phase(1) == pytest.approx(9 * np.pi)
        with pytest.raises(GateError):
            dispersive_phase(-0.5)

    @pytest.mark.parametrize("n_photon", [0, 0.3, 1, 2.5])
    def test_phase_correction_recovers_iswap(self, n_photon):
        np.testing.assert_allclose(corrected_two_qubit_gate(n_photon).m, iswap().m, atol=1e-12)

    def test_phase_correction_on_basis_states(self):
        delta = dispersive_phase(0.7)
        np.testing.assert_allclose(
            phase_correction(0.7).m, np.diag([np.exp(-0.5j * delta), np.exp(0.5j * delta)]), atol=1e-14
        )

    @pytest.mark.parametrize("n_photon", [0, 1, 3])
    def test_xy_evolution_reproduces_dispersive_gate(self, n_photon):
        """exp(-i H t_s) with t_s = 3 pi Delta / (2 g^2)."""
        g, delta = ghz(0.133), ghz(1.18)
        t_s = 3 * np.pi * delta / (2 * g ** 2)
        evolved = evolve(effective_xy_hamiltonian(g, delta, n_photon), t_s)
        np.testing.assert_allclose(evolved.m, dispersive_two_qubit_gate(n_photon).m, atol=1e-10)

    def test_hamiltonian_is_hermitian(self):
        h = effective_xy_hamiltonian(0.8, 7.4, 0.5)
        np.testing.assert_allclose(h, h.conj().T, atol=0)

    def test_evolve_zero_time_is_identity(self):
        np.testing.assert_allclose(evolve(np.kron(SIGMA_Z, SIGMA_X), 0.0).m, np.eye(4), atol=1e-14)
