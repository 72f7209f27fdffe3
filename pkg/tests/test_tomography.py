import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from encdd.pauli import exp_hermitian
from encdd.tomography import (Channel, ChiMatrix, HermitianBasis, RotationFamily, adjoint_rep,
                              chi_from_superoperator_bruteforce, dephasing_device,
                              effective_hamiltonian, empirical_bb_loop, extract_generator,
                              first_order_chi, probe_states, qpt, simulate_channel,
                              solve_empirical_bb, transform_chi)

from conftest import I2, X, Y, Z, kron

B1 = HermitianBasis(1)
B2 = HermitianBasis(2)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def random_unitary(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / abs(np.diag(r)))


class TestBasis:
    def test_orthonormal(self):
        for b in (B1, B2):
            K = b.matrices
            gram = np.einsum("aji,bji->ab", K.conj(), K)
            np.testing.assert_allclose(gram, np.eye(len(b)), atol=1e-14)
            for k in K:
                np.testing.assert_allclose(k, k.conj().T)

    def test_count_and_identity_first(self):
        assert len(B2) == 16 and B2.labels[0] == "II"
        np.testing.assert_allclose(B2.matrices[0], np.eye(4) / 2)

    def test_coefficients(self):
        c = B1.coefficients(Y)
        np.testing.assert_allclose(c, [0, 0, np.sqrt(2), 0], atol=1e-15)


class TestQpt:
    def test_identity(self):
        chi = qpt(Channel.identity(2), B1)
        expect = np.zeros((4, 4))
        expect[0, 0] = 2
        np.testing.assert_allclose(chi.entries, expect, atol=1e-12)
        assert chi.residual < 1e-12

    @pytest.mark.parametrize("theta", [0.1, 0.7, 2.0])
    def test_z_rotation(self, theta):
        chi = qpt(Channel.unitary(exp_hermitian(Z, theta)), B1).entries
        c, s = math.cos(theta), math.sin(theta)
        assert chi[0, 0] == pytest.approx(2 * c * c)
        assert chi[3, 3] == pytest.approx(2 * s * s)
        assert chi[3, 0] == pytest.approx(-2j * c * s)
        assert chi[0, 3] == pytest.approx(2j * c * s)
        mask = np.ones((4, 4), bool)
        mask[np.ix_([0, 3], [0, 3])] = False
        assert np.max(np.abs(chi[mask])) < 1e-12

    def test_depolarizing_against_bruteforce(self):
        ch = Channel.depolarizing(1.0)
        chi = qpt(ch, B1).entries
        np.testing.assert_allclose(chi, np.diag([0.5] * 4), atol=1e-12)
        ref = chi_from_superoperator_bruteforce(ch.superoperator(), B1)
        np.testing.assert_allclose(chi, ref, atol=1e-12)

    def test_random_two_qubit_against_bruteforce(self, rng):
        ch = Channel([random_unitary(rng, 4) * np.sqrt(0.7), random_unitary(rng, 4) * np.sqrt(0.3)])
        chi = qpt(ch, B2)
        np.testing.assert_allclose(chi.entries, chi_from_superoperator_bruteforce(ch.superoperator(), B2),
                                   atol=1e-10)
        assert chi.residual < 1e-10
        assert chi.hermiticity_error() < 1e-10
        assert chi.trace_preservation_error() < 1e-8

    def test_round_trip(self, rng):
        ch = Channel([random_unitary(rng, 2) * np.sqrt(0.6), random_unitary(rng, 2) * np.sqrt(0.4)])
        chi = qpt(ch, B1)
        again = qpt(chi.to_channel(), B1)
        np.testing.assert_allclose(again.entries, chi.entries, atol=1e-10)

    def test_probe_count(self):
        assert len(probe_states(2)) == 16

    def test_json_round_trip(self, rng):
        chi = qpt(Channel.unitary(random_unitary(rng, 2)), B1)
        data = json.loads(json.dumps(chi.to_json()))
        assert data["basis"] == ["I", "X", "Y", "Z"]
        back = ChiMatrix.from_json(data)
        np.testing.assert_array_equal(back.entries, chi.entries)
        with pytest.raises(ValueError):
            ChiMatrix.from_json({**data, "basis": ["I", "Z", "Y", "X"]})


class TestSimulateChannel:
    def test_zero_hamiltonian_identity(self):
        ch = simulate_channel(np.zeros((4, 4)), np.eye(2) / 2, 1.0)
        rho = np.outer(PLUS, PLUS.conj())
        np.testing.assert_allclose(ch(rho), rho, atol=1e-14)

    def test_system_unitary(self, rng):
        hs = rng.normal(size=(2, 2))
        hs = hs + hs.T
        ch = simulate_channel(np.kron(hs, I2), np.eye(2) / 2, 0.4)
        u = exp_hermitian(hs, 0.4)
        rho = np.outer(PLUS, PLUS.conj())
        np.testing.assert_allclose(ch(rho), u @ rho @ u.conj().T, atol=1e-12)

    @pytest.mark.parametrize("tau", [0.2, 0.9])
    def test_dephasing_cos(self, tau):
        g = 1.3
        ch = simulate_channel(g * kron(Z, Z), np.eye(2) / 2, tau)
        out = ch(np.outer(PLUS, PLUS.conj()))
        assert out[0, 1] == pytest.approx(0.5 * math.cos(2 * g * tau), abs=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            simulate_channel(np.zeros((6, 6)), np.eye(4) / 4, 1.0)


class TestGenerator:
    def test_identity_zero(self):
        gen = extract_generator(qpt(Channel.identity(2), B1))
        assert gen.norm() < 1e-12

    def test_z_hamiltonian(self):
        omega, tau = 1.0, 0.01
        chi = qpt(Channel.unitary(exp_hermitian(Z * omega, tau)), B1)
        h = effective_hamiltonian(chi, tau)
        assert abs(h.terms["Z"] - omega) <= 0.05 * omega
        gen = extract_generator(chi, tau)
        assert gen.terms["Z"] == pytest.approx(-omega * tau, rel=1e-3)

    def test_direction(self):
        g, tau = 1.0, 0.01
        H = g * (X + Y) / np.sqrt(2)
        chi = qpt(Channel.unitary(exp_hermitian(H, tau)), B1)
        vec = B1.coefficients(effective_hamiltonian(chi, tau))[1:].real
        true = B1.coefficients(H)[1:].real
        cosang = vec @ true / (np.linalg.norm(vec) * np.linalg.norm(true))
        assert math.acos(min(1.0, cosang)) <= 0.05

    def test_first_order_chi_richardson(self):
        H = 0.7 * X + 0.2 * Z
        chi = first_order_chi(lambda t: Channel.unitary(exp_hermitian(H, t)), 0.05, B1)
        h = effective_hamiltonian(chi, 0.05)
        assert h.terms["X"] == pytest.approx(0.7, rel=1e-3)
        assert h.terms["Z"] == pytest.approx(0.2, rel=1e-3)
        # second-order estimate scales as tau^2
        small = first_order_chi(lambda t: Channel.unitary(exp_hermitian(H, t)), 0.025, B1)
        assert chi.second_order / small.second_order == pytest.approx(4.0, rel=0.05)

    def test_bad_tau(self):
        with pytest.raises(ValueError):
            effective_hamiltonian(qpt(Channel.identity(2), B1), 0.0)


class TestAdjoint:
    def test_identity(self):
        np.testing.assert_allclose(adjoint_rep(np.eye(2), B1).R, np.eye(3), atol=1e-15)

    def test_x(self):
        np.testing.assert_allclose(adjoint_rep(X, B1).R, np.diag([1, -1, -1]), atol=1e-15)

    def test_quarter_turn_z(self):
        u = exp_hermitian(Z, np.pi / 4)
        R = adjoint_rep(u, B1).R
        # oracle: dense conjugation of each Pauli, expanded by trace
        paulis = [X, Y, Z]
        oracle = np.array([[np.trace(q @ u.conj().T @ p @ u).real / 2 for q in paulis] for p in paulis])
        np.testing.assert_allclose(R, oracle, atol=1e-14)
        np.testing.assert_allclose(R, [[0, -1, 0], [1, 0, 0], [0, 0, 1]], atol=1e-14)

    def test_homomorphism_and_orthogonal(self, rng):
        for _ in range(5):
            u, v = random_unitary(rng, 4), random_unitary(rng, 4)
            ru, rv = adjoint_rep(u, B2), adjoint_rep(v, B2)
            assert ru.orthogonality_error() < 1e-10
            np.testing.assert_allclose(adjoint_rep(u @ v, B2).R, ru.R @ rv.R, atol=1e-10)

    def test_non_unitary(self):
        with pytest.raises(ValueError):
            adjoint_rep(2 * X, B1)

    @settings(deadline=None)
    @given(st.floats(-np.pi, np.pi), st.sampled_from(["X1", "Y1", "Z1"]))
    def test_rotation_is_proper(self, theta, axis):
        R = adjoint_rep(RotationFamily.about(axis)(theta), B1).R
        assert np.linalg.det(R) == pytest.approx(1.0)
        assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12


class TestTransformChi:
    def test_identity_rotation(self):
        v = np.array([0.1, -0.2, 0.3])
        np.testing.assert_allclose(transform_chi(v, [np.eye(3)]), v)

    def test_parity_kick(self):
        rots = [adjoint_rep(np.eye(2), B1), adjoint_rep(X, B1)]
        np.testing.assert_allclose(transform_chi([0, 0, 1.0], rots), 0, atol=1e-15)
        np.testing.assert_allclose(transform_chi([1.0, 0, 0], rots), [1, 0, 0], atol=1e-15)

    def test_pauli_group_annihilates(self, rng):
        rots = [adjoint_rep(p, B1) for p in (I2, X, Y, Z)]
        assert np.linalg.norm(transform_chi(rng.normal(size=3), rots)) < 1e-14

    def test_empty(self):
        with pytest.raises(ValueError):
            transform_chi([1.0, 0, 0], [])


class TestSolveEmpiricalBB:
    xrot = RotationFamily.about("X1")

    def test_closed_form_pi_about_x(self):
        sol = solve_empirical_bb([0, 0, 1.0], np.zeros(3), 2, self.xrot)
        assert sol.closed_form and sol.params == [math.pi]
        assert sol.residual <= 1e-10
        R = adjoint_rep(sol.unitaries[1], B1).R
        np.testing.assert_allclose(R, np.diag([1, -1, -1]), atol=1e-12)

    def test_zero_error(self):
        sol = solve_empirical_bb(np.zeros(3), np.zeros(3), 2, self.xrot)
        assert sol.residual == 0 and sol.params == [0.0]
        np.testing.assert_allclose(sol.unitaries[1], np.eye(2), atol=1e-15)

    def test_single_pulse_keeps_target(self):
        v = np.array([0.3, 0.1, -0.2])
        sol = solve_empirical_bb(v, v, 1, self.xrot)
        assert sol.residual == 0 and len(sol.unitaries) == 1
        np.testing.assert_array_equal(sol.unitaries[0], np.eye(2))

    def test_numeric_search_oblique_error(self):
        # error with a component along the control axis cannot be removed
        v = np.array([0.5, 0.0, 1.0])
        sol = solve_empirical_bb(v, np.zeros(3), 2, self.xrot)
        assert not sol.closed_form
        assert sol.residual == pytest.approx(0.5, abs=1e-8)
        assert not sol.feasible

    def test_numeric_search_yz_error(self):
        # error in the y-z plane but with a y-rotation control: pi about y kicks z and x only
        yrot = RotationFamily.about("Y1")
        sol = solve_empirical_bb([0, 0, 1.0], np.zeros(3), 3, yrot)
        assert sol.residual <= 1e-8

    def test_deterministic(self):
        a = solve_empirical_bb([0.2, 0.4, 1.0], np.zeros(3), 3, self.xrot)
        b = solve_empirical_bb([0.2, 0.4, 1.0], np.zeros(3), 3, self.xrot)
        assert a.params == b.params

    def test_bad_count(self):
        with pytest.raises(ValueError):
            solve_empirical_bb([0, 0, 1.0], np.zeros(3), 0, self.xrot)


class TestLoop:
    def test_dephasing_device_shrinks(self):
        res = empirical_bb_loop(dephasing_device(g=1.0), RotationFamily.about("X1"), iterations=5)
        assert res.initial_norm > 0
        assert res.residual <= 1e-2 * res.initial_norm
        assert res.timescale_condition_indicated()
        assert [r["iteration"] for r in res.rows] == list(range(1, res.iterations + 1))

    def test_noiseless_stops_immediately(self):
        res = empirical_bb_loop(dephasing_device(g=0.0), RotationFamily.about("X1"), iterations=5)
        assert res.iterations == 1 and res.residual == 0
        assert len(res.best_frames) == 1

    def test_history_monotone(self):
        res = empirical_bb_loop(dephasing_device(g=1.0, omega=0.5), RotationFamily.about("X1"),
                                iterations=4)
        h = res.residual_history
        assert all(b <= a for a, b in zip(h, h[1:]))

    def test_bad_iterations(self):
        with pytest.raises(ValueError):
            empirical_bb_loop(dephasing_device(), RotationFamily.about("X1"), iterations=0)
