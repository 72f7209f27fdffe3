import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from encdd.decoupling import Free, PulseSchedule, leakage_elimination_cycle
from encdd.dfs import DfsCode, encode
from encdd.dynamics import (MAX_DIM, AnalyticDephasing, SpinBath, analytic_coherence,
                            build_total_hamiltonian, evolve, feasibility, leakage_population,
                            logical_entanglement_fidelity, loglog_slope, partial_trace_bath,
                            reduced_channel_kraus, residual_rotation_angle, run_schedule,
                            schedule_unitary)
from encdd.pauli import OperatorSum, exp_hermitian, parse_operator, to_dense

from conftest import I2, X, Z, kron

CODE = DfsCode(2)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def dm(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


class TestTotalHamiltonian:
    def test_collective_coupling_expansion(self):
        bath = SpinBath(1, [(parse_operator("Z1 + Z2"), parse_operator("Z1", 1))])
        h = build_total_hamiltonian(OperatorSum.zero(2), bath)
        np.testing.assert_allclose(h, kron(Z, I2, Z) + kron(I2, Z, Z))

    def test_xy_exchange_is_two_j_xbar(self):
        J = 0.7
        bath = SpinBath(1)
        h = build_total_hamiltonian(parse_operator("X1 X2 + Y1 Y2") * J, bath)
        np.testing.assert_allclose(h, np.kron(2 * J * to_dense(CODE.x_bar(1)), I2), atol=1e-15)

    def test_no_couplings_block_diagonal(self, rng):
        hs = parse_operator("0.3*X1 + Z2")
        hb = parse_operator("0.5*X1", 1)
        h = build_total_hamiltonian(hs, SpinBath(1, h_bath=hb))
        expect = np.kron(to_dense(hs), I2) + np.kron(np.eye(4), 0.5 * X)
        np.testing.assert_allclose(h, expect)

    def test_hermitian(self):
        bath = SpinBath(2, [(parse_operator("X1", 2), parse_operator("Z1 X2"))],
                        h_bath=parse_operator("Y1 + Z2"))
        h = build_total_hamiltonian(parse_operator("Y1 Z2"), bath)
        np.testing.assert_allclose(h, h.conj().T)

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            build_total_hamiltonian(OperatorSum.zero(4), SpinBath(9))
        assert MAX_DIM == 4096

    def test_mismatched_coupling(self):
        bath = SpinBath(1, [(parse_operator("Z1", 3), parse_operator("Z1", 1))])
        with pytest.raises(ValueError):
            build_total_hamiltonian(OperatorSum.zero(2), bath)

    def test_bath_state(self):
        np.testing.assert_allclose(SpinBath(2).state(), np.eye(4) / 4)
        np.testing.assert_allclose(SpinBath(1, initial=[1, 0]).state(), np.diag([1, 0]))
        with pytest.raises(ValueError):
            SpinBath(1, initial="thermal").state()


class TestEvolve:
    def test_zero_time(self, rng):
        rho = dm(PLUS)
        np.testing.assert_allclose(evolve(rho, Z, 0.0), rho)

    def test_pi_rotation(self):
        out = evolve(dm(PLUS), Z / 2, np.pi)
        minus = np.array([1, -1]) / np.sqrt(2)
        assert np.vdot(minus, out @ minus).real == pytest.approx(1.0)

    @pytest.mark.parametrize("t", [0.0, 0.3, 1.1, 2.5])
    def test_dephasing_cos_oracle(self, t):
        g = 0.8
        h = g * kron(Z, Z)
        rho = evolve(np.kron(dm(PLUS), dm(PLUS)), h, t)
        rs = partial_trace_bath(rho, 2)
        assert rs[0, 1].real == pytest.approx(0.5 * np.cos(2 * g * t), abs=1e-13)
        assert abs(rs[0, 1].imag) < 1e-13

    def test_non_hermitian(self):
        with pytest.raises(ValueError):
            evolve(dm(PLUS), np.array([[0, 1], [0, 0]]), 1.0)

    def test_bad_trace(self):
        with pytest.raises(ValueError):
            evolve(np.eye(2), Z, 1.0)


class TestLeakagePopulation:
    def test_examples(self):
        assert leakage_population(encode([0.6, 0.8], CODE), CODE) == pytest.approx(0, abs=1e-15)
        assert leakage_population(dm([1, 0, 0, 0]), CODE) == 1.0
        mix = 0.5 * dm([0, 1, 0, 0]) + 0.5 * dm([1, 0, 0, 0])
        assert leakage_population(mix, CODE) == pytest.approx(0.5)

    def test_with_bath(self):
        rho = np.kron(dm([1, 0, 0, 0]), np.eye(2) / 2)
        assert leakage_population(rho, CODE) == pytest.approx(1.0)


class TestAnalyticCoherence:
    def test_examples(self):
        assert analytic_coherence(0.0, 2.0) == 1.0
        assert analytic_coherence(2.0, 2.0) == 0.5
        assert analytic_coherence(6.0, 2.0) == pytest.approx(0.1, abs=1e-15)

    def test_vectorized(self):
        got = analytic_coherence(np.array([0.0, 1.0]), 1.0)
        np.testing.assert_array_equal(got, [1.0, 0.5])

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_nonpositive_tau(self, tau):
        with pytest.raises(ValueError):
            analytic_coherence(1.0, tau)
        with pytest.raises(ValueError):
            AnalyticDephasing(tau)

    @given(st.floats(0, 1e3), st.floats(1e-3, 1e3))
    def test_bounded_and_decreasing(self, t, tau):
        c = analytic_coherence(t, tau)
        assert 0 < c <= 1
        assert analytic_coherence(t + tau, tau) <= c


class TestAnalyticDephasing:
    def test_single_qubit_matches_formula(self):
        model = AnalyticDephasing(3.0)
        rho = dm(PLUS)
        for t in np.linspace(0, 20, 41):
            out = model.dephase(rho, t)
            assert abs(2 * abs(out[0, 1]) - analytic_coherence(t, 3.0)) <= 1e-14
            assert out[0, 0] == rho[0, 0]

    def test_code_states_untouched(self):
        model = AnalyticDephasing(1.0)
        rho = dm(encode(np.array([1, 1j]) / np.sqrt(2), CODE))
        np.testing.assert_array_equal(model.dephase(rho, 50.0), rho)


class TestRunSchedule:
    def test_collective_dephasing_immunity(self):
        bath = SpinBath(1, [(parse_operator("Z1 + Z2"), parse_operator("Z1", 1))])
        h = build_total_hamiltonian(OperatorSum.zero(2), bath)
        psi = encode(np.array([1, 1]) / np.sqrt(2), CODE)
        res = run_schedule(psi, h, PulseSchedule([Free(0.05)], 1000), CODE)
        assert len(res.times) == 1001
        assert np.max(np.abs(res.fidelity - 1)) <= 1e-10
        assert np.max(res.leakage) <= 1e-10

    def test_zero_coupling_fidelity_one(self):
        h = build_total_hamiltonian(CODE.x_bar(1) * 0.3, SpinBath(1))
        psi = encode([1, 0], CODE)
        res = run_schedule(psi, h, leakage_elimination_cycle(CODE, 1, 0.1, 20), CODE)
        np.testing.assert_allclose(res.fidelity, 1, atol=1e-12)
        assert res.fidelity[0] == pytest.approx(1) and res.leakage[0] == pytest.approx(0, abs=1e-15)

    def test_trace_preserved_and_populations_bounded(self):
        bath = SpinBath(1, [(parse_operator("X1", 2), parse_operator("Z1", 1))],
                        h_bath=parse_operator("X1", 1))
        h = build_total_hamiltonian(OperatorSum.zero(2), bath)
        res = run_schedule(encode([1, 0], CODE), h, leakage_elimination_cycle(CODE, 1, 0.2, 10), CODE)
        assert np.max(res.trace_error) < 1e-12
        assert np.all(res.leakage >= -1e-10) and np.all(res.leakage <= 1 + 1e-10)
        assert np.all(res.fidelity >= -1e-10) and np.all(res.fidelity <= 1 + 1e-10)

    def test_kicks_reduce_leakage(self):
        bath = SpinBath(1, [(parse_operator("X1", 2), parse_operator("Z1", 1))],
                        h_bath=parse_operator("X1", 1))
        h = build_total_hamiltonian(OperatorSum.zero(2), bath)
        sched = leakage_elimination_cycle(CODE, 1, 1 / 128, 64)
        psi = encode([1, 0], CODE)
        kicked = run_schedule(psi, h, sched, CODE).final_leakage
        free = run_schedule(psi, h, sched.without_pulses(), CODE).final_leakage
        assert kicked * 10 <= free

    def test_finite_width_ideal_limit(self):
        h = build_total_hamiltonian(OperatorSum.zero(2), SpinBath(1))
        wide = leakage_elimination_cycle(CODE, 1, 0.1, width=0.05)
        u = schedule_unitary(h, wide, CODE.dim)
        assert np.allclose(u, np.eye(8), atol=1e-12) or np.allclose(u, -np.eye(8), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            run_schedule(encode([1, 0], CODE), np.eye(6), PulseSchedule([Free(1.0)]), CODE)
        with pytest.raises(ValueError):
            run_schedule(np.ones(2) / np.sqrt(2), np.eye(8), PulseSchedule([Free(1.0)]), CODE)

    def test_rows(self):
        h = build_total_hamiltonian(OperatorSum.zero(2), SpinBath(1))
        res = run_schedule(encode([1, 0], CODE), h, PulseSchedule([Free(0.5)], 2), CODE)
        assert [r["t"] for r in res.rows()] == [0.0, 0.5, 1.0]


class TestReducedChannel:
    def test_identity_channel(self):
        kraus = reduced_channel_kraus(np.eye(8), 4, np.eye(2) / 2)
        assert logical_entanglement_fidelity(kraus, CODE) == pytest.approx(1.0)
        assert residual_rotation_angle(kraus, CODE) == pytest.approx(0.0, abs=1e-7)

    def test_logical_rotation_angle(self):
        theta = 0.2
        u = np.kron(exp_hermitian(CODE.z_bar(1), theta), I2)
        kraus = reduced_channel_kraus(u, 4, np.eye(2) / 2)
        s = sum(k.conj().T @ k for k in kraus)
        np.testing.assert_allclose(s, np.eye(4), atol=1e-12)
        assert residual_rotation_angle(kraus, CODE) == pytest.approx(2 * theta)


class TestFeasibility:
    def test_reference_inputs(self):
        rep = feasibility(100.0, (1, 100), 0.05)
        assert rep.n_pulses_range == (20, 2000)
        assert rep.n_cycles_range == (10, 1000)
        assert rep.correction_range[0] == pytest.approx(1e-6, rel=1e-12)
        assert rep.correction_range[1] == pytest.approx(1e-2, rel=1e-12)
        assert rep.feasible

    def test_gate_equals_tau_c(self):
        rep = feasibility(1.0, 1.0, 1.0)
        assert rep.n_pulses_range == (1, 1)
        assert rep.correction_range == (4.0, 4.0)
        assert not rep.feasible

    @pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 1), (1, 1, -1), (1, (1, -2), 1)])
    def test_nonpositive(self, args):
        with pytest.raises(ValueError):
            feasibility(*args)

    def test_to_dict(self):
        d = feasibility(100.0).to_dict()
        assert d["n_pulses_range"] == [20, 2000] and d["feasible"] is True


class TestSlope:
    def test_exact_power(self):
        x = np.array([1, 2, 4, 8.0])
        assert loglog_slope(x, 3 * x ** 2) == pytest.approx(2.0)
