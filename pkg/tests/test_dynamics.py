import numpy as np
import pytest

from rabicrit.dissipators import (
    GeneratorSpec,
    JumpOperator,
    OhmicBath,
    default_baths,
    dephasing_generator_np,
    dressed_jump_operators,
    generalized_liouvillian,
    rwa_lindblad_np,
    rwa_lindblad_sp,
)
from rabicrit.dynamics import (
    IntegratorConfig,
    check_density_matrix,
    coherence_element,
    evolve,
    fit_decay_rate,
    stationarity_check,
)
from rabicrit.errors import FitError, IntegrationFailureError, StiffnessError
from rabicrit.model import SystemParams, labeled_spectrum


def pure_state(dim, index):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def superposition_state(dim, i, j):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[i, i] = rho[j, j] = 0.5
    rho[i, j] = rho[j, i] = 0.5
    return rho


def zero_generator(dim):
    return GeneratorSpec("composite", dim, np.zeros((dim * dim, dim * dim), dtype=complex))


def single_ladder_generator(dim, rate):
    op = np.zeros((dim, dim), dtype=complex)
    op[0, 1] = 1.0
    eye = np.eye(dim, dtype=complex)
    od = op.conj().T
    sup = rate * (
        np.kron(op, op.conj())
        - 0.5 * np.kron(od @ op, eye)
        - 0.5 * np.kron(eye, (od @ op).T)
    )
    return GeneratorSpec("composite", dim, sup)


class TestEvolveBasics:
    def test_free_evolution_preserves_observables(self):
        dim = 4
        h = np.diag(np.arange(dim, dtype=float)).astype(complex)
        rho0 = superposition_state(dim, 0, 2)
        cfg = IntegratorConfig(t_end=5.0, dt=0.01, n_record=41)
        traj = evolve(h, zero_generator(dim), rho0, cfg, coherence_pairs=((0, 2),))
        assert np.abs(traj.populations - traj.populations[0]).max() < 1e-9
        np.testing.assert_allclose(coherence_element(traj, 0, 2), 0.5, atol=1e-9)

    @pytest.mark.parametrize("method", ["fixed_rk4", "adaptive_rkf45"])
    def test_two_level_decay_closed_form(self, method):
        rate, dim = 0.35, 2
        gen = single_ladder_generator(dim, rate)
        cfg = IntegratorConfig(t_end=8.0, dt=0.01, n_record=81, method=method)
        traj = evolve(None, gen, pure_state(dim, 1), cfg)
        np.testing.assert_allclose(
            traj.populations[:, 1], np.exp(-rate * traj.times), atol=1e-6
        )

    def test_trace_and_hermiticity_conserved(self, np_spectrum_r1e3):
        p = np_spectrum_r1e3.params
        gen = generalized_liouvillian(
            dressed_jump_operators(np_spectrum_r1e3), default_baths(p)
        )
        h = np.diag(np_spectrum_r1e3.energies).astype(complex)
        cfg = IntegratorConfig(t_end=30.0, dt=0.02, n_record=31)
        traj = evolve(h, gen, pure_state(10, 1), cfg)
        assert traj.trace_drift.max() < 1e-8
        assert traj.min_eig.min() > -1e-7

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            evolve(None, zero_generator(3), pure_state(4, 0),
                   IntegratorConfig(t_end=1.0))

    def test_trace_drift_aborts(self):
        dim = 2
        bad = GeneratorSpec("composite", dim, np.eye(dim * dim, dtype=complex))
        with pytest.raises(IntegrationFailureError):
            evolve(None, bad, pure_state(dim, 0), IntegratorConfig(t_end=2.0, dt=0.01))

    def test_stiff_generator_underflows_adaptive_step(self):
        dim = 2
        gen = single_ladder_generator(dim, 1e18)
        cfg = IntegratorConfig(t_end=1.0, dt=1e-3, method="adaptive_rkf45",
                               abs_tol=1e-14, rel_tol=1e-14)
        with pytest.raises((StiffnessError, IntegrationFailureError)):
            evolve(None, gen, pure_state(dim, 1), cfg)

    def test_rk4_convergence_order(self):
        rate, dim, t_end = 0.9, 2, 4.0
        exact = np.exp(-rate * t_end)
        errs = []
        for dt in (0.4, 0.2):
            cfg = IntegratorConfig(t_end=t_end, dt=dt, n_record=2, resym_every=10**9)
            traj = evolve(None, single_ladder_generator(dim, rate), pure_state(dim, 1), cfg)
            errs.append(abs(traj.populations[-1, 1] - exact))
        assert errs[0] / errs[1] > 8   # fourth order: ~16x per halving


class TestPhysicalRates:
    def test_rwa_np_fitted_rate(self, np_params_r1e3):
        gen = rwa_lindblad_np(np_params_r1e3, m_keep=6)
        cfg = IntegratorConfig(t_end=300.0, dt=0.05, n_record=61)
        traj = evolve(None, gen, pure_state(6, 1), cfg)
        rate, err = fit_decay_rate(traj.times, traj.populations[:, 1])
        assert rate == pytest.approx(0.19 * 0.05, rel=0.02)

    def test_rwa_np_rate_at_g07(self):
        p = SystemParams(ratio=1000, g=0.7, gamma1=1.0)
        gen = rwa_lindblad_np(p, m_keep=4)
        cfg = IntegratorConfig(t_end=5.0, dt=0.002, n_record=41)
        traj = evolve(None, gen, pure_state(4, 1), cfg)
        rate, _ = fit_decay_rate(traj.times, traj.populations[:, 1])
        assert rate == pytest.approx(0.51, rel=0.02)

    def test_monotone_ground_state_filling(self, np_params_r1e3):
        gen = rwa_lindblad_np(np_params_r1e3, m_keep=6)
        cfg = IntegratorConfig(t_end=1000.0, dt=0.05, n_record=61)
        traj = evolve(None, gen, pure_state(6, 4), cfg)
        ground = traj.populations[:, 0]
        assert np.all(np.diff(ground) > -1e-10)
        assert ground[-1] > 0.999

    def test_critical_slowdown_ordering(self):
        times = {}
        for g in (0.7, 0.9, 0.99):
            p = SystemParams(ratio=1000, g=g, gamma1=0.05)
            gen = rwa_lindblad_np(p, m_keep=4)
            rate_expected = 0.05 * (1 - g * g)
            cfg = IntegratorConfig(t_end=3.0 / rate_expected, dt=0.3 / rate_expected,
                                   n_record=301)
            traj = evolve(None, gen, pure_state(4, 1), cfg)
            below = np.nonzero(traj.populations[:, 1] < np.exp(-1))[0]
            times[g] = traj.times[below[0]]
        assert times[0.99] > times[0.9] > times[0.7]
        for ga, gb in [(0.9, 0.7), (0.99, 0.9)]:
            expected = (1 - gb * gb) / (1 - ga * ga)
            assert times[ga] / times[gb] == pytest.approx(expected, rel=0.15)


class TestCoherences:
    def test_initial_coherence_value(self):
        dim = 4
        rho0 = superposition_state(dim, 0, 2)
        cfg = IntegratorConfig(t_end=1.0, dt=0.01, n_record=11)
        traj = evolve(None, zero_generator(dim), rho0, cfg, coherence_pairs=((0, 2),))
        assert coherence_element(traj, 0, 2)[0] == pytest.approx(0.5, abs=1e-12)

    def test_dephasing_coherence_decay_rate(self, np_params_r1e3):
        gen = dephasing_generator_np(np_params_r1e3, m_keep=6)
        cfg = IntegratorConfig(t_end=30.0, dt=0.01, n_record=61)
        rho0 = superposition_state(6, 0, 2)
        traj = evolve(None, gen, rho0, cfg, coherence_pairs=((0, 2),))
        n_e = coherence_element(traj, 0, 2)
        np.testing.assert_allclose(
            n_e, 0.5 * np.exp(-0.0931645 * traj.times), rtol=0.02
        )
        # populations exactly constant under the diagonal generator
        assert np.abs(traj.populations - traj.populations[0]).max() < 1e-10

    def test_unrequested_pair_raises(self):
        dim = 3
        cfg = IntegratorConfig(t_end=1.0, dt=0.1, n_record=5)
        traj = evolve(None, zero_generator(dim), pure_state(dim, 0), cfg)
        with pytest.raises(ValueError):
            coherence_element(traj, 0, 2)


class TestFitDecayRate:
    def test_exact_exponential(self):
        t = np.linspace(0, 10, 60)
        rate, err = fit_decay_rate(t, np.exp(-0.3 * t))
        assert rate == pytest.approx(0.3, abs=1e-9)
        assert err < 1e-6

    def test_two_exponential_rejected(self):
        t = np.linspace(0, 12, 80)
        series = 0.5 * np.exp(-0.2 * t) + 0.5 * np.exp(-2.0 * t)
        with pytest.raises(FitError):
            fit_decay_rate(t, series)

    def test_short_series_rejected(self):
        t = np.linspace(0, 1, 10)
        with pytest.raises(FitError):
            fit_decay_rate(t, np.exp(-3 * t))

    def test_shallow_series_rejected(self):
        t = np.linspace(0, 1, 40)
        with pytest.raises(FitError):
            fit_decay_rate(t, np.exp(-0.5 * t))

    def test_non_monotone_rejected(self):
        t = np.linspace(0, 10, 40)
        series = np.exp(-0.5 * t) * (1 + 0.2 * np.sin(3 * t))
        with pytest.raises(FitError):
            fit_decay_rate(t, series)


class TestStationarity:
    def test_np_ground_is_dark(self, np_params_r1e3):
        gen = rwa_lindblad_np(np_params_r1e3, m_keep=6)
        state = np.eye(6)[:, 0]
        assert stationarity_check(gen, state) == 0.0

    def test_sp_branch_bottom_is_dark(self):
        p = SystemParams(ratio=100, g=1.1, gamma1=0.05)
        gen = rwa_lindblad_sp(p, m_keep=6)
        state = np.eye(6)[:, 1]   # (0, -)
        assert stationarity_check(gen, state) == 0.0

    def test_sp_branch_bottom_dark_under_full_generator(self, sp_spectrum_r100):
        p = sp_spectrum_r100.params
        gen = generalized_liouvillian(
            dressed_jump_operators(sp_spectrum_r100), default_baths(p)
        )
        state = np.eye(10)[:, 1]   # (0, -) in the interleaved basis
        assert stationarity_check(gen, state) < 1e-4 * p.gamma1


class TestDensityMatrixChecks:
    def test_valid_state_passes(self):
        check_density_matrix(np.eye(3) / 3)

    def test_bad_trace_rejected(self):
        with pytest.raises(ValueError):
            check_density_matrix(np.eye(3))

    def test_non_hermitian_rejected(self):
        rho = np.eye(2, dtype=complex) / 2
        rho[0, 1] = 0.1
        from rabicrit.errors import SymmetryError

        with pytest.raises(SymmetryError):
            check_density_matrix(rho)
