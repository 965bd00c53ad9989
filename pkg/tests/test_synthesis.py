"""Tests for trajectories, inverse engineering, strategies, and calibration."""

import numpy as np
import pytest

from lrpulse import (calibrate_strategy_c, carrier_singular_times,
                     delta_epsilon_per_period, general_trajectory,
                     load_schedule_csv, reduced_trajectory,
                     solve_omega_T_for_A, solve_omega_T_for_B, strategy_a,
                     strategy_b, strategy_c, synthesize_general)
from lrpulse.errors import CalibrationError, SynthesisError
from lrpulse.numerics import integrate
from lrpulse.synthesis import KAPPA_SUP


def window_beta(A, T, omega):
    beta = lambda t: 0.5 * A * (1 - np.cos(2 * np.pi * np.asarray(t) / T)) \
        * np.cos(omega * np.asarray(t)) ** 2
    beta_dot = lambda t: (0.5 * A * (2 * np.pi / T)
                          * np.sin(2 * np.pi * np.asarray(t) / T)
                          * np.cos(omega * np.asarray(t)) ** 2
                          - 0.5 * A * (1 - np.cos(2 * np.pi * np.asarray(t) / T))
                          * omega * np.sin(2 * omega * np.asarray(t)))
    return beta, beta_dot


class TestReducedTrajectory:
    def test_epsilon_matches_quadrature(self):
        omega = 20.0
        beta, beta_dot = window_beta(0.5, 1.0, omega)
        traj = reduced_trajectory(beta, beta_dot, omega, 0.0, 1.0)
        for t in (0.21, 0.5, 0.83, 1.0):
            ref = omega * integrate(lambda u: np.sin(beta(u)) ** 2, 0.0, t,
                                    abs_tol=1e-12, min_panels=2048)
            assert abs(traj.epsilon(t) - ref) < 1e-9

    def test_constraint_holds(self):
        omega = 20.0
        beta, beta_dot = window_beta(0.4, 1.0, omega)
        traj = reduced_trajectory(beta, beta_dot, omega, 0.0, 1.0)
        for t in np.linspace(0.05, 0.95, 7):
            assert traj.constraint_residual(t) < 1e-14

    def test_branch_phases(self):
        omega = 20.0
        beta, beta_dot = window_beta(0.5, 1.0, omega)
        traj = reduced_trajectory(beta, beta_dot, omega, 0.0, 1.0)
        t = 0.63
        eps = traj.epsilon(t)
        assert traj.phase_plus(t) == pytest.approx(omega * t - eps)
        assert traj.phase_minus(t) == pytest.approx(omega * t - eps)
        assert traj.phase_zero(t) == pytest.approx(-eps)


class TestSynthesizeGeneral:
    def test_matches_strategy_a(self):
        # the factored strategy-a envelope and the generic quotient must agree
        omega, T, A = 30.0, 1.0, 0.5
        sch_a = strategy_a(A, omega, T)
        sch_g = synthesize_general(sch_a.trajectory, omega, omega)
        ts = np.linspace(0.013, T - 0.013, 401)
        assert np.max(np.abs(sch_a.Omega_p(ts) - sch_g.Omega_p(ts))) < 1e-7
        assert np.max(np.abs(sch_a.Delta_p(ts) - sch_g.Delta_p(ts))) < 1e-9

    def test_rejects_unremovable_singularity(self):
        # a mixing angle without the squared-carrier factor leaves the
        # envelope quotient unbounded at the carrier zeros
        omega, T = 30.0, 1.0
        beta = lambda t: 0.25 * (1 - np.cos(2 * np.pi * np.asarray(t) / T))
        beta_dot = lambda t: 0.25 * (2 * np.pi / T) \
            * np.sin(2 * np.pi * np.asarray(t) / T)
        traj = reduced_trajectory(beta, beta_dot, omega, 0.0, T)
        with pytest.raises(SynthesisError):
            synthesize_general(traj, omega, omega)

    def test_general_lambda_trajectory(self):
        # nonconstant lambda on a window free of carrier zeros
        t0, t1, w = 0.3, 0.7, 2 * np.pi
        beta = lambda t: 0.9 + 0.2 * np.sin(np.pi * (np.asarray(t) - t0) / (t1 - t0))
        beta_dot = lambda t: 0.2 * np.pi / (t1 - t0) \
            * np.cos(np.pi * (np.asarray(t) - t0) / (t1 - t0))
        eps = lambda t: 0.5 * (np.asarray(t) - t0)
        eps_dot = lambda t: 0.5 + 0.0 * np.asarray(t)
        lam = lambda t: 0.15 * np.sin(2 * np.pi * (np.asarray(t) - t0))
        lam_dot = lambda t: 0.3 * np.pi * np.cos(2 * np.pi * (np.asarray(t) - t0))
        traj = general_trajectory(np.pi / 3, beta, beta_dot, eps, eps_dot,
                                  lam, lam_dot, t0, t1)
        sch = synthesize_general(traj, w, w)
        from lrpulse import invariance_residual
        sys = sch.as_system()
        for t in np.linspace(t0 + 0.02, t1 - 0.02, 9):
            assert invariance_residual(sys, traj, t, 1e-7) < 1e-7
            assert traj.constraint_residual(t) < 1e-9


class TestStrategyA:
    def test_envelope_finite_at_carrier_zeros(self):
        omega, T = 45.72 * np.pi, 1.0
        sch = strategy_a(0.5, omega, T)
        for tz in carrier_singular_times(omega, 0.0, T)[:5]:
            assert np.isfinite(complex(sch.Omega_p(tz)))

    def test_envelope_vanishes_at_ends(self):
        sch = strategy_a(0.5, 30.0, 1.0)
        assert abs(complex(sch.Omega_p(0.0))) < 1e-12
        assert abs(complex(sch.Omega_p(1.0))) < 1e-10

    def test_pump_equals_stokes(self):
        sch = strategy_a(0.4, 30.0, 1.0)
        ts = np.linspace(0, 1, 50)
        assert np.max(np.abs(sch.Omega_p(ts) - sch.Omega_s(ts))) == 0.0

    def test_detuning_relation(self):
        sch = strategy_a(0.4, 30.0, 1.0)
        beta = sch.trajectory.beta
        ts = np.linspace(0, 1, 50)
        ref = -2.0 * 30.0 * np.sin(beta(ts)) ** 2
        assert np.max(np.abs(sch.Delta_p(ts) - ref)) < 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            strategy_a(1.5, 30.0, 1.0)
        with pytest.raises(ValueError):
            strategy_a(0.4, -1.0, 1.0)


class TestStrategyB:
    def test_patch_is_linear_and_continuous(self):
        omega = 11.3369 * np.pi
        sch = strategy_b(0.5, omega, 1.0, 0.01)
        tn = sch.params["singular_times"][2]
        lo, hi = tn - 0.01, tn + 0.01
        vlo, vhi = complex(sch.Omega_p(lo)), complex(sch.Omega_p(hi))
        mid = complex(sch.Omega_p(tn))
        assert abs(mid - 0.5 * (vlo + vhi)) < 1e-9
        # continuity at the patch edges
        assert abs(complex(sch.Omega_p(lo - 1e-12)) - vlo) < 1e-6
        assert np.isfinite(mid)

    def test_neglect_imag(self):
        sch = strategy_b(0.5, 11.3369 * np.pi, 1.0, 0.01, neglect_imag=True)
        ts = np.linspace(0.1, 0.9, 200)
        assert np.max(np.abs(np.imag(sch.Omega_p(ts)))) == 0.0

    def test_detuning_unpatched(self):
        omega = 11.3369 * np.pi
        sch = strategy_b(0.5, omega, 1.0, 0.01)
        tn = sch.params["singular_times"][1]
        f = sch.trajectory.beta
        assert complex(sch.Delta_p(tn)) == pytest.approx(
            -2.0 * omega * np.sin(f(tn)) ** 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            strategy_b(0.5, 30.0, 1.0, -0.1)
        with pytest.raises(ValueError):
            strategy_b(0.5, 30.0, 1.0, 0.2)   # overlaps adjacent zeros


class TestStrategyC:
    def test_real_part_is_cubed_carrier(self):
        omega, kappa = 1.0, 0.3
        sch = strategy_c(kappa, omega, 3)
        ts = sch.sample_times(50)
        ref = kappa * np.cos(ts) ** 3
        assert np.max(np.abs(np.real(sch.Omega_p(ts)) - ref)) < 1e-12

    def test_beta_relation(self):
        sch = strategy_c(0.3, 1.0, 2)
        beta = sch.trajectory.beta
        ts = sch.sample_times(40)
        lhs = np.sin(-2.0 * beta(ts))
        rhs = 2.0 * np.sqrt(2.0) * 0.3 * np.cos(ts) ** 4
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_domain(self):
        sch = strategy_c(0.2, 4.0, 5)
        assert sch.t_start == pytest.approx(np.pi / 8.0)
        assert sch.t_end == pytest.approx(np.pi / 8.0 + 5 * np.pi / 2.0)

    def test_zero_amplitude(self):
        sch = strategy_c(0.0, 1.0, 1)
        ts = sch.sample_times(20)
        assert np.max(np.abs(sch.Omega_p(ts))) == 0.0
        assert np.max(np.abs(sch.Delta_p(ts))) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            strategy_c(0.5, 1.0, 2)   # at/above the amplitude supremum
        with pytest.raises(ValueError):
            strategy_c(0.2, 1.0, 0)


class TestCalibration:
    def test_omega_T_spot_values(self):
        assert solve_omega_T_for_A(0.5).value / np.pi == pytest.approx(
            29.73, abs=0.01)
        assert solve_omega_T_for_B(0.6).value / np.pi == pytest.approx(
            8.09, abs=0.01)

    def test_epsilon_reaches_pi(self):
        cal = solve_omega_T_for_A(0.45)
        omega = cal.value
        sch = strategy_a(0.45, omega, 1.0)
        assert sch.trajectory.epsilon(1.0) == pytest.approx(np.pi, abs=1e-4)

    def test_delta_epsilon_monotone(self):
        ks = np.linspace(0.0, KAPPA_SUP * 0.999, 12)
        vals = [delta_epsilon_per_period(k) for k in ks]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_calibrate_c_round_trip(self):
        cal = calibrate_strategy_c(np.pi / 6)
        assert delta_epsilon_per_period(cal.value) == pytest.approx(
            np.pi / 6, abs=1e-6)

    def test_calibrate_c_out_of_range(self):
        with pytest.raises(CalibrationError):
            calibrate_strategy_c(2.0)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            solve_omega_T_for_A(0.0)
        with pytest.raises(ValueError):
            calibrate_strategy_c(0.5, tol=-1.0)


class TestCsvRoundTrip:
    def test_header_and_columns(self, tmp_path):
        sch = strategy_c(0.3, 1.0, 2)
        path = tmp_path / "sched.csv"
        sch.write_csv(path, samples_per_period=64)
        meta, data = load_schedule_csv(path)
        assert meta["schema_version"] == 1
        assert meta["strategy"] == "c"
        assert meta["params"]["Omega0_over_omega"] == pytest.approx(0.3)
        names = data.dtype.names
        assert names == ("t", "re_omega_p", "im_omega_p",
                         "re_omega_s", "im_omega_s", "delta")
        ts = data["t"]
        vals = np.asarray(sch.Omega_p(ts), dtype=complex)
        assert np.max(np.abs(data["re_omega_p"] - vals.real)) < 1e-10

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,re_omega_p\n0,0\n")
        with pytest.raises(ValueError):
            load_schedule_csv(path)


class TestCarrierSingularTimes:
    def test_zeros_of_cosine(self):
        ts = carrier_singular_times(10.0, 0.0, 2.0)
        assert np.max(np.abs(np.cos(10.0 * ts))) < 1e-12
        assert np.all((ts > 0.0) & (ts < 2.0))
        # count: cos(10 t) has zeros at (n+1/2) pi/10 < 2 -> n = 0..5
        assert len(ts) == 6
