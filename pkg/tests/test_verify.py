"""Hypothesis checks: kernel implication, ratio bound, dissipation, rates."""
import numpy as np
import pytest

from ccmkit import (Box, RateNotExponential, RateSpec, Trajectory,
                    check_ratio_bound, check_th1, convergence_report,
                    dissipation_monitor, kernel_sampler_for, load_example,
                    load_metric, quadratic_line, uncontrollable_line)


class TestCheckTh1:
    def test_example1_quartic_passes_with_margin(self):
        system = load_example("example1")
        metric = load_metric("quartic2d")
        report = check_th1(system, metric, RateSpec.linear(3.0),
                           Box.cube(-5, 5, 2), Box.cube(-5, 5, 1),
                           samples=2000, seed=1,
                           kernel_sampler=kernel_sampler_for(system, metric))
        assert report.passed
        assert report.kernel_samples == 2000
        assert report.violation_count == 0

    def test_uncontrollable_fails_with_witness(self):
        report = check_th1(uncontrollable_line(), quadratic_line(),
                           RateSpec.zero(), Box.cube(-2, 2, 1),
                           Box.cube(-2, 2, 1), samples=200, seed=2)
        assert not report.passed
        assert report.violations
        assert "lhs" in report.violations[0]

    def test_input_gain_dies_at_origin_but_drift_dissipates(self):
        system = load_example("example3")
        metric = quadratic_line()
        report = check_th1(system, metric, RateSpec.zero(),
                           Box.cube(-1, 1, 1), Box.cube(-1, 1, 1),
                           samples=500, seed=3,
                           kernel_sampler=kernel_sampler_for(system, metric))
        assert report.passed
        assert report.kernel_samples == 500

    def test_empty_kernel_is_vacuous(self):
        system = load_example("pendulum")
        metric = load_metric("quadratic_pendulum")
        report = check_th1(system, metric, RateSpec.zero(),
                           Box(np.array([0.0]), np.array([np.pi])),
                           Box.cube(-2, 2, 1), samples=500, seed=4)
        assert report.passed
        assert report.kernel_samples == 0
        assert any("vacuous" in n for n in report.notes)

    def test_deterministic_for_fixed_seed(self):
        report_a = check_th1(uncontrollable_line(), quadratic_line(),
                             RateSpec.zero(), Box.cube(-2, 2, 1),
                             Box.cube(-2, 2, 1), samples=100, seed=7)
        report_b = check_th1(uncontrollable_line(), quadratic_line(),
                             RateSpec.zero(), Box.cube(-2, 2, 1),
                             Box.cube(-2, 2, 1), samples=100, seed=7)
        assert report_a.violation_count == report_b.violation_count
        assert report_a.violations[0] == report_b.violations[0]

    def test_kernel_tol_convention_is_flagged(self):
        report = check_th1(uncontrollable_line(), quadratic_line(),
                           RateSpec.zero(), Box.cube(-1, 1, 1),
                           Box.cube(-1, 1, 1), samples=10, seed=0)
        assert any("kernel membership" in n for n in report.notes)


class TestCheckRatioBound:
    def test_example1_numerator_identically_zero(self):
        report = check_ratio_bound(load_example("example1"),
                                   load_metric("quartic2d"),
                                   Box.cube(-5, 5, 2),
                                   Box.cube(0.5, 1.5, 2), samples=500, seed=5)
        assert report.max_ratio == 0.0
        assert report.passed

    def test_cubic_blowup_near_origin(self):
        # ratio is 1/x^3: sup over x in [0.01, 1] is 1e6, hit at the corner
        report = check_ratio_bound(load_example("example3"), quadratic_line(),
                                   Box(np.array([0.01]), np.array([1.0])),
                                   Box(np.array([0.5]), np.array([1.0])),
                                   samples=500, seed=6)
        assert report.max_ratio == pytest.approx(1e6, rel=0.01)
        assert report.passed  # bounded on this compact box

    def test_cubic_on_safer_box(self):
        report = check_ratio_bound(load_example("example3"), quadratic_line(),
                                   Box(np.array([0.5]), np.array([1.0])),
                                   Box(np.array([0.5]), np.array([1.0])),
                                   samples=500, seed=6)
        assert report.max_ratio == pytest.approx(8.0, rel=0.01)

    def test_cap_flags_failure(self):
        report = check_ratio_bound(load_example("example3"), quadratic_line(),
                                   Box(np.array([0.001]), np.array([1.0])),
                                   Box(np.array([0.5]), np.array([1.0])),
                                   samples=200, seed=6, cap=1e8)
        assert not report.passed
        assert report.max_ratio == pytest.approx(1e9, rel=0.01)

    def test_delta_box_must_exclude_origin(self):
        with pytest.raises(ValueError):
            check_ratio_bound(load_example("example3"), quadratic_line(),
                              Box.cube(0.1, 1, 1), Box.cube(-1, 1, 1))


class TestDissipationMonitor:
    def test_zero_rate_canonical_run(self, e1_runs):
        report = dissipation_monitor(e1_runs["zero"], RateSpec.zero(),
                                     diss_tol=1e-3)
        assert report.passed
        assert report.checked_samples > 0

    def test_linear_rate_canonical_run(self, e1_runs):
        report = dissipation_monitor(e1_runs["linear"], RateSpec.linear(1.0),
                                     diss_tol=1e-3)
        assert report.passed
        assert report.violation_count == 0

    @pytest.mark.parametrize("key", ["asym_up", "asym_down", "sym_up",
                                     "sym_down"])
    def test_pendulum_runs(self, pendulum_runs, key):
        report = dissipation_monitor(pendulum_runs[key], RateSpec.linear(1.0),
                                     diss_tol=1e-3)
        assert report.passed, report.violations[:3]

    def test_constant_v_violates_linear_rate(self):
        times = np.arange(11) * 0.1
        node_V = np.ones((11, 5))
        traj = Trajectory(times=times, states=np.zeros((11, 1)),
                          controls=np.zeros((11, 1)), energies=np.ones(11),
                          node_V=node_V, dist_est=np.ones(11))
        report = dissipation_monitor(traj, RateSpec.linear(1.0),
                                     diss_tol=1e-3)
        assert not report.passed
        assert report.violation_count == report.checked_samples == 27

    def test_empty_trajectory_passes_vacuously(self):
        traj = Trajectory(times=np.zeros(0), states=np.zeros((0, 1)),
                          controls=np.zeros((0, 1)), energies=np.zeros(0),
                          node_V=np.zeros((0, 5)), dist_est=np.zeros(0))
        report = dissipation_monitor(traj, RateSpec.zero())
        assert report.passed
        assert report.checked_samples == 0


class TestConvergenceReport:
    def test_canonical_run_rates(self, e1_runs):
        conv = convergence_report(e1_runs["linear"], e1_runs["metric"],
                                  RateSpec.linear(1.0))
        assert conv.predicted_rate == pytest.approx(0.25)
        assert conv.overshoot_bound == pytest.approx(1.0)
        assert conv.fitted_rate >= 0.225
        assert conv.overshoot_observed <= 1.05
        assert conv.passed

    def test_formula_instance(self):
        # synthetic exponential decay fitted back at lam/p = 1.0
        times = np.linspace(0.0, 5.0, 51)
        energies = 2.0 * np.exp(-times)
        traj = Trajectory(times=times, states=np.zeros((51, 1)),
                          controls=np.zeros((51, 1)), energies=energies,
                          node_V=np.ones((51, 3)), dist_est=energies)
        conv = convergence_report(traj, quadratic_line(), RateSpec.linear(2.0))
        assert conv.predicted_rate == pytest.approx(1.0)
        assert conv.fitted_rate == pytest.approx(1.0, rel=1e-6)

    def test_randers_overshoot_bound_vs_euclidean_reference(self,
                                                            pendulum_runs):
        metric = load_metric("randers_pendulum")
        conv = convergence_report(pendulum_runs["asym_up"], metric,
                                  RateSpec.linear(1.0))
        assert conv.overshoot_bound == pytest.approx(3.0)
        assert conv.overshoot_ok

    def test_requires_linear_rate(self, e1_runs):
        with pytest.raises(RateNotExponential):
            convergence_report(e1_runs["zero"], e1_runs["metric"],
                               RateSpec.zero())

    def test_requires_enough_samples(self):
        traj = Trajectory(times=np.arange(5) * 0.1, states=np.zeros((5, 1)),
                          controls=np.zeros((5, 1)), energies=np.ones(5),
                          node_V=np.ones((5, 3)), dist_est=np.ones(5))
        with pytest.raises(ValueError):
            convergence_report(traj, quadratic_line(), RateSpec.linear(1.0))
