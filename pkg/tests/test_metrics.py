"""Metric evaluations, structure axioms, and the sandwich bounds."""
import numpy as np
import pytest

from ccmkit import (AxiomSampleSpec, NonSmoothAtZero, UnknownMetric,
                    broken_signed_line, check_finsler_axioms, eval_F,
                    eval_metric, load_metric, quadratic_line, resolve_metric)

BUILTINS = ["quartic2d", "euclidean2d", "quadratic_pendulum",
            "randers_pendulum"]


@pytest.fixture(scope="module")
def quartic():
    return load_metric("quartic2d")


@pytest.fixture(scope="module")
def randers():
    return load_metric("randers_pendulum")


class TestEvalMetric:
    def test_quartic_values(self, quartic):
        v, gx, gd = eval_metric(quartic, np.zeros(2), np.array([1.0, 1.0]))
        assert v == pytest.approx(2.0)
        assert np.allclose(gx, 0.0)
        assert np.allclose(gd, [4.0, 4.0])

    def test_randers_asymmetry(self, randers):
        up = eval_metric(randers, np.zeros(1), np.array([1.0]))
        down = eval_metric(randers, np.zeros(1), np.array([-1.0]))
        assert up.V == pytest.approx(1.0)
        assert down.V == pytest.approx(9.0)

    def test_quadratic_pendulum(self):
        metric = load_metric("quadratic_pendulum")
        out = eval_metric(metric, np.zeros(1), np.array([0.5]))
        assert out.V == pytest.approx(1.0)
        assert out.dV_ddelta[0] == pytest.approx(4.0)

    def test_randers_gradient_undefined_at_zero(self, randers):
        with pytest.raises(NonSmoothAtZero):
            eval_metric(randers, np.zeros(1), np.zeros(1))


class TestEvalF:
    def test_quartic_default_root(self, quartic):
        f = eval_F(quartic, np.zeros(2), np.array([1.0, 1.0]))
        assert f == pytest.approx(2.0 ** 0.25, abs=1e-9)

    @pytest.mark.parametrize("name", BUILTINS)
    def test_zero_tangent_gives_zero(self, name):
        metric = load_metric(name)
        assert eval_F(metric, np.zeros(metric.dim),
                      np.zeros(metric.dim)) == pytest.approx(0.0)

    def test_randers_backward(self, randers):
        assert eval_F(randers, np.zeros(1), np.array([-1.0])) == pytest.approx(3.0)


class TestLoadMetric:
    def test_quartic_degree(self, quartic):
        assert quartic.p == 4.0

    def test_randers_euclidean_comparison_constants(self, randers):
        # extremes of (2|d| - d)^2 / d^2 over d = +-1 are 1 and 9
        assert (randers.c1, randers.c2) == (1.0, 9.0)

    def test_euclidean_norm(self):
        metric = load_metric("euclidean2d")
        assert eval_F(metric, np.zeros(2), np.array([3.0, 4.0])) == pytest.approx(5.0)

    def test_unknown(self):
        with pytest.raises(UnknownMetric):
            load_metric("hyperbolic9d")
        with pytest.raises(UnknownMetric):
            resolve_metric("hyperbolic9d")

    def test_resolve_fixtures(self):
        assert resolve_metric("quadratic_line").name == "quadratic_line"
        assert resolve_metric("broken_signed_line").name == "broken_signed_line"


class TestSampledProperties:
    @pytest.mark.parametrize("name", BUILTINS)
    def test_homogeneity(self, name):
        metric = load_metric(name)
        rng = np.random.default_rng(5)
        for _ in range(1000):
            x = rng.uniform(-2, 2, metric.dim)
            d = rng.uniform(-2, 2, metric.dim)
            if np.linalg.norm(d) < 1e-3:
                continue
            lam = rng.uniform(1e-6, 10.0)
            f = eval_F(metric, x, d)
            assert abs(eval_F(metric, x, lam * d) - lam * f) \
                <= 1e-9 * (1.0 + lam * f)

    @pytest.mark.parametrize("name", BUILTINS)
    def test_gradient_consistency(self, name):
        metric = load_metric(name)
        rng = np.random.default_rng(6)
        checked = 0
        while checked < 200:
            x = rng.uniform(-2, 2, metric.dim)
            d = rng.uniform(-10, 10, metric.dim)
            if not 0.1 <= np.linalg.norm(d) <= 10.0:
                continue
            checked += 1
            _, _, gd = eval_metric(metric, x, d)
            fd = np.empty(metric.dim)
            h = 1e-6
            for k in range(metric.dim):
                e = np.zeros(metric.dim)
                e[k] = h
                # keep the stencil on one side of any kink at d_k = 0
                if abs(d[k]) < 2 * h:
                    continue
                fd[k] = (metric.V(x, d + e) - metric.V(x, d - e)) / (2 * h)
                assert fd[k] == pytest.approx(gd[k], rel=1e-5, abs=1e-6)

    @pytest.mark.parametrize("name", BUILTINS)
    def test_sandwich_bounds(self, name):
        metric = load_metric(name)
        rng = np.random.default_rng(7)
        for _ in range(1000):
            x = rng.uniform(-2, 2, metric.dim)
            d = rng.uniform(-2, 2, metric.dim)
            f = eval_F(metric, x, d)
            v = metric.V(x, d)
            assert metric.c1 * f ** metric.p <= v + 1e-9 * (1 + abs(v))
            assert v <= metric.c2 * f ** metric.p + 1e-9 * (1 + abs(v))

    @pytest.mark.parametrize("name", BUILTINS)
    def test_positive_definite_in_delta(self, name):
        metric = load_metric(name)
        rng = np.random.default_rng(8)
        assert metric.V(np.zeros(metric.dim), np.zeros(metric.dim)) == 0.0
        for _ in range(200):
            d = rng.uniform(-2, 2, metric.dim)
            if np.linalg.norm(d) < 1e-6:
                continue
            assert metric.V(rng.uniform(-2, 2, metric.dim), d) > 0.0


class TestAxiomChecks:
    def test_euclidean_passes_all(self):
        metric = load_metric("euclidean2d")
        report = check_finsler_axioms(metric, AxiomSampleSpec.cube(2, count=500))
        assert report.passed

    def test_randers_passes_and_shows_asymmetry(self):
        metric = load_metric("randers_pendulum")
        report = check_finsler_axioms(metric, AxiomSampleSpec.cube(1, count=500))
        assert report.checks["positivity"].passed
        assert report.checks["homogeneity"].passed
        assert report.passed
        x = np.zeros(1)
        assert eval_F(metric, x, np.array([1.0])) == pytest.approx(1.0)
        assert eval_F(metric, x, np.array([-1.0])) == pytest.approx(3.0)
        d = np.array([0.7])
        assert eval_F(metric, x, 2 * d) == pytest.approx(2 * eval_F(metric, x, d))

    def test_signed_fixture_fails_positivity(self):
        report = check_finsler_axioms(broken_signed_line(),
                                      AxiomSampleSpec.cube(1, count=200))
        assert not report.checks["positivity"].passed
        assert not report.passed
        assert report.checks["positivity"].witness is not None

    def test_quartic_subadditivity_on_plane(self):
        report = check_finsler_axioms(load_metric("quartic2d"),
                                      AxiomSampleSpec.cube(2, count=500))
        assert report.checks["subadditivity"].passed
        assert report.checks["subadditivity"].checked > 0

    def test_line_metrics_have_vacuous_subadditivity(self):
        report = check_finsler_axioms(quadratic_line(),
                                      AxiomSampleSpec.cube(1, count=100))
        assert report.checks["subadditivity"].checked == 0
        assert report.checks["subadditivity"].passed

    def test_deterministic_for_fixed_seed(self):
        metric = load_metric("randers_pendulum")
        spec = AxiomSampleSpec.cube(1, count=300, seed=42)
        r1 = check_finsler_axioms(metric, spec)
        r2 = check_finsler_axioms(metric, spec)
        assert [c.worst for c in r1.checks.values()] \
            == [c.worst for c in r2.checks.values()]
