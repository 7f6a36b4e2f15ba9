"""Path construction, Finsler integrals, distance bounds, local shortening."""
import numpy as np
import pytest

from ccmkit import (DegeneratePath, DistanceOptions, approx_distance,
                    energy_integral, length_integral, load_metric,
                    make_parametric_path, make_straight_path, path_from_nodes,
                    shorten_path)

BUILTINS = ["quartic2d", "euclidean2d", "quadratic_pendulum",
            "randers_pendulum"]


class TestMakeStraightPath:
    def test_midpoint_and_tangents(self):
        path = make_straight_path(np.zeros(2), np.array([1.0, 1.0]), 11)
        assert np.allclose(path.nodes[5], [0.5, 0.5])
        assert np.allclose(path.tangents, [1.0, 1.0])

    def test_two_node_interval(self):
        path = make_straight_path(np.array([0.0]), np.array([np.pi]), 2)
        assert np.allclose(path.nodes[:, 0], [0.0, np.pi])
        assert path.tangents[0, 0] == pytest.approx(np.pi)

    def test_coincident_endpoints_raise(self):
        with pytest.raises(DegeneratePath):
            make_straight_path(np.zeros(2), np.zeros(2), 5)

    def test_nearly_coincident_endpoints_raise(self):
        with pytest.raises(DegeneratePath):
            make_straight_path(np.zeros(2), np.full(2, 1e-12), 5)


class TestEnergyIntegral:
    def test_quartic_constant_integrand(self):
        path = make_straight_path(np.zeros(2), np.array([1.0, 1.0]), 51)
        val = energy_integral(path, load_metric("quartic2d"))
        assert val == pytest.approx(2.0 ** 0.25, abs=1e-9)

    def test_euclidean_straight_line_length(self):
        path = make_straight_path(np.zeros(2), np.array([3.0, 4.0]), 51)
        assert energy_integral(path, load_metric("euclidean2d")) \
            == pytest.approx(5.0, abs=1e-9)

    @pytest.mark.parametrize("lam", [0.3, 2.0, 7.5])
    def test_scales_linearly_with_endpoint_scaling(self, lam):
        metric = load_metric("quartic2d")
        base = make_straight_path(np.zeros(2), np.array([1.0, 0.4]), 21)
        scaled = make_straight_path(np.zeros(2), lam * np.array([1.0, 0.4]), 21)
        assert energy_integral(scaled, metric) \
            == pytest.approx(lam * energy_integral(base, metric), rel=1e-9)


class TestLengthIntegral:
    def test_equals_energy_for_default_structure(self):
        # quartic2d carries no explicit F, so F = V^(1/p) exactly
        metric = load_metric("quartic2d")
        path = make_straight_path(np.array([0.2, -1.0]),
                                  np.array([1.0, 2.0]), 31)
        assert length_integral(path, metric) == energy_integral(path, metric)

    def test_randers_direction_dependence(self):
        metric = load_metric("randers_pendulum")
        fwd = make_straight_path(np.array([0.0]), np.array([1.0]), 21)
        back = make_straight_path(np.array([1.0]), np.array([0.0]), 21)
        assert length_integral(fwd, metric) == pytest.approx(1.0, abs=1e-9)
        assert length_integral(back, metric) == pytest.approx(3.0, abs=1e-9)


class TestGridRefinement:
    @pytest.mark.parametrize("name", BUILTINS)
    def test_doubling_changes_integral_under_one_percent(self, name):
        metric = load_metric(name)
        if metric.dim == 2:
            fn = lambda s: np.array([s, 0.5 * np.sin(np.pi * s) + 0.2 * s])
            dfn = lambda s: np.array([1.0,
                                      0.5 * np.pi * np.cos(np.pi * s) + 0.2])
        else:
            fn = lambda s: np.array([s + 0.2 * np.sin(0.8 * np.pi * s)])
            dfn = lambda s: np.array(
                [1.0 + 0.16 * np.pi * np.cos(0.8 * np.pi * s)])
        coarse = energy_integral(make_parametric_path(fn, dfn, 51), metric)
        fine = energy_integral(make_parametric_path(fn, dfn, 101), metric)
        assert abs(fine - coarse) / abs(fine) < 0.01


class TestApproxDistance:
    def test_euclidean_straight_line(self):
        d, path = approx_distance(np.zeros(2), np.array([3.0, 4.0]),
                                  load_metric("euclidean2d"))
        assert d == pytest.approx(5.0, abs=1e-3)
        assert np.allclose(path.nodes[0], 0.0)
        assert np.allclose(path.nodes[-1], [3.0, 4.0])

    def test_randers_asymmetric_distances(self):
        metric = load_metric("randers_pendulum")
        d01, _ = approx_distance(np.zeros(1), np.ones(1), metric)
        d10, _ = approx_distance(np.ones(1), np.zeros(1), metric)
        assert d01 == pytest.approx(1.0, abs=1e-3)
        assert d10 == pytest.approx(3.0, abs=1e-3)
        assert d01 != d10

    def test_quartic_coordinate_segment(self):
        d, _ = approx_distance(np.zeros(2), np.array([1.0, 0.0]),
                               load_metric("quartic2d"))
        assert d == pytest.approx(1.0, abs=1e-3)

    def test_positive_definiteness(self):
        metric = load_metric("euclidean2d")
        rng = np.random.default_rng(9)
        opts = DistanceOptions(count=11, iters=10)
        for _ in range(20):
            x1 = rng.uniform(-2, 2, 2)
            x2 = rng.uniform(-2, 2, 2)
            if np.linalg.norm(x1 - x2) <= 1e-6:
                continue
            d, _ = approx_distance(x1, x2, metric, opts)
            assert d > 0.0

    @pytest.mark.parametrize("name", BUILTINS)
    def test_triangle_inequality(self, name):
        metric = load_metric(name)
        rng = np.random.default_rng(10)
        opts = DistanceOptions(count=11, iters=10)
        done = 0
        while done < 50:
            pts = rng.uniform(-2, 2, size=(3, metric.dim))
            seps = [np.linalg.norm(pts[i] - pts[j])
                    for i, j in ((0, 1), (1, 2), (0, 2))]
            if min(seps) < 1e-3:
                continue
            done += 1
            d13 = approx_distance(pts[0], pts[2], metric, opts)[0]
            d12 = approx_distance(pts[0], pts[1], metric, opts)[0]
            d23 = approx_distance(pts[1], pts[2], metric, opts)[0]
            assert d13 <= d12 + d23 + 1e-2


class TestShortenPath:
    def test_straight_path_is_fixed_point(self):
        metric = load_metric("euclidean2d")
        path = make_straight_path(np.zeros(2), np.array([1.0, 1.0]), 21)
        before = energy_integral(path, metric)
        out = shorten_path(path, metric, iters=10)
        assert energy_integral(out, metric) == pytest.approx(before, rel=1e-12)

    def test_zigzag_shrinks_toward_chord(self):
        metric = load_metric("euclidean2d")
        # tent path (0,0) -> (0.5,1) -> (1,0); true chord length is 1
        s = np.linspace(0.0, 1.0, 21)
        nodes = np.column_stack([s, 1.0 - 2.0 * np.abs(s - 0.5)])
        path = path_from_nodes(nodes)
        start = energy_integral(path, metric)
        assert start > 2.0  # ~ 2 sqrt(1.25) for the exact tent
        out = shorten_path(path, metric, iters=200)
        end = energy_integral(out, metric)
        assert end < start
        assert end < 1.7  # well on its way to the chord

    def test_zero_iters_identity(self):
        metric = load_metric("euclidean2d")
        path = make_straight_path(np.zeros(2), np.ones(2), 9)
        assert shorten_path(path, metric, iters=0) is path

    def test_never_increases_energy(self):
        metric = load_metric("quartic2d")
        rng = np.random.default_rng(13)
        for _ in range(10):
            nodes = np.cumsum(rng.uniform(0.05, 0.5, size=(15, 2)), axis=0)
            path = path_from_nodes(nodes)
            before = energy_integral(path, metric)
            after = energy_integral(shorten_path(path, metric, iters=5), metric)
            assert after <= before

    def test_endpoints_fixed(self):
        metric = load_metric("euclidean2d")
        nodes = np.column_stack([np.linspace(0, 1, 11),
                                 np.sin(np.linspace(0, np.pi, 11))])
        path = path_from_nodes(nodes)
        out = shorten_path(path, metric, iters=50)
        assert np.array_equal(out.nodes[0], path.nodes[0])
        assert np.array_equal(out.nodes[-1], path.nodes[-1])
