"""Tests for parametric manifolds, quadrature grids, and geodesic engines."""

import numpy as np
import numpy.testing as npt
import pytest

from manikern import ConfigurationError, DomainError, get_manifold

# Closed-curve length frozen from midpoint quadrature at 10^6 points;
# values at 10^5 and 10^6 agree to 2e-15 (smooth periodic integrand).
CURVE_LENGTH = 11.025683547587413

TORUS_AREA = 4.0 * np.pi**2 / 3.0


@pytest.fixture(scope="module")
def curve():
    return get_manifold("curve6lobe")


@pytest.fixture(scope="module")
def torus():
    return get_manifold("torus")


@pytest.fixture(scope="module")
def circle():
    return get_manifold("circle")


class TestEmbed:
    def test_curve_reference_points(self, curve):
        npt.assert_allclose(curve.embed(0.0), [4.0 / 3.0, 0.0, 0.0], atol=1e-15)
        npt.assert_allclose(
            curve.embed(np.pi / 2.0), [0.0, 2.0 / 3.0, 0.0], atol=1e-14
        )

    def test_torus_reference_point(self, torus):
        npt.assert_allclose(
            torus.embed([0.0, np.pi]), [2.0 / 3.0, 0.0, 0.0], atol=1e-14
        )

    def test_periodicity(self, curve, torus):
        rng = np.random.default_rng(3)
        th = rng.uniform(0.0, 2.0 * np.pi, size=50)
        npt.assert_allclose(
            curve.embed(th), curve.embed(th + 2.0 * np.pi), atol=1e-12
        )
        prm = rng.uniform(0.0, 2.0 * np.pi, size=(50, 2))
        for shift in ([2.0 * np.pi, 0.0], [0.0, 2.0 * np.pi]):
            npt.assert_allclose(
                torus.embed(prm), torus.embed(prm + np.asarray(shift)), atol=1e-12
            )

    def test_batch_and_single_shapes(self, curve, torus):
        assert curve.embed(1.0).shape == (3,)
        assert curve.embed([0.1, 0.2, 0.3]).shape == (3, 3)
        assert torus.embed([0.1, 0.2]).shape == (3,)
        assert torus.embed([[0.1, 0.2]]).shape == (1, 3)

    def test_nonfinite_rejected(self, curve, torus):
        with pytest.raises(DomainError):
            curve.embed(np.nan)
        with pytest.raises(DomainError):
            torus.embed([np.inf, 0.0])

    def test_wrong_arity_rejected(self, torus):
        with pytest.raises(DomainError):
            torus.embed([0.1, 0.2, 0.3])


class TestJacobian:
    def test_curve_reference(self, curve):
        npt.assert_allclose(
            curve.jacobian(0.0).ravel(), [0.0, 4.0 / 3.0, 2.0 / 3.0], atol=1e-14
        )

    def test_circle_reference(self, circle):
        npt.assert_allclose(circle.jacobian(0.0).ravel(), [0.0, 1.0, 0.0], atol=1e-15)

    def test_torus_reference(self, torus):
        npt.assert_allclose(
            torus.jacobian([0.0, 0.0])[:, 1], [0.0, 0.0, 1.0 / 3.0], atol=1e-14
        )

    @pytest.mark.parametrize("name", ["curve6lobe", "torus", "circle"])
    def test_matches_finite_differences(self, name):
        m = get_manifold(name)
        rng = np.random.default_rng(11)
        prm = rng.uniform(0.0, 2.0 * np.pi, size=(20, m.k))
        jac = m.jacobian(prm)
        step = 1e-6
        for axis in range(m.k):
            shift = np.zeros(m.k)
            shift[axis] = step
            fd = (m.embed(prm + shift) - m.embed(prm - shift)) / (2.0 * step)
            npt.assert_allclose(jac[:, :, axis], fd, atol=1e-8)

    @pytest.mark.parametrize("name", ["curve6lobe", "torus", "circle"])
    def test_immersion_full_rank(self, name):
        m = get_manifold(name)
        rng = np.random.default_rng(5)
        prm = rng.uniform(0.0, 2.0 * np.pi, size=(200, m.k))
        sing = np.linalg.svd(m.jacobian(prm), compute_uv=False)
        assert np.min(sing[:, -1]) > 1e-3


class TestQuadrature:
    def test_circle_circumference(self, circle):
        grid = circle.quadrature_grid(100)
        assert abs(grid.weights.sum() - 2.0 * np.pi) < 1e-10

    def test_torus_area(self, torus):
        grid = torus.quadrature_grid((180, 135))
        total = grid.weights.sum()
        assert abs(total - TORUS_AREA) / TORUS_AREA < 1e-8

    def test_curve_length(self, curve):
        grid = curve.quadrature_grid(3000)
        assert abs(grid.weights.sum() - CURVE_LENGTH) / CURVE_LENGTH < 1e-12

    def test_weights_positive(self, curve, torus):
        assert np.all(curve.quadrature_grid(64).weights > 0.0)
        assert np.all(torus.quadrature_grid((16, 12)).weights > 0.0)

    def test_curve_total_order_two(self, curve):
        errs = [
            abs(curve.quadrature_grid(n).weights.sum() - CURVE_LENGTH)
            for n in (8, 16, 32)
        ]
        assert errs[0] / errs[1] > 4.0
        assert errs[1] / errs[2] > 4.0

    def test_torus_total_stable_under_refinement(self, torus):
        for res in ((12, 10), (24, 20)):
            total = torus.quadrature_grid(res).weights.sum()
            assert abs(total - TORUS_AREA) / TORUS_AREA < 1e-12

    def test_grid_arrays_read_only(self, circle):
        grid = circle.quadrature_grid(10)
        assert not grid.weights.flags.writeable
        assert not grid.points.flags.writeable
        assert len(grid) == 10

    def test_bad_resolution_rejected(self, torus, circle):
        with pytest.raises(ConfigurationError):
            circle.quadrature_grid(1)
        with pytest.raises(ConfigurationError):
            torus.quadrature_grid((10,))


class TestGeodesic:
    def test_circle_antipodal(self, circle):
        assert abs(circle.geodesic_distance(0.0, np.pi) - np.pi) < 1e-9

    def test_self_distance_zero(self, circle, torus):
        assert circle.geodesic_distance(1.2, 1.2) == 0.0
        assert torus.geodesic_distance([1.0, 2.0], [1.0, 2.0]) < 1e-12

    def test_torus_meridian(self, torus):
        d = torus.geodesic_distance([0.0, 0.0], [0.0, np.pi])
        expected = np.pi / 3.0
        assert abs(d - expected) / expected < 0.02

    def test_torus_meridian_double_resolution(self, torus):
        coarse = torus.geodesic_distance([0.0, 0.0], [0.0, np.pi])
        fine = torus.geodesic_distance(
            [0.0, 0.0], [0.0, np.pi], resolution=(360, 270)
        )
        assert abs(coarse - fine) / fine < 0.01

    @pytest.mark.parametrize("name", ["curve6lobe", "torus"])
    def test_symmetry(self, name):
        m = get_manifold(name)
        rng = np.random.default_rng(17)
        for _ in range(5):
            a, b = rng.uniform(0.0, 2.0 * np.pi, size=(2, m.k))
            assert abs(m.geodesic_distance(a, b) - m.geodesic_distance(b, a)) < 1e-9

    @pytest.mark.parametrize("name", ["curve6lobe", "torus"])
    def test_triangle_inequality(self, name):
        m = get_manifold(name)
        rng = np.random.default_rng(23)
        for _ in range(5):
            a, b, c = rng.uniform(0.0, 2.0 * np.pi, size=(3, m.k))
            dab = m.geodesic_distance(a, b)
            dbc = m.geodesic_distance(b, c)
            dac = m.geodesic_distance(a, c)
            assert dac <= dab + dbc + 1e-9

    @pytest.mark.parametrize("name", ["curve6lobe", "torus"])
    def test_euclidean_sandwich(self, name):
        m = get_manifold(name)
        rng = np.random.default_rng(29)
        pa = rng.uniform(0.0, 2.0 * np.pi, size=(40, m.k))
        pb = rng.uniform(0.0, 2.0 * np.pi, size=(40, m.k))
        geo = m.geodesic_engine().pairwise(pa, pb)
        euc = np.linalg.norm(m.embed(pa) - m.embed(pb), axis=1)
        keep = euc > 1e-6
        assert np.all(geo[keep] >= euc[keep] - 1e-9)
        ratio = np.max(geo[keep] / euc[keep])
        assert np.isfinite(ratio) and ratio < 10.0

    def test_circle_fill_and_separation(self, circle):
        eng = circle.geodesic_engine()
        params = np.linspace(0.0, 2.0 * np.pi, 10, endpoint=False)[:, None]
        h = eng.fill_distance(params)
        q = eng.min_pairwise_distance(params)
        assert abs(h - np.pi / 10.0) < 1e-6
        assert abs(q - 2.0 * np.pi / 10.0) < 1e-6

    def test_circle_single_node_fill(self, circle):
        eng = circle.geodesic_engine()
        assert abs(eng.fill_distance(np.array([[0.3]])) - np.pi) < 1e-6

    def test_torus_fill_and_separation_consistency(self, torus):
        eng = torus.geodesic_engine()
        rng = np.random.default_rng(41)
        params = rng.uniform(0.0, 2.0 * np.pi, size=(40, 2))
        h = eng.fill_distance(params)
        sep = eng.min_pairwise_distance(params)
        euc_min = np.inf
        pts = torus.embed(params)
        for i in range(len(pts) - 1):
            d = np.linalg.norm(pts[i + 1 :] - pts[i], axis=1)
            euc_min = min(euc_min, float(np.min(d)))
        assert h > 0.0
        assert sep >= euc_min - 1e-9
        assert sep < 10.0 * euc_min

    def test_disconnected_graph_reported(self, torus):
        # three widely separated rings of a coarse lambda grid cannot be
        # bridged by 4 nearest neighbors, which all lie within one ring
        eng = torus.geodesic_engine(resolution=(180, 3), knn=4)
        with pytest.raises(ConfigurationError):
            eng.distance([0.0, 0.0], [0.0, np.pi])

    def test_engine_cached(self, torus):
        assert torus.geodesic_engine() is torus.geodesic_engine()
