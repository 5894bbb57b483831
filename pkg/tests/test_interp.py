"""Tests for Gram-system fitting and interpolant evaluation."""

import numpy as np
import numpy.testing as npt
import pytest

from manikern import ConditioningError, DomainError, get_manifold
from manikern.interp import Interpolant, evaluate, fit, native_norm_sq
from manikern.kernels import (
    DEFAULT_DELTA,
    kernel_matrix,
    matern_kernel,
    wendland32,
    wendland_kernel,
)
from manikern.nodeset import minimize_riesz


def gauss_solve(a, b):
    """Textbook Gaussian elimination with partial pivoting."""
    a = a.astype(float).copy()
    b = b.astype(float).copy()
    n = len(b)
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if a[piv, col] == 0.0:
            raise ZeroDivisionError("singular matrix")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        for row in range(col + 1, n):
            m = a[row, col] / a[col, col]
            a[row, col:] -= m * a[col, col:]
            b[row] -= m * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1 :] @ x[row + 1 :]) / a[row, row]
    return x


def torus_points(n, seed):
    torus = get_manifold("torus")
    rng = np.random.default_rng(seed)
    return torus.embed(rng.uniform(0.0, 2.0 * np.pi, size=(n, 2)))


class TestFit:
    def test_single_node(self):
        interp = fit(wendland_kernel(), np.zeros((1, 3)), [6.0])
        npt.assert_allclose(interp.coeffs, [2.0])

    def test_gram_column_gives_unit_vector(self):
        pts = torus_points(15, seed=2)
        kernel = wendland_kernel()
        gram = kernel_matrix(kernel, pts)
        j = 4
        interp = fit(kernel, pts, gram[:, j])
        expected = np.zeros(15)
        expected[j] = 1.0
        npt.assert_allclose(interp.coeffs, expected, atol=1e-10)

    def test_two_equal_values_symmetric_system(self):
        r = 1.3
        pts = np.array([[0.0, 0.0, 0.0], [r, 0.0, 0.0]])
        interp = fit(wendland_kernel(), pts, [1.0, 1.0])
        expected = 1.0 / (3.0 + wendland32(r))
        npt.assert_allclose(interp.coeffs, [expected, expected], atol=1e-12)

    @pytest.mark.parametrize("make", [wendland_kernel, lambda: matern_kernel(2.75)])
    def test_matches_elimination_oracle(self, make):
        kernel = make()
        rng = np.random.default_rng(31)
        for n in (5, 12, 20):
            pts = torus_points(n, seed=n)
            vals = rng.normal(size=n)
            interp = fit(kernel, pts, vals)
            oracle = gauss_solve(kernel_matrix(kernel, pts), vals)
            assert np.max(np.abs(interp.coeffs - oracle)) < 1e-10

    def test_node_residual_enforced(self):
        pts = torus_points(60, seed=9)
        vals = np.sin(pts[:, 0]) + pts[:, 2]
        interp = fit(wendland_kernel(), pts, vals)
        assert interp.node_residual <= 1e-8
        ev = evaluate(interp, pts)
        assert np.max(np.abs(ev - vals)) / np.max(np.abs(vals)) <= 1e-8

    def test_duplicate_nodes_break_down_with_pivot(self):
        pts = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        with pytest.raises(ConditioningError) as err:
            fit(wendland_kernel(), pts, [1.0, 1.0])
        assert err.value.pivot == 1

    def test_ridge_escape_hatch_marks_inexact(self):
        pts = np.array([[0.0, 0.0, 0.0], [1e-9, 0.0, 0.0]])
        interp = fit(wendland_kernel(), pts, [1.0, 1.0], ridge=1e-6)
        assert interp.inexact
        clean = fit(wendland_kernel(), np.zeros((1, 3)), [3.0])
        assert not clean.inexact

    def test_condition_estimate_at_least_one(self):
        interp = fit(wendland_kernel(), torus_points(25, seed=4), np.ones(25))
        assert interp.condition_estimate >= 1.0

    def test_value_count_mismatch(self):
        with pytest.raises(DomainError):
            fit(wendland_kernel(), torus_points(5, seed=1), [1.0, 2.0])

    def test_nonfinite_values_rejected(self):
        with pytest.raises(DomainError):
            fit(wendland_kernel(), torus_points(2, seed=1), [1.0, np.nan])

    def test_nodeset_accepted_directly(self):
        curve = get_manifold("curve6lobe")
        ns = minimize_riesz(curve, 12, seed=3, max_iters=200)
        interp = fit(wendland_kernel(), ns, np.ones(12))
        assert interp.nodes is ns
        assert len(interp) == 12


class TestEvaluate:
    def test_zero_data_zero_everywhere(self):
        pts = torus_points(10, seed=5)
        interp = fit(wendland_kernel(), pts, np.zeros(10))
        grid = torus_points(50, seed=6)
        assert np.all(evaluate(interp, grid) == 0.0)

    def test_single_node_profile_value(self):
        interp = fit(wendland_kernel(), np.zeros((1, 3)), [3.0])
        npt.assert_allclose(interp.coeffs, [1.0])
        val = evaluate(interp, np.array([DEFAULT_DELTA / 2.0, 0.0, 0.0]))
        assert abs(val - 0.32421875) < 1e-15

    def test_single_point_returns_scalar(self):
        interp = fit(wendland_kernel(), np.zeros((1, 3)), [3.0])
        assert isinstance(evaluate(interp, np.zeros(3)), float)

    def test_callable_matches_evaluate(self):
        pts = torus_points(8, seed=7)
        interp = fit(wendland_kernel(), pts, pts[:, 0])
        grid = torus_points(30, seed=8)
        npt.assert_array_equal(interp(grid), evaluate(interp, grid))

    def test_matern_evaluation_consistency(self):
        kernel = matern_kernel(2.75)
        pts = torus_points(12, seed=11)
        interp = fit(kernel, pts, pts[:, 1])
        grid = torus_points(40, seed=12)
        direct = np.array(
            [
                sum(
                    c * kernel(np.linalg.norm(x - y))
                    for c, y in zip(interp.coeffs, pts)
                )
                for x in grid
            ]
        )
        npt.assert_allclose(evaluate(interp, grid), direct, atol=1e-12)


class TestNativeNorm:
    def test_unit_coefficient_gives_kernel_at_zero(self):
        interp = fit(wendland_kernel(), np.zeros((1, 3)), [3.0])
        assert abs(native_norm_sq(interp) - 3.0) < 1e-12

    def test_zero_data_zero_norm(self):
        pts = torus_points(6, seed=3)
        interp = fit(wendland_kernel(), pts, np.zeros(6))
        assert native_norm_sq(interp) == 0.0

    def test_monotone_under_refinement(self):
        # interpolating on more nodes can only grow the projection's norm
        curve = get_manifold("curve6lobe")
        ns = minimize_riesz(curve, 10, seed=13, max_iters=500)
        target = lambda p: p[:, 0] * p[:, 1] + p[:, 2]
        small = fit(wendland_kernel(), ns.points[:5], target(ns.points[:5]))
        big = fit(wendland_kernel(), ns.points, target(ns.points))
        assert native_norm_sq(small) <= native_norm_sq(big) + 1e-12

    def test_orthogonality_residual(self):
        pts = torus_points(30, seed=17)
        vals = np.cos(pts[:, 0]) * pts[:, 2]
        interp = fit(wendland_kernel(), pts, vals)
        gram = kernel_matrix(wendland_kernel(), pts)
        resid = interp.coeffs @ (gram @ interp.coeffs - vals)
        assert abs(resid) <= 1e-10 * max(abs(interp.coeffs @ vals), 1.0)


class TestInterpolantType:
    def test_immutable_arrays(self):
        interp = fit(wendland_kernel(), np.zeros((1, 3)), [3.0])
        with pytest.raises(ValueError):
            interp.coeffs[0] = 5.0
        assert isinstance(interp, Interpolant)
