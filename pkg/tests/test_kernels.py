"""Tests for radial kernels and the fractional-order Bessel K function."""

import numpy as np
import numpy.testing as npt
import pytest

from manikern import DomainError, ParseError, get_manifold
from manikern.kernels import (
    DEFAULT_DELTA,
    Kernel,
    GL_ORDER,
    bessel_k,
    kernel_matrix,
    matern,
    matern_kernel,
    parse_kernel,
    wendland32,
    wendland_kernel,
)

# frozen high-precision references for fractional orders (30-digit
# arithmetic, independent of the quadrature used by bessel_k)
BESSEL_REFERENCE = [
    (1.25, 1.0, 0.73114518792021139),
    (1.25, 10.0, 1.9155410658695632e-5),
    (1.125, 2.6667, 0.062744027300449385),
    (0.05, 0.5, 0.92583324162374058),
    (2.9, 30.0, 2.4475711891964996e-14),
    (3.0, 0.01, 7999900.001249882),
]
MATERN_REFERENCE = [
    (2.75, 1.0, 0.67830503900363773),
    (2.625, 0.5, 0.85637454267828007),
]


def closed_form_k(mu, r):
    """Half-integer closed forms sqrt(pi/(2r)) e^-r x polynomial."""
    base = np.sqrt(np.pi / (2.0 * r)) * np.exp(-r)
    if mu == 0.5:
        return base
    if mu == 1.5:
        return base * (1.0 + 1.0 / r)
    if mu == 2.5:
        return base * (1.0 + 3.0 / r + 3.0 / r**2)
    raise ValueError(mu)


class TestWendland:
    def test_value_at_zero(self):
        assert wendland32(0.0) == 3.0

    def test_zero_at_support_edge(self):
        assert wendland32(DEFAULT_DELTA) == 0.0

    def test_half_support_value(self):
        # (1/2)^6 (3 + 9 + 35/4), an exact dyadic rational
        assert wendland32(DEFAULT_DELTA / 2.0) == 0.32421875

    def test_compact_support(self):
        r = np.linspace(DEFAULT_DELTA, 3.0 * DEFAULT_DELTA, 1000)
        assert np.all(wendland32(r) == 0.0)

    def test_non_increasing(self):
        r = np.linspace(0.0, 1.2 * DEFAULT_DELTA, 400)
        vals = wendland32(r)
        assert np.all(np.diff(vals) <= 1e-15)

    def test_negative_distance_rejected(self):
        with pytest.raises(DomainError):
            wendland32(-0.1)

    def test_bad_delta_rejected(self):
        with pytest.raises(DomainError):
            wendland32(1.0, delta=0.0)

    def test_shape_preserved(self):
        r = np.linspace(0.0, 2.0, 12).reshape(3, 4)
        assert wendland32(r).shape == (3, 4)


class TestBesselK:
    @pytest.mark.parametrize("mu", [0.5, 1.5, 2.5])
    def test_closed_forms_acceptance_range(self, mu):
        r = np.geomspace(0.01, 20.0, 400)
        rel = np.abs(bessel_k(mu, r) - closed_form_k(mu, r)) / closed_form_k(mu, r)
        assert np.max(rel) < 1e-10

    @pytest.mark.parametrize("mu", [0.5, 1.5, 2.5])
    def test_closed_forms_full_contract_range(self, mu):
        r = np.geomspace(1e-3, 50.0, 400)
        rel = np.abs(bessel_k(mu, r) - closed_form_k(mu, r)) / closed_form_k(mu, r)
        assert np.max(rel) < 1e-10

    @pytest.mark.parametrize("mu,r,expected", BESSEL_REFERENCE)
    def test_fractional_orders(self, mu, r, expected):
        assert abs(bessel_k(mu, r) - expected) / abs(expected) < 1e-10

    def test_strictly_decreasing_in_r(self):
        r = np.geomspace(0.05, 30.0, 200)
        for mu in (0.25, 1.25, 3.0):
            vals = bessel_k(mu, r)
            assert np.all(np.diff(vals) < 0.0)

    def test_nonpositive_argument_rejected(self):
        with pytest.raises(DomainError):
            bessel_k(1.0, 0.0)
        with pytest.raises(DomainError):
            bessel_k(1.0, [1.0, -2.0])

    def test_bad_order_rejected(self):
        with pytest.raises(DomainError):
            bessel_k(0.0, 1.0)
        with pytest.raises(DomainError):
            bessel_k(-1.5, 1.0)


class TestMatern:
    @pytest.mark.parametrize("nu", [1.6, 2.0, 2.625, 2.75, 4.0])
    def test_limit_at_zero(self, nu):
        assert abs(matern(nu, 3, 0.0) - 1.0) < 1e-8

    def test_exponential_special_case(self):
        # mu = 1/2 collapses to exp(-r)
        r = np.linspace(0.0, 20.0, 401)
        rel = np.abs(matern(2.0, 3, r) - np.exp(-r)) / np.exp(-r)
        assert np.max(rel) < 1e-10

    @pytest.mark.parametrize("nu,r,expected", MATERN_REFERENCE)
    def test_fractional_reference_values(self, nu, r, expected):
        assert abs(matern(nu, 3, r) - expected) / expected < 1e-10

    def test_matches_oversampled_quadrature(self):
        # brute-force quadrature of the Bessel integral at 10x resolution
        nu, r = 2.75, 1.0
        mu = nu - 1.5
        glx, glw = np.polynomial.legendre.leggauss(10 * GL_ORDER)
        tail = np.log(1e18) + 10.0
        t_cut = np.arccosh(1.0 + tail / r)
        for _ in range(3):
            t_cut = np.arccosh(1.0 + (tail + np.log(np.cosh(mu * t_cut))) / r)
        t = 0.5 * t_cut * (glx + 1.0)
        k_ref = 0.5 * t_cut * np.sum(glw * np.exp(-r * np.cosh(t)) * np.cosh(mu * t))
        import math

        ref = 2.0 ** (1.0 - mu) / math.gamma(mu) * r**mu * k_ref
        assert abs(matern(nu, 3, r) - ref) < 1e-9

    def test_non_increasing(self):
        r = np.linspace(0.0, 10.0, 300)
        vals = matern(2.75, 3, r)
        assert np.all(np.diff(vals) <= 0.0)

    def test_order_too_small_rejected(self):
        with pytest.raises(DomainError):
            matern(1.5, 3, 1.0)
        with pytest.raises(DomainError):
            matern_kernel(1.4)


class TestKernelObjects:
    def test_wendland_metadata(self):
        k = wendland_kernel()
        assert k.family == "wendland32" and k.tau == 4.0
        assert k.delta == DEFAULT_DELTA
        assert k(0.0) == 3.0

    def test_matern_metadata(self):
        k = matern_kernel(2.75)
        assert k.tau == 2.75
        assert abs(k(0.0) - 1.0) < 1e-12

    def test_profile_maximum_at_zero(self):
        r = np.linspace(0.0, 5.0, 100)
        for k in (wendland_kernel(), matern_kernel(2.75)):
            vals = k(r)
            assert np.argmax(vals) == 0


class TestParseKernel:
    def test_wendland_spec(self):
        k = parse_kernel("wendland32:delta=2.6667")
        assert k.family == "wendland32" and k.delta == 2.6667

    def test_wendland_default_delta(self):
        assert parse_kernel("wendland32").delta == DEFAULT_DELTA

    def test_matern_spec(self):
        k = parse_kernel("matern:nu=2.75")
        assert k.family == "matern" and k.nu == 2.75 and k.d == 3

    def test_round_trip(self):
        for text in ("wendland32:delta=2.6667", "matern:nu=2.75"):
            k = parse_kernel(text)
            assert parse_kernel(k.spec()) == k

    @pytest.mark.parametrize(
        "bad",
        [
            "gauss:scale=1",
            "matern",
            "matern:nu=abc",
            "wendland32:delta=2,delta=3",
            "wendland32:radius=2",
            "matern:nu=2.75,d=2.5",
            "wendland32:delta",
        ],
    )
    def test_malformed_specs_rejected(self, bad):
        with pytest.raises(ParseError):
            parse_kernel(bad)


class TestKernelMatrix:
    def test_single_point(self):
        a = kernel_matrix(wendland_kernel(), np.zeros((1, 3)))
        npt.assert_array_equal(a, [[3.0]])

    @pytest.mark.parametrize("make", [wendland_kernel, lambda: matern_kernel(2.75)])
    def test_bitwise_symmetric(self, make):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(40, 3))
        a = kernel_matrix(make(), pts)
        assert np.array_equal(a, a.T)

    def test_torus_points_positive_definite(self):
        torus = get_manifold("torus")
        rng = np.random.default_rng(13)
        pts = torus.embed(rng.uniform(0.0, 2.0 * np.pi, size=(10, 2)))
        a = kernel_matrix(wendland_kernel(), pts)
        np.linalg.cholesky(a)

    @pytest.mark.parametrize("n", [50, 200, 500])
    def test_positive_definite_both_families(self, n):
        torus = get_manifold("torus")
        rng = np.random.default_rng(n)
        pts = torus.embed(rng.uniform(0.0, 2.0 * np.pi, size=(n, 2)))
        np.linalg.cholesky(kernel_matrix(wendland_kernel(), pts))
        np.linalg.cholesky(kernel_matrix(matern_kernel(2.75), pts))

    def test_bad_shape_rejected(self):
        with pytest.raises(DomainError):
            kernel_matrix(wendland_kernel(), np.zeros((4, 2)))
