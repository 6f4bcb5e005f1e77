import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import ellipticlab as el
from ellipticlab.operators import sym_eigvals


ELL = el.Ellipticity(1.0, 2.0)


def random_sym(rng, d):
    A = rng.normal(size=(d, d))
    return (A + A.T) / 2


def pucci_minus_reference(M, ell):
    """Independent route: optimize tr(A M) over the admissible eigenbasis."""
    e, Q = np.linalg.eigh(M)
    coeff = np.where(e >= 0, ell.lam, ell.Lam)
    A = Q @ np.diag(coeff) @ Q.T
    return float(np.trace(A @ M))


class TestPucci:
    def test_identity(self):
        d = 2
        assert el.pucci_minus(np.eye(d), ELL) == pytest.approx(d * ELL.lam)
        assert el.pucci_plus(np.eye(d), ELL) == pytest.approx(d * ELL.Lam)

    def test_negative_identity(self):
        d = 3
        assert el.pucci_minus(-np.eye(d), ELL) == pytest.approx(-d * ELL.Lam)
        assert el.pucci_plus(-np.eye(d), ELL) == pytest.approx(-d * ELL.lam)

    def test_matches_optimizer_route(self):
        rng = np.random.default_rng(42)
        for d in (2, 3):
            for _ in range(50):
                M = random_sym(rng, d)
                assert el.pucci_minus(M, ELL) == pytest.approx(
                    pucci_minus_reference(M, ELL), abs=1e-10)

    def test_lower_bound_over_admissible(self):
        # P^- is the infimum of tr(A M) over lam I <= A <= Lam I
        rng = np.random.default_rng(7)
        for d in (2, 3):
            M = random_sym(rng, d)
            pm = el.pucci_minus(M, ELL)
            pp = el.pucci_plus(M, ELL)
            for _ in range(200):
                Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
                A = Q @ np.diag(rng.uniform(ELL.lam, ELL.Lam, d)) @ Q.T
                t = float(np.trace(A @ M))
                assert pm <= t + 1e-10
                assert t <= pp + 1e-10

    def test_batched(self):
        rng = np.random.default_rng(3)
        Ms = np.array([random_sym(rng, 2) for _ in range(10)])
        out = el.pucci_minus(Ms, ELL)
        for k in range(10):
            assert out[k] == pytest.approx(el.pucci_minus(Ms[k], ELL))

    @given(a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_sandwich_property(self, a, b, c):
        M = np.array([[a, b], [b, c]])
        assert el.pucci_minus(M, ELL) <= el.pucci_plus(M, ELL) + 1e-12

    @given(s=st.floats(0.01, 10))
    @settings(max_examples=30, deadline=None)
    def test_positive_homogeneity(self, s):
        M = np.array([[1.0, 0.5], [0.5, -2.0]])
        assert el.pucci_minus(s * M, ELL) == pytest.approx(
            s * el.pucci_minus(M, ELL), rel=1e-10)

    def test_eigvals_closed_form(self):
        rng = np.random.default_rng(11)
        for d in (1, 2, 3):
            Ms = np.array([random_sym(rng, d) for _ in range(20)])
            got = sym_eigvals(Ms)
            ref = np.linalg.eigvalsh(Ms)
            np.testing.assert_allclose(got, ref, atol=1e-10)


class TestDerivatives:
    def test_quadratic_exact(self):
        g = el.Grid.cover((0.0, 0.0), 1.0, 1 / 16)
        A = np.array([[2.0, 0.7], [0.7, -1.0]])
        f = el.ScalarField.from_function(
            g, lambda p: 0.5 * np.einsum("...i,ij,...j->...", p, A, p))
        H = el.hessian(f)
        np.testing.assert_allclose(
            H.values, np.broadcast_to(A, H.values.shape), atol=1e-10)
        G = el.gradient(f)
        pts = H.grid.coords()
        np.testing.assert_allclose(
            G.values, np.einsum("ij,...j->...i", A, pts), atol=1e-10)
        L = el.laplacian(f)
        np.testing.assert_allclose(L.values, np.trace(A), atol=1e-10)

    def test_interior_grid(self):
        g = el.Grid.cover((0.0, 0.0), 1.0, 1 / 8)
        f = el.ScalarField(g, np.zeros(g.counts))
        assert el.gradient(f).grid.counts == tuple(c - 2 for c in g.counts)

    def test_linear_apply(self):
        g = el.Grid.cover((0.0, 0.0), 1.0, 1 / 16)
        f = el.ScalarField.from_function(
            g, lambda p: p[..., 0] ** 2 + 3 * p[..., 0] + 1)
        coef = el.LinearCoefficients(A=np.eye(2), b=np.array([1.0, 0.0]),
                                     c=2.0)
        out = el.linear_apply(f, coef)
        pts = out.grid.coords()
        expected = 2.0 + (2 * pts[..., 0] + 3) \
            + 2.0 * (pts[..., 0] ** 2 + 3 * pts[..., 0] + 1)
        np.testing.assert_allclose(out.values, expected, atol=1e-9)

    def test_sandwich_residual_admissible(self):
        g = el.Grid.cover((0.0, 0.0), 1.0, 1 / 16)
        rng = np.random.default_rng(5)
        f = el.ScalarField(g, rng.normal(size=g.counts))
        rep = el.pucci_sandwich_residual(
            f, el.LinearCoefficients(A=1.5 * np.eye(2)), ELL)
        assert rep.passed

    def test_second_difference_quadratic(self):
        g = el.Grid.cover((0.0, 0.0), 1.0, 1 / 16)
        f = el.ScalarField.from_function(g, lambda p: p[..., 0] ** 2)
        v = el.second_difference(f, (1.0, 0.0), 2 / 16)
        np.testing.assert_allclose(v.values, 2.0, atol=1e-10)
        v2 = el.second_difference(f, (0.0, 1.0), 3 / 16)
        np.testing.assert_allclose(v2.values, 0.0, atol=1e-10)

    def test_second_difference_off_lattice(self):
        g = el.Grid.cover((0.0, 0.0), 1.0, 1 / 16)
        f = el.ScalarField(g, np.zeros(g.counts))
        with pytest.raises(ValueError):
            el.second_difference(f, (1.0, 0.0), 0.03)
        with pytest.raises(ValueError):
            el.second_difference(f, (2.0, 0.0), 2 / 16)


class TestFractional:
    def test_linear_vanishes(self):
        g = el.Grid.cover((0.0,), 8.0, 1 / 8)
        f = el.ScalarField.from_function(g, lambda p: 0.7 * p[..., 0])
        res = el.fractional_laplacian(
            f, el.FractionalParams(sigma=1.0, level=2),
            tail=el.TailSpec(kind="zero"))
        v = float(res.field.values[res.eval_mask][0])
        assert abs(v) < 1e-12

    def test_concave_cap_negative(self):
        g = el.Grid.cover((0.0,), 8.0, 1 / 8)
        f = el.ScalarField.from_function(
            g, lambda p: np.exp(-p[..., 0] ** 2))
        res = el.fractional_laplacian(f, el.FractionalParams(sigma=1.0))
        assert float(res.field.values[res.eval_mask][0]) < 0

    def test_kernel_exponent_override(self):
        g = el.Grid.cover((0.0,), 8.0, 1 / 8)
        f = el.ScalarField.from_function(
            g, lambda p: np.exp(-p[..., 0] ** 2))
        a = el.fractional_laplacian(f, el.FractionalParams(sigma=1.0))
        b = el.fractional_laplacian(f, el.FractionalParams(
            sigma=1.0, kernel_exponent_shift=1.5))
        va = float(a.field.values[a.eval_mask][0])
        vb = float(b.field.values[b.eval_mask][0])
        assert va != vb

    def test_param_validation(self):
        with pytest.raises(ValueError):
            el.FractionalParams(sigma=2.5)
        with pytest.raises(ValueError):
            el.FractionalParams(sigma=1.0, level=0)
