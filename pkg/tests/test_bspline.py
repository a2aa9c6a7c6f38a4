import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from numpy.testing import assert_allclose

from stschrod.bspline import (
    collocation_matrix,
    element_quadrature,
    eval_all,
    eval_batch,
    gauss_legendre_rule,
    greville_points,
    open_uniform_knots,
)


def cox_de_boor_oracle(knots, p, j, t):
    """Direct recursion on half-open spans, 0/0 treated as 0."""
    if p == 0:
        return 1.0 if knots[j] <= t < knots[j + 1] else 0.0
    left = 0.0
    den = knots[j + p] - knots[j]
    if den > 0:
        left = (t - knots[j]) / den * cox_de_boor_oracle(knots, p - 1, j, t)
    right = 0.0
    den = knots[j + p + 1] - knots[j + 1]
    if den > 0:
        right = (knots[j + p + 1] - t) / den * cox_de_boor_oracle(knots, p - 1, j + 1, t)
    return left + right


class TestKnots:
    def test_p1_two_elements(self):
        kv = open_uniform_knots(1, 2, (0.0, 1.0))
        assert_allclose(kv.knots, [0.0, 0.0, 0.5, 1.0, 1.0])

    def test_dimension_is_elements_plus_degree(self):
        kv = open_uniform_knots(2, 4, (0.0, 1.0))
        assert kv.dim == 6

    def test_single_cubic_element_is_bernstein(self):
        kv = open_uniform_knots(3, 1, (0.0, 2.0))
        assert_allclose(kv.knots, [0.0] * 4 + [2.0] * 4)
        # clamped basis on one element = Bernstein polynomials
        ts = np.linspace(0.0, 2.0, 9)
        _, vals = eval_batch(kv, ts, 0)
        u = ts / 2.0
        bern = np.stack(
            [(1 - u) ** 3, 3 * u * (1 - u) ** 2, 3 * u**2 * (1 - u), u**3], axis=1
        )
        assert_allclose(vals[0], bern, atol=1e-14)

    def test_knot_multiplicities(self):
        kv = open_uniform_knots(4, 7, (-1.0, 3.0))
        assert len(kv.knots) == 7 + 2 * 4 + 1
        assert_allclose(kv.knots[:5], -1.0)
        assert_allclose(kv.knots[-5:], 3.0)
        assert len(np.unique(kv.knots[5:-5])) == 6

    @pytest.mark.parametrize("p,N,iv", [(0, 2, (0, 1)), (2, 0, (0, 1)), (2, 2, (1, 1)), (2, 2, (2, 1))])
    def test_invalid_inputs(self, p, N, iv):
        with pytest.raises(ValueError):
            open_uniform_knots(p, N, iv)


class TestEval:
    def test_linear_hats_midleft(self):
        kv = open_uniform_knots(1, 2, (0.0, 1.0))
        ev = eval_all(kv, 0.25)
        assert ev.first_active == 0
        assert_allclose(ev.values[0], [0.5, 0.5])

    def test_matches_recursion_oracle(self):
        kv = open_uniform_knots(2, 4, (0.0, 1.0))
        for t in [0.25, 0.1, 0.5, 0.73, 0.999]:
            ev = eval_all(kv, t)
            expected = [
                cox_de_boor_oracle(kv.knots, 2, ev.first_active + r, t) for r in range(3)
            ]
            assert_allclose(ev.values[0], expected, atol=1e-14)

    def test_max_supported_degree(self):
        kv = open_uniform_knots(10, 12, (0.0, 1.0))
        rng = np.random.default_rng(0)
        _, vals = eval_batch(kv, rng.uniform(0, 1, 200), 2)
        assert np.abs(vals[0].sum(axis=1) - 1.0).max() <= 1e-12
        with pytest.raises(ValueError):
            open_uniform_knots(11, 4, (0.0, 1.0))

    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5, 6])
    def test_partition_of_unity_bulk(self, p):
        kv = open_uniform_knots(p, 9, (0.0, 2.5))
        rng = np.random.default_rng(1234 + p)
        ts = rng.uniform(0.0, 2.5, size=10_000)
        _, vals = eval_batch(kv, ts, 1)
        assert np.abs(vals[0].sum(axis=1) - 1.0).max() <= 1e-12
        assert np.abs(vals[1].sum(axis=1)).max() <= 1e-11 / kv.meshsize

    @given(
        p=hst.integers(min_value=1, max_value=6),
        frac=hst.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_partition_of_unity_property(self, p, frac):
        kv = open_uniform_knots(p, 7, (-1.0, 1.0))
        t = -1.0 + 2.0 * frac
        ev = eval_all(kv, t)
        assert abs(ev.values[0].sum() - 1.0) <= 1e-12

    def test_right_continuous_at_interior_knot(self):
        kv = open_uniform_knots(1, 2, (0.0, 1.0))
        ev = eval_all(kv, 0.5)
        assert ev.first_active == 1
        assert_allclose(ev.values[0], [1.0, 0.0])

    def test_last_element_at_right_endpoint(self):
        kv = open_uniform_knots(3, 5, (0.0, 1.0))
        ev = eval_all(kv, 1.0)
        assert ev.first_active == kv.dim - 4
        assert_allclose(ev.values[0], [0.0, 0.0, 0.0, 1.0], atol=1e-14)

    def test_out_of_domain_raises(self):
        kv = open_uniform_knots(2, 3, (0.0, 1.0))
        with pytest.raises(ValueError, match="outside"):
            eval_all(kv, 1.5)
        with pytest.raises(ValueError, match="max_deriv"):
            eval_all(kv, 0.5, max_deriv=3)

    @pytest.mark.parametrize("p", [2, 3, 4, 5, 6])
    def test_smoothness_across_breakpoints(self, p):
        kv = open_uniform_knots(p, 6, (0.0, 1.5))
        h = kv.meshsize
        for tb in kv.breakpoints[1:-1]:
            left = eval_batch(kv, np.array([np.nextafter(tb, -1.0)]), p - 1)[1]
            right = eval_batch(kv, np.array([tb]), p - 1)[1]
            # compare d-th derivative of the same global functions on both sides
            spans_l = eval_batch(kv, np.array([np.nextafter(tb, -1.0)]), 0)[0][0]
            spans_r = eval_batch(kv, np.array([tb]), 0)[0][0]
            full_l = np.zeros((p, kv.dim))
            full_r = np.zeros((p, kv.dim))
            full_l[:, spans_l - p : spans_l + 1] = left[: p, 0, :]
            full_r[:, spans_r - p : spans_r + 1] = right[: p, 0, :]
            for d in range(p):
                assert np.abs(full_l[d] - full_r[d]).max() <= 1e-9 * h ** (-d)

    @pytest.mark.parametrize("p", [3, 5])
    def test_higher_derivatives_against_finite_differences(self, p):
        kv = open_uniform_knots(p, 5, (0.0, 1.0))
        rng = np.random.default_rng(77)
        ts = rng.uniform(0.15, 0.85, 20)  # keep the FD stencil inside one element
        h = 1e-5
        for d in (2, 3):
            _, v_mid = eval_batch(kv, ts, d)
            _, v_plus = eval_batch(kv, ts + h, d - 1)
            _, v_minus = eval_batch(kv, ts - h, d - 1)
            same_span = (
                eval_batch(kv, ts + h, 0)[0] == eval_batch(kv, ts - h, 0)[0]
            ) & (eval_batch(kv, ts, 0)[0] == eval_batch(kv, ts + h, 0)[0])
            fd = (v_plus[d - 1] - v_minus[d - 1]) / (2 * h)
            scale = np.abs(v_mid[d]).max() + 1.0
            assert np.abs((fd - v_mid[d])[same_span]).max() <= 1e-5 * scale

    @pytest.mark.parametrize("p", [1, 2, 3, 5])
    def test_polynomial_reproduction(self, p):
        kv = open_uniform_knots(p, 8, (0.0, 1.0))
        grev = greville_points(kv)
        E = collocation_matrix(kv, grev).toarray()
        coeffs_of = lambda f: np.linalg.solve(E, f(grev))
        ts = np.linspace(0.0, 1.0, 57)
        Et = collocation_matrix(kv, ts)
        for deg in range(p + 1):
            f = lambda x: (0.3 + x) ** deg
            assert np.abs(Et @ coeffs_of(f) - f(ts)).max() <= 1e-11


class TestQuadrature:
    def test_one_point_midpoint(self):
        rule = gauss_legendre_rule(1)
        assert_allclose(rule.nodes, [0.0])
        assert_allclose(rule.weights, [2.0])

    def test_two_point(self):
        rule = gauss_legendre_rule(2)
        assert_allclose(np.sort(rule.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)])
        assert_allclose(rule.weights, [1.0, 1.0])

    def test_three_point_on_square(self):
        rule = gauss_legendre_rule(3)
        assert_allclose(np.sum(rule.weights * rule.nodes**2), 2.0 / 3.0, atol=1e-15)

    @pytest.mark.parametrize("q", [1, 2, 3, 5, 8, 16, 64])
    def test_exactness_and_weight_sum(self, q):
        rule = gauss_legendre_rule(q)
        assert abs(rule.weights.sum() - 2.0) <= 1e-13
        assert np.all(rule.weights > 0)
        for deg in range(2 * q):
            exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
            assert abs(np.sum(rule.weights * rule.nodes**deg) - exact) <= 1e-13

    @pytest.mark.parametrize("q", [0, 65])
    def test_out_of_range(self, q):
        with pytest.raises(ValueError):
            gauss_legendre_rule(q)

    def test_element_quadrature_integrates_splines(self):
        kv = open_uniform_knots(3, 4, (0.0, 2.0))
        pts, wts = element_quadrature(kv, 5)
        E = collocation_matrix(kv, pts)
        integrals = E.T @ wts
        # B-splines on a uniform open knot vector integrate to h (interior)
        assert_allclose(integrals.sum(), 2.0, atol=1e-13)
