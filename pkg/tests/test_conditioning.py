import numpy as np
import pytest
from numpy.testing import assert_allclose

from stschrod.conditioning import (
    condition_number,
    conditioning_sweep,
    gevp_spectrum,
)
from stschrod.temporal import assemble_temporal, scaled_system


class TestConditionNumber:
    @pytest.mark.parametrize("n", [1, 5, 40])
    @pytest.mark.parametrize("kind", ["spectral", "one"])
    def test_identity(self, n, kind):
        assert condition_number(np.eye(n), kind) == pytest.approx(1.0)

    def test_diagonal_spectral(self):
        assert condition_number(np.diag([1.0, 4.0])) == pytest.approx(4.0)

    def test_singular_flags_infinite(self):
        M = np.array([[1.0, 2.0], [2.0, 4.0]])
        assert condition_number(M) == np.inf
        assert condition_number(M, "one") == np.inf

    @pytest.mark.parametrize("kind", ["spectral", "one"])
    def test_scaling_invariance(self, kind):
        rng = np.random.default_rng(7)
        M = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
        k1 = condition_number(M, kind)
        k2 = condition_number(1.7e3 * M, kind)
        assert abs(k1 - k2) <= 1e-10 * k1

    def test_scaled_family_depends_on_rho_only(self):
        # kappa(K) for (h_t, mu) enters through rho alone
        K1 = scaled_system(2, 40, 0.8).K
        tm = assemble_temporal(2, 40, 2.0)  # h_t = 0.05, mu = 16 -> rho = 0.8
        K2 = 1j * tm.B - 16.0 * tm.C
        assert_allclose(condition_number(K1), condition_number(K2), rtol=1e-10)

    def test_power_law_exponent_recorded(self):
        k100 = condition_number(scaled_system(2, 99, 1.0).K)
        k200 = condition_number(scaled_system(2, 199, 1.0).K)
        exponent = np.log2(k200 / k100)
        assert np.isfinite(exponent) and exponent <= 4.0

    def test_one_norm_cap(self):
        with pytest.raises(ValueError, match="refused"):
            condition_number(np.eye(2001), "one")

    def test_unknown_norm(self):
        with pytest.raises(ValueError):
            condition_number(np.eye(3), "two")


class TestSweep:
    def test_singleton_consistency(self):
        rep = conditioning_sweep(2, [64], [3.0])
        assert len(rep.rows) == 1
        n, rho, kappa = rep.rows[0]
        assert (n, rho) == (64, 3.0)
        assert_allclose(kappa, condition_number(scaled_system(2, 63, 3.0).K), rtol=1e-12)

    def test_slopes_bounded_small_sizes(self):
        rep = conditioning_sweep(2, [48, 96, 192], [1.0, 10.0])
        assert all(np.isfinite(s) and s <= 4.0 for s in rep.slopes.values())
        assert all(k >= 1.0 for (_, _, k) in rep.rows)

    def test_validation(self):
        with pytest.raises(ValueError, match="ascending"):
            conditioning_sweep(2, [100, 100], [1.0])
        with pytest.raises(ValueError, match=">="):
            conditioning_sweep(3, [8, 100], [1.0])

    def test_large_size_mild_rho_dependence(self):
        # n = 1000 slice of the benchmark sweep: kappa stays finite and varies
        # by far less than 1e3 across two decades of rho
        kappas = [
            condition_number(scaled_system(2, 999, rho).K) for rho in (1.0, 10.0, 100.0)
        ]
        assert np.all(np.isfinite(kappas))
        assert max(kappas) / min(kappas) <= 1e3

    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
    def test_smallest_singular_value_positive(self, p):
        # numerical support for unique solvability at desk scale
        for n in (50, 100, 200):
            for rho in np.geomspace(0.05, 50.0, 20):
                K = scaled_system(p, n - p + 1, rho).K
                smin = np.linalg.svd(K, compute_uv=False)[-1]
                assert smin > 0, (p, n, rho)


class TestPencil:
    def test_p2_left_half_plane(self):
        spec = gevp_spectrum(2, 16)
        assert spec.near_imaginary_count == 0
        assert np.all(spec.eigenvalues.real < 0)
        assert spec.min_abs_real > 0

    def test_p1_triangular_ratio_oracle(self):
        spec = gevp_spectrum(1, 8)
        tm = assemble_temporal(1, 8, 1.0)
        ratios = np.diag(tm.B_scaled) / np.diag(tm.C)
        assert_allclose(
            np.sort(spec.eigenvalues.real), np.sort(ratios), atol=1e-10
        )
        assert_allclose(spec.eigenvalues.imag, 0.0, atol=1e-10)

    def test_p5_no_near_imaginary(self):
        spec = gevp_spectrum(5, 12)
        assert spec.near_imaginary_count == 0

    def test_infinite_eigenvalues_separated(self):
        spec = gevp_spectrum(3, 12)
        assert len(spec.eigenvalues) + spec.num_infinite == 3 + 12 - 1
        assert np.all(np.isfinite(spec.eigenvalues))

    def test_size_cap(self):
        with pytest.raises(ValueError, match="Nt <= 64"):
            gevp_spectrum(2, 128)
