import numpy as np
import pytest
from numpy.testing import assert_allclose

from stschrod.temporal import (
    SingularSystemError,
    assemble_temporal,
    duhamel_residual,
    exact_ivp_solution,
    scalar_l2_error,
    scalar_rhs,
    scaled_system,
    solve_scalar_ivp,
)

GOLDEN_HB_TOP = np.array([[-6.0, -2.0], [8.0, -1.0], [-1.0, 6.0]]) / 6.0
GOLDEN_C_TOP = np.array([[10.0, 2.0], [0.0, 9.0], [-9.0, 0.0]]) / 24.0


def hat_matrices_oracle(Nt, T):
    """p = 1 temporal matrices from closed-form hat-function integrals.

    Entry (l, j) couples trial hat j with test hat l - 1, so the nonzero
    node offsets j - (l - 1) are -1, 0, 1; all overlaps reduce to the
    standard stiffness values -1/h, 2/h and the transport values -1/2, 0, 1/2
    (purely Toeplitz, including at the clamped ends).
    """
    h = T / Nt
    n = Nt
    B = np.zeros((n, n))
    C = np.zeros((n, n))
    for l in range(1, n + 1):
        for j in range(1, n + 1):
            d = j - (l - 1)
            if d == 0:  # same node, always an interior full hat here
                B[l - 1, j - 1] = 2.0 / h
                C[l - 1, j - 1] = 0.0
            elif d == 1:
                B[l - 1, j - 1] = -1.0 / h
                C[l - 1, j - 1] = 0.5
            elif d == -1:
                B[l - 1, j - 1] = -1.0 / h
                C[l - 1, j - 1] = -0.5
    return B, C


class TestAssembly:
    def test_golden_interior_rows_p2(self):
        tm = assemble_temporal(2, 8, 1.0)
        r = 4
        assert_allclose(tm.B_scaled[r, r - 3 : r + 2], np.array([-1, -2, 6, -2, -1]) / 6.0, atol=1e-13)
        assert_allclose(tm.C[r, r - 3 : r + 2], np.array([-1, -10, 0, 10, 1]) / 24.0, atol=1e-13)

    def test_golden_corners_p2(self):
        tm = assemble_temporal(2, 8, 1.0)
        assert_allclose(tm.B_scaled[:3, :2], GOLDEN_HB_TOP, atol=1e-13)
        assert_allclose(tm.C[:3, :2], GOLDEN_C_TOP, atol=1e-13)
        assert_allclose(tm.B_scaled[-1, -4:], np.array([-1, -1, 8, -6]) / 6.0, atol=1e-13)
        assert_allclose(tm.C[-1, -4:], np.array([-1, -9, 0, 10]) / 24.0, atol=1e-13)

    def test_p1_matches_hat_oracle(self):
        Nt, T = 7, 2.0
        tm = assemble_temporal(1, Nt, T)
        B, C = hat_matrices_oracle(Nt, T)
        assert_allclose(tm.B, B, atol=1e-12)
        assert_allclose(tm.C, C, atol=1e-13)

    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("Nt", [8, 16])
    def test_persymmetry(self, p, Nt):
        tm = assemble_temporal(p, Nt, 1.0)
        J = np.eye(tm.n)[::-1]
        assert np.abs(tm.B - J @ tm.B.T @ J).max() <= 1e-13 * np.abs(tm.B).max()
        assert np.abs(tm.C - J @ tm.C.T @ J).max() <= 1e-13

    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
    def test_scaled_entries_mesh_independent(self, p):
        tm8 = assemble_temporal(p, 8, 1.0)
        tm16 = assemble_temporal(p, 16, 1.0)
        # blocks built from left/right-anchored functions only (index < Nt)
        # coincide entrywise across mesh sizes, corners included
        w = 7
        assert_allclose(tm8.B_scaled[:w, :w], tm16.B_scaled[:w, :w], atol=1e-13)
        assert_allclose(tm8.C[:w, :w], tm16.C[:w, :w], atol=1e-13)
        assert_allclose(tm8.B_scaled[-w:, -w:], tm16.B_scaled[-w:, -w:], atol=1e-13)
        assert_allclose(tm8.C[-w:, -w:], tm16.C[-w:, -w:], atol=1e-13)
        if p <= 3:  # interior band row is fully exposed at Nt = 8
            r8, r16 = tm8.n // 2, tm16.n // 2
            assert_allclose(
                tm8.B_scaled[r8, r8 - p - 1 : r8 + p],
                tm16.B_scaled[r16, r16 - p - 1 : r16 + p],
                atol=1e-13,
            )
        # changing T at fixed Nt changes h_t but not the scaled entries
        tm_t2 = assemble_temporal(p, 8, 2.0)
        assert_allclose(tm_t2.B_scaled, tm8.B_scaled, atol=1e-13)
        assert_allclose(tm_t2.C, tm8.C, atol=1e-13)

    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
    def test_outer_codiagonals_signed(self, p):
        # both outer codiagonals stay nonzero, so the complex system matrix
        # keeps nonzero entries there for every rho (real and imaginary parts)
        tm = assemble_temporal(p, max(8, 3 * p), 1.0)
        n = tm.n
        assert np.all(np.diag(tm.C, k=p - 1) > 0)
        assert np.all(np.diag(tm.B_scaled, k=p - 1) < 0)
        assert np.all(np.diag(tm.C, k=-(p + 1)) < 0)
        assert np.all(np.diag(tm.B_scaled, k=-(p + 1)) < 0)

    @pytest.mark.parametrize("p", [1, 2, 4])
    def test_extended_column_closes_partition_of_unity(self, p):
        # derivatives of all basis functions sum to zero, so the trial column
        # j = 0 is minus the row sum of the others
        tm = assemble_temporal(p, 9, 1.0)
        assert_allclose(tm.B_ext_col0, -tm.B.sum(axis=1), atol=1e-11)
        assert_allclose(tm.C_ext_col0, -tm.C.sum(axis=1), atol=1e-13)

    def test_nt_too_small(self):
        with pytest.raises(ValueError, match="corner"):
            assemble_temporal(4, 3, 1.0)


class TestScaledSystem:
    def test_rho_zero_is_imaginary_b(self):
        tm = assemble_temporal(2, 8, 1.0)
        sys0 = scaled_system(2, 8, 0.0)
        assert_allclose(sys0.K, 1j * tm.B_scaled, atol=0)

    def test_first_entry_p2(self):
        sys1 = scaled_system(2, 8, 1.0)
        assert_allclose(sys1.K[0, 0], -1j - 10.0 / 24.0, atol=1e-13)

    def test_matches_unscaled_assembly(self):
        mu, Nt, T = 5.0, 10, 1.0
        tm = assemble_temporal(2, Nt, T)
        ht = T / Nt
        K_unscaled = tm.h_t * (1j * tm.B - mu * tm.C)
        K_scaled = scaled_system(2, Nt, mu * ht).K
        assert_allclose(K_scaled, K_unscaled, rtol=1e-13, atol=1e-15)

    def test_nonfinite_rho(self):
        with pytest.raises(ValueError):
            scaled_system(2, 8, np.inf)


class TestScalarRhs:
    def test_zero_data(self):
        assert_allclose(scalar_rhs(2, 8, 1.0, 4.0, 0.0, None), 0.0)

    def test_initial_term_hits_first_entry(self):
        rhs = scalar_rhs(3, 8, 1.0, 3.0, 1.0, None)
        expected = np.zeros(10, complex)
        expected[0] = 3.0
        assert_allclose(rhs, expected, atol=1e-15)

    def test_constant_source_fundamental_theorem(self):
        # (1, phi'_{l-1}) = phi_{l-1}(T) - phi_{l-1}(0) = -delta_{l,1}
        rhs = scalar_rhs(1, 6, 1.0, 0.0, 0.0, lambda t: np.ones_like(t))
        expected = np.zeros(6, complex)
        expected[0] = -1.0
        assert_allclose(rhs, expected, atol=1e-14)


class TestScalarSolve:
    def test_constant_solution(self):
        sol = solve_scalar_ivp(2, 8, 1.0, 0.0, 1.0, None)
        ts = np.linspace(0, 1, 23)
        assert_allclose(sol(ts), np.ones(23), atol=1e-12)
        assert sol(0.0) == 1.0 + 0.0j

    def test_galerkin_exactness_linear(self):
        mu = 2.5
        sol = solve_scalar_ivp(2, 8, 1.0, mu, 0.0, lambda t: 1j + mu * t)
        ts = np.linspace(0, 1, 23)
        assert_allclose(sol(ts), ts, atol=1e-12)

    def test_convergence_to_duhamel(self):
        mu, p = 10.0, 2
        errs = []
        for Nt in (8, 16, 32):
            sol = solve_scalar_ivp(p, Nt, 1.0, mu, 1.0, None)
            errs.append(scalar_l2_error(sol, lambda t: np.exp(1j * mu * t)))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert rates.min() >= p + 0.8

    def test_mass_identity_at_final_time(self):
        sol = solve_scalar_ivp(3, 16, 1.0, 7.0, 1.0 + 0.5j, None)
        assert abs(abs(sol(1.0)) ** 2 - abs(1.0 + 0.5j) ** 2) <= 1e-10


class TestDuhamel:
    def test_half_turn(self):
        assert_allclose(exact_ivp_solution(1.0, 1.0, None, np.pi), -1.0, atol=1e-14)

    def test_mu_zero_returns_initial_value(self):
        ts = np.linspace(0, 2, 9)
        assert_allclose(exact_ivp_solution(0.0, 0.3 - 0.7j, None, ts), 0.3 - 0.7j)

    def test_unitary_modulus(self):
        ts = np.linspace(0, 3, 50)
        psi = exact_ivp_solution(-4.7, 0.6 + 0.8j, None, ts)
        assert_allclose(np.abs(psi), 1.0, atol=1e-13)

    @pytest.mark.parametrize(
        "mu,f",
        [
            (3.0, None),
            (10.0, lambda t: np.exp(1j * t)),
            (-2.0, lambda t: t + 1j * t**2),
        ],
    )
    def test_residual_verified(self, mu, f):
        ts = np.linspace(0.01, 0.99, 100)
        assert duhamel_residual(mu, 1.0, f, ts) <= 1e-9

    def test_singular_error_carries_value(self):
        err = SingularSystemError("boom", 1.25e-17)
        assert err.smallest_singular_value == 1.25e-17
