"""Global space-time system, direct Kronecker solve, and the Schur-based solver.

Unknowns are ordered time-major: entry (l, i) of the coefficient matrix is the
trial function phi_l(t) * chi_i(x), l = 1..n, i = 1..N_s.  The operator is

    i*B (x) M + C (x) A,

kept in factored Kronecker form.  The fast path triangularizes X = (iB)^{-1} C
by a complex Schur decomposition Q R Q^H and back-substitutes over time blocks,
each block being one banded spatial solve with matrix M + R[k,k]*A.  The
factor i travels with B throughout so the five steps compose to the exact
inverse of the assembled operator; the direct sparse factorization is kept as
the reference path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg as sla
from scipy import sparse
from scipy.sparse.linalg import splu

from .bspline import collocation_matrix, element_quadrature
from .spatial import SpatialSystem, l2_project
from .temporal import QUAD_MARGIN, SingularSystemError, TemporalMatrices, assemble_temporal

#: unknown-count cap for the dense/sparse reference factorization
DIRECT_SOLVE_CAP = 200_000


@dataclass(frozen=True)
class SpaceTimeSystem:
    """Assembled Kronecker system with initial-datum lifting.

    ``rhs`` is stored as an (n, N_s) matrix in time-major layout; ``lifting``
    holds the coefficients of the projected initial datum, extended constant
    in time.
    """

    temporal: TemporalMatrices
    spatial: SpatialSystem
    rhs: np.ndarray
    lifting: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.temporal.n, self.spatial.space.dim)

    def apply_operator(self, U: np.ndarray) -> np.ndarray:
        """(i*B (x) M + C (x) A) applied to a time-major coefficient matrix."""
        M, A = self.spatial.M, self.spatial.A
        B, C = self.temporal.B, self.temporal.C
        return 1j * (B @ (M @ U.T).T) + C @ (A @ U.T).T

    def dense_operator(self) -> np.ndarray:
        """Dense Kronecker matrix; intended for small validation sizes only."""
        n, ns = self.shape
        if n * ns > 160_000:
            raise ValueError("dense operator is restricted to small validation sizes")
        return 1j * np.kron(self.temporal.B, self.spatial.M.toarray()) + np.kron(
            self.temporal.C, self.spatial.A.toarray()
        )


@dataclass(frozen=True)
class SchurFactors:
    """Unitary Q and upper-triangular R with Q^H X Q = R."""

    Q: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class DiscreteField:
    """Space-time spline field: coefficient tensor plus constant-in-time lifting."""

    temporal: TemporalMatrices
    spatial: SpatialSystem
    coefficients: np.ndarray
    lifting: np.ndarray

    @property
    def full_tensor(self) -> np.ndarray:
        """Coefficients over the full temporal basis j = 0..n (lifting folded in)."""
        n, ns = self.coefficients.shape
        U = np.empty((n + 1, ns), dtype=complex)
        U[0] = self.lifting
        U[1:] = self.lifting[None, :] + self.coefficients
        return U

    def sample(self, xs, ts, dt: int = 0, dx: int = 0) -> np.ndarray:
        """Field (or its first derivatives) on the tensor grid ts x xs."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        Et = collocation_matrix(self.temporal.knot_vector, ts, dt)
        Ex = collocation_matrix(self.spatial.space.knot_vector, xs, dx)[:, 1:-1]
        return (Et @ self.full_tensor) @ Ex.T


def evaluate_field(field: DiscreteField, x: float, t: float, want_derivs: bool = False):
    """Point value of the field, optionally with (d/dt, d/dx).

    Raises for points outside the closed space-time cylinder.
    """
    vals = field.sample([x], [t])[0, 0]
    if not want_derivs:
        return complex(vals)
    dt = field.sample([x], [t], dt=1)[0, 0]
    dx = field.sample([x], [t], dx=1)[0, 0]
    return complex(vals), complex(dt), complex(dx)


def assemble_spacetime(
    p: int,
    Nt: int,
    T: float,
    spatial: SpatialSystem,
    F: Optional[Callable],
    Psi0: Optional[Callable],
) -> SpaceTimeSystem:
    """Assemble the global system for source F(x, t) and initial datum Psi0(x).

    The initial datum enters through its L2 projection, lifted constant in
    time; its time derivative vanishes, so it reaches the right-hand side only
    through the boundary term -a(Pi Psi0, chi_i) * phi_{l-1}(0), i.e. the
    first time-test row.  The source is integrated against d/dt of the time
    test functions with the assembly Gauss rule.
    """
    temporal = assemble_temporal(p, Nt, T)
    n = temporal.n
    ns = spatial.space.dim
    rhs = np.zeros((n, ns), dtype=complex)

    c0 = np.zeros(ns, dtype=complex)
    if Psi0 is not None:
        c0 = np.asarray(l2_project(spatial.space, Psi0), dtype=complex)
        rhs[0, :] -= spatial.A @ c0

    if F is not None:
        kvt = temporal.knot_vector
        kvx = spatial.space.knot_vector
        tq, tw = element_quadrature(kvt, p + QUAD_MARGIN)
        xq, xw = element_quadrature(kvx, spatial.space.degree + QUAD_MARGIN)
        Fgrid = np.asarray(F(xq[None, :], tq[:, None]), dtype=complex)
        Et1 = collocation_matrix(kvt, tq, 1)[:, 0:n]
        Ex0 = collocation_matrix(kvx, xq, 0)[:, 1:-1]
        weighted = tw[:, None] * Fgrid * xw[None, :]
        rhs += Et1.T.conj() @ (Ex0.T.conj() @ weighted.T).T

    return SpaceTimeSystem(temporal=temporal, spatial=spatial, rhs=rhs, lifting=c0)


def direct_solve(system: SpaceTimeSystem) -> DiscreteField:
    """Sparse LU reference solve of the Kronecker operator.

    Refuses above DIRECT_SOLVE_CAP unknowns; verifies the relative residual
    and reports the smallest pivot on failure.
    """
    n, ns = system.shape
    if n * ns > DIRECT_SOLVE_CAP:
        raise ValueError(f"direct solve refused beyond {DIRECT_SOLVE_CAP} unknowns, got {n * ns}")
    B = sparse.csr_matrix(system.temporal.B)
    C = sparse.csr_matrix(system.temporal.C)
    K = (1j * sparse.kron(B, system.spatial.M) + sparse.kron(C, system.spatial.A)).tocsc()
    lu = splu(K)
    f = system.rhs.ravel()
    u = lu.solve(f)
    fnorm = np.linalg.norm(f)
    resid = np.linalg.norm(K @ u - f)
    if fnorm > 0 and resid > 1e-10 * fnorm:
        pivots = np.abs(lu.U.diagonal())
        raise SingularSystemError(
            f"direct solve residual {resid / fnorm:.3e} above 1e-10; "
            f"smallest pivot {pivots.min():.3e}",
            smallest_singular_value=float(pivots.min()),
        )
    return DiscreteField(
        temporal=system.temporal,
        spatial=system.spatial,
        coefficients=u.reshape(n, ns),
        lifting=system.lifting,
    )


def schur_decompose(X: np.ndarray) -> SchurFactors:
    """Complex Schur decomposition Q R Q^H = X (Hessenberg + shifted QR)."""
    X = np.asarray(X, dtype=complex)
    if not np.all(np.isfinite(X)):
        raise ValueError("Schur decomposition requires finite entries")
    try:
        R, Q = sla.schur(X, output="complex")
    except sla.LinAlgError as exc:  # iteration cap exceeded inside LAPACK
        raise ArithmeticError(f"Schur iteration failed to converge: {exc}") from exc
    return SchurFactors(Q=Q, R=R)


def bartels_stewart_solve(system: SpaceTimeSystem) -> DiscreteField:
    """Solve the Kronecker system by Schur triangularization of (iB)^{-1} C.

    Steps: factor X = (iB)^{-1} C = Q R Q^H; solve (iB (x) I) Y = F; rotate
    Y <- (Q^H (x) I) Y; back-substitute the block upper-triangular
    (I (x) M + R (x) A) Z = Y over time blocks k = n..1, each block one
    banded spatial solve with shift R[k, k]; rotate back Z <- (Q (x) I) Z.
    """
    temporal, spatial = system.temporal, system.spatial
    B = temporal.B
    n, ns = system.shape

    lu, piv = sla.lu_factor(1j * B)
    pivot_floor = np.abs(np.diag(lu)).min()
    if pivot_floor < 1e-14 * np.linalg.norm(B):
        raise SingularSystemError(
            f"temporal matrix B numerically singular (smallest pivot {pivot_floor:.3e})",
            smallest_singular_value=float(pivot_floor),
        )
    X = sla.lu_solve((lu, piv), temporal.C.astype(complex))
    factors = schur_decompose(X)
    Q, R = factors.Q, factors.R

    Y = sla.lu_solve((lu, piv), system.rhs)
    Y = Q.conj().T @ Y

    A = spatial.A
    p_x = spatial.space.degree
    Z = np.empty((n, ns), dtype=complex)
    for k in range(n - 1, -1, -1):
        acc = R[k, k + 1 :] @ Z[k + 1 :] if k < n - 1 else 0.0
        rhs_k = Y[k] - (A @ acc if k < n - 1 else 0.0)
        try:
            Z[k] = sla.solve_banded((p_x, p_x), spatial.banded(R[k, k]), rhs_k)
        except (sla.LinAlgError, ValueError) as exc:
            raise SingularSystemError(
                f"shifted spatial block {k} singular for shift {R[k, k]:.6g}: {exc}",
                smallest_singular_value=0.0,
            ) from exc
    Z = Q @ Z

    return DiscreteField(
        temporal=temporal, spatial=spatial, coefficients=Z, lifting=system.lifting
    )
