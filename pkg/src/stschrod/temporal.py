"""Temporal Petrov-Galerkin matrices and the scalar initial-value problem.

The trial space is the degree-p maximal-regularity spline space on (0, T)
vanishing at t = 0 (basis functions 1..n of the clamped basis, n = Nt + p - 1);
testing is against the time derivatives of the splines vanishing at t = T
(basis functions 0..n-1).  This yields

    B[l, j] = (phi_j', phi_{l-1}')      C[l, j] = (phi_j', phi_{l-1})

for l, j = 1..n, and the complex system matrix i*B - mu*C for the scalar
problem  i psi' + mu psi = f,  psi(0) = psi0.  The entries of h_t*B and of C
do not depend on h_t, which motivates the scaled family K(rho) = i*h_t*B -
rho*C with rho = mu*h_t.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .bspline import (
    KnotVector,
    collocation_matrix,
    element_quadrature,
    eval_batch,
    open_uniform_knots,
)

#: Gauss points per element = degree + QUAD_MARGIN; exact for the
#: spline-product integrands assembled here, with margin for quadratic weights
QUAD_MARGIN = 3


class SingularSystemError(np.linalg.LinAlgError):
    """Raised when a system matrix is numerically singular.

    Carries the smallest singular value (or pivot magnitude) observed, since a
    singular i*B - mu*C signals a uniqueness failure for that (p, rho).
    """

    def __init__(self, message: str, smallest_singular_value: float):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


@dataclass(frozen=True)
class TemporalMatrices:
    """Unscaled temporal matrices of the discrete variational problem."""

    p: int
    Nt: int
    T: float
    h_t: float
    B: np.ndarray
    C: np.ndarray
    B_ext_col0: np.ndarray
    C_ext_col0: np.ndarray
    knot_vector: KnotVector

    @property
    def n(self) -> int:
        return self.Nt + self.p - 1

    @property
    def B_scaled(self) -> np.ndarray:
        """h_t * B; entries depend on p only."""
        return self.h_t * self.B

    @property
    def C_scaled(self) -> np.ndarray:
        """Alias of C; entries depend on p only."""
        return self.C


@dataclass(frozen=True)
class ScaledSystem:
    """Scaled system matrix K(rho) = i*h_t*B - rho*C with rho = mu*h_t."""

    p: int
    Nt: int
    rho: float
    K: np.ndarray

    @property
    def n(self) -> int:
        return self.Nt + self.p - 1


@dataclass(frozen=True)
class ScalarSolution:
    """Discrete solution of the scalar problem over the full spline basis.

    ``coefficients[0]`` is pinned to psi0: the initial datum is lifted by the
    constant function psi0, which by partition of unity adds psi0 to every
    basis coefficient.
    """

    knot_vector: KnotVector
    coefficients: np.ndarray
    psi0: complex

    def __call__(self, t) -> np.ndarray:
        return self.evaluate(t, deriv=0)

    def derivative(self, t) -> np.ndarray:
        return self.evaluate(t, deriv=1)

    def evaluate(self, t, deriv: int = 0) -> np.ndarray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        E = collocation_matrix(self.knot_vector, t_arr, deriv)
        out = E @ self.coefficients
        return out if np.ndim(t) else out[0]


def _full_gram(p: int, Nt: int, T: float) -> tuple[np.ndarray, np.ndarray, KnotVector]:
    """Assemble (phi_s', phi_t') and (phi_s', phi_t) over the full basis."""
    kv = open_uniform_knots(p, Nt, (0.0, T))
    q = p + QUAD_MARGIN
    pts, wts = element_quadrature(kv, q)
    spans, vals = eval_batch(kv, pts, 1)

    dim = kv.dim
    npts = len(pts)
    active = spans[:, None] - p + np.arange(p + 1)[None, :]
    v0 = vals[0]
    v1 = vals[1]

    # local (p+1)x(p+1) blocks per quadrature point, scattered by active index
    blk_11 = wts[:, None, None] * v1[:, :, None] * v1[:, None, :]
    blk_01 = wts[:, None, None] * v0[:, :, None] * v1[:, None, :]
    rows = np.repeat(active, p + 1, axis=1).ravel()
    cols = np.tile(active, (1, p + 1)).ravel()
    D1 = np.zeros((dim, dim))
    D0 = np.zeros((dim, dim))
    np.add.at(D1, (rows, cols), blk_11.ravel())
    np.add.at(D0, (rows, cols), blk_01.ravel())
    # D1[t, s] = (phi_s', phi_t'); D0[t, s] = (phi_s', phi_t)
    return D1, D0, kv


@lru_cache(maxsize=64)
def assemble_temporal(p: int, Nt: int, T: float = 1.0) -> TemporalMatrices:
    """Assemble B, C and the extended trial column j = 0.

    Parameters
    ----------
    p, Nt, T : degree, element count and final time.  Nt >= p is required so
        the two corner blocks of the nearly Toeplitz structure do not overlap.
    """
    if Nt < p:
        raise ValueError(f"need Nt >= p so corner blocks do not overlap, got Nt={Nt}, p={p}")
    D1, D0, kv = _full_gram(p, Nt, T)
    n = Nt + p - 1
    B = D1[0:n, 1 : n + 1].copy()
    C = D0[0:n, 1 : n + 1].copy()
    b0 = D1[0:n, 0].copy()
    c0 = D0[0:n, 0].copy()
    for arr in (B, C, b0, c0):
        arr.flags.writeable = False
    return TemporalMatrices(
        p=p, Nt=Nt, T=T, h_t=T / Nt, B=B, C=C,
        B_ext_col0=b0, C_ext_col0=c0, knot_vector=kv,
    )


def scaled_system(p: int, Nt: int, rho: float) -> ScaledSystem:
    """Scaled family member K(rho) = i*(h_t*B) - rho*C (independent of T)."""
    if not np.isfinite(rho):
        raise ValueError(f"rho must be finite, got {rho}")
    tm = assemble_temporal(p, Nt, 1.0)
    K = 1j * tm.B_scaled - rho * tm.C_scaled
    return ScaledSystem(p=p, Nt=Nt, rho=float(rho), K=K)


def scalar_rhs(
    p: int,
    Nt: int,
    T: float,
    mu: float,
    psi0: complex,
    f: Optional[Callable] = None,
) -> np.ndarray:
    """Right-hand side (f, phi_{l-1}')_{(0,T)} + mu*psi0*phi_{l-1}(0), l = 1..n.

    Only phi_0 is nonzero at t = 0, so the initial-datum term reaches the
    first entry alone.  ``f`` may be None for a vanishing source.
    """
    tm = assemble_temporal(p, Nt, T)
    n = tm.n
    rhs = np.zeros(n, dtype=complex)
    if f is not None:
        pts, wts = element_quadrature(tm.knot_vector, p + QUAD_MARGIN)
        fv = np.asarray(f(pts), dtype=complex)
        E1 = collocation_matrix(tm.knot_vector, pts, 1)
        rhs += (E1.T @ (wts * fv))[0:n]
    rhs[0] += mu * psi0
    return rhs


def solve_scalar_ivp(
    p: int,
    Nt: int,
    T: float,
    mu: float,
    psi0: complex,
    f: Optional[Callable] = None,
) -> ScalarSolution:
    """Solve the discrete scalar problem (i*B - mu*C) u = rhs.

    The initial datum is lifted by the constant function psi0, so the full
    basis coefficients are psi0 + u_j (u_0 = 0).
    """
    tm = assemble_temporal(p, Nt, T)
    K = 1j * tm.B - mu * tm.C
    svals = np.linalg.svd(K, compute_uv=False)
    fro = np.linalg.norm(K)
    if svals[-1] < 1e-13 * fro:
        raise SingularSystemError(
            f"system matrix numerically singular at (p={p}, rho={mu * tm.h_t:g}): "
            f"smallest singular value {svals[-1]:.3e} < 1e-13 * ||K||_F",
            smallest_singular_value=float(svals[-1]),
        )
    u = np.linalg.solve(K, scalar_rhs(p, Nt, T, mu, psi0, f))
    coeff = np.full(tm.n + 1, complex(psi0))
    coeff[1:] += u
    return ScalarSolution(knot_vector=tm.knot_vector, coefficients=coeff, psi0=complex(psi0))


def exact_ivp_solution(
    mu: float,
    psi0: complex,
    f: Optional[Callable],
    t,
) -> complex | np.ndarray:
    """Duhamel solution of  i psi' + mu psi = f,  psi(0) = psi0.

    psi(t) = e^{i mu t} psi0 - i * int_0^t e^{i mu (t-s)} f(s) ds.  The
    integral is evaluated by adaptive Gauss quadrature to ~1e-12.  Note the
    exponent signs: substituting back into the equation gives residual zero,
    which is asserted by ``duhamel_residual`` in the test-suite.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if f is None:
        out = np.exp(1j * mu * t_arr) * psi0
        return out if np.ndim(t) else complex(out[0])

    def kernel_re(s):
        return (np.exp(-1j * mu * s) * f(s)).real

    def kernel_im(s):
        return (np.exp(-1j * mu * s) * f(s)).imag

    out = np.empty(t_arr.size, dtype=complex)
    for i, ti in enumerate(t_arr):
        re, _ = quad(kernel_re, 0.0, ti, epsabs=1e-13, epsrel=1e-13, limit=200)
        im, _ = quad(kernel_im, 0.0, ti, epsabs=1e-13, epsrel=1e-13, limit=200)
        out[i] = np.exp(1j * mu * ti) * (psi0 - 1j * (re + 1j * im))
    return out if np.ndim(t) else complex(out[0])


def duhamel_residual(mu: float, psi0: complex, f: Optional[Callable], ts) -> float:
    """Max |i psi' + mu psi - f| over ``ts``, psi' by central differences."""
    ts = np.asarray(ts, dtype=float)
    step = 1e-6
    psi = exact_ivp_solution(mu, psi0, f, ts)
    dpsi = (
        exact_ivp_solution(mu, psi0, f, ts + step)
        - exact_ivp_solution(mu, psi0, f, ts - step)
    ) / (2 * step)
    fv = np.zeros_like(psi) if f is None else np.asarray([f(t) for t in ts], dtype=complex)
    return float(np.abs(1j * dpsi + mu * psi - fv).max())


def scalar_l2_error(sol: ScalarSolution, ref: Callable, quad_order: int | None = None) -> float:
    """L2(0, T) distance between a discrete solution and a reference callable."""
    kv = sol.knot_vector
    q = quad_order or kv.degree + 5
    pts, wts = element_quadrature(kv, q)
    diff = sol(pts) - np.asarray(ref(pts), dtype=complex)
    return float(np.sqrt(np.sum(wts * np.abs(diff) ** 2)))
