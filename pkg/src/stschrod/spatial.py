"""1D spatial spline space with Dirichlet conditions; mass and form matrices.

The space is the span of the interior B-splines (first and last clamped
functions removed), a conforming subspace of H^1_0 on the interval.  With a
potential V, the form matrix discretizes the negative Hamiltonian,

    A[i, r] = 1/2 (phi_r', phi_i') - (V phi_r, phi_i),

so the pencil A v = mu M v is symmetric definite with eigenvalues mu equal to
minus the Hamiltonian eigenvalues; this sign makes the Kronecker system
i*B (x) M + C (x) A reduce, mode by mode, to the scalar family i*B - mu_H*C
with mu_H = -mu.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded

from .bspline import KnotVector, element_quadrature, eval_batch, open_uniform_knots

QUAD_MARGIN = 3


@dataclass(frozen=True)
class SpatialSpace:
    """Interior spline space of degree p_x on N_x uniform elements."""

    degree: int
    num_elements: int
    interval: tuple[float, float]
    knot_vector: KnotVector

    @property
    def h(self) -> float:
        return self.knot_vector.meshsize

    @property
    def dim(self) -> int:
        """N_x + p_x - 2 after removing the two boundary functions."""
        return self.knot_vector.dim - 2


@dataclass(frozen=True)
class SpatialSystem:
    """Mass matrix M and form matrix A over the interior basis (CSR)."""

    space: SpatialSpace
    M: sparse.csr_matrix
    A: sparse.csr_matrix

    def banded(self, shift: complex = 0.0) -> np.ndarray:
        """LAPACK general-band storage of M + shift*A (l = u = p_x)."""
        p = self.space.degree
        K = (self.M + shift * self.A).todia() if shift != 0.0 else self.M.todia()
        ab = np.zeros((2 * p + 1, self.space.dim), dtype=K.dtype)
        for off, data in zip(K.offsets, K.data):
            ab[p - off, :] = data
        return ab

    def solve_shifted(self, shift: complex, rhs: np.ndarray) -> np.ndarray:
        """Solve (M + shift*A) x = rhs via banded LU."""
        p = self.space.degree
        return solve_banded((p, p), self.banded(shift), rhs)


def spatial_space(p_x: int, N_x: int, interval: tuple[float, float]) -> SpatialSpace:
    """Dirichlet-trimmed spline space; requires N_x >= 2."""
    if N_x < 2:
        raise ValueError(f"need at least two elements, got N_x={N_x}")
    kv = open_uniform_knots(p_x, N_x, interval)
    return SpatialSpace(degree=p_x, num_elements=N_x, interval=(float(interval[0]), float(interval[1])), knot_vector=kv)


def _interior_gram(space: SpatialSpace, weight: np.ndarray, da: int, db: int) -> sparse.csr_matrix:
    """sum_q weight_q * d^da phi_r(x_q) * d^db phi_i(x_q) over interior pairs."""
    kv = space.knot_vector
    p = space.degree
    pts, _ = element_quadrature(kv, p + QUAD_MARGIN)
    spans, vals = eval_batch(kv, pts, max(da, db))
    active = spans[:, None] - p + np.arange(p + 1)[None, :]
    blk = weight[:, None, None] * vals[db][:, :, None] * vals[da][:, None, :]
    rows = np.repeat(active, p + 1, axis=1).ravel()
    cols = np.tile(active, (1, p + 1)).ravel()
    G = sparse.coo_matrix(
        (blk.ravel(), (rows, cols)), shape=(kv.dim, kv.dim)
    ).tocsr()
    return G[1:-1, 1:-1]


def assemble_spatial(space: SpatialSpace, V: Optional[Callable] = None) -> SpatialSystem:
    """Assemble M[i,r] = (phi_r, phi_i) and A[i,r] = 1/2(phi_r',phi_i') - (V phi_r, phi_i).

    ``V`` is any callable vectorized over points; None means V = 0.
    """
    kv = space.knot_vector
    pts, wts = element_quadrature(kv, space.degree + QUAD_MARGIN)
    M = _interior_gram(space, wts, 0, 0)
    A = 0.5 * _interior_gram(space, wts, 1, 1)
    if V is not None:
        Vw = wts * np.asarray(V(pts), dtype=float)
        A = A - _interior_gram(space, Vw, 0, 0)
    return SpatialSystem(space=space, M=M.tocsr(), A=A.tocsr())


def l2_project(space: SpatialSpace, f: Callable) -> np.ndarray:
    """Coefficients of the L2 projection of f onto the interior space.

    Solves M c = (f, phi_i) and verifies the Galerkin residual.
    """
    kv = space.knot_vector
    p = space.degree
    pts, wts = element_quadrature(kv, p + QUAD_MARGIN)
    spans, vals = eval_batch(kv, pts, 0)
    fv = np.asarray(f(pts))
    dtype = complex if np.iscomplexobj(fv) else float

    active = spans[:, None] - p + np.arange(p + 1)[None, :]
    load_full = np.zeros(kv.dim, dtype=dtype)
    np.add.at(load_full, active.ravel(), (vals[0] * (wts * fv)[:, None]).ravel())
    load = load_full[1:-1]

    system = assemble_spatial(space, None)
    c = solve_banded((p, p), system.banded(0.0), load)
    resid = np.linalg.norm(system.M @ c - load)
    scale = np.linalg.norm(load)
    if scale > 0 and resid > 1e-12 * scale:
        raise ArithmeticError(f"projection residual {resid:.3e} exceeds 1e-12 * ||load||")
    return c
