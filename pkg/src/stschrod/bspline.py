"""Open uniform B-spline bases with derivatives, plus Gauss-Legendre quadrature.

All bases are maximal-regularity B-splines of degree ``p`` on a uniform mesh
with a clamped (open) knot vector: the first and last knots carry multiplicity
``p + 1``, interior breakpoints carry multiplicity one.  Evaluation follows the
Cox-de Boor recursion in its triangular-table form (NURBS book A2.3), with a
right-continuous convention at interior knots and the left limit at the right
endpoint of the domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

MAX_DEGREE = 10


@dataclass(frozen=True)
class KnotVector:
    """Clamped uniform knot vector of degree ``p`` on ``[a, b]``.

    Attributes
    ----------
    degree : int
        Polynomial degree p >= 1.
    breakpoints : ndarray
        The N + 1 strictly increasing mesh points t_0 < ... < t_N.
    knots : ndarray
        Nondecreasing knots, length N + 2p + 1, with p + 1 repetitions of
        each endpoint and multiplicity one inside.
    """

    degree: int
    breakpoints: np.ndarray
    knots: np.ndarray

    @property
    def a(self) -> float:
        return float(self.breakpoints[0])

    @property
    def b(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def num_elements(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def meshsize(self) -> float:
        return (self.b - self.a) / self.num_elements

    @property
    def dim(self) -> int:
        """Dimension of the spline space, N + p."""
        return self.num_elements + self.degree


@dataclass(frozen=True)
class BasisEval:
    """Values and derivatives of the active basis functions at one point.

    ``values[d, r]`` is the d-th derivative of function ``first_active + r``;
    exactly ``degree + 1`` functions are active at any point.
    """

    first_active: int
    values: np.ndarray


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights on the reference interval (-1, 1)."""

    nodes: np.ndarray
    weights: np.ndarray

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Affinely map the rule to the interval ``[a, b]``."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


def open_uniform_knots(p: int, N: int, interval: tuple[float, float]) -> KnotVector:
    """Build the clamped knot vector for N uniform elements on ``interval``.

    Parameters
    ----------
    p : int
        Spline degree, 1 <= p <= MAX_DEGREE.
    N : int
        Number of mesh elements, N >= 1.
    interval : (float, float)
        Domain endpoints a < b.

    Returns
    -------
    KnotVector
        Uniform breakpoints with meshsize (b - a)/N and p + 1 endpoint knots.
    """
    a, b = float(interval[0]), float(interval[1])
    if not 1 <= p <= MAX_DEGREE:
        raise ValueError(f"degree must be in [1, {MAX_DEGREE}], got {p}")
    if N < 1:
        raise ValueError(f"need at least one element, got N={N}")
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    breakpoints = np.linspace(a, b, N + 1)
    knots = np.concatenate([np.full(p, a), breakpoints, np.full(p, b)])
    knots.flags.writeable = False
    breakpoints.flags.writeable = False
    return KnotVector(degree=p, breakpoints=breakpoints, knots=knots)


def find_spans(kv: KnotVector, ts: np.ndarray) -> np.ndarray:
    """Knot-span index for each point, right-continuous at interior knots.

    The span s satisfies knots[s] <= t < knots[s + 1] for interior points;
    at t = b the last element is used.
    """
    spans = np.searchsorted(kv.knots, ts, side="right") - 1
    return np.clip(spans, kv.degree, kv.degree + kv.num_elements - 1)


def eval_batch(
    kv: KnotVector, ts: np.ndarray, max_deriv: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate active basis values/derivatives at many points at once.

    Parameters
    ----------
    kv : KnotVector
    ts : ndarray
        Query points inside [a, b].
    max_deriv : int
        Highest derivative order to return, 0 <= max_deriv <= degree.

    Returns
    -------
    spans : ndarray of int
        Knot-span index per point; first active function is ``span - degree``.
    values : ndarray, shape (max_deriv + 1, npts, degree + 1)
        ``values[d, i, r]`` is the d-th derivative of active function r at
        point i.
    """
    p = kv.degree
    if not 0 <= max_deriv <= p:
        raise ValueError(f"max_deriv must be in [0, {p}], got {max_deriv}")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    tol = 1e-12 * max(1.0, abs(kv.a), abs(kv.b))
    if np.any(ts < kv.a - tol) or np.any(ts > kv.b + tol):
        bad = ts[(ts < kv.a - tol) | (ts > kv.b + tol)][0]
        raise ValueError(f"point {bad} outside domain [{kv.a}, {kv.b}]")

    kt = kv.knots
    spans = find_spans(kv, ts)
    npts = ts.size

    # Triangular Cox-de Boor table (NURBS book A2.3), vectorized over points.
    left = np.empty((npts, p))
    right = np.empty((npts, p))
    ndu = np.empty((npts, p + 1, p + 1))
    ndu[:, 0, 0] = 1.0
    for j in range(p):
        left[:, j] = ts - kt[spans - j]
        right[:, j] = kt[spans + 1 + j] - ts
        saved = np.zeros(npts)
        for r in range(j + 1):
            ndu[:, j + 1, r] = 1.0 / (right[:, r] + left[:, j - r])
            temp = ndu[:, r, j] * ndu[:, j + 1, r]
            ndu[:, r, j + 1] = saved + right[:, r] * temp
            saved = left[:, j - r] * temp
        ndu[:, j + 1, j + 1] = saved

    values = np.zeros((max_deriv + 1, npts, p + 1))
    values[0] = ndu[:, :, p]

    if max_deriv > 0:
        aa = np.empty((npts, 2, p + 1))
        for r in range(p + 1):
            s1, s2 = 0, 1
            aa[:, 0, 0] = 1.0
            for k in range(1, max_deriv + 1):
                d = np.zeros(npts)
                rk = r - k
                pk = p - k
                if r >= k:
                    aa[:, s2, 0] = aa[:, s1, 0] * ndu[:, pk + 1, rk]
                    d = aa[:, s2, 0] * ndu[:, rk, pk]
                j1 = 1 if rk >= -1 else -rk
                j2 = k - 1 if r - 1 <= pk else p - r
                for j in range(j1, j2 + 1):
                    aa[:, s2, j] = (aa[:, s1, j] - aa[:, s1, j - 1]) * ndu[:, pk + 1, rk + j]
                    d = d + aa[:, s2, j] * ndu[:, rk + j, pk]
                if r <= pk:
                    aa[:, s2, k] = -aa[:, s1, k - 1] * ndu[:, pk + 1, r]
                    d = d + aa[:, s2, k] * ndu[:, r, pk]
                values[k, :, r] = d
                s1, s2 = s2, s1
        fac = float(p)
        for k in range(1, max_deriv + 1):
            values[k] *= fac
            fac *= p - k

    return spans, values


def eval_all(kv: KnotVector, t: float, max_deriv: int = 0) -> BasisEval:
    """Values and derivatives of the ``degree + 1`` active functions at ``t``.

    Right-continuous at interior knots; the last element is used at t = b.
    """
    spans, values = eval_batch(kv, np.array([float(t)]), max_deriv)
    return BasisEval(first_active=int(spans[0]) - kv.degree, values=values[:, 0, :])


def gauss_legendre_rule(q: int) -> QuadratureRule:
    """q-point Gauss-Legendre rule on (-1, 1), exact for degree <= 2q - 1."""
    if not 1 <= q <= 64:
        raise ValueError(f"quadrature order must be in [1, 64], got {q}")
    nodes, weights = np.polynomial.legendre.leggauss(q)
    return QuadratureRule(nodes=nodes, weights=weights)


def element_quadrature(kv: KnotVector, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss points and weights on every element, flattened element-major."""
    rule = gauss_legendre_rule(q)
    h = kv.meshsize
    lefts = kv.breakpoints[:-1]
    pts = (lefts[:, None] + 0.5 * h * (rule.nodes[None, :] + 1.0)).ravel()
    wts = np.tile(0.5 * h * rule.weights, kv.num_elements)
    return pts, wts


def collocation_matrix(kv: KnotVector, pts: np.ndarray, deriv: int = 0) -> sparse.csr_matrix:
    """Sparse matrix of basis (derivative) values, shape (npts, dim).

    Row i holds the ``deriv``-th derivative of every basis function at
    ``pts[i]``; only the degree + 1 active functions are stored.
    """
    p = kv.degree
    spans, values = eval_batch(kv, pts, deriv)
    npts = len(pts)
    cols = (spans[:, None] - p + np.arange(p + 1)[None, :]).ravel()
    indptr = np.arange(0, (npts + 1) * (p + 1), p + 1)
    return sparse.csr_matrix(
        (values[deriv].ravel(), cols, indptr), shape=(npts, kv.dim)
    )


def greville_points(kv: KnotVector) -> np.ndarray:
    """Greville abscissae: knot averages, one per basis function."""
    p = kv.degree
    kt = kv.knots
    return np.array([kt[j + 1 : j + p + 1].mean() for j in range(kv.dim)])
