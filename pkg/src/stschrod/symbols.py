"""Nearly-Toeplitz structure, symbol polynomials, and unit-circle zero counts.

The temporal families h_t*B and C are banded Toeplitz matrices away from
fixed-size top-left/bottom-right corners (p + 1 bands below the diagonal,
p - 1 above).  Their symbol polynomials

    q(z) = sum_{j=-m}^{k} a_j z^{m+j}

govern conditioning: the complex family i*h_t*B - rho*C is weakly
well-conditioned because its symbol keeps exactly two simple unit-modulus
zeros for every real rho, which is established here constructively by
restricting the symbol to the unit circle,

    q_K(e^{i th}) = -i e^{i p th} (B_p(th) - rho*C_p(th)),

and locating the unique nonzero root of B_p/C_p = rho by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from .temporal import assemble_temporal


class ToleranceError(ArithmeticError):
    """Requested tolerance not reachable within the truncation cap."""


@dataclass(frozen=True)
class NearlyToeplitz:
    """Band coefficients plus corner deviation blocks of a square matrix.

    ``band[m + j]`` holds the coefficient a_j of the j-th diagonal, read from
    a central row.  ``top_left``/``bottom_right`` are the (m+k) x (m+k)
    deviations of the source matrix from the pure band pattern;
    ``deviation_count`` counts their nonzero entries.
    """

    m: int
    k: int
    band: np.ndarray
    top_left: np.ndarray
    bottom_right: np.ndarray
    deviation_count: int
    n: int

    def band_matrix(self, n: int | None = None) -> np.ndarray:
        """Pure banded Toeplitz extension of the band to size n."""
        n = n or self.n
        col = np.zeros(n, dtype=self.band.dtype)
        row = np.zeros(n, dtype=self.band.dtype)
        ncol = min(self.m + 1, n)
        nrow = min(self.k + 1, n)
        col[:ncol] = self.band[self.m :: -1][:ncol]
        row[:nrow] = self.band[self.m :][:nrow]
        return toeplitz(col, row)

    def reconstruct(self) -> np.ndarray:
        """Band Toeplitz plus corner deviations; reproduces the source."""
        A = self.band_matrix()
        w = self.m + self.k
        A[:w, :w] += self.top_left
        A[self.n - w :, self.n - w :] += self.bottom_right
        return A


@dataclass(frozen=True)
class SymbolPolynomial:
    """q(z) = sum_j a_j z^{m+j}; coefficients stored ascending in z."""

    coefficients: np.ndarray
    m: int
    k: int

    @property
    def degree(self) -> int:
        c = self.coefficients
        nz = np.nonzero(np.abs(c) > 0)[0]
        return int(nz[-1]) if len(nz) else 0

    def __call__(self, z) -> np.ndarray:
        return np.polynomial.polynomial.polyval(z, self.coefficients)

    def on_circle(self, theta) -> np.ndarray:
        return self(np.exp(1j * np.asarray(theta)))


@dataclass(frozen=True)
class RootType:
    """Root count (s, u, l) by modulus: < 1 - tol, within tol of 1, > 1 + tol."""

    s: int
    u: int
    l: int
    roots: np.ndarray

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.s, self.u, self.l)


def extract_nearly_toeplitz(M: np.ndarray, m: int, k: int) -> NearlyToeplitz:
    """Split a matrix into a banded Toeplitz part plus corner deviations.

    The band is read from the central row; everything the band extension does
    not explain must live in the top-left and bottom-right (m+k) x (m+k)
    windows, otherwise the matrix is not nearly Toeplitz for this (m, k) and
    a ValueError is raised.  Reconstruction is lossless up to that check.
    """
    M = np.asarray(M)
    n = M.shape[0]
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    w = m + k
    if n < 2 * w:
        raise ValueError(
            f"matrix of size {n} too small to expose a pure band region, need >= {2 * w}"
        )
    r0 = n // 2
    band = M[r0, r0 - m : r0 + k + 1].copy()

    nt = NearlyToeplitz(
        m=m, k=k, band=band,
        top_left=np.zeros((w, w), dtype=M.dtype),
        bottom_right=np.zeros((w, w), dtype=M.dtype),
        deviation_count=0, n=n,
    )
    D = M - nt.band_matrix()
    scale = max(np.abs(M).max(), 1.0)
    tol = 1e-12 * scale
    interior = D.copy()
    interior[:w, :w] = 0.0
    interior[n - w :, n - w :] = 0.0
    if np.abs(interior).max() > tol:
        i, j = np.unravel_index(np.argmax(np.abs(interior)), D.shape)
        raise ValueError(
            f"matrix is not nearly Toeplitz for bandwidths (m={m}, k={k}): "
            f"deviation {interior[i, j]:.3e} at ({i}, {j}) outside the corner windows"
        )
    top = D[:w, :w].copy()
    bot = D[n - w :, n - w :].copy()
    top[np.abs(top) <= tol] = 0.0
    bot[np.abs(bot) <= tol] = 0.0
    count = int(np.count_nonzero(top) + np.count_nonzero(bot))
    return NearlyToeplitz(
        m=m, k=k, band=band, top_left=top, bottom_right=bot,
        deviation_count=count, n=n,
    )


def symbol_polynomial(nt: NearlyToeplitz) -> SymbolPolynomial:
    """Symbol q(z) = sum_j a_j z^{m+j} of the band."""
    if len(nt.band) == 0:
        raise ValueError("empty band")
    return SymbolPolynomial(coefficients=nt.band.astype(complex), m=nt.m, k=nt.k)


@lru_cache(maxsize=32)
def temporal_symbols(p: int) -> tuple[SymbolPolynomial, SymbolPolynomial]:
    """Symbols of the scaled temporal families (h_t*B, C) for degree p.

    The bands are read from matrices assembled at a size just large enough to
    expose the pure Toeplitz region (m = p + 1 bands below, k = p - 1 above).
    """
    m, k = p + 1, p - 1
    Nt = max(3 * p + 2, 8)
    tm = assemble_temporal(p, Nt, 1.0)
    ntB = extract_nearly_toeplitz(tm.B_scaled, m, k)
    ntC = extract_nearly_toeplitz(tm.C_scaled, m, k)
    return symbol_polynomial(ntB), symbol_polynomial(ntC)


def system_symbol(p: int, rho: float) -> SymbolPolynomial:
    """Symbol of the scaled system family, i*q_B - rho*q_C (symbol linearity)."""
    qB, qC = temporal_symbols(p)
    return SymbolPolynomial(
        coefficients=1j * qB.coefficients - rho * qC.coefficients, m=qB.m, k=qB.k
    )


def eval_Bp_Cp(p: int, theta) -> tuple[np.ndarray, np.ndarray]:
    """Real functions B_p, C_p with q_B(e^{i th}) = -e^{i p th} B_p(th) and
    q_C(e^{i th}) = -i e^{i p th} C_p(th).

    Evaluated by inverting those identities on the assembled symbols; the
    imaginary residue of each rotated symbol must vanish and is checked.
    """
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    qB, qC = temporal_symbols(p)
    rot = np.exp(-1j * p * theta_arr)
    zB = rot * qB.on_circle(theta_arr)
    zC = rot * qC.on_circle(theta_arr)
    resB = np.abs(zB.imag).max()
    resC = np.abs(zC.real).max()
    if max(resB, resC) > 1e-12:
        raise ArithmeticError(
            f"imaginary residue {max(resB, resC):.3e} above 1e-12 for p={p}; "
            "symbol or assembly inconsistency"
        )
    Bp = -zB.real
    Cp = -zC.imag
    if np.ndim(theta):
        return Bp, Cp
    return float(Bp[0]), float(Cp[0])


_UHAT_J_CAP = 1 << 22


def uhat(k: int, theta: float, tol: float = 1e-12) -> float:
    """Lattice sum sum_{j in Z} (theta + 2 pi j)^{-k} for theta in (0, pi].

    Truncated symmetric sum over |j| <= J plus an analytic Euler-Maclaurin
    tail for each side; J is grown until the tail remainder bound drops below
    ``tol``.  Satisfies the recursion d/dth uhat_k = -k uhat_{k+1} and the
    closed form 1/(4 sin^2(theta/2)) at k = 2.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if not 0.0 < theta <= math.pi:
        raise ValueError(f"theta must lie in (0, pi], got {theta}")

    two_pi = 2.0 * math.pi
    c_rem = two_pi**5 * k * (k + 1) * (k + 2) * (k + 3) * (k + 4) / 30240.0
    J = 32
    while True:
        u = theta + two_pi * (J + 1)
        v = two_pi * (J + 1) - theta
        remainder = c_rem * (u ** -(k + 5) + v ** -(k + 5))
        if remainder <= 0.5 * tol:
            break
        if J >= _UHAT_J_CAP:
            raise ToleranceError(
                f"tolerance {tol:g} unreachable within J cap {_UHAT_J_CAP} for k={k}"
            )
        J *= 2

    j = np.arange(-J, J + 1, dtype=float)
    core = float(np.sum((theta + two_pi * j) ** float(-k)))

    def em_tail(w: float) -> float:
        # sum_{x=J+1}^inf (2 pi x +- theta)^{-k} with first argument w
        t_int = w ** (1 - k) / (two_pi * (k - 1))
        t_half = 0.5 * w ** (-k)
        t_b2 = (two_pi * k / 12.0) * w ** (-k - 1)
        t_b4 = (two_pi**3 * k * (k + 1) * (k + 2) / 720.0) * w ** (-k - 3)
        return t_int + t_half + t_b2 - t_b4

    u = theta + two_pi * (J + 1)
    v = two_pi * (J + 1) - theta
    return core + em_tail(u) + (-1) ** k * em_tail(v)


def uhat_Bp_Cp(p: int, theta: float, tol: float = 1e-13) -> tuple[float, float]:
    """Series-based B_p, C_p from the lattice sums; parity extends to [-pi, pi].

    Cross-check companion to ``eval_Bp_Cp`` (B_p even, C_p odd, both 0 at 0).
    """
    if theta == 0.0:
        return 0.0, 0.0
    sgn = 1.0 if theta > 0 else -1.0
    th = abs(theta)
    pref = -((2.0 - 2.0 * math.cos(th)) ** (p + 1))
    Bp = pref * uhat(2 * p, th, tol)
    Cp = pref * uhat(2 * p + 1, th, tol)
    return Bp, sgn * Cp


def kp_value(p: int, theta, rho: float):
    """K_p(theta, rho) = B_p(theta) - rho*C_p(theta); zero iff the system
    symbol vanishes at e^{i theta}."""
    Bp, Cp = eval_Bp_Cp(p, theta)
    return Bp - rho * Cp


def classify_roots(q: SymbolPolynomial, tol: float = 1e-8) -> RootType:
    """Count roots by modulus via companion-matrix eigenvalues.

    Leading and trailing (near-)zero coefficients are deflated first, so the
    counts refer to the essential degree.
    """
    c = np.asarray(q.coefficients, dtype=complex)
    scale = np.abs(c).max()
    if scale == 0.0:
        raise ValueError("zero polynomial has no root type")
    nz = np.nonzero(np.abs(c) > 1e-14 * scale)[0]
    c = c[nz[0] : nz[-1] + 1]
    roots = np.roots(c[::-1]) if len(c) > 1 else np.array([], dtype=complex)
    mods = np.abs(roots)
    s = int(np.sum(mods < 1.0 - tol))
    u = int(np.sum((mods >= 1.0 - tol) & (mods <= 1.0 + tol)))
    return RootType(s=s, u=u, l=len(roots) - s - u, roots=roots)


def is_reciprocal(q: SymbolPolynomial, tol: float = 1e-12) -> bool:
    """True when the coefficient sequence equals its reversal up to a global
    unimodular factor, allowing the conjugated variant.

    The plain palindrome test covers real symbols (q_B, q_C); complex system
    symbols i*q_B - rho*q_C satisfy reversed = -conj(coefficients) instead,
    which is the same root-modulus pairing (each root r pairs with a root of
    modulus 1/|r|), so both variants report True.
    """
    c = np.asarray(q.coefficients, dtype=complex)
    scale = np.abs(c).max()
    if scale == 0.0:
        return False
    rev = c[::-1]
    for target in (c, np.conj(c)):
        i0 = int(np.argmax(np.abs(target)))
        if abs(target[i0]) <= tol * scale:
            continue
        gamma = rev[i0] / target[i0]
        if abs(abs(gamma) - 1.0) > tol:
            continue
        if np.abs(rev - gamma * target).max() <= tol * scale:
            return True
    return False


def locate_unit_zeros(p: int, rho: float, tol: float = 1e-12) -> list[float]:
    """The two angles theta with K_p(theta, rho) = 0: always 0, plus the
    unique root theta* of L_p(theta, rho) = B_p/C_p - rho on (-pi, pi)\\{0}.

    L_p is strictly increasing, so theta* is bracketed and bisected to
    ``tol``.  |rho| below 1e-8 is refused: the two zeros merge at the origin
    (the theta-derivative of K_p at 0 equals rho) and "two simple zeros" is
    ill-posed there.
    """
    if abs(rho) < 1e-8:
        raise ValueError(f"rho={rho:g} treated as the degenerate rho=0 case (double zero at 0)")
    sgn = 1.0 if rho > 0 else -1.0
    r = abs(rho)

    def lp(th: float) -> float:
        Bp, Cp = eval_Bp_Cp(p, th)
        return Bp / Cp - r

    # L goes from -r at 0+ to +inf at pi-: expand toward 0 for a negative value
    lo = min(0.5, r / 2.0)
    while lp(lo) >= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise ArithmeticError("bisection bracket failure near theta = 0")
    hi = math.pi * (1.0 - 1e-14)
    if lp(hi) <= 0.0:
        raise ArithmeticError("bisection bracket failure near theta = pi")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lp(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    theta_star = sgn * 0.5 * (lo + hi)

    residual = abs(kp_value(p, abs(theta_star), r))
    if residual > 1e-10:
        raise ArithmeticError(
            f"unit-zero residual |K_p| = {residual:.3e} above 1e-10 at theta*={theta_star:.6f}"
        )
    return sorted([0.0, float(theta_star)])
