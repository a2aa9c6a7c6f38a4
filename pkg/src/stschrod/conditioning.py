"""Condition-number sweeps and the generalized-eigenvalue diagnostic.

Weak well-conditioning means kappa grows at most like a power of the matrix
size; the sweep records kappa over (n, rho) grids and fits the log-log slope
per rho.  The pencil diagnostic checks that B v = lambda C v has no purely
imaginary eigenvalues, which is equivalent to i*B - mu*C being invertible for
every real mu at the given meshsize.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .temporal import assemble_temporal, scaled_system

#: largest size for exact SVD / explicit inverse; beyond this the sweep refuses
DESK_SCALE_CAP = 2000

#: relative threshold below which a pencil eigenvalue counts as near-imaginary
NEAR_IMAG_RTOL = 1e-8


@dataclass(frozen=True)
class ConditioningReport:
    """Rows (n, rho, kappa) plus fitted log-log slope of kappa vs n per rho."""

    p: int
    norm_kind: str
    rows: list[tuple[int, float, float]]
    slopes: dict[float, float] = field(default_factory=dict)

    def kappa(self, n: int, rho: float) -> float:
        for rn, rr, kk in self.rows:
            if rn == n and rr == rho:
                return kk
        raise KeyError((n, rho))


@dataclass(frozen=True)
class PencilSpectrum:
    """Finite eigenvalues of B v = lambda C v with near-imaginary statistics.

    Infinite eigenvalues (null directions of C) are counted separately and do
    not enter the finite list.
    """

    p: int
    Nt: int
    eigenvalues: np.ndarray
    num_infinite: int
    min_abs_real: float
    near_imaginary_count: int


def condition_number(M: np.ndarray, norm_kind: str = "spectral") -> float:
    """Condition number in the spectral or one-norm; singular input maps to inf.

    The one-norm variant forms the exact inverse and is capped at desk scale
    (n <= DESK_SCALE_CAP).
    """
    M = np.asarray(M)
    n = M.shape[0]
    eps = np.finfo(float).eps
    if norm_kind == "spectral":
        svals = np.linalg.svd(M, compute_uv=False)
        if svals[-1] <= n * eps * svals[0] or not np.isfinite(svals[0]):
            return float("inf")
        return float(svals[0] / svals[-1])
    if norm_kind in ("one", "one-norm", "1"):
        if n > DESK_SCALE_CAP:
            raise ValueError(f"one-norm condition number refused beyond n={DESK_SCALE_CAP}")
        try:
            Minv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            return float("inf")
        k1 = np.abs(M).sum(axis=0).max() * np.abs(Minv).sum(axis=0).max()
        if not np.isfinite(k1) or k1 * n * eps >= 1.0:
            return float("inf")
        return float(k1)
    raise ValueError(f"unknown norm kind {norm_kind!r}")


def conditioning_sweep(
    p: int,
    sizes: list[int],
    rhos: list[float],
    norm_kind: str = "spectral",
) -> ConditioningReport:
    """kappa(K_n(rho)) over a grid of sizes and rho values.

    Sizes must be ascending and each at least 2*(m + k) = 4p so the nearly
    Toeplitz structure is exposed; slopes are least-squares fits of log kappa
    against log n per rho.
    """
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly ascending")
    if any(n < 4 * p for n in sizes):
        raise ValueError(f"every size must be >= {4 * p} for degree {p}")
    if norm_kind != "spectral" and max(sizes) > DESK_SCALE_CAP:
        raise ValueError(f"sizes beyond {DESK_SCALE_CAP} refused for norm {norm_kind!r}")

    rows = []
    for rho in rhos:
        for n in sizes:
            K = scaled_system(p, n - p + 1, rho).K
            rows.append((n, float(rho), condition_number(K, norm_kind)))

    slopes = {}
    for rho in rhos:
        ks = np.array([kk for (nn, rr, kk) in rows if rr == float(rho)])
        ns = np.array([nn for (nn, rr, kk) in rows if rr == float(rho)], dtype=float)
        if len(ns) >= 2 and np.all(np.isfinite(ks)):
            slopes[float(rho)] = float(np.polyfit(np.log(ns), np.log(ks), 1)[0])
        else:
            slopes[float(rho)] = float("nan")

    rows.sort(key=lambda r: (r[0], r[1]))
    return ConditioningReport(p=p, norm_kind=norm_kind, rows=rows, slopes=slopes)


def gevp_spectrum(p: int, Nt: int) -> PencilSpectrum:
    """QZ eigenvalues of the scaled pencil (h_t*B, C) with imaginary-axis stats.

    Double precision limits this diagnostic to Nt <= 64; larger pencils are
    too ill-conditioned for the eigenvalues to be trustworthy at this
    precision.
    """
    if Nt > 64:
        raise ValueError("pencil diagnostic restricted to Nt <= 64 in double precision")
    tm = assemble_temporal(p, Nt, 1.0)
    w = sla.eig(tm.B_scaled, tm.C_scaled, right=False)
    if np.any(np.isnan(w)):
        raise ArithmeticError(f"pencil numerically degenerate at (p={p}, Nt={Nt})")
    finite = w[np.isfinite(w)]
    near = int(np.sum(np.abs(finite.real) < NEAR_IMAG_RTOL * np.abs(finite)))
    return PencilSpectrum(
        p=p,
        Nt=Nt,
        eigenvalues=finite,
        num_infinite=int(len(w) - len(finite)),
        min_abs_real=float(np.abs(finite.real).min()) if len(finite) else float("inf"),
        near_imaginary_count=near,
    )
