"""Algebraic bridge between the complex scalar system and real 2x2 block forms.

Splitting psi = u + i*v turns the complex system (iB - mu_s C) psi = rhs with
zero initial datum into the real block system

    [[B, -mu_s C], [mu_s C, B]] [u; v] = [(f_i, phi'); -(f_r, phi')],

while the first-order-in-time wave discretization with parameter mu_w > 0
reads [[B, C], [-mu_w C, B]] [u; v] = [0; (f, phi')].  Both block matrices
share the Schur complement S = B + c*C B^{-1} C (c = mu_s^2 or mu_w), whose
condition number obeys  kappa(S) <= (1 + c*||C||^2/||B||^2 * kappa(B)) *
kappa(block)  in the 1- or inf-norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .conditioning import ConditioningReport, condition_number
from .temporal import assemble_temporal, scalar_rhs

KINDS = ("schrodinger_split", "wave")


@dataclass(frozen=True)
class BlockSystem:
    """Real 2n x 2n block system for the split or wave formulation."""

    kind: str
    parameter: float
    B: np.ndarray
    C: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def n(self) -> int:
        return self.B.shape[0]


@dataclass(frozen=True)
class SchurComplementReport:
    """Schur complement S = B + c*C B^{-1} C with its conditioning bound."""

    S: np.ndarray
    coefficient: float
    norm_kind: str
    kappa_schur: float
    kappa_block: float
    bound: float


def _test_derivative_load(p: int, Nt: int, T: float, g: Optional[Callable]) -> np.ndarray:
    """(g, phi_{l-1}')_{(0,T)} for l = 1..n, as a real vector."""
    if g is None:
        n = Nt + p - 1
        return np.zeros(n)
    rhs = scalar_rhs(p, Nt, T, mu=0.0, psi0=0.0, f=g)
    return rhs.real


def assemble_block_system(
    kind: str,
    p: int,
    Nt: int,
    T: float,
    parameter: float,
    f: Optional[Callable] = None,
) -> BlockSystem:
    """Assemble the real block system of the chosen kind.

    ``f`` is a complex-valued callable for the split kind (split into real and
    imaginary parts) and a real-valued callable for the wave kind, entering
    only the second block row there.  Wave requires parameter >= 0.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    mu = float(parameter)
    if kind == "wave" and mu < 0.0:
        raise ValueError(f"wave parameter must be nonnegative, got {mu}")
    tm = assemble_temporal(p, Nt, T)
    B, C = tm.B, tm.C
    n = tm.n

    if kind == "schrodinger_split":
        matrix = np.block([[B, -mu * C], [mu * C, B]])
        fi = None if f is None else (lambda t: np.asarray(f(t)).imag)
        fr = None if f is None else (lambda t: np.asarray(f(t)).real)
        rhs = np.concatenate(
            [_test_derivative_load(p, Nt, T, fi), -_test_derivative_load(p, Nt, T, fr)]
        )
    else:
        matrix = np.block([[B, C], [-mu * C, B]])
        rhs = np.concatenate([np.zeros(n), _test_derivative_load(p, Nt, T, f)])
    return BlockSystem(kind=kind, parameter=mu, B=B, C=C, matrix=matrix, rhs=rhs)


def schur_complement_report(
    B: np.ndarray,
    C: np.ndarray,
    coefficient: float,
    block: np.ndarray,
    norm_kind: str = "one",
) -> SchurComplementReport:
    """Evaluate S = B + c*C B^{-1} C and both sides of the conditioning bound.

    The bound is stated for the 1- and inf-norms only; the coefficient is
    folded into the squared norm of C.
    """
    if norm_kind == "one":
        norm = lambda X: float(np.abs(X).sum(axis=0).max())
    elif norm_kind == "inf":
        norm = lambda X: float(np.abs(X).sum(axis=1).max())
    else:
        raise ValueError(f"norm_kind must be 'one' or 'inf', got {norm_kind!r}")

    try:
        Binv_C = np.linalg.solve(B, C)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"B is singular: {exc}") from exc
    S = B + coefficient * (C @ Binv_C)

    def kappa(X: np.ndarray) -> float:
        try:
            return norm(X) * norm(np.linalg.inv(X))
        except np.linalg.LinAlgError:
            return float("inf")

    kS = kappa(S)
    kB = kappa(B)
    kM = kappa(block)
    bound = (1.0 + coefficient * norm(C) ** 2 / norm(B) ** 2 * kB) * kM
    return SchurComplementReport(
        S=S, coefficient=float(coefficient), norm_kind=norm_kind,
        kappa_schur=kS, kappa_block=kM, bound=bound,
    )


def verify_equivalence(p: int, Nt: int, T: float, mu_s: float, f_complex: Callable) -> float:
    """Max coefficient discrepancy between the complex solve and the split solve.

    Both paths use zero initial data; the discrepancy is max |psi - (u + i v)|
    over the n trial coefficients.
    """
    tm = assemble_temporal(p, Nt, T)
    K = 1j * tm.B - mu_s * tm.C
    rhs_c = scalar_rhs(p, Nt, T, mu=mu_s, psi0=0.0, f=f_complex)
    psi = np.linalg.solve(K, rhs_c)

    block = assemble_block_system("schrodinger_split", p, Nt, T, mu_s, f_complex)
    uv = np.linalg.solve(block.matrix, block.rhs)
    n = tm.n
    return float(np.abs(psi - (uv[:n] + 1j * uv[n:])).max())


def wave_conditioning_sweep(
    p: int,
    sizes: list[int],
    mu_w_values: list[float],
    norm_kind: str = "spectral",
) -> ConditioningReport:
    """kappa of the wave block matrix over (n, mu_w); scaled matrices are used
    so rows depend on (p, n, mu_w) only."""
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly ascending")
    if any(n < 4 * p for n in sizes):
        raise ValueError(f"every size must be >= {4 * p} for degree {p}")

    rows = []
    for mu in mu_w_values:
        for n in sizes:
            tm = assemble_temporal(p, n - p + 1, 1.0)
            Bn, Cn = tm.B_scaled, tm.C_scaled
            block = np.block([[Bn, Cn], [-float(mu) * Cn, Bn]])
            rows.append((n, float(mu), condition_number(block, norm_kind)))

    slopes = {}
    for mu in mu_w_values:
        ks = np.array([kk for (nn, rr, kk) in rows if rr == float(mu)])
        ns = np.array([nn for (nn, rr, kk) in rows if rr == float(mu)], dtype=float)
        if len(ns) >= 2 and np.all(np.isfinite(ks)):
            slopes[float(mu)] = float(np.polyfit(np.log(ns), np.log(ks), 1)[0])
        else:
            slopes[float(mu)] = float("nan")
    rows.sort(key=lambda r: (r[0], r[1]))
    return ConditioningReport(p=p, norm_kind=norm_kind, rows=rows, slopes=slopes)
