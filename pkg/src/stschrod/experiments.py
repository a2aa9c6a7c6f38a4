"""Benchmark experiments: harmonic-oscillator states, error norms, CSV reports.

The reference problem is the quantum harmonic oscillator on (-3, 3) with
potential V(x) = -omega^2 x^2 / 2, driven by the exact eigenstate family

    Psi_n(x, t) = (2^n n!)^{-1/2} (omega/pi)^{1/4} H_n(sqrt(omega) x)
                  exp(-(omega x^2 + (2n+1) i omega t) / 2),

with H_n the physicists' Hermite polynomials.  Errors are measured in the
L2(Q_T) norm and in the seminorm sum ||d_t . || + ||d_x . ||; every runner
emits one deterministic CSV with a fixed header and 17-significant-digit
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .bspline import collocation_matrix, element_quadrature
from .conditioning import conditioning_sweep, gevp_spectrum
from .spacetime import DiscreteField, assemble_spacetime, bartels_stewart_solve
from .spatial import assemble_spatial, spatial_space
from .symbols import classify_roots, is_reciprocal, locate_unit_zeros, system_symbol
from .temporal import assemble_temporal
from .wave import schur_complement_report

CSV_HEADERS = {
    "convergence": "p,ht,hx,relL2,relH1,rateL2,rateH1",
    "stability": "p,ht,hx,ratio,relL2,relH1",
    "conservation": "p,t,mass_dev,energy_dev",
    "conditioning": "p,n,rho,kappa,norm",
    "gevp": "p,Nt,re_lambda,im_lambda",
    "wave": "p,n,mu,kappa_block,kappa_schur,lemma_bound",
    "symbol": "p,rho,s,u,l,reciprocal,theta_star",
    "solve": "p,ht,hx,relL2,relH1",
}

#: grid points per time chunk when accumulating space-time quadrature sums
_CHUNK_BUDGET = 2_000_000


@dataclass
class ExperimentConfig:
    """Configuration shared by all experiment runners; see the CLI for keys."""

    kind: str
    degree: int = 2
    nt: Sequence[int] = (16,)
    nx: Sequence[int] = (96,)
    t_final: float = 1.0
    domain: tuple[float, float] = (-3.0, 3.0)
    omega: float = 10.0
    hermite_n: int = 2
    rho: Sequence[float] = (1.0, 10.0, 100.0)
    sizes: Sequence[int] = (100, 200, 400)
    out: Optional[str] = None
    quad: Optional[int] = None

    def __post_init__(self):
        if any(n <= 0 for n in self.nt) or any(n <= 0 for n in self.nx):
            raise ValueError("mesh lists must be positive")
        if not self.domain[0] < self.domain[1]:
            raise ValueError(f"degenerate domain {self.domain}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def potential(self) -> Callable:
        w2 = self.omega**2
        return lambda x: -0.5 * w2 * np.asarray(x) ** 2


@dataclass(frozen=True)
class ErrorReport:
    """Mesh-refinement error table with log2 rates between consecutive rows."""

    p: int
    rows: list[dict]


@dataclass(frozen=True)
class ConservationReport:
    """Mass/energy functional traces with deviations from their t = 0 values."""

    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray

    @property
    def mass_dev(self) -> np.ndarray:
        return np.abs(self.mass - self.mass[0]) / self.mass[0]

    @property
    def energy_dev(self) -> np.ndarray:
        return np.abs(self.energy - self.energy[0]) / abs(self.energy[0])


def hermite(n: int, x):
    """Physicists' Hermite polynomial by the recurrence H_{k+1} = 2x H_k - 2k H_{k-1}."""
    if n < 0:
        raise ValueError(f"Hermite index must be nonnegative, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    h = h_prev if n == 0 else 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def exact_state(n: int, omega: float, x, t, want_derivs: bool = False):
    """Oscillator eigenstate Psi_n(x, t), optionally with (d/dt, d/dx).

    Arrays broadcast; the time dependence is the unimodular factor
    exp(-i (2n+1) omega t / 2).
    """
    if n < 0 or omega <= 0:
        raise ValueError("need n >= 0 and omega > 0")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    cn = (omega / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
    gauss = np.exp(-0.5 * omega * x * x)
    phase = np.exp(-0.5j * (2 * n + 1) * omega * t)
    psi = cn * hermite(n, math.sqrt(omega) * x) * gauss * phase
    if not want_derivs:
        return psi
    dpsi_dt = -0.5j * (2 * n + 1) * omega * psi
    hm1 = hermite(n - 1, math.sqrt(omega) * x) if n >= 1 else 0.0
    du = cn * (2 * n * math.sqrt(omega) * hm1 - omega * x * hermite(n, math.sqrt(omega) * x)) * gauss
    dpsi_dx = du * phase
    return psi, dpsi_dt, dpsi_dx


def oscillator_residual(n: int, omega: float, xs, ts, step: float = 1e-6) -> float:
    """Max | i d_t Psi + 1/2 d_xx Psi + V Psi | at the given points.

    The second space derivative is formed by central differences of the
    analytic first derivative, so this genuinely checks the state against the
    equation it is supposed to solve.
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    psi, dt, _ = exact_state(n, omega, xs, ts, True)
    _, _, dxp = exact_state(n, omega, xs + step, ts, True)
    _, _, dxm = exact_state(n, omega, xs - step, ts, True)
    dxx = (dxp - dxm) / (2 * step)
    return float(np.abs(1j * dt + 0.5 * dxx - 0.5 * omega**2 * xs**2 * psi).max())


def solve_oscillator(cfg: ExperimentConfig, Nt: int, Nx: int) -> DiscreteField:
    """One space-time solve of the oscillator benchmark at the given meshes."""
    space = spatial_space(cfg.degree, Nx, cfg.domain)
    spatial = assemble_spatial(space, cfg.potential)
    system = assemble_spacetime(
        cfg.degree,
        Nt,
        cfg.t_final,
        spatial,
        F=None,
        Psi0=lambda x: exact_state(cfg.hermite_n, cfg.omega, x, 0.0),
    )
    try:
        return bartels_stewart_solve(system)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise RuntimeError(
            f"solve failed at (p={cfg.degree}, Nt={Nt}, Nx={Nx}): {exc}"
        ) from exc


def error_norms(
    field: DiscreteField,
    exact: Callable,
    quad_order: Optional[int] = None,
) -> tuple[float, float]:
    """Relative L2(Q_T) error and relative ||d_t .|| + ||d_x .|| error.

    ``exact(x, t, want_derivs=True)`` must broadcast and return the value and
    both first derivatives.  Quadrature is tensor Gauss with q = p + 5 per
    element unless overridden; the accumulation is chunked over time points to
    bound memory on fine spatial meshes.
    """
    kvt = field.temporal.knot_vector
    kvx = field.spatial.space.knot_vector
    q = quad_order or field.temporal.p + 5
    tq, tw = element_quadrature(kvt, q)
    xq, xw = element_quadrature(kvx, q)

    U = field.full_tensor
    Ex0 = collocation_matrix(kvx, xq, 0)[:, 1:-1]
    Ex1 = collocation_matrix(kvx, xq, 1)[:, 1:-1]
    Vx0 = (Ex0 @ U.T).T  # (dim_t, Qx)
    Vx1 = (Ex1 @ U.T).T
    Et0 = collocation_matrix(kvt, tq, 0)
    Et1 = collocation_matrix(kvt, tq, 1)

    sums = np.zeros(6)  # |e|^2, |Psi|^2, |e_t|^2, |Psi_t|^2, |e_x|^2, |Psi_x|^2
    step = max(1, _CHUNK_BUDGET // max(1, len(xq)))
    for lo in range(0, len(tq), step):
        hi = min(lo + step, len(tq))
        w = tw[lo:hi, None] * xw[None, :]
        vals = Et0[lo:hi] @ Vx0
        dts = Et1[lo:hi] @ Vx0
        dxs = Et0[lo:hi] @ Vx1
        ev, edt, edx = exact(xq[None, :], tq[lo:hi, None], True)
        sums[0] += np.sum(w * np.abs(vals - ev) ** 2)
        sums[1] += np.sum(w * np.abs(ev) ** 2)
        sums[2] += np.sum(w * np.abs(dts - edt) ** 2)
        sums[3] += np.sum(w * np.abs(edt) ** 2)
        sums[4] += np.sum(w * np.abs(dxs - edx) ** 2)
        sums[5] += np.sum(w * np.abs(edx) ** 2)

    if sums[1] == 0.0 or (sums[3] + sums[5]) == 0.0:
        raise ValueError("exact solution has zero norm on the cylinder")
    rel_l2 = math.sqrt(sums[0] / sums[1])
    rel_h1 = (math.sqrt(sums[2]) + math.sqrt(sums[4])) / (
        math.sqrt(sums[3]) + math.sqrt(sums[5])
    )
    return rel_l2, rel_h1


def functionals_trace(
    field: DiscreteField,
    V: Optional[Callable],
    sample_times: Sequence[float],
) -> ConservationReport:
    """Mass int |Psi|^2 and energy -1/2 int |d_x Psi|^2 + int V |Psi|^2 at the
    sample times, by elementwise spatial Gauss quadrature."""
    kvt = field.temporal.knot_vector
    kvx = field.spatial.space.knot_vector
    times = np.asarray(sample_times, dtype=float)
    xq, xw = element_quadrature(kvx, field.spatial.space.degree + 3)
    Ex0 = collocation_matrix(kvx, xq, 0)[:, 1:-1]
    Ex1 = collocation_matrix(kvx, xq, 1)[:, 1:-1]
    Vq = np.zeros_like(xq) if V is None else np.asarray(V(xq), dtype=float)

    U = field.full_tensor
    Ct = collocation_matrix(kvt, times, 0) @ U  # (ntimes, N_s)
    vals = (Ex0 @ Ct.T).T
    dxs = (Ex1 @ Ct.T).T
    mass = np.sum(xw[None, :] * np.abs(vals) ** 2, axis=1)
    energy = -0.5 * np.sum(xw[None, :] * np.abs(dxs) ** 2, axis=1) + np.sum(
        (xw * Vq)[None, :] * np.abs(vals) ** 2, axis=1
    )
    return ConservationReport(times=times, mass=mass, energy=energy)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(kind: str, rows: list[Sequence], out: Optional[str]) -> Optional[str]:
    """Emit rows under the fixed header for ``kind``; returns the path written."""
    header = CSV_HEADERS[kind]
    text = "\n".join([header] + [",".join(_fmt(v) for v in row) for row in rows]) + "\n"
    if out is None:
        return text
    Path(out).write_text(text, encoding="utf-8", newline="\n")
    return out


def _exact_with_derivs(cfg: ExperimentConfig) -> Callable:
    return lambda x, t, want_derivs=True: exact_state(
        cfg.hermite_n, cfg.omega, x, t, want_derivs
    )


def run_convergence(cfg: ExperimentConfig) -> tuple[ErrorReport, list[Sequence]]:
    """Errors under simultaneous refinement h_t = h_x; rates appended per row."""
    if len(cfg.nt) != len(cfg.nx):
        raise ValueError(f"mesh lists differ in length: {len(cfg.nt)} vs {len(cfg.nx)}")
    rows = []
    prev = None
    for Nt, Nx in zip(cfg.nt, cfg.nx):
        ht = cfg.t_final / Nt
        hx = (cfg.domain[1] - cfg.domain[0]) / Nx
        field = solve_oscillator(cfg, Nt, Nx)
        rel_l2, rel_h1 = error_norms(field, _exact_with_derivs(cfg), cfg.quad)
        rate_l2 = math.log2(prev[0] / rel_l2) if prev else float("nan")
        rate_h1 = math.log2(prev[1] / rel_h1) if prev else float("nan")
        rows.append(
            dict(ht=ht, hx=hx, relL2=rel_l2, relH1=rel_h1, rateL2=rate_l2, rateH1=rate_h1)
        )
        prev = (rel_l2, rel_h1)
    csv_rows = [
        (cfg.degree, r["ht"], r["hx"], r["relL2"], r["relH1"], r["rateL2"], r["rateH1"])
        for r in rows
    ]
    return ErrorReport(p=cfg.degree, rows=rows), csv_rows


def run_stability(cfg: ExperimentConfig) -> tuple[ErrorReport, list[Sequence]]:
    """Errors at fixed h_t while h_x decreases (mesh-ratio sweep)."""
    Nt = cfg.nt[0]
    ht = cfg.t_final / Nt
    rows = []
    for Nx in cfg.nx:
        hx = (cfg.domain[1] - cfg.domain[0]) / Nx
        field = solve_oscillator(cfg, Nt, Nx)
        rel_l2, rel_h1 = error_norms(field, _exact_with_derivs(cfg), cfg.quad)
        rows.append(dict(ht=ht, hx=hx, ratio=ht / hx, relL2=rel_l2, relH1=rel_h1))
    csv_rows = [
        (cfg.degree, r["ht"], r["hx"], r["ratio"], r["relL2"], r["relH1"]) for r in rows
    ]
    return ErrorReport(p=cfg.degree, rows=rows), csv_rows


def run_conservation(cfg: ExperimentConfig) -> tuple[ConservationReport, list[Sequence]]:
    """Mass/energy deviation traces at the Nt + 1 mesh times (F = 0)."""
    Nt, Nx = cfg.nt[0], cfg.nx[0]
    field = solve_oscillator(cfg, Nt, Nx)
    times = np.linspace(0.0, cfg.t_final, Nt + 1)
    report = functionals_trace(field, cfg.potential, times)
    csv_rows = [
        (cfg.degree, t, md, ed)
        for t, md, ed in zip(report.times, report.mass_dev, report.energy_dev)
    ]
    return report, csv_rows


def run_conditioning(cfg: ExperimentConfig) -> list[Sequence]:
    report = conditioning_sweep(cfg.degree, list(cfg.sizes), list(cfg.rho))
    return [(report.p, n, rho, kappa, report.norm_kind) for (n, rho, kappa) in report.rows]


def run_gevp(cfg: ExperimentConfig) -> list[Sequence]:
    spec = gevp_spectrum(cfg.degree, cfg.nt[0])
    eigs = sorted(spec.eigenvalues, key=lambda z: (z.real, z.imag))
    return [(spec.p, spec.Nt, z.real, z.imag) for z in eigs]


def run_wave_check(cfg: ExperimentConfig) -> list[Sequence]:
    """Wave block conditioning rows with the Schur complement and its bound."""
    rows = []
    for n in cfg.sizes:
        tm = assemble_temporal(cfg.degree, n - cfg.degree + 1, 1.0)
        Bn, Cn = tm.B_scaled, tm.C_scaled
        for mu in cfg.rho:
            block = np.block([[Bn, Cn], [-float(mu) * Cn, Bn]])
            rep = schur_complement_report(Bn, Cn, float(mu), block, "one")
            rows.append((cfg.degree, n, float(mu), rep.kappa_block, rep.kappa_schur, rep.bound))
    return rows


def run_symbol(cfg: ExperimentConfig) -> list[Sequence]:
    """Root classification of the system symbol per rho."""
    rows = []
    for rho in cfg.rho:
        q = system_symbol(cfg.degree, float(rho))
        rt = classify_roots(q)
        rec = int(is_reciprocal(q))
        if abs(rho) >= 1e-8:
            theta_star = [z for z in locate_unit_zeros(cfg.degree, float(rho)) if z != 0.0][0]
        else:
            theta_star = float("nan")
        rows.append((cfg.degree, float(rho), rt.s, rt.u, rt.l, rec, theta_star))
    return rows


def run_solve(cfg: ExperimentConfig) -> list[Sequence]:
    Nt, Nx = cfg.nt[0], cfg.nx[0]
    field = solve_oscillator(cfg, Nt, Nx)
    rel_l2, rel_h1 = error_norms(field, _exact_with_derivs(cfg), cfg.quad)
    ht = cfg.t_final / Nt
    hx = (cfg.domain[1] - cfg.domain[0]) / Nx
    return [(cfg.degree, ht, hx, rel_l2, rel_h1)]


def run_experiment(cfg: ExperimentConfig) -> Optional[str]:
    """Dispatch a configured experiment and write its CSV."""
    kind = cfg.kind
    if kind == "convergence":
        _, rows = run_convergence(cfg)
    elif kind == "stability":
        _, rows = run_stability(cfg)
    elif kind == "conservation":
        _, rows = run_conservation(cfg)
    elif kind == "conditioning":
        rows = run_conditioning(cfg)
    elif kind == "gevp":
        rows = run_gevp(cfg)
    elif kind == "wave-check":
        rows = run_wave_check(cfg)
    elif kind == "symbol":
        rows = run_symbol(cfg)
    elif kind == "solve":
        rows = run_solve(cfg)
    else:
        raise ValueError(f"unknown experiment kind {kind!r}")
    csv_kind = {"wave-check": "wave"}.get(kind, kind)
    out = cfg.out or f"{kind}.csv"
    return write_csv(csv_kind, rows, out)
