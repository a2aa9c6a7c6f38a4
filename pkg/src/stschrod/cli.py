"""Command-line driver: `stschrod <experiment> [flags]` emitting CSV files.

Flags override values from an optional TOML config file (flat key/value, same
keys as the flags with hyphens replaced by underscores).  Sensible defaults
mirror the oscillator benchmark: domain (-3, 3), T = 1, omega = 10, Hermite
index 2, vanishing source.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .experiments import ExperimentConfig, run_experiment

EXPERIMENTS = (
    "convergence",
    "stability",
    "conservation",
    "conditioning",
    "gevp",
    "symbol",
    "wave-check",
    "solve",
)


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in str(text).split(",") if tok != ""]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in str(text).split(",") if tok != ""]


def _domain(text: str) -> tuple[float, float]:
    parts = _float_list(text)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"domain needs two values A,B, got {text!r}")
    return (parts[0], parts[1])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stschrod",
        description="Space-time spline benchmarks for the linear Schrodinger equation.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", type=Path, help="TOML file with flat key/value settings")
    parser.add_argument("--degree", type=int, help="spline degree in space and time")
    parser.add_argument("--nt", type=_int_list, help="time element counts (comma list)")
    parser.add_argument("--nx", type=_int_list, help="space element counts (comma list)")
    parser.add_argument("--t-final", type=float, dest="t_final", help="final time T")
    parser.add_argument("--domain", type=_domain, help="spatial interval A,B")
    parser.add_argument("--omega", type=float, help="oscillator frequency")
    parser.add_argument("--hermite", type=int, dest="hermite_n", help="Hermite index of the exact state")
    parser.add_argument("--rho", type=_float_list, help="scaled parameters (comma list)")
    parser.add_argument("--sizes", type=_int_list, help="matrix sizes n (comma list)")
    parser.add_argument("--out", type=str, help="output CSV path")
    return parser


def _defaults(kind: str) -> dict:
    base = dict(degree=2, t_final=1.0, domain=(-3.0, 3.0), omega=10.0, hermite_n=2)
    if kind == "convergence":
        base.update(nt=[16, 32, 64])
    elif kind == "stability":
        base.update(degree=3, nt=[16], nx=[96 * r for r in (1, 2, 4, 8, 16, 32, 64, 128)])
    elif kind == "conservation":
        base.update(nt=[64], nx=[384])
    elif kind == "conditioning":
        base.update(sizes=[100, 200, 400], rho=[1.0, 10.0, 100.0])
    elif kind == "gevp":
        base.update(nt=[16])
    elif kind == "symbol":
        base.update(rho=list(np.geomspace(0.05, 50.0, 20)))
    elif kind == "wave-check":
        base.update(sizes=[100, 200, 400], rho=[1.0, 25.0])
    elif kind == "solve":
        base.update(nt=[16])
    return base


def load_config(kind: str, args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    values = _defaults(kind)
    if args.config is not None:
        with open(args.config, "rb") as fh:
            file_values = tomllib.load(fh)
        for key, val in file_values.items():
            key = key.replace("-", "_")
            if key == "hermite":
                key = "hermite_n"
            if key == "domain":
                val = tuple(val) if isinstance(val, (list, tuple)) else _domain(val)
            if key in ("nt", "nx", "sizes") and not isinstance(val, (list, tuple)):
                val = _int_list(val)
            if key == "rho" and not isinstance(val, (list, tuple)):
                val = _float_list(val)
            values[key] = val
    for key in ("degree", "nt", "nx", "t_final", "domain", "omega", "hermite_n", "rho", "sizes", "out"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    # convergence and solve pair h_x to h_t when nx is not given explicitly
    if values.get("nt") is not None and values.get("nx") is None:
        a, b = values["domain"]
        scale = (b - a) / values["t_final"]
        values["nx"] = [max(2, round(scale * nt)) for nt in values["nt"]]
    if values.get("nt") is not None and values.get("nx") is not None:
        if len(values["nx"]) == 1 and len(values["nt"]) > 1:
            values["nx"] = list(values["nx"]) * len(values["nt"])
        if len(values["nt"]) == 1 and len(values["nx"]) > 1:
            values["nt"] = list(values["nt"]) * len(values["nx"])

    values = {k: v for k, v in values.items() if v is not None}
    return ExperimentConfig(kind=kind, **values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.experiment, args)
    out = run_experiment(cfg)
    print(f"{args.experiment}: wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
