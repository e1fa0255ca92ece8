"""
Command-line front end.

    gaussian-witness validate      --input state.json
    gaussian-witness analyze       --input state.json --modes 0,1 [--witness M] [--x 2.0]
    gaussian-witness scan          --input state.json --modes 0 --grid 0:10:51
    gaussian-witness optimize      --input state.json --modes 0,1
    gaussian-witness critical-xi   --input state.json --modes 0
    gaussian-witness standard-form --input state.json
    gaussian-witness verify        --input state.json --samples 1000000 --seed 7

Exit codes: 0 success, 2 validation failure, 3 internal-consistency failure,
4 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import witnesses as W
from .errors import CapacityError, ConsistencyError, UnsupportedInputError, ValidationError
from .gaussian_core import (
    CLASSICAL_TOL, PHYSICAL_TOL, DisplacementConfig, is_classical, is_physical,
    reduce_to_standard_form, symplectic_eigenvalues,
)
from .moments import format_index, intensity_moments
from .oracles import finite_difference_moments, mc_intensity_moments, wick_moments_zero_mean
from .serialization import SchemaError, load_state
from .states import product, vacuum

EXIT_OK, EXIT_INVALID, EXIT_CONSISTENCY, EXIT_IO = 0, 2, 3, 4

FD_REL_TOL = 1e-7
MC_SIGMAS = 4.0


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str
    output: Optional[str] = None
    modes: Optional[tuple] = None
    witness: Optional[str] = None
    strategy: str = "auto"
    phases: Optional[tuple] = None
    x: Optional[float] = None
    grid: Optional[tuple] = None
    cap: Optional[tuple] = None
    samples: int = 10 ** 6
    seed: int = 12345
    workers: int = 1
    tol_detect: float = W.DETECT_TOL
    tol_physical: float = PHYSICAL_TOL
    tol_classical: float = CLASSICAL_TOL
    tol_fd: float = FD_REL_TOL
    tol_sigmas: float = MC_SIGMAS

    def __post_init__(self):
        if self.grid is not None:
            lo, hi, pts = self.grid
            if pts < 2:
                raise ValidationError("--grid needs at least 2 points")
            if lo < 0 or hi < lo:
                raise ValidationError("--grid needs 0 <= x_min <= x_max")
        if self.x is not None and self.x < 0:
            raise ValidationError("--x must be nonnegative")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> tuple:
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected min:max:n, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussian-witness",
        description="Detect and quantify nonclassicality of Gaussian states from intensity moments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="state file (JSON)")
        p.add_argument("--output", help="write the result here instead of stdout")
        p.add_argument("--tol-physical", type=float, default=PHYSICAL_TOL)
        p.add_argument("--tol-classical", type=float, default=CLASSICAL_TOL)
        p.add_argument("--tol-detect", type=float, default=W.DETECT_TOL)

    def witness_args(p, phases=True):
        p.add_argument("--modes", type=_int_list, help="mode index or pair, e.g. 0 or 0,1")
        p.add_argument("--witness", choices=["R", "M"], help="default: R for one mode, M for two")
        p.add_argument("--strategy", choices=list(W.STRATEGIES), default="auto")
        if phases:
            p.add_argument("--phases", type=_float_list, help="fixed displacement phases (radians)")

    p = sub.add_parser("validate", help="physicality and classicality margins")
    common(p)

    p = sub.add_parser("analyze", help="witness report with optimal phases")
    common(p)
    witness_args(p)
    p.add_argument("--x", type=float, help="evaluate at this |xi|^2 instead of the recommended one")

    p = sub.add_parser("scan", help="witness values over an x = |xi|^2 grid (CSV)")
    common(p)
    witness_args(p)
    p.add_argument("--grid", type=_grid, default=(0.0, 10.0, 51), help="min:max:n (default 0:10:51)")

    p = sub.add_parser("optimize", help="optimal displacement phases")
    common(p)
    witness_args(p, phases=False)

    p = sub.add_parser("critical-xi", help="critical displacement amplitude")
    common(p)
    witness_args(p)

    p = sub.add_parser("standard-form", help="two-mode standard form (C = 0 states)")
    common(p)

    p = sub.add_parser("verify", help="cross-check the moment engine against the oracles")
    common(p)
    p.add_argument("--cap", type=_int_list, help="per-mode order cap (default 3 for one mode, 2 otherwise)")
    p.add_argument("--samples", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tol-fd", type=float, default=FD_REL_TOL, help="relative tolerance vs finite differences")
    p.add_argument("--tol-sigmas", type=float, default=MC_SIGMAS, help="Monte Carlo tolerance in standard errors")
    return parser


def _config(args) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    return RunConfig(**fields)


# --------------------------------------------------------------- commands

def _strategy(cfg: RunConfig, n_modes: int) -> tuple[tuple, str]:
    modes = cfg.modes if cfg.modes is not None else tuple(range(min(n_modes, 2)))
    strategy = cfg.strategy
    if strategy == "auto":
        if cfg.witness == "M" and len(modes) == 1:
            strategy = "M-coherent"
        elif cfg.witness == "R" and len(modes) != 1:
            raise ValidationError("witness R takes a single mode")
        else:
            strategy = "R" if len(modes) == 1 else "M"
    return modes, strategy


def cmd_validate(cfg: RunConfig, out) -> int:
    state, cm = load_state(cfg.input)
    physical, pmargin = is_physical(state, cfg.tol_physical)
    classical, cmargin = is_classical(cm, cfg.tol_classical)
    report = {
        "modes": state.n_modes,
        "physical": physical,
        "physical_margin": pmargin,
        "symplectic_eigenvalues": [float(v) for v in symplectic_eigenvalues(state.sigma)],
        "classical": classical,
        "classical_margin": cmargin,
    }
    json.dump(report, out, indent=2)
    out.write("\n")
    return EXIT_OK if physical else EXIT_INVALID


def _physical_cm(cfg: RunConfig):
    state, cm = load_state(cfg.input)
    ok, margin = is_physical(state, cfg.tol_physical)
    if not ok:
        raise ValidationError(f"state is not physical (min symplectic eigenvalue - 1/2 = {margin:.3e})")
    return state, cm


def cmd_analyze(cfg: RunConfig, out) -> int:
    _, cm = _physical_cm(cfg)
    modes, strategy = _strategy(cfg, cm.n_modes)
    report = W.analyze(cm, modes, strategy, x=cfg.x, phases=cfg.phases, tol=cfg.tol_detect)
    json.dump(report.to_json(), out, indent=2)
    out.write("\n")
    return EXIT_OK


def _witness_target(cm, modes, strategy, phases):
    """(state, kind, modes, phases) actually fed to the witness for a given strategy."""
    if strategy == "R":
        return cm, "R", modes, phases or (W.optimal_phase_R(cm, modes[0]),)
    if strategy == "M":
        return cm, "M", modes, phases or W.optimal_phases_M(cm, modes)
    target = product(cm.subsystem(modes), vacuum(1))
    return target, "M", (0, 1), phases or (W.optimal_phase_R(target, 0), 0.0)


def cmd_scan(cfg: RunConfig, out) -> int:
    _, cm = _physical_cm(cfg)
    modes, strategy = _strategy(cfg, cm.n_modes)
    target, kind, wmodes, phases = _witness_target(cm, modes, strategy, cfg.phases)
    lo, hi, n = cfg.grid
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["x", "value", "verdict"])
    for x in np.linspace(lo, hi, n):
        disp = DisplacementConfig.none(target.n_modes)
        amps = np.array(disp.amplitudes)
        phs = np.array(disp.phases)
        amps[list(wmodes)] = np.sqrt(x)
        phs[list(wmodes)] = phases
        disp = DisplacementConfig(amps, phs)
        if kind == "R":
            value = W.witness_R(target, wmodes[0], disp)
        else:
            value = W.witness_M(target, wmodes, disp)
        verdict = "detected" if value < -cfg.tol_detect else "not-detected"
        writer.writerow([repr(float(x)), repr(float(value)), verdict])
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, out) -> int:
    _, cm = _physical_cm(cfg)
    modes, strategy = _strategy(cfg, cm.n_modes)
    target, kind, wmodes, phases = _witness_target(cm, modes, strategy, None)
    if kind == "R":
        a = W.leading_coefficient_R(target, wmodes[0], phases[0])
    else:
        a = W.leading_coefficient_M(target, wmodes, *phases)
    report = {"witness": kind, "strategy": strategy, "modes": list(modes),
              "phases": [float(p) for p in phases], "a": float(a)}
    if kind == "M" and strategy == "M":
        report["candidates"] = {
            name: {"phases": [float(p) for p in ph], "a": float(W.leading_coefficient_M(cm, modes, *ph))}
            for name, ph in W.phase_candidates(cm, *modes).items()
        }
    json.dump(report, out, indent=2)
    out.write("\n")
    return EXIT_OK


def _roots_json(roots):
    return [[float(r.real), float(r.imag)] for r in sorted(roots, key=lambda z: (z.real, z.imag))]


def cmd_critical_xi(cfg: RunConfig, out) -> int:
    _, cm = _physical_cm(cfg)
    modes, strategy = _strategy(cfg, cm.n_modes)
    target, kind, wmodes, phases = _witness_target(cm, modes, strategy, cfg.phases)
    poly = W.witness_polynomial(target, kind, wmodes, phases)
    x_cr = W.critical_amplitude(poly)
    report = {"witness": kind, "strategy": strategy, "modes": list(modes),
              "phases": [float(p) for p in phases],
              "a": poly.a, "b": poly.b, "c": poly.c, "d": poly.d,
              "applicable": x_cr is not None, "x_cr": x_cr,
              "xi_cr": None if x_cr is None else float(np.sqrt(x_cr)),
              "negative_intervals": [[lo, None if np.isinf(hi) else hi]
                                     for lo, hi in W.negative_intervals(poly, cfg.tol_detect)]}
    if poly.a != 0:
        numeric = W.cubic_roots_numeric(*poly.coefficients)
        radical = W.cubic_roots_radical(*poly.coefficients)
        report["roots_numeric"] = _roots_json(numeric)
        report["roots_radical"] = _roots_json(radical)
        report["radical_agrees"] = W.roots_agree(radical, numeric)
    json.dump(report, out, indent=2)
    out.write("\n")
    return EXIT_OK


def cmd_standard_form(cfg: RunConfig, out) -> int:
    _, cm = _physical_cm(cfg)
    params, phases = reduce_to_standard_form(cm)
    report = {"q_j": params.q_j, "q_l": params.q_l, "q_jl": params.q_jl, "qp_jl": params.qp_jl,
              "phases": list(phases), "duan_sum": W.duan_sum(params)}
    json.dump(report, out, indent=2)
    out.write("\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    state, cm = _physical_cm(cfg)
    n = cm.n_modes
    cap = cfg.cap or ((3,) if n == 1 else (2,) * n)
    if len(cap) == 1 and n > 1:
        cap = cap * n
    disp = DisplacementConfig.from_fields(state.amplitudes())
    engine = intensity_moments(cm, disp, cap)
    fd = finite_difference_moments(cm, disp, cap)
    mc = mc_intensity_moments(state, cap, cfg.samples, cfg.seed, workers=cfg.workers)
    zero_mean = not np.any(state.mean)

    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["moment", "engine", "finite_difference", "fd_pass", "monte_carlo",
                     "mc_std_error", "mc_pass", "wick"])
    all_pass = True
    for multi, value in engine.entries.items():
        row = [format_index(multi), repr(value)]
        if multi in fd.entries:
            ok = abs(fd[multi] - value) <= cfg.tol_fd * max(1.0, abs(value))
            row += [repr(fd[multi]), "pass" if ok else "FAIL"]
            all_pass &= ok
        else:
            row += ["", "n/a"]
        if multi in mc:
            est = mc[multi]
            ok = abs(est.value - value) <= cfg.tol_sigmas * est.std_error
            row += [repr(est.value), repr(est.std_error), "pass" if ok else "FAIL"]
            all_pass &= ok
        else:
            row += ["", "", "n/a"]
        row.append(repr(wick_moments_zero_mean(cm, multi)) if zero_mean and max(multi) <= 3 else "")
        writer.writerow(row)
    return EXIT_OK if all_pass else EXIT_CONSISTENCY


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "scan": cmd_scan,
    "optimize": cmd_optimize,
    "critical-xi": cmd_critical_xi,
    "standard-form": cmd_standard_form,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        buf = io.StringIO()
        code = COMMANDS[cfg.command](cfg, buf)
        if cfg.output:
            with open(cfg.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return code
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ValidationError, UnsupportedInputError, CapacityError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
