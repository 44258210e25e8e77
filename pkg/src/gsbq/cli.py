"""Command-line front end.

    gsbq <command> [flags] [--config FILE]

Commands: solve, kernel, functionals, sweep, atlas, classify, evolve,
validate. A config file is one flat JSON object whose keys are the flag
names (with underscores); flags given on the command line win over the file.
Outputs go to ``--output`` or, if unset, to ``$GSBQ_OUTPUT_DIR`` (default
the working directory).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import GSBQError, UsageError
from .model import WaveParams, kernel_eval, kernel_oracle

log = logging.getLogger(__name__)

COMMANDS = ("solve", "kernel", "functionals", "sweep", "atlas", "classify", "evolve", "validate")
OUTPUT_ENV = "GSBQ_OUTPUT_DIR"


@dataclass(frozen=True)
class RunConfig:
    command: str
    beta: float = -1.0
    c: float = 0.0
    p: float = 2.0
    parity: str = "odd"
    L: float = 200.0
    n: int = 4096
    output: Optional[str] = None
    seed: int = 0
    workers: int = 1
    # solve
    max_iterations: int = 1000
    # kernel
    x: str = "0,1,5"
    # sweep
    segment: str = "S1"
    k: Optional[float] = None
    samples: int = 31
    with_d_cc: bool = True
    # atlas
    resolution: int = 24
    c_max: float = 0.99
    # evolve
    t_final: float = 1.0
    dt: float = 1e-3
    record_every: int = 100
    dealias: bool = True
    perturbation: str = "scale"
    delta: float = 1e-2

    @property
    def params(self) -> WaveParams:
        return WaveParams(self.beta, self.c, self.p, self.parity)

    @property
    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV) or ".")


_KEYS = {f.name for f in fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _flag(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {s!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gsbq", description="Solitary waves of the generalized sixth-order Boussinesq equation.")
    S = argparse.SUPPRESS
    ap.add_argument("command", nargs="?", choices=COMMANDS, default=None)
    ap.add_argument("--config", help="flat JSON file with defaults for any flag")
    ap.add_argument("--beta", type=float, default=S)
    ap.add_argument("--c", type=float, default=S)
    ap.add_argument("--p", type=float, default=S)
    ap.add_argument("--parity", choices=("odd", "even"), default=S)
    ap.add_argument("--L", type=float, default=S, help="half length of the periodic box")
    ap.add_argument("--n", type=int, default=S, help="number of grid points (power of two)")
    ap.add_argument("--output", default=S, help=f"output directory (default ${OUTPUT_ENV} or .)")
    ap.add_argument("--seed", type=int, default=S)
    ap.add_argument("--workers", type=int, default=S)
    ap.add_argument("--max-iterations", "--max_iterations", dest="max_iterations", type=int, default=S)
    ap.add_argument("--x", default=S, help="comma-separated kernel abscissae")
    ap.add_argument("--segment", choices=("S1", "S2", "ellipse"), default=S)
    ap.add_argument("--k", type=float, default=S, help="ellipse parameter for --segment ellipse")
    ap.add_argument("--samples", type=int, default=S)
    ap.add_argument("--with-d-cc", "--with_d_cc", dest="with_d_cc", type=_flag, default=S)
    ap.add_argument("--resolution", type=int, default=S)
    ap.add_argument("--c-max", "--c_max", dest="c_max", type=float, default=S)
    ap.add_argument("--t-final", "--t_final", dest="t_final", type=float, default=S)
    ap.add_argument("--dt", type=float, default=S)
    ap.add_argument("--record-every", "--record_every", dest="record_every", type=int, default=S)
    ap.add_argument("--dealias", type=_flag, default=S)
    ap.add_argument("--perturbation", choices=("scale", "direction_i", "bandlimited_noise"), default=S)
    ap.add_argument("--delta", type=float, default=S)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def _read_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config: the file must hold one JSON object")
    for key in data:
        if key not in _KEYS:
            raise UsageError(f"unknown config key {key!r}")
    return data


def _coerce(merged: dict) -> dict:
    out = {}
    for f in fields(RunConfig):
        if f.name not in merged:
            continue
        v = merged[f.name]
        default = f.default
        try:
            if v is None:
                out[f.name] = None
            elif isinstance(default, bool):
                out[f.name] = v if isinstance(v, bool) else _flag(str(v))
            elif isinstance(default, int):
                if isinstance(v, float) and not v.is_integer():
                    raise ValueError("not an integer")
                out[f.name] = int(v)
            elif isinstance(default, float) or f.name == "k":
                out[f.name] = float(v)
            else:
                out[f.name] = str(v)
        except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"bad value for {f.name!r}: {v!r}") from exc
    return out


def parse_config(argv: Optional[Sequence[str]] = None, config_file: Optional[str] = None) -> RunConfig:
    """Merge defaults, an optional JSON file and command-line flags, then validate."""
    ns = vars(build_parser().parse_args(list(argv) if argv is not None else None))
    ns.pop("verbose", None)
    if ns.get("command") is None:
        ns.pop("command", None)
    path = ns.pop("config", None) or config_file
    merged = _read_config_file(path) if path else {}
    merged.update(ns)
    cfg = _coerce(merged)

    # parameters are validated before the command so that bad points fail early
    probe = RunConfig(command="validate", **{k: v for k, v in cfg.items() if k != "command"})
    try:
        probe.params
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if probe.n < 16 or probe.n & (probe.n - 1):
        raise UsageError(f"n must be a power of two >= 16, got {probe.n}")
    if not probe.L > 0:
        raise UsageError(f"L must be positive, got {probe.L}")
    if probe.workers < 1:
        raise UsageError("workers must be >= 1")
    if probe.segment == "ellipse" and probe.k is None:
        raise UsageError("k is required for --segment ellipse")

    command = cfg.get("command")
    if command is None:
        raise UsageError(f"command missing: choose one of {', '.join(COMMANDS)}")
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    return RunConfig(**cfg)


# -- output helpers ----------------------------------------------------------------


def _prepare_output(cfg: RunConfig) -> Path:
    out = cfg.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"output: cannot create {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise UsageError(f"output: {out} is not writable")
    return out


def _write_json(path: Path, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _grid(cfg: RunConfig):
    from .grid import make_grid

    return make_grid(cfg.L, cfg.n)


def _point_dict(cfg: RunConfig) -> dict:
    return {"beta": cfg.beta, "c": cfg.c, "p": cfg.p, "parity": cfg.parity, "L": cfg.L, "n": cfg.n}


# -- commands --------------------------------------------------------------------


def _solve(cfg: RunConfig):
    from .petviashvili import SolveOptions, petviashvili_solve

    return petviashvili_solve(cfg.params, _grid(cfg), opts=SolveOptions(max_iterations=cfg.max_iterations))


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    from .petviashvili import write_profile_csv

    wave = _solve(cfg)
    write_profile_csv(wave, out / "profile.csv")
    _write_json(out / "diagnostics.json", {**_point_dict(cfg), **wave.diagnostics.to_dict()})
    d = wave.diagnostics
    print(f"solved in {d.iterations} iterations: residual {d.residual_sup:.3e}, I/K gap {d.ik_gap_rel:.3e}")
    return 0


def cmd_kernel(cfg: RunConfig, out: Path) -> int:
    try:
        xs = [float(s) for s in cfg.x.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad value for 'x': {cfg.x!r}") from exc
    with open(out / "kernel.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "closed_form", "quadrature", "abs_diff"])
        for x in xs:
            a = kernel_eval(x, cfg.beta, cfg.c)
            b = kernel_oracle(x, cfg.beta, cfg.c)
            w.writerow([f"{v:.17g}" for v in (x, a, b, abs(a - b))])
            print(f"x={x:g}: {a:.15g}  (quadrature {b:.15g})")
    return 0


def cmd_functionals(cfg: RunConfig, out: Path) -> int:
    from .functionals import functional_report

    wave = _solve(cfg)
    rep = functional_report(wave.state(), cfg.params)
    _write_json(out / "functionals.json", {**_point_dict(cfg), **rep.to_dict()})
    print(rep.to_json())
    return 0


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    from .dsurface import SweepSpec, sweep_segment, write_points_csv

    segment = ("ellipse", cfg.k) if cfg.segment == "ellipse" else cfg.segment
    spec = SweepSpec(segment, cfg.samples, cfg.p, cfg.parity, cfg.L, cfg.n, cfg.with_d_cc)
    points = sweep_segment(spec, cfg.workers)
    write_points_csv(points, out / "sweep.csv")
    failed = sum(not pt.ok for pt in points)
    print(f"{len(points)} points, {failed} failed")
    return 1 if failed == len(points) else 0


def cmd_atlas(cfg: RunConfig, out: Path) -> int:
    from .dsurface import Classification, nodal_atlas, write_crossings_csv, write_points_csv

    atlas = nodal_atlas(cfg.p, cfg.parity, cfg.resolution, cfg.L, cfg.n, cfg.workers, cfg.c_max)
    write_points_csv(atlas.samples, out / "atlas_points.csv")
    write_crossings_csv(atlas.crossings, out / "atlas_crossings.csv")
    counts = ", ".join(f"{cls.value} {atlas.count(cls)}" for cls in Classification)
    print(f"{len(atlas.samples)} samples: {counts}; {len(atlas.crossings)} crossings")
    return 0


def cmd_classify(cfg: RunConfig, out: Path) -> int:
    from .dsurface import analyze_point

    pt = analyze_point(cfg.beta, cfg.c, cfg.p, cfg.parity, _grid(cfg))
    data = {
        **_point_dict(cfg),
        "d": pt.d,
        "d_c": pt.d_c,
        "d_beta": pt.d_beta,
        "d_cc": pt.d_cc,
        "classification": pt.classification.value,
        "provenance": pt.provenance.value,
    }
    _write_json(out / "classify.json", data)
    print(pt.classification.value)
    return 0


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    from .evolution import EvolveSpec, evolve, make_perturbation

    wave = _solve(cfg)
    init = make_perturbation(wave, cfg.perturbation, cfg.delta, cfg.seed)
    spec = EvolveSpec(cfg.t_final, cfg.dt, cfg.record_every, cfg.dealias, raise_on_blowup=False)
    traj = evolve(init, cfg.params, spec, wave)
    traj.write_csv(out / "trajectory.csv")
    _write_json(
        out / "evolve.json",
        {
            **_point_dict(cfg),
            "perturbation": cfg.perturbation,
            "delta": cfg.delta,
            "seed": cfg.seed,
            "t_reached": float(traj.times[-1]),
            "blowup": traj.blowup_flag,
            "max_orbital_distance": float(np.max(traj.orbital_distance)),
        },
    )
    print(f"t={traj.times[-1]:g} blowup={traj.blowup_flag} max orbital distance {np.max(traj.orbital_distance):.3e}")
    return 0


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.tolerance


def identity_battery(wave) -> List[Check]:
    """Solver-independent checks on one computed ground state."""
    from .functionals import functional_report, h_quadratic_form, instability_direction_forms

    prm = wave.params
    st = wave.state()
    rep = functional_report(st, prm)
    dg = wave.diagnostics
    forms = instability_direction_forms(wave)
    h = h_quadratic_form(st, st, wave)
    d = rep.d_value
    checks = [
        Check("I = K", dg.ik_gap_rel, 1e-6),
        Check("Pohozaev", dg.pohozaev_rel, 1e-6),
        Check("Nehari P = 0", abs(rep.nehari_P) / rep.I, 1e-6),
        Check("action L = d", abs(rep.action_L - d) / d, 1e-6),
        Check("<H phi, phi> = -2(p+1) d", abs(h + 2.0 * (prm.p + 1.0) * d) / d, 1e-4),
        Check("direction (i) closed form", abs(forms.dir_i_value - forms.dir_i_closed) / abs(forms.dir_i_closed), 1e-4),
        Check("direction (ii) closed form", abs(forms.dir_ii_value - forms.dir_ii_closed) / abs(forms.dir_ii_closed), 1e-4),
    ]
    for x in (0.0, 1.0, 5.0):
        diff = abs(kernel_eval(x, prm.beta, prm.c) - kernel_oracle(x, prm.beta, prm.c))
        checks.append(Check(f"kernel closed form at x={x:g}", diff, 1e-8))
    return checks


def cmd_validate(cfg: RunConfig, out: Path) -> int:
    checks = identity_battery(_solve(cfg))
    width = max(len(ch.name) for ch in checks)
    with open(out / "validate.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "value", "tolerance", "passed"])
        for ch in checks:
            w.writerow([ch.name, f"{ch.value:.17g}", f"{ch.tolerance:.17g}", ch.passed])
            print(f"{'PASS' if ch.passed else 'FAIL'}  {ch.name:<{width}}  {ch.value:.3e}  (tol {ch.tolerance:g})")
    return 0 if all(ch.passed for ch in checks) else 1


HANDLERS = {
    "solve": cmd_solve,
    "kernel": cmd_kernel,
    "functionals": cmd_functionals,
    "sweep": cmd_sweep,
    "atlas": cmd_atlas,
    "classify": cmd_classify,
    "evolve": cmd_evolve,
    "validate": cmd_validate,
}


def run(cfg: RunConfig) -> int:
    """Dispatch one command; 0 on success, 1 on a computation error, 2 on a usage error."""
    try:
        out = _prepare_output(cfg)
        return HANDLERS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (GSBQError, ValueError, FloatingPointError) as exc:
        print(f"error at beta={cfg.beta:g}, c={cfg.c:g}, p={cfg.p:g} ({cfg.parity}): {exc}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    verbose = sum(a in ("-v", "--verbose") for a in args)
    logging.basicConfig(level=logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING)
    try:
        cfg = parse_config(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
