"""Ground-state profiles by Petviashvili's stabilized fixed-point iteration.

Each step maps

    phi_hat <- M^(p/(p-1)) * f(phi)_hat / (xi^4 - beta xi^2 + 1 - c^2)

with the stabilizing factor M = <symbol phi_hat, phi_hat> / <f(phi)_hat, phi_hat>,
which tends to 1 at the fixed point.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateIterate, NonConvergence, TailTruncation
from .functionals import functional_I, functional_K, pohozaev_residual
from .grid import Grid, RealField, StatePair, dealias_mask, derivative_samples, spectral_inner, symbol_values
from .model import WaveParams, check_domain, nonlinearity_eval

log = logging.getLogger(__name__)

__all__ = [
    "SolveOptions",
    "SolveDiagnostics",
    "SolitaryWave",
    "gaussian_init",
    "petviashvili_solve",
    "exact_beta",
    "exact_profile",
    "solitary_residual",
    "write_profile_csv",
    "read_profile_csv",
]


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 1000
    increment_tol: float = 1e-12
    m_tol: float = 1e-10
    residual_tol: float = 1e-6
    tail_tol: float = 1e-8
    # 2/3 truncation of f(phi) moves the fixed point off the true equation
    # whenever f(phi) has a kink at a sign change, so it is opt-in.
    dealias: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("increment_tol", "m_tol", "residual_tol", "tail_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    final_increment: float
    m_deviation: float
    residual_sup: float
    ik_gap_rel: float
    pohozaev_rel: float
    boundary_tail: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SolitaryWave:
    params: WaveParams
    profile: RealField
    diagnostics: SolveDiagnostics

    @property
    def grid(self) -> Grid:
        return self.profile.grid

    @property
    def phi(self) -> np.ndarray:
        return self.profile.samples

    def state(self) -> StatePair:
        """The traveling-wave pair (phi, -c phi)."""
        return StatePair(self.profile, -self.params.c * self.profile)


def gaussian_init(grid: Grid, amplitude: float = 1.0, width: float = 5.0, shift: float = 0.0) -> RealField:
    return RealField(grid, amplitude * np.exp(-((grid.nodes - shift) ** 2) / width**2))


def _residual_samples(params: WaveParams, grid: Grid, phi: np.ndarray) -> np.ndarray:
    c = params.c
    return (
        (1.0 - c * c) * phi
        + params.beta * derivative_samples(grid, phi, 2)
        + derivative_samples(grid, phi, 4)
        - params.f(phi)
    )


def solitary_residual(wave: SolitaryWave) -> float:
    """sup |(1 - c^2) phi + beta phi'' + phi'''' - f(phi)|."""
    return float(np.max(np.abs(_residual_samples(wave.params, wave.grid, wave.phi))))


def _boundary_tail(phi: np.ndarray) -> float:
    peak = np.max(np.abs(phi))
    if peak == 0.0:
        return 0.0
    edge = np.abs(np.concatenate([phi[:2], phi[-2:]]))
    return float(np.max(edge) / peak)


def evaluate_diagnostics(
    params: WaveParams,
    profile: RealField,
    iterations: int = 0,
    final_increment: float = 0.0,
    m_deviation: float = 0.0,
) -> SolveDiagnostics:
    phi = profile.samples
    K = functional_K(profile, params.p, params.parity)
    I = functional_I(profile, params.beta, params.c)
    stub = SolitaryWave(params, profile, None)
    return SolveDiagnostics(
        iterations=iterations,
        final_increment=final_increment,
        m_deviation=m_deviation,
        residual_sup=solitary_residual(stub),
        ik_gap_rel=abs(I - K) / abs(K) if K != 0 else abs(I - K),
        pohozaev_rel=pohozaev_residual(stub),
        boundary_tail=_boundary_tail(phi),
    )


def iterate(
    beta: float,
    c: float,
    p: float,
    parity: str,
    grid: Grid,
    init: np.ndarray,
    opts: SolveOptions,
):
    """Run the bare iteration without any domain check.

    Returns ``(phi, iterations, final_increment, m_deviation)``. Raises
    :class:`DegenerateIterate` if K or M stops being positive and
    :class:`NonConvergence` if the budget runs out.
    """
    sym = symbol_values(grid.rwavenumbers, beta, c)
    mask = dealias_mask(grid) if opts.dealias else 1.0
    gamma = p / (p - 1.0)
    phi = np.asarray(init, dtype=float)
    inc = math.inf
    m_dev = math.inf
    for k in range(1, opts.max_iterations + 1):
        ph = grid.forward(phi)
        fh = grid.forward(nonlinearity_eval(phi, p, parity, "f")) * mask
        num = spectral_inner(grid, ph, ph, sym)
        den = spectral_inner(grid, fh, ph)
        if not (den > 0 and num > 0) or not math.isfinite(num / den):
            raise DegenerateIterate(f"iteration {k}: K(phi)={den:.3g}, <L phi, phi>={num:.3g}")
        M = num / den
        new = grid.inverse(M**gamma * fh / sym)
        peak = np.max(np.abs(new))
        if not np.isfinite(peak) or peak == 0.0:
            raise DegenerateIterate(f"iteration {k}: iterate collapsed or overflowed")
        inc = float(np.max(np.abs(new - phi)) / peak)
        m_dev = abs(M - 1.0)
        phi = new
        if inc < opts.increment_tol and m_dev < opts.m_tol:
            return phi, k, inc, m_dev
    raise NonConvergence(
        f"no convergence after {opts.max_iterations} iterations (increment {inc:.3g}, |M-1| {m_dev:.3g})"
    )


def petviashvili_solve(
    params: WaveParams,
    grid: Grid,
    init: Optional[RealField] = None,
    opts: Optional[SolveOptions] = None,
) -> SolitaryWave:
    check_domain(params.beta, params.c)
    opts = opts or SolveOptions()
    if init is None:
        init = gaussian_init(grid)
    if functional_K(init, params.p, params.parity) <= 0:
        raise DegenerateIterate("initial guess must have K(init) > 0")
    phi, its, inc, m_dev = iterate(params.beta, params.c, params.p, params.parity, grid, init.samples, opts)
    profile = RealField(grid, phi)
    diag = evaluate_diagnostics(params, profile, its, inc, m_dev)
    log.debug("solve %s: %s", params, diag)
    if diag.boundary_tail > opts.tail_tol:
        raise TailTruncation(
            f"profile at the box edge is {diag.boundary_tail:.3g} of its peak for {params}; enlarge half_length"
        )
    scale = float(np.max(np.abs(phi)))
    if diag.residual_sup > opts.residual_tol * scale:
        raise NonConvergence(
            f"iteration settled but residual {diag.residual_sup:.3g} exceeds {opts.residual_tol:g} * sup|phi|"
        )
    return SolitaryWave(params, profile, diag)


def exact_beta(p: float, c: float) -> float:
    """The beta at which an explicit sech-power ground state exists."""
    return -((p + 1.0) / 2.0 + 2.0 / (p + 1.0)) * math.sqrt(1.0 - c * c)


def exact_samples(p: float, c: float, x: np.ndarray) -> np.ndarray:
    s = math.sqrt(1.0 - c * c)
    amp0 = ((p + 3.0) * (3.0 * p + 1.0) / (8.0 * (p + 1.0))) ** (1.0 / (p - 1.0))
    kappa0 = (p - 1.0) / (4.0 * (p + 1.0)) * math.sqrt(2.0 * (p + 1.0))
    # the c = 0 profile rescaled by u -> s^(2/(p-1)) u(sqrt(s) x)
    amp = s ** (2.0 / (p - 1.0)) * amp0
    kappa = math.sqrt(s) * kappa0
    return amp / np.cosh(kappa * x) ** (4.0 / (p - 1.0))


def exact_profile(p: int, c: float, grid: Grid, parity: str = "odd", tail_tol: float = 1e-12) -> SolitaryWave:
    if int(p) != p or p < 2:
        raise ValueError(f"exact profiles need an integer p >= 2, got {p}")
    params = WaveParams(exact_beta(p, c), c, float(p), parity)
    phi = exact_samples(p, c, grid.nodes)
    profile = RealField(grid, phi)
    tail = _boundary_tail(phi)
    if tail > tail_tol:
        raise TailTruncation(f"exact profile tail {tail:.3g} exceeds {tail_tol:g} of peak")
    return SolitaryWave(params, profile, evaluate_diagnostics(params, profile))


def write_profile_csv(wave: SolitaryWave, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "phi"])
        for x, y in zip(wave.grid.nodes, wave.phi):
            w.writerow([f"{x:.17g}", f"{y:.17g}"])


def read_profile_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]
