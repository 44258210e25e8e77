"""The d(beta, c) surface, its derivatives and the stability atlas.

d is evaluated on a computed ground state as d = (p-1)/(2(p+1)) K(phi), with

    d_c = -c int phi^2,        d_beta = -1/2 int phi_x^2.

Along each semi-ellipse beta = k sqrt(1 - c^2) the surface obeys the exact
scaling law d(r beta, sqrt(1 - r^2 (1 - c^2))) = r^q d(beta, c) with
q = (3p + 5) / (2(p - 1)), so a few direct solves on the segments S1 (c = 0)
and S2 (beta = -1) determine d and d_cc everywhere.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, GSBQError, ScaleOutOfRange, StepTooLarge
from .functionals import d_from_K, dirichlet_l2, functional_K
from .grid import Grid, make_grid
from .model import WaveParams, beta_star, c_star, check_domain, in_domain
from .petviashvili import SolveOptions, SolitaryWave, petviashvili_solve

log = logging.getLogger(__name__)

NEAR_BOUNDARY_FRACTION = 0.9
INDETERMINATE_BAND = 1e-4


class Classification(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    NO_SOLITARY_WAVE = "NoSolitaryWave"
    INDETERMINATE = "Indeterminate"


class Provenance(str, Enum):
    DIRECT_SOLVE = "DirectSolve"
    SCALING_TRANSPORT = "ScalingTransport"


@dataclass(frozen=True)
class DPoint:
    beta: float
    c: float
    d: float
    d_c: float
    d_beta: float
    d_cc: Optional[float] = None
    classification: Classification = Classification.INDETERMINATE
    provenance: Provenance = Provenance.DIRECT_SOLVE
    mass: float = math.nan  # int phi^2, so that d_c = -c * mass also at c = 0
    d_bb: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def row(self) -> list:
        def fmt(v):
            return "" if v is None else f"{v + 0.0:.17g}"

        return [
            fmt(self.beta), fmt(self.c), fmt(self.d), fmt(self.d_c), fmt(self.d_beta), fmt(self.d_cc),
            self.classification.value, self.provenance.value,
        ]


CSV_HEADER = ["beta", "c", "d", "d_c", "d_beta", "d_cc", "classification", "provenance"]


def scaling_exponent(p: float) -> float:
    """q = (3p + 5) / (2(p - 1))."""
    return (3.0 * p + 5.0) / (2.0 * (p - 1.0))


def default_grid() -> Grid:
    return make_grid(200.0, 4096)


def _failed(beta: float, c: float, exc: Exception) -> DPoint:
    nan = math.nan
    return DPoint(beta, c, nan, nan, nan, error=f"{type(exc).__name__}: {exc}")


# -- direct evaluation -------------------------------------------------------


def solve_wave(beta, c, p, parity="odd", grid=None, opts=None) -> SolitaryWave:
    return petviashvili_solve(WaveParams(beta, c, p, parity), grid or default_grid(), None, opts)


def _point_from_wave(wave: SolitaryWave) -> DPoint:
    prm = wave.params
    K = functional_K(wave.profile, prm.p, prm.parity)
    mass = dirichlet_l2(wave.profile, 0)
    d = d_from_K(K, prm.p)
    return DPoint(
        beta=prm.beta,
        c=prm.c,
        d=d,
        d_c=-prm.c * mass,
        d_beta=-0.5 * dirichlet_l2(wave.profile, 1),
        mass=mass,
        classification=classify_point(prm.beta, prm.c, prm.p, prm.parity, None, d),
    )


def d_point(beta, c, p=2.0, parity="odd", grid=None, opts=None) -> DPoint:
    check_domain(beta, c)
    return _point_from_wave(solve_wave(beta, c, p, parity, grid, opts))


def default_c_step(beta: float, c: float) -> float:
    return min(1e-2, 0.05 * (c_star(beta) - abs(c)))


def default_beta_step(beta: float, c: float) -> float:
    return min(1e-2, 0.05 * (beta_star(c) - beta))


def d_cc(beta, c, p=2.0, parity="odd", step=None, grid=None, opts=None) -> float:
    """Central difference of the exact per-wave d_c across c +- step."""
    check_domain(beta, c)
    h = default_c_step(beta, c) if step is None else step
    if not h > 0:
        raise StepTooLarge(f"step must be positive, got {h}")
    if abs(c) + h >= c_star(beta):
        raise StepTooLarge(f"c + h = {abs(c) + h:.6g} reaches c_star = {c_star(beta):.6g}")
    hi = d_point(beta, c + h, p, parity, grid, opts)
    lo = d_point(beta, c - h, p, parity, grid, opts)
    return (hi.d_c - lo.d_c) / (2.0 * h)


def d_bb(beta, c, p=2.0, parity="odd", step=None, grid=None, opts=None) -> float:
    """Central difference of the exact per-wave d_beta across beta +- step."""
    check_domain(beta, c)
    h = default_beta_step(beta, c) if step is None else step
    if not h > 0 or beta + h >= beta_star(c):
        raise StepTooLarge(f"beta step {h} leaves the domain at beta={beta}, c={c}")
    hi = d_point(beta + h, c, p, parity, grid, opts)
    lo = d_point(beta - h, c, p, parity, grid, opts)
    return (hi.d_beta - lo.d_beta) / (2.0 * h)


# -- scaling transport --------------------------------------------------------


def axis_d_cc(beta0: float, c: float, p: float, d0: float, db0: float, dbb0: float) -> float:
    """d_cc at the point of the ellipse through (beta0, 0) with speed c."""
    g = scaling_exponent(p) / 2.0
    s2 = 1.0 - c * c
    a = 2.0 * g * (2.0 * g - 1.0) * d0 - 2.0 * (2.0 * g - 1.0) * beta0 * db0 + beta0**2 * dbb0
    b = beta0 * db0 - 2.0 * g * d0
    return s2 ** (g - 2.0) * (c * c * a + b)


def ellipse_d_cc(r: float, c: float, c0: float, p: float, dc0: float, dcc0: float) -> float:
    """d_cc at (r beta0, c) from d_c, d_cc at the source (beta0, c0), c0 != 0."""
    q = scaling_exponent(p)
    return (
        r ** (q - 4.0)
        / (c0**3 * (1.0 - c0 * c0))
        * ((1.0 - c0 * c0) * c0 * c * c * dcc0 + (c0 * c0 - c * c) * dc0)
    )


def scaling_transport(point: DPoint, r: float, p: float, parity: str = "odd") -> DPoint:
    c = point.c
    if not (r > 0 and r * r * (1.0 - c * c) <= 1.0 + 1e-12):
        raise ScaleOutOfRange(f"need 0 < r <= (1 - c^2)^(-1/2) = {(1 - c * c) ** -0.5:.6g}, got {r}")
    q = scaling_exponent(p)
    beta_t = r * point.beta
    c_t = math.sqrt(max(1.0 - r * r * (1.0 - c * c), 0.0))
    mass = point.mass if math.isfinite(point.mass) else -point.d_c / c
    mass_t = r ** (q - 2.0) * mass
    dcc_t = None
    if c != 0.0 and point.d_cc is not None:
        dcc_t = ellipse_d_cc(r, c_t, c, p, point.d_c, point.d_cc)
    elif c == 0.0 and point.d_bb is not None:
        dcc_t = axis_d_cc(point.beta, c_t, p, point.d, point.d_beta, point.d_bb)
    d_t = r**q * point.d
    return DPoint(
        beta=beta_t,
        c=c_t,
        d=d_t,
        d_c=-c_t * mass_t,
        d_beta=r ** (q - 1.0) * point.d_beta,
        d_cc=dcc_t,
        classification=classify_point(beta_t, c_t, p, parity, dcc_t, d_t),
        provenance=Provenance.SCALING_TRANSPORT,
        mass=mass_t,
    )


# -- sign changes along semi-ellipses ------------------------------------------


@dataclass(frozen=True)
class AxisData:
    """d, d_beta and d_beta_beta at a point (beta0, 0) of S1."""

    beta0: float
    d: float
    d_beta: float
    d_bb: float


def sign_change_P(beta0: float, p: float, data: AxisData) -> float:
    g = scaling_exponent(p) / 2.0
    num = -beta0 * data.d_beta + 2.0 * g * data.d
    den = 2.0 * g * (2.0 * g - 1.0) * data.d - 2.0 * (2.0 * g - 1.0) * beta0 * data.d_beta + beta0**2 * data.d_bb
    return num / den


def sign_change_location(beta0: float, p: float, data: AxisData) -> Optional[float]:
    """Speed c at which d_cc changes sign on the ellipse through (beta0, 0), if it does."""
    P = sign_change_P(beta0, p, data)
    return math.sqrt(P) if 0.0 < P < 1.0 else None


def sign_change_P_alt(c0: float, d_c0: float, d_cc0: float) -> float:
    """Same quantity from d_c, d_cc at any point (beta0, c0) with c0 != 0."""
    return c0 * c0 * d_c0 / ((c0 * c0 - 1.0) * c0 * d_cc0 + d_c0)


def sign_change_location_alt(c0: float, d_c0: float, d_cc0: float) -> Optional[float]:
    P = sign_change_P_alt(c0, d_c0, d_cc0)
    return math.sqrt(P) if 0.0 < P < 1.0 else None


def axis_data(beta0, p=2.0, parity="odd", grid=None, opts=None, step=None) -> Tuple[DPoint, AxisData]:
    centre = d_point(beta0, 0.0, p, parity, grid, opts)
    dbb = d_bb(beta0, 0.0, p, parity, step, grid, opts)
    return replace(centre, d_bb=dbb), AxisData(beta0, centre.d, centre.d_beta, dbb)


# -- classification -----------------------------------------------------------


def instability_criterion_i(c: float, p: float, beta: float) -> bool:
    return c * c < (p - 1.0) / (p + 3.0) * c_star(beta) ** 2


def instability_criterion_ii(c: float, p: float, beta: float) -> bool:
    return p >= 9 and c * c < 1.0 and beta < (p - 1.0) * (p - 9.0) / ((p - 1.0) ** 2 + 16.0) * beta_star(c)


def no_solitary_wave(beta: float, c: float, p: float, parity: str) -> bool:
    if c * c < 1.0:
        return False
    if beta < 2.0 * math.sqrt((3.0 * p + 5.0) * (p - 1.0) * (c * c - 1.0)) / (p + 3.0):
        return True
    # F >= 0 everywhere only for the odd family
    return parity == "odd" and beta >= 0.0


def indeterminate_tol(beta: float, c: float, d: Optional[float]) -> float:
    if d is None or not math.isfinite(d):
        return 0.0
    gap = c_star(beta) - abs(c)
    return INDETERMINATE_BAND * d / gap**2 if gap > 0 else math.inf


def classify_point(beta, c, p, parity="odd", d_cc_value=None, d_value=None) -> Classification:
    if no_solitary_wave(beta, c, p, parity):
        return Classification.NO_SOLITARY_WAVE
    if not in_domain(beta, c):
        return Classification.INDETERMINATE
    if instability_criterion_i(c, p, beta) or instability_criterion_ii(c, p, beta):
        return Classification.UNSTABLE
    if d_cc_value is None or not math.isfinite(d_cc_value):
        return Classification.INDETERMINATE
    tol = indeterminate_tol(beta, c, d_value)
    if d_cc_value < -tol:
        return Classification.UNSTABLE
    if d_cc_value > tol:
        return Classification.STABLE
    return Classification.INDETERMINATE


# -- anchors and full point analysis -------------------------------------------


def ellipse_anchor(beta: float, c: float) -> Tuple[float, float]:
    """Where the ellipse through (beta, c) meets S1 (k >= -1) or S2 (k < -1)."""
    k = beta / math.sqrt(1.0 - c * c)
    if k >= -1.0:
        return k, 0.0
    return -1.0, math.sqrt(1.0 - 1.0 / (k * k))


def analyze_point(beta, c, p=2.0, parity="odd", grid=None, opts=None) -> DPoint:
    """d, first derivatives, d_cc and a classification at one parameter point.

    Points with c > 0.9 c_star are reached by exact scaling transport from
    the anchor of their semi-ellipse, where the profile is narrower.
    """
    if no_solitary_wave(beta, c, p, parity):
        nan = math.nan
        return DPoint(beta, c, nan, nan, nan, classification=Classification.NO_SOLITARY_WAVE)
    check_domain(beta, c)
    c = abs(c)
    if c > NEAR_BOUNDARY_FRACTION * c_star(beta):
        b0, c0 = ellipse_anchor(beta, c)
        if (b0, c0) != (beta, c):
            anchor = analyze_point(b0, c0, p, parity, grid, opts)
            if c0 == 0.0:
                r = math.sqrt(1.0 - c * c)
            else:
                r = math.sqrt((1.0 - c * c) / (1.0 - c0 * c0))
            return scaling_transport(anchor, r, p, parity)
    pt = d_point(beta, c, p, parity, grid, opts)
    if c == 0.0:
        pt = replace(pt, d_bb=d_bb(beta, c, p, parity, None, grid, opts))
    dcc = d_cc(beta, c, p, parity, None, grid, opts)
    return replace(pt, d_cc=dcc, classification=classify_point(beta, c, p, parity, dcc, pt.d))


# -- sweeps --------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    segment: Union[str, Tuple[str, float]] = "S1"
    samples: int = 31
    p: float = 2.0
    parity: str = "odd"
    half_length: float = 200.0
    n_points: int = 4096
    with_d_cc: bool = True

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if isinstance(self.segment, str):
            if self.segment not in ("S1", "S2"):
                raise ValueError(f"unknown segment {self.segment!r}")
        else:
            kind, k = self.segment
            if kind != "ellipse" or not k < 2.0:
                raise ValueError(f"custom segments are ('ellipse', k) with k < 2, got {self.segment!r}")

    def points(self) -> List[Tuple[float, float]]:
        n = self.samples
        if self.segment == "S1":
            return [(-1.0 + 3.0 * i / n, 0.0) for i in range(n)]
        if self.segment == "S2":
            return [(-1.0, i / n) for i in range(n)]
        k = self.segment[1]
        return [(k * math.sqrt(1.0 - (i / n) ** 2), i / n) for i in range(n)]


def _sweep_one(args) -> DPoint:
    beta, c, spec = args
    grid = make_grid(spec.half_length, spec.n_points)
    try:
        pt = d_point(beta, c, spec.p, spec.parity, grid)
        if spec.with_d_cc:
            dcc = d_cc(beta, c, spec.p, spec.parity, None, grid)
            pt = replace(pt, d_cc=dcc, classification=classify_point(beta, c, spec.p, spec.parity, dcc, pt.d))
        return pt
    except GSBQError as exc:
        log.warning("sweep point (%g, %g) failed: %s", beta, c, exc)
        return _failed(beta, c, exc)


def _map(fn, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def sweep_segment(spec: SweepSpec, workers: int = 1) -> List[DPoint]:
    return _map(_sweep_one, [(b, c, spec) for b, c in spec.points()], workers)


def write_points_csv(points: Iterable[DPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for pt in points:
            w.writerow(pt.row())


def write_crossings_csv(crossings: Iterable[Tuple[float, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beta", "c"])
        for b, c in crossings:
            w.writerow([f"{b:.17g}", f"{c:.17g}"])


# -- nodal atlas ----------------------------------------------------------------


@dataclass
class Atlas:
    p: float
    parity: str
    samples: List[DPoint] = field(default_factory=list)
    crossings: List[Tuple[float, float]] = field(default_factory=list)
    anchors: List[DPoint] = field(default_factory=list)

    def signed(self) -> List[Tuple[float, float, int]]:
        out = []
        for pt in self.samples:
            if pt.d_cc is not None and math.isfinite(pt.d_cc):
                out.append((pt.beta, pt.c, int(np.sign(pt.d_cc))))
        return out

    def count(self, cls: Classification) -> int:
        return sum(pt.classification is cls for pt in self.samples)


def _s1_anchor(args) -> DPoint:
    beta0, p, parity, L, n = args
    grid = make_grid(L, n)
    try:
        pt, _ = axis_data(beta0, p, parity, grid)
        return pt
    except GSBQError as exc:
        log.warning("S1 anchor beta=%g failed: %s", beta0, exc)
        return _failed(beta0, 0.0, exc)


def _s2_anchor(args) -> DPoint:
    c0, p, parity, L, n = args
    grid = make_grid(L, n)
    try:
        pt = d_point(-1.0, c0, p, parity, grid)
        return replace(pt, d_cc=d_cc(-1.0, c0, p, parity, None, grid))
    except GSBQError as exc:
        log.warning("S2 anchor c=%g failed: %s", c0, exc)
        return _failed(-1.0, c0, exc)


def atlas_speeds(resolution: int, c_max: float = 0.99) -> np.ndarray:
    return np.linspace(0.0, c_max, resolution)


def nodal_atlas(
    p: float,
    parity: str = "odd",
    resolution: int = 24,
    half_length: float = 200.0,
    n_points: int = 4096,
    workers: int = 1,
    c_max: float = 0.99,
) -> Atlas:
    """Sign of d_cc over the upper half domain, organized along semi-ellipses.

    S1 anchors at beta0 = -1 + 3 i / resolution and S2 anchors at
    c0 = j / resolution are solved directly; every other sample is
    transported. Sign-change points come from the closed-form P formulas.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8 points per segment")
    s1 = _map(_s1_anchor, [(-1.0 + 3.0 * i / resolution, p, parity, half_length, n_points) for i in range(resolution)], workers)
    s2 = _map(_s2_anchor, [(j / resolution, p, parity, half_length, n_points) for j in range(1, resolution)], workers)
    atlas = Atlas(p, parity, anchors=list(s1) + list(s2))
    speeds = atlas_speeds(resolution, c_max)

    for a in s1:
        if not a.ok:
            atlas.samples.append(a)
            continue
        data = AxisData(a.beta, a.d, a.d_beta, a.d_bb)
        for c in speeds:
            if c == 0.0:
                dcc = axis_d_cc(a.beta, 0.0, p, a.d, a.d_beta, a.d_bb)
                atlas.samples.append(
                    replace(a, d_cc=dcc, classification=classify_point(a.beta, 0.0, p, parity, dcc, a.d))
                )
            else:
                atlas.samples.append(scaling_transport(a, math.sqrt(1.0 - c * c), p, parity))
        cc = sign_change_location(a.beta, p, data)
        if cc is not None:
            atlas.crossings.append((a.beta * math.sqrt(1.0 - cc * cc), cc))

    for a in s2:
        if not a.ok:
            atlas.samples.append(a)
            continue
        s0 = math.sqrt(1.0 - a.c * a.c)
        for c in speeds:
            r = math.sqrt(1.0 - c * c) / s0
            atlas.samples.append(a if c == a.c else scaling_transport(a, r, p, parity))
        cc = sign_change_location_alt(a.c, a.d_c, a.d_cc)
        if cc is not None:
            atlas.crossings.append((-math.sqrt(1.0 - cc * cc) / s0, cc))
    return atlas
