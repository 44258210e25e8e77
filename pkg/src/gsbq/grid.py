"""Uniform periodic grid on [-L, L) and the Fourier machinery built on it.

Real fields are transformed with ``numpy.fft.rfft``; every quadrature in the
package goes through :func:`spectral_inner` so that integral identities hold
up to round-off rather than up to a quadrature mismatch.

    dx * sum(u_j * w_j) == (dx / n) * sum_k mult_k * Re(u_hat_k * conj(w_hat_k))

where ``mult_k`` is 1 for the zero and Nyquist modes and 2 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np

from .errors import NonPositiveLength, NotPowerOfTwo

__all__ = [
    "Grid",
    "RealField",
    "StatePair",
    "Norms",
    "make_grid",
    "spectral_derivative",
    "dispersion_symbol",
    "symbol_values",
    "spectral_inner",
    "discrete_norms",
    "dealias_mask",
]


@dataclass(frozen=True, eq=False)
class Grid:
    half_length: float
    n_points: int

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.half_length == other.half_length and self.n_points == other.n_points

    def __hash__(self) -> int:
        return hash((self.half_length, self.n_points))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.n_points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full-spectrum wavenumbers in standard FFT order."""
        return (np.pi / self.half_length) * np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Non-negative wavenumbers matching the ``rfft`` half spectrum."""
        return (np.pi / self.half_length) * np.arange(self.n_points // 2 + 1)

    @cached_property
    def multiplicity(self) -> np.ndarray:
        m = np.full(self.n_points // 2 + 1, 2.0)
        m[0] = 1.0
        m[-1] = 1.0
        return m

    def forward(self, samples: np.ndarray) -> np.ndarray:
        return np.fft.rfft(samples)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.irfft(coeffs, n=self.n_points)

    def integrate(self, samples: np.ndarray) -> float:
        return float(self.dx * np.sum(samples))


def make_grid(half_length: float, n_points: int) -> Grid:
    if not half_length > 0:
        raise NonPositiveLength(f"half_length must be positive, got {half_length}")
    n = int(n_points)
    if n != n_points or n < 16 or n & (n - 1):
        raise NotPowerOfTwo(f"n_points must be a power of two >= 16, got {n_points}")
    return Grid(float(half_length), n)


@dataclass(frozen=True)
class RealField:
    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "RealField":
        return cls(grid, func(grid.nodes))

    def hat(self) -> np.ndarray:
        return self.grid.forward(self.samples)

    def __add__(self, other: "RealField") -> "RealField":
        return RealField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "RealField") -> "RealField":
        return RealField(self.grid, self.samples - other.samples)

    def __mul__(self, scalar: float) -> "RealField":
        return RealField(self.grid, scalar * self.samples)

    __rmul__ = __mul__

    def __neg__(self) -> "RealField":
        return RealField(self.grid, -self.samples)


@dataclass(frozen=True)
class StatePair:
    u: RealField
    v: RealField

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("u and v must live on the same grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def __add__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.u - other.u, self.v - other.v)

    def __mul__(self, scalar: float) -> "StatePair":
        return StatePair(scalar * self.u, scalar * self.v)

    __rmul__ = __mul__


def _derivative_factor(grid: Grid, order: int) -> np.ndarray:
    factor = (1j * grid.rwavenumbers) ** order
    if order % 2:
        factor[-1] = 0.0
    return factor


def spectral_derivative(f: RealField, order: int) -> RealField:
    """Return d^order f / dx^order; the Nyquist mode is dropped for odd orders."""
    if not 1 <= order <= 6:
        raise ValueError(f"order must be in 1..6, got {order}")
    g = f.grid
    return RealField(g, g.inverse(_derivative_factor(g, order) * f.hat()))


def derivative_samples(grid: Grid, samples: np.ndarray, order: int) -> np.ndarray:
    return grid.inverse(_derivative_factor(grid, order) * grid.forward(samples))


def symbol_values(xi, beta: float, c: float):
    """xi^4 - beta xi^2 + (1 - c^2), elementwise."""
    xi2 = np.square(xi)
    return xi2 * xi2 - beta * xi2 + (1.0 - c * c)


def dispersion_symbol(grid: Grid, beta: float, c: float) -> np.ndarray:
    return symbol_values(grid.wavenumbers, beta, c)


def dealias_mask(grid: Grid) -> np.ndarray:
    """2/3-rule mask on the rfft half spectrum."""
    k = np.arange(grid.n_points // 2 + 1)
    return (k < grid.n_points / 3.0).astype(float)


def spectral_inner(grid: Grid, a_hat: np.ndarray, b_hat: np.ndarray, weight=1.0) -> float:
    """Grid-measure integral of a * (W b) where W multiplies mode k by weight_k."""
    s = np.sum(grid.multiplicity * weight * (a_hat * np.conj(b_hat)).real)
    return float(grid.dx / grid.n_points * s)


class Norms(NamedTuple):
    l2: float
    h2: float
    sup: float
    x_norm: float | None = None


def _field_norms(f: RealField) -> Norms:
    g = f.grid
    l2 = float(np.sqrt(g.dx * np.sum(f.samples**2)))
    uh = f.hat()
    h2sq = spectral_inner(g, uh, uh, (1.0 + g.rwavenumbers**2) ** 2)
    sup = float(np.max(np.abs(f.samples)))
    return Norms(l2, float(np.sqrt(max(h2sq, 0.0))), sup)


def discrete_norms(obj: Union[RealField, StatePair]) -> Norms:
    """l2, h2 and sup norms; a StatePair reports u's norms plus x_norm = h2(u) + l2(v)."""
    if isinstance(obj, StatePair):
        nu = _field_norms(obj.u)
        nv = _field_norms(obj.v)
        return nu._replace(x_norm=nu.h2 + nv.l2)
    return _field_norms(obj)


def x_norm(state: StatePair) -> float:
    return discrete_norms(state).x_norm
