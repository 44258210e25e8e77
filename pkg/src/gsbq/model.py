"""Parameter domain, nonlinearity family and the fundamental kernel.

The profile equation is

    (1 - c^2) phi + beta phi'' + phi'''' = f(phi)

with f homogeneous of degree p: ``odd`` parity is f(u) = |u|^(p-1) u and
``even`` parity is f(u) = |u|^p. Solutions exist on the subsonic region
c^2 < 1, beta < beta_star(c) = 2 sqrt(1 - c^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Literal, Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureNonConvergence

Parity = Literal["odd", "even"]

_DOUBLE_RATE_BAND = 1e-12


def beta_star(c: float) -> float:
    return 2.0 * math.sqrt(max(1.0 - c * c, 0.0))


def c_star(beta: float) -> float:
    bp = max(beta, 0.0)
    return math.sqrt(max(1.0 - bp * bp / 4.0, 0.0))


def in_domain(beta: float, c: float) -> bool:
    return c * c < 1.0 and beta < beta_star(c)


def check_domain(beta: float, c: float) -> None:
    if not c * c < 1.0:
        raise DomainError(f"c out of range: need c^2 < 1, got c={c}")
    if not beta < beta_star(c):
        raise DomainError(f"beta={beta} must be below beta_star(c)={beta_star(c):.6g} at c={c}")


@dataclass(frozen=True)
class WaveParams:
    beta: float
    c: float
    p: float = 2.0
    parity: Parity = "odd"

    def __post_init__(self):
        if self.parity not in ("odd", "even"):
            raise ValueError(f"parity must be 'odd' or 'even', got {self.parity!r}")
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p}")
        check_domain(self.beta, self.c)

    @property
    def beta_star(self) -> float:
        return beta_star(self.c)

    @property
    def c_star(self) -> float:
        return c_star(self.beta)

    def f(self, u):
        return nonlinearity_eval(u, self.p, self.parity, "f")

    def f_prime(self, u):
        return nonlinearity_eval(u, self.p, self.parity, "f_prime")

    def F(self, u):
        return nonlinearity_eval(u, self.p, self.parity, "F")


def nonlinearity_eval(u, p: float, parity: Parity, which: str = "f"):
    """Evaluate f, f' or the primitive F (F(0) = 0) pointwise.

    Works on scalars and arrays. For p < 2 the derivative is singular at the
    origin; it is set to its limiting value 0 there (see :func:`f_prime_is_smooth`).
    """
    a = np.asarray(u, dtype=float)
    au = np.abs(a)
    if which == "f":
        out = au ** (p - 1) * a if parity == "odd" else au**p
    elif which == "f_prime":
        if parity == "odd":
            out = p * au ** (p - 1)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(au > 0, p * au ** (p - 2) * a, 0.0) if p < 2 else p * au ** (p - 2) * a
    elif which == "F":
        out = au ** (p + 1) / (p + 1) if parity == "odd" else au**p * a / (p + 1)
    else:
        raise ValueError(f"which must be 'f', 'f_prime' or 'F', got {which!r}")
    return float(out) if np.ndim(u) == 0 else out


def f_prime_is_smooth(p: float) -> bool:
    return p >= 2


class Regime(str, Enum):
    TWO_REAL_RATES = "TwoRealRates"
    DOUBLE_RATE = "DoubleRate"
    OSCILLATORY_RATE = "OscillatoryRate"


@dataclass(frozen=True)
class DispersionConstants:
    beta_star: float
    c_star: float
    regime: Regime
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    sigma: Optional[float] = None
    omega: Optional[float] = None


def _regime(beta: float, bstar: float) -> Regime:
    if abs(beta + bstar) <= _DOUBLE_RATE_BAND * max(bstar, 1.0):
        return Regime.DOUBLE_RATE
    return Regime.TWO_REAL_RATES if beta < -bstar else Regime.OSCILLATORY_RATE


def _constants(beta: float, c: float) -> DispersionConstants:
    check_domain(beta, c)
    bstar = beta_star(c)
    regime = _regime(beta, bstar)
    cs = c_star(beta)
    if regime is Regime.TWO_REAL_RATES:
        root = math.sqrt(beta * beta - bstar * bstar)
        # l1 * l2 = sqrt(1 - c^2) avoids cancellation in (-beta - root)
        l2 = math.sqrt(0.5 * (-beta + root))
        l1 = math.sqrt(1.0 - c * c) / l2
        return DispersionConstants(bstar, cs, regime, lambda1=l1, lambda2=l2)
    if regime is Regime.DOUBLE_RATE:
        lam = math.sqrt(bstar / 2.0)
        return DispersionConstants(bstar, cs, regime, lambda1=lam, lambda2=lam)
    sigma = 0.5 * math.sqrt(bstar - beta)
    omega = 0.5 * math.sqrt(max(bstar + beta, 0.0))
    return DispersionConstants(bstar, cs, regime, sigma=sigma, omega=omega)


def dispersion_constants(params: WaveParams) -> DispersionConstants:
    return _constants(params.beta, params.c)


def kernel_eval(x, beta: float, c: float):
    """Closed-form fundamental solution K(x) = int exp(i xi x) / (xi^4 - beta xi^2 + 1 - c^2) d xi."""
    k = _constants(beta, c)
    ax = np.abs(np.asarray(x, dtype=float))
    if k.regime is Regime.TWO_REAL_RATES:
        l1, l2 = k.lambda1, k.lambda2
        out = np.pi / (l2 * l2 - l1 * l1) * (np.exp(-l1 * ax) / l1 - np.exp(-l2 * ax) / l2)
    elif k.regime is Regime.DOUBLE_RATE:
        bs = k.beta_star
        a = math.sqrt(bs / 2.0)
        out = np.pi * math.sqrt(2.0) / bs**1.5 * (1.0 + a * ax) * np.exp(-a * ax)
    else:
        s, w = k.sigma, k.omega
        if w == 0.0:
            out = np.pi / (2.0 * s**3) * (1.0 + s * ax) * np.exp(-s * ax)
        else:
            out = (
                np.pi * np.exp(-s * ax) / (2.0 * s * w * (s * s + w * w))
                * (w * np.cos(w * ax) + s * np.sin(w * ax))
            )
    return float(out) if np.ndim(x) == 0 else out


def kernel_oracle(x: float, beta: float, c: float, tol: float = 1e-12) -> float:
    """Adaptive quadrature of the kernel's Fourier integral, independent of the closed forms."""
    check_domain(beta, c)
    x = abs(float(x))
    c0 = 1.0 - c * c
    # beyond xi_max the symbol exceeds xi^4 / 2, so the doubled tail is below 4 / (3 xi_max^3)
    xi_max = max((4.0 / (3.0 * tol)) ** (1.0 / 3.0), 2.0 * math.sqrt(abs(beta)) + 2.0)

    def g(xi):
        return 1.0 / (xi**4 - beta * xi**2 + c0)

    # put the structure of the integrand (near sqrt(beta / 2)) inside the first panel
    cut = min(max(20.0, 4.0 * math.sqrt(abs(beta) + 1.0)), xi_max)
    total = 0.0
    abserr = 0.0
    with warnings.catch_warnings():
        # quadpack's roundoff warnings are judged below by the returned error estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in ((0.0, cut), (cut, xi_max)):
            if x == 0.0:
                val, err = integrate.quad(g, a, b, epsabs=1e-14, epsrel=1e-13, limit=500)
            else:
                val, err = integrate.quad(
                    g, a, b, weight="cos", wvar=x, epsabs=1e-14, epsrel=1e-13, limit=2000
                )
            total += val
            abserr += err
    if not (np.isfinite(total) and abserr <= 1e-10):
        raise QuadratureNonConvergence(f"kernel quadrature at x={x}: error estimate {abserr:.3g}")
    return 2.0 * total
