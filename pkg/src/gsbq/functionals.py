"""Conserved, variational and second-variation functionals.

Every integral uses the grid measure dx * sum(...) or its exact spectral
equivalent (:func:`gsbq.grid.spectral_inner`), so identities between
functionals cancel to round-off.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .grid import RealField, StatePair, derivative_samples, spectral_inner, symbol_values
from .model import WaveParams, nonlinearity_eval

__all__ = [
    "FunctionalReport",
    "Conserved",
    "functional_I",
    "functional_K",
    "conserved_quantities",
    "action_and_nehari",
    "functional_report",
    "pohozaev_residual",
    "h_quadratic_form",
    "instability_direction_forms",
    "d_from_K",
]


def d_from_K(K: float, p: float) -> float:
    return (p - 1.0) / (2.0 * (p + 1.0)) * K


def functional_I(u: RealField, beta: float, c: float) -> float:
    """int u_xx^2 - beta u_x^2 + (1 - c^2) u^2, evaluated by Parseval."""
    g = u.grid
    uh = u.hat()
    return spectral_inner(g, uh, uh, symbol_values(g.rwavenumbers, beta, c))


def functional_K(u: RealField, p: float, parity: str = "odd") -> float:
    return (p + 1.0) * u.grid.integrate(nonlinearity_eval(u.samples, p, parity, "F"))


def dirichlet_l2(u: RealField, order: int = 0) -> float:
    """int (d^order u)^2 dx, spectrally."""
    g = u.grid
    uh = u.hat()
    return spectral_inner(g, uh, uh, g.rwavenumbers ** (2 * order))


class Conserved(NamedTuple):
    E: float
    Q: float
    Q1: float
    Q2: float
    Q3_k1: float


def conserved_quantities(state: StatePair, params: WaveParams) -> Conserved:
    g = state.grid
    u, v = state.u.samples, state.v.samples
    uh, vh = state.u.hat(), state.v.hat()
    k = g.rwavenumbers
    quad = spectral_inner(g, uh, uh, k**4 - params.beta * k**2 + 1.0)
    E = 0.5 * (quad + g.integrate(v * v)) - g.integrate(params.F(u))
    Q = g.integrate(u * v)
    Q1 = g.integrate(u)
    Q2 = g.integrate(v)
    Q3 = spectral_inner(g, uh, vh, -(k**2))
    return Conserved(E, Q, Q1, Q2, Q3)


class ActionNehari(NamedTuple):
    L: float
    P: float


def action_and_nehari(state: StatePair, params: WaveParams) -> ActionNehari:
    I = functional_I(state.u, params.beta, params.c)
    K = functional_K(state.u, params.p, params.parity)
    w = params.c * state.u.samples + state.v.samples
    mix = state.grid.integrate(w * w)
    return ActionNehari(0.5 * I - K / (params.p + 1.0) + 0.5 * mix, I - K + mix)


@dataclass(frozen=True)
class FunctionalReport:
    I: float
    K: float
    E: float
    Q: float
    Q1: float
    Q2: float
    Q3_k1: float
    action_L: float
    nehari_P: float
    m_ratio: float
    d_value: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def functional_report(state: StatePair, params: WaveParams) -> FunctionalReport:
    p = params.p
    I = functional_I(state.u, params.beta, params.c)
    K = functional_K(state.u, p, params.parity)
    cons = conserved_quantities(state, params)
    an = action_and_nehari(state, params)
    m_ratio = I / K ** (2.0 / (p + 1.0)) if K > 0 else float("nan")
    return FunctionalReport(
        I=I, K=K, **cons._asdict(), action_L=an.L, nehari_P=an.P, m_ratio=m_ratio, d_value=d_from_K(K, p)
    )


def pohozaev_residual(wave) -> float:
    """|int 3 phi''^2 - beta phi'^2 - (1 - c^2) phi^2 + 2 F(phi)| / K(phi)."""
    prm = wave.params
    phi = wave.profile
    g = phi.grid
    ph = phi.hat()
    k = g.rwavenumbers
    quad = spectral_inner(g, ph, ph, 3.0 * k**4 - prm.beta * k**2 - (1.0 - prm.c**2))
    Fint = g.integrate(prm.F(phi.samples))
    K = (prm.p + 1.0) * Fint
    lhs = quad + 2.0 * Fint
    if K == 0.0:
        return abs(lhs)
    return abs(lhs) / abs(K)


def h_quadratic_form(w1: StatePair, w2: StatePair, wave) -> float:
    """Second variation of the action at (phi, -c phi), as a bilinear form."""
    prm = wave.params
    g = w1.grid
    c = prm.c
    lin = spectral_inner(g, w1.u.hat(), w2.u.hat(), symbol_values(g.rwavenumbers, prm.beta, c))
    pot = g.integrate(prm.f_prime(wave.profile.samples) * w1.u.samples * w2.u.samples)
    mix = g.integrate((c * w1.u.samples + w1.v.samples) * (c * w2.u.samples + w2.v.samples))
    return lin - pot + mix


def q_gradient_pairing(wave, w: StatePair) -> float:
    """<Q'(phi, -c phi), w> with Q'(u, v) = (v, u)."""
    phi = wave.profile.samples
    g = wave.profile.grid
    return g.integrate(-wave.params.c * phi * w.u.samples + phi * w.v.samples)


class DirectionForms(NamedTuple):
    dir_i_value: float
    dir_ii_value: float
    q_orth_i: float
    q_orth_ii: float
    dir_i_closed: float
    dir_ii_closed: float
    dir_ii_combined: float


def scaling_direction(wave) -> RealField:
    """phi + 2 (x - x0) phi', with x0 the centroid of phi^2."""
    phi = wave.profile
    g = phi.grid
    x = g.nodes
    w = phi.samples**2
    x0 = float(np.sum(x * w) / np.sum(w))
    dphi = derivative_samples(g, phi.samples, 1)
    return RealField(g, phi.samples + 2.0 * (x - x0) * dphi)


def instability_direction_forms(wave) -> DirectionForms:
    prm = wave.params
    p, c, beta = prm.p, prm.c, prm.beta
    phi = wave.profile
    K = functional_K(phi, p, prm.parity)
    l2 = dirichlet_l2(phi, 0)
    d1 = dirichlet_l2(phi, 1)
    d2 = dirichlet_l2(phi, 2)

    wi = StatePair(phi, c * phi)
    psi = scaling_direction(wave)
    wii = StatePair(psi, -c * psi)
    return DirectionForms(
        dir_i_value=h_quadratic_form(wi, wi, wave),
        dir_ii_value=h_quadratic_form(wii, wii, wave),
        q_orth_i=q_gradient_pairing(wave, wi),
        q_orth_ii=q_gradient_pairing(wave, wii),
        dir_i_closed=(1.0 - p) * K + 4.0 * c * c * l2,
        dir_ii_closed=(1.0 - p) * (p - 3.0) / (p + 1.0) * K + 24.0 * d2 - 4.0 * beta * d1,
        dir_ii_combined=(1.0 - p) * (p - 9.0) / (p + 1.0) * K + 8.0 * beta * d1,
    )
