"""Solitary waves of the generalized sixth-order Boussinesq equation

    u_tt = u_xx + beta u_xxxx + u_xxxxxx - (f(u))_xx

on a periodic spectral grid: ground-state profiles, variational functionals,
the d(beta, c) stability surface and time evolution.
"""

from .errors import GSBQError
from .grid import Grid, RealField, StatePair, make_grid
from .model import WaveParams, beta_star, c_star, kernel_eval, kernel_oracle
from .petviashvili import SolitaryWave, SolveOptions, exact_profile, petviashvili_solve
from .functionals import FunctionalReport, conserved_quantities, functional_report
from .dsurface import Classification, analyze_point, classify_point, nodal_atlas
from .evolution import EvolveSpec, evolve, orbital_distance

__all__ = [
    "GSBQError",
    "Grid",
    "RealField",
    "StatePair",
    "make_grid",
    "WaveParams",
    "beta_star",
    "c_star",
    "kernel_eval",
    "kernel_oracle",
    "SolitaryWave",
    "SolveOptions",
    "exact_profile",
    "petviashvili_solve",
    "FunctionalReport",
    "conserved_quantities",
    "functional_report",
    "Classification",
    "analyze_point",
    "classify_point",
    "nodal_atlas",
    "EvolveSpec",
    "evolve",
    "orbital_distance",
]
