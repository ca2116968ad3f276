"""Desk-scale numerics for Allen-Cahn interfaces over minimal cones.

Modules
-------
profile1d  : 1D heteroclinic profile, its linearization, moment integrals.
cone       : sphere-product links, cone spectra, indicial roots, stability.
minsurf    : Hardt-Simon generating curves by shooting, Jacobi operator.
fermi      : Fermi coordinates, cutoffs, approximate solution, residuals.
acpde      : reduced Allen-Cahn Newton solver and zero-set extraction.
stability  : weighted spectrum, dilation derivative, quadratic-form trials.
cli        : named pipelines with reproducible file artifacts.
"""

from .cone import LinkSpec, classify_stability, cone_spectrum, link_geometry
from .minsurf import (ConeCrossingError, GeneratingCurve, fit_decay_exponent,
                      shoot_hardt_simon)
from .profile1d import evaluate_profile, l0_eigencheck, profile_moments

__all__ = [
    "LinkSpec", "classify_stability", "cone_spectrum", "link_geometry",
    "ConeCrossingError", "GeneratingCurve", "fit_decay_exponent",
    "shoot_hardt_simon", "evaluate_profile", "l0_eigencheck",
    "profile_moments",
]

__version__ = "0.1.0"
