"""Toolkit for boundary confinement of drift-diffusion operators.

Decides, via explicit sufficient conditions on the coefficient behavior
near the boundary, whether the symmetrized drift-diffusion operator
H0 = -(1/rho_inf) div(rho_inf D grad) on a Euclidean domain is
essentially self-adjoint and/or conserves mass under its minimal
semigroup, and cross-validates the verdicts with independent numerical
oracles: 1D endpoint classification, discrete quadratic-form
inequalities, and mass-conserving finite-volume simulation.
"""

from . import criteria, fpsim, geometry, numerics, profiles, quadform, sturm

__all__ = ["criteria", "fpsim", "geometry", "numerics", "profiles",
           "quadform", "sturm"]
__version__ = "0.1.0"
