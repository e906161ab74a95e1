"""Numerical laboratory for degenerate wave motion in a gas column touching vacuum.

The model is the radially-reduced wave equation

    y_tt - L y = elastic_factor(v) * L y + source_term(v),      v = -dy/dz,

on z in [0, 1] with y(1) = 0, where L = z d^2/dz^2 + (N/2) d/dz is the
generator of the z^{N/2-1}-weighted space and N >= 4 parametrizes the
adiabatic exponent gamma = N/(N-2).  z is the distance from the vacuum
boundary of the background column; the equation degenerates there (the
coefficient of the second derivative vanishes), which is what makes the
problem interesting and the numerics delicate.

Subpackage map:

- params        model parameters and derived constants
- bessel        arbitrary-precision evaluation of the entire Bessel factor,
                zero finding, Dirichlet eigenvalues/eigenfunctions of L
- space         Gauss-Jacobi quadrature, weighted inner products, norms
- series        polynomial calculus for L, D, and the gas nonlinearities
- elliptic      solvers for (-L - lambda) y = f with y(1) = 0
- perturb       trigonometric-polynomial perturbation hierarchy in eps
- dynamics      Galerkin time stepping, linearized energy bookkeeping,
                density reconstruction
- scan          resonance scan over the eigenvalue ratio condition
- cli           command-line entry points (eigen/series/simulate/scan/verify)
"""

from .params import ModelParams

__all__ = ["ModelParams"]
__version__ = "0.1.0"
