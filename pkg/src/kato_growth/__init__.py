"""Numerical experiments on growth of solutions to -Δu + qu = 0 outside a ball.

Modules: ``sphere_basis`` (spherical harmonics), ``coefficients`` (fields and
assumption audit), ``media`` (model families), ``radial`` (mode ODE system),
``functionals`` (monotone quantities and dichotomy), ``distcalc``
(distributional monotonicity), ``scenario``/``harness``/``cli`` (runner).
"""

__version__ = "0.1.0"
