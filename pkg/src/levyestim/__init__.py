"""Simulation and parametric estimation for jump-type Levy processes
observed at high frequency.

Subpackages cover exact stable-increment sampling (Chambers-Mallows-Stuck
with the corrected beta = 1 branch), the symmetric stable density and its
information integrals, moment/median/sign/multipower-variation estimators
with explicit asymptotic covariances, maximum-likelihood estimation for
gamma and inverse-Gaussian subordinators, finite-difference transforms that
remove drift and skew, and a seeded Monte Carlo harness.
"""

from . import (
    errors,
    mc,
    serialize,
    skewed,
    special_fn,
    stable_core,
    stable_density,
    subordinators,
    symmetric,
    transforms,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "mc",
    "serialize",
    "skewed",
    "special_fn",
    "stable_core",
    "stable_density",
    "subordinators",
    "symmetric",
    "transforms",
    "__version__",
]
