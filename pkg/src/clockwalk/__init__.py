"""Numerical laboratory for a relativistic binary-clock particle model.

The package implements, end to end, a point particle carrying a binary
clock signal that toggles at its Compton frequency: proper-time kinematics
on piecewise-inertial worldlines, the resulting spacetime parity patterns
and their Lorentz-equivalence filter, a parity-tracking four-state lattice
walk, its spectral (transfer-matrix) representation, and the stroboscopic
continuum limits in which the parity-filtered walk reproduces the free
Schrodinger propagator while the unfiltered walk reproduces the diffusion
Green's function.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    clock_signal,
    experiments_cli,
    kinematics,
    lattice_walk,
    reference_solutions,
    spectral_limit,
)

__all__ = [
    "__version__",
    "clock_signal",
    "experiments_cli",
    "kinematics",
    "lattice_walk",
    "reference_solutions",
    "spectral_limit",
]
