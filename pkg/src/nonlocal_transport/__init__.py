"""Pseudo-spectral solver and diagnostics for ``theta_t - (H theta) theta_x = -nu Lambda^alpha theta``.

Submodules
----------
spectral     periodic grid, Hilbert transform, fractional Laplacian, dealiasing
quadrature   product integration against ``x**(-p)`` weights
solver       integrating-factor RK4 time stepping with blow-up aware stopping
diagnostics  per-record norms, the J functional, monotonicity and energy checks
monitors     pass/fail verdicts over a record series
mellin       Mellin-side check of the weighted Hilbert-transform inequality
config       scenario files
experiment   scenario orchestration, CSV/JSON/SVG artifacts, parameter sweeps
cli          ``nonlocal-transport`` command
"""
from .diagnostics import DiagRecord, JParams, compute_norms, dj_rhs, j_functional
from .solver import RunOutcome, SimState, SolverConfig, run, step
from .spectral import Grid, RealField, deriv, frac_laplacian, hilbert, make_grid

__version__ = "0.1.0"

__all__ = [
    "DiagRecord",
    "Grid",
    "JParams",
    "RealField",
    "RunOutcome",
    "SimState",
    "SolverConfig",
    "compute_norms",
    "deriv",
    "dj_rhs",
    "frac_laplacian",
    "hilbert",
    "j_functional",
    "make_grid",
    "run",
    "step",
]
