"""Spectral simulation of the confined incompressible porous media equation.

The density perturbation lives on the strip T x [-1, 1] with impermeable
walls and is expanded in the eigenfunctions a_p(x) b_q(y) of the Dirichlet
Laplacian.
"""

__version__ = "0.1.0"

from .config import SimConfig
from .elliptic import VelocityField, solve_stream, velocity_from_stream
from .exceptions import (
    ConfigError,
    IPMError,
    NumericalAbort,
    PreconditionError,
    ResolutionError,
    StabilityError,
)
from .fitting import FitResult, fit_decay
from .galerkin import (
    DiagRecord,
    EvolveOptions,
    GalerkinState,
    diagnostics,
    evolve,
    nonlinear_rhs,
    step_etd,
    step_rk4,
)
from .initial import make_initial_data
from .linear import (
    DecayEnvelope,
    coefficient_decay_bound,
    convolution_bound_check,
    decay_envelope_check,
    linear_evolve,
    linear_velocity,
)
from .spectral import (
    OMEGA,
    VARPI,
    Spectrum,
    TransformPlan,
    decompose_mean,
    project_threshold,
    read_snapshot,
    sobolev_norm,
    write_snapshot,
)

__all__ = [
    "ConfigError", "DecayEnvelope", "DiagRecord", "EvolveOptions", "FitResult", "GalerkinState",
    "IPMError", "NumericalAbort", "OMEGA", "PreconditionError", "ResolutionError", "SimConfig",
    "Spectrum", "StabilityError", "TransformPlan", "VARPI", "VelocityField",
    "coefficient_decay_bound", "convolution_bound_check", "decay_envelope_check",
    "decompose_mean", "diagnostics", "evolve", "fit_decay", "linear_evolve", "linear_velocity",
    "make_initial_data", "nonlinear_rhs", "project_threshold", "read_snapshot", "solve_stream",
    "sobolev_norm", "step_etd", "step_rk4", "velocity_from_stream", "write_snapshot",
]
