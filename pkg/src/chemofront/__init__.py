"""Simulation and verification of a 1-D logistic attraction-repulsion chemotaxis model.

Fixed half-line and whole-line domains plus single and double Stefan-type
free boundaries, with an engine for the hypothesis constants and the
quantitative bounds they imply.
"""

from .config import RunConfig, dump_config, load_config, parse_config
from .elliptic import chemical_gradient, greens_oracle, solve_chemical
from .errors import (
    BlowupDetected,
    CFLViolation,
    ChemofrontError,
    ConfigError,
    FrontCollapse,
    HypothesisViolated,
    NotEvenError,
    NumericalFailure,
)
from .free_boundary import (
    FreeBoundaryState,
    detect_outcome,
    from_reference,
    run_free_boundary,
    stefan_step,
    to_reference,
)
from .grid import Grid, StateField, even_extension, make_grid, restrict_even
from .harness import (
    CheckReport,
    EigenPair,
    PeriodicOrbit,
    check_convergence,
    check_global_bound,
    check_persistence,
    principal_eigenpair,
    solve_periodic_orbit,
)
from .kernels import BACKEND
from .params import (
    BoundSet,
    CoefficientField,
    HypothesisReport,
    ModelParams,
    check_hypotheses,
    compute_K,
    compute_M,
    derive_bounds,
)
from .stepper import StepConfig, TimeSeries, run, step

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BlowupDetected",
    "BoundSet",
    "CFLViolation",
    "CheckReport",
    "ChemofrontError",
    "CoefficientField",
    "ConfigError",
    "EigenPair",
    "FreeBoundaryState",
    "FrontCollapse",
    "Grid",
    "HypothesisReport",
    "HypothesisViolated",
    "ModelParams",
    "NotEvenError",
    "NumericalFailure",
    "PeriodicOrbit",
    "RunConfig",
    "StateField",
    "StepConfig",
    "TimeSeries",
    "check_convergence",
    "check_global_bound",
    "check_hypotheses",
    "check_persistence",
    "chemical_gradient",
    "compute_K",
    "compute_M",
    "derive_bounds",
    "detect_outcome",
    "dump_config",
    "even_extension",
    "from_reference",
    "greens_oracle",
    "load_config",
    "make_grid",
    "parse_config",
    "principal_eigenpair",
    "restrict_even",
    "run",
    "run_free_boundary",
    "solve_chemical",
    "solve_periodic_orbit",
    "stefan_step",
    "step",
    "to_reference",
]
