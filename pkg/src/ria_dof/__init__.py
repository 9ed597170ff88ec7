"""DoF catalog, parameter optimizer and simulator for two-phase RIA on three-user MIMO channels."""

from .catalog import AntennaConfig, classify, inner_bound, outer_bound, strategy_dof, sweep
from .errors import (
    DegenerateInstanceError,
    EmptyResultError,
    InfeasibleError,
    ParameterError,
    RegionError,
    RiaError,
)
from .optimizer import SchemeParams, brute_force, check_constraints, closed_form
from .scheme import estimate_dof_slope, run_trials
from .subspace import Rng, Subspace

__version__ = "0.1.0"
