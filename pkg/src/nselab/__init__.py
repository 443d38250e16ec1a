"""Spectral laboratory for dissipativity certificates and resolvent time
stepping of the incompressible Navier-Stokes equations on the periodic
3-torus."""

__version__ = "0.1.0"

from .certificate import CertificateReport, build_certificate
from .constants import ConstantsEstimate, compute_alpha, estimate_constants
from .convective import convective_term, trilinear
from .evolution import (
    NonlinearOperator,
    SimulationTrace,
    evolve_exponential,
    evolve_implicit_euler,
    monitor_solution_class,
    resolvent_solve,
)
from .field import FourierField, read_snapshot, single_mode_field, write_snapshot, zero_field
from .forcing import ForcingModel, make_forcing
from .grid import Grid, grid
from .operators import (
    fractional_apply,
    inner_h,
    leray_project,
    make_field_random,
    norm_h,
    semigroup_apply,
    sobolev_norm,
    stokes_apply,
)
from .renorm import RenormContext, make_context, renormed_inner, renormed_norm
from .thresholds import ThresholdReport, ball_membership, compute_thresholds

__all__ = [
    "CertificateReport",
    "ConstantsEstimate",
    "ForcingModel",
    "FourierField",
    "Grid",
    "NonlinearOperator",
    "RenormContext",
    "SimulationTrace",
    "ThresholdReport",
    "ball_membership",
    "build_certificate",
    "compute_alpha",
    "compute_thresholds",
    "convective_term",
    "estimate_constants",
    "evolve_exponential",
    "evolve_implicit_euler",
    "fractional_apply",
    "grid",
    "inner_h",
    "leray_project",
    "make_context",
    "make_field_random",
    "make_forcing",
    "monitor_solution_class",
    "norm_h",
    "read_snapshot",
    "renormed_inner",
    "renormed_norm",
    "resolvent_solve",
    "semigroup_apply",
    "single_mode_field",
    "sobolev_norm",
    "stokes_apply",
    "trilinear",
    "write_snapshot",
    "zero_field",
]
