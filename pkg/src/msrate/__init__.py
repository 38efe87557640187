"""Certified bounds on the optimal mean-square stabilizing rate of linear
systems with multiplicative noise, computed by regularized normalized value
iteration, plus exact and Monte Carlo closed-loop validation."""

from .certify import BoundsCertificate, NormBounds, aggregate, bounds_at, closed_loop_rate, norm_bounds
from .errors import *  # noqa: F401,F403
from .model import SystemSpec, ValidationReport, load_spec, scale_A, validate
from .riccati import blocks, constants, gain, hat_phi, phi
from .rnvi import ContinuationResult, FixedPointRecord, RnviConfig, default_tau_grid, run_continuation, solve_at_tau
from .simulate import MomentTrajectory, SimConfig, fit_slope, monte_carlo, propagate_exact

__version__ = "0.1.0"
