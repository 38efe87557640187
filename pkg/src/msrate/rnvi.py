"""Regularized normalized value iteration with continuation in tau.

For a fixed ``tau`` the solver iterates ``P <- hat_phi(P)`` on the set of
unit-trace PSD matrices. The outer loop walks a strictly decreasing tau grid
and warm-starts each stage from the previous stage's fixed point.
"""

from dataclasses import dataclass, field

import numpy as np

from . import riccati
from .errors import ConfigError

DEFAULT_TAU_START = 0.5
DEFAULT_TAU_END = 1e-5
DEFAULT_TAU_COUNT = 40
DEFAULT_EPSILON = 1e-12
DEFAULT_MAX_INNER_ITERS = 10_000

__all__ = [
    "RnviConfig",
    "FixedPointRecord",
    "ContinuationResult",
    "default_tau_grid",
    "solve_at_tau",
    "run_continuation",
]


def default_tau_grid(tau_start=DEFAULT_TAU_START, tau_end=DEFAULT_TAU_END, count=DEFAULT_TAU_COUNT):
    """Geometric grid from `tau_start` down to `tau_end`, both endpoints included."""
    if not (0.0 < tau_end < tau_start < 1.0):
        raise ConfigError(f"need 0 < tau_end < tau_start < 1, got {tau_start!r}, {tau_end!r}")
    if int(count) != count or count < 2:
        raise ConfigError(f"tau grid needs at least 2 points, got {count!r}")
    grid = np.geomspace(tau_start, tau_end, int(count))
    grid[0], grid[-1] = tau_start, tau_end
    return grid


@dataclass(frozen=True)
class RnviConfig:
    tau_grid: np.ndarray = field(default_factory=default_tau_grid)
    epsilon: float = DEFAULT_EPSILON
    max_inner_iters: int = DEFAULT_MAX_INNER_ITERS
    P0: np.ndarray | None = None

    def __post_init__(self):
        grid = np.atleast_1d(np.asarray(self.tau_grid, dtype=float))
        if grid.ndim != 1 or grid.size == 0:
            raise ConfigError("tau_grid must be a non-empty 1D sequence")
        if np.any(grid <= 0.0) or np.any(grid >= 1.0):
            raise ConfigError("every tau must lie in (0, 1)")
        if np.any(np.diff(grid) >= 0.0):
            raise ConfigError("tau_grid must be strictly decreasing")
        if not self.epsilon > 0.0:
            raise ConfigError("epsilon must be > 0")
        if self.max_inner_iters < 1:
            raise ConfigError("max_inner_iters must be >= 1")
        object.__setattr__(self, "tau_grid", grid)


@dataclass(frozen=True)
class FixedPointRecord:
    """Result of one fixed-point solve at a single tau.

    ``P`` is the last iterate whose residual ``||hat_phi(P) - P||_F`` was
    measured, ``gamma`` the trace of the regularized update at ``P``, and
    ``K`` the gain ``K(P)``.
    """

    tau: float
    P: np.ndarray
    gamma: float
    K: np.ndarray
    inner_iters: int
    residual: float
    converged: bool
    step_norms: tuple = ()


@dataclass(frozen=True)
class ContinuationResult:
    records: list
    warm_start_chain: list

    @property
    def converged(self):
        return [r for r in self.records if r.converged]


def solve_at_tau(spec, tau, P_init, epsilon=DEFAULT_EPSILON, max_iters=DEFAULT_MAX_INNER_ITERS):
    """Iterate the regularized operator at fixed `tau` until the residual is small.

    Non-convergence is reported through ``converged=False`` on the returned
    record rather than raised.
    """
    if not 0.0 < tau < 1.0:
        raise ConfigError(f"tau must lie in (0, 1), got {tau!r}")
    P = np.array(P_init, dtype=float)
    if P.shape != (spec.n, spec.n):
        raise ConfigError(f"P_init has shape {P.shape}, expected {(spec.n, spec.n)}")
    P = 0.5 * (P + P.T)
    P /= np.trace(P)

    steps = []
    for it in range(1, max_iters + 1):
        P_next, gamma, b = riccati._hat_phi(spec, P, tau)
        residual = float(np.linalg.norm(P_next - P))
        steps.append(residual)
        if residual <= epsilon:
            return FixedPointRecord(tau, P, gamma, b.K, it, residual, True, tuple(steps))
        P = P_next
    # P was just advanced; evaluate once more so gamma/K/residual belong to it
    P_next, gamma, b = riccati._hat_phi(spec, P, tau)
    residual = float(np.linalg.norm(P_next - P))
    return FixedPointRecord(tau, P, gamma, b.K, max_iters, residual, residual <= epsilon, tuple(steps))


def run_continuation(spec, cfg=None):
    """Solve along ``cfg.tau_grid`` with warm starts (stage j starts at stage j-1's P).

    Every stage is recorded, converged or not; a stage that fails to converge
    still hands its last iterate to the next stage.
    """
    if cfg is None:
        cfg = RnviConfig()
    n = spec.n
    P = np.eye(n) / n if cfg.P0 is None else np.asarray(cfg.P0, dtype=float)
    records, warm = [], []
    for j, tau in enumerate(cfg.tau_grid):
        rec = solve_at_tau(spec, float(tau), P, cfg.epsilon, cfg.max_inner_iters)
        records.append(rec)
        warm.append(j > 0)
        P = rec.P
    return ContinuationResult(records=records, warm_start_chain=warm)
