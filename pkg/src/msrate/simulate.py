"""Closed-loop second-moment propagation and Monte Carlo estimation.

Exact propagation uses

    S_{k+1} = Acl S_k Acl^T + sigma^2 Abcl S_k Abcl^T,   S_0 = x0 x0^T,

so ``E[x_k^T x_k] = trace(S_k)`` without sampling.

Monte Carlo trajectory ``t`` draws its noise from a Philox generator keyed
by ``SeedSequence([seed, t])`` and maps uniform bits to normals with numpy's
``Generator.standard_normal``. The output therefore does not depend on how
trajectories are batched or scheduled.
"""

import csv
import itertools
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .errors import DimensionMismatch, NonPositiveEnergy

OVERFLOW = 1e300
DEFAULT_HORIZON = 60
DEFAULT_NUM_TRAJ = 10_000
DEFAULT_SEED = 42
DEFAULT_FIT_WINDOW = (10, 60)

__all__ = [
    "SimConfig",
    "MomentTrajectory",
    "propagate_exact",
    "fourth_moment_exact",
    "monte_carlo",
    "fit_slope",
    "substream",
    "write_energy_csv",
]


@dataclass(frozen=True)
class SimConfig:
    x0: np.ndarray
    K: np.ndarray
    horizon: int = DEFAULT_HORIZON
    num_traj: int = DEFAULT_NUM_TRAJ
    seed: int = DEFAULT_SEED
    fit_window: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).ravel())
        object.__setattr__(self, "K", np.atleast_2d(np.asarray(self.K, dtype=float)))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.num_traj < 1:
            raise ValueError("num_traj must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        window = self.fit_window
        if window is None:
            window = (min(DEFAULT_FIT_WINDOW[0], self.horizon - 1), self.horizon)
        start, end = window
        if not 0 <= start < end <= self.horizon:
            raise ValueError(f"fit window {window} outside [0, {self.horizon}]")
        object.__setattr__(self, "fit_window", (int(start), int(end)))


@dataclass(frozen=True)
class MomentTrajectory:
    """``energies[k]`` estimates ``E[x_k^T x_k]`` for ``k = 0 .. horizon``.

    If the overflow guard trips, `energies` is truncated at the last finite
    step and `diverged` is set.
    """

    energies: np.ndarray
    kind: str
    slope: float = float("nan")
    slope_stderr: float = float("nan")
    diverged: bool = False


def _check(spec, K, x0):
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (spec.n,):
        raise DimensionMismatch(f"x0 has length {x0.size}, expected {spec.n}")
    return spec.closed_loop(K), x0


def propagate_exact(spec, K, x0, horizon=DEFAULT_HORIZON, fit_window=None):
    """Exact closed-loop mean-square energies under ``u = -K x``."""
    (Acl, Abcl), x0 = _check(spec, K, x0)
    s2 = spec.sigma ** 2
    Sigma = np.outer(x0, x0)
    energies = [float(x0 @ x0)]
    diverged = False
    for _ in range(horizon):
        with np.errstate(over="ignore", invalid="ignore"):
            Sigma = Acl @ Sigma @ Acl.T + s2 * (Abcl @ Sigma @ Abcl.T)
            e = float(np.trace(Sigma))
        if not e <= OVERFLOW:
            diverged = True
            break
        energies.append(e)
    traj = MomentTrajectory(np.array(energies), "exact", diverged=diverged)
    if fit_window is not None:
        slope, err = fit_slope(traj, fit_window)
        traj = replace(traj, slope=slope, slope_stderr=err)
    return traj


def fourth_moment_exact(spec, K, x0, horizon=DEFAULT_HORIZON):
    """Exact ``E[(x_k^T x_k)^2]`` for ``k = 0 .. horizon`` under ``u = -K x``.

    Propagates ``E[x^{(x)4}]`` with the fourfold Kronecker power of
    ``Acl + w Abcl``, using the Gaussian moments E[w^2] = s^2, E[w^4] = 3 s^4.
    The state has ``n**4`` entries, so this is meant for small n. Together
    with :func:`propagate_exact` it gives the exact standard error of a
    Monte Carlo energy estimate.
    """
    (Acl, Abcl), x0 = _check(spec, K, x0)
    s2 = spec.sigma ** 2
    moments = {0: 1.0, 2: s2, 4: 3.0 * s2 * s2}
    n4 = spec.n ** 4
    op = np.zeros((n4, n4))
    for choice in itertools.product((0, 1), repeat=4):
        power = sum(choice)
        if power % 2:
            continue
        M = np.ones((1, 1))
        for c in choice:
            M = np.kron(M, Abcl if c else Acl)
        op += moments[power] * M
    eye = np.eye(spec.n).ravel()
    weights = np.kron(eye, eye)
    v = np.kron(np.kron(x0, x0), np.kron(x0, x0))
    out = [float(weights @ v)]
    for _ in range(horizon):
        v = op @ v
        out.append(float(weights @ v))
    return np.array(out)


def substream(seed, index):
    """Independent generator for trajectory `index` under master `seed`."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def monte_carlo(spec, cfg):
    """Sample-average estimate of ``E[x_k^T x_k]`` over ``cfg.num_traj`` paths.

    The slope over ``cfg.fit_window`` is fitted when the window energies are
    positive.
    """
    (Acl, Abcl), x0 = _check(spec, cfg.K, cfg.x0)
    # row t holds the noise path of trajectory t
    noise = np.empty((cfg.num_traj, cfg.horizon))
    for t in range(cfg.num_traj):
        noise[t] = substream(cfg.seed, t).standard_normal(cfg.horizon)
    noise *= spec.sigma

    X = np.tile(x0, (cfg.num_traj, 1))
    energies = [float(x0 @ x0)]
    diverged = False
    AclT, AbclT = Acl.T, Abcl.T
    for k in range(cfg.horizon):
        with np.errstate(over="ignore", invalid="ignore"):
            X = X @ AclT + noise[:, k:k + 1] * (X @ AbclT)
            e = float(np.mean(np.sum(X * X, axis=1)))
        if not e <= OVERFLOW:
            diverged = True
            break
        energies.append(e)
    traj = MomentTrajectory(np.array(energies), "monte_carlo", diverged=diverged)
    start, end = cfg.fit_window
    window = traj.energies[start:end + 1]
    if not diverged and np.all(window > 0.0):
        slope, err = fit_slope(traj, cfg.fit_window)
        traj = replace(traj, slope=slope, slope_stderr=err)
    return traj


def fit_slope(traj, window):
    """Least-squares slope of ``log(energies[k])`` against ``k`` on ``start..end``.

    Both window ends are inclusive.

    Raises
    ------
    NonPositiveEnergy
        If any energy in the window is ``<= 0``.
    """
    start, end = window
    energies = np.asarray(traj.energies if hasattr(traj, "energies") else traj, dtype=float)
    if not 0 <= start < end < len(energies):
        raise ValueError(f"window {window} outside available steps 0..{len(energies) - 1}")
    k = np.arange(start, end + 1)
    e = energies[start:end + 1]
    if np.any(e <= 0.0):
        raise NonPositiveEnergy(f"non-positive energy in window {window}")
    fit = stats.linregress(k, np.log(e))
    return float(fit.slope), float(fit.stderr)


def write_energy_csv(traj, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "energy"])
        for k, e in enumerate(traj.energies):
            writer.writerow([k, f"{e:.17g}"])
