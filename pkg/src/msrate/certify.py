"""Certified two-sided bounds on the optimal mean-square stabilizing rate.

Bounds are stated for ``J* = 2 log rho*``. At a fixed point ``P`` of the
regularized operator with growth factor ``gamma``:

* lower: ``J* >= log L(P)``, ``L(P) = lambda_min(P^{-1/2} Phi(P) P^{-1/2})``
* upper: ``J* <= log(gamma / (1 - tau))``, attained by the policy ``u = -K(P) x``

and the squared gap ``U - L`` equals ``tau / (n (1 - tau)) * lambda_max(P^{-1})``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg, riccati
from .errors import Degenerate, NoConvergedStage, NotPositiveDefinite, OracleNonConvergence

__all__ = [
    "StageBounds",
    "BoundsCertificate",
    "NormBounds",
    "bounds_at",
    "aggregate",
    "norm_bounds",
    "closed_loop_rate",
    "delta_monotone_report",
]


@dataclass(frozen=True)
class StageBounds:
    tau: float
    J_low: float
    J_up: float
    Delta: float
    lambda_max_Pinv: float
    L: float
    U: float
    inner_iters: int = 0
    converged: bool = True

    @property
    def nonpositive_L(self):
        return not self.L > 0.0

    @property
    def rho_low(self):
        return math.exp(self.J_low / 2.0) if self.J_low > -math.inf else 0.0

    @property
    def rho_up(self):
        return math.exp(self.J_up / 2.0)


@dataclass(frozen=True)
class BoundsCertificate:
    J_low_best: float
    J_up_best: float
    tau_low: float | None
    tau_up: float
    K_up: np.ndarray
    per_tau: list = field(default_factory=list)

    @property
    def rho_low(self):
        return math.exp(self.J_low_best / 2.0) if self.J_low_best > -math.inf else 0.0

    @property
    def rho_up(self):
        return math.exp(self.J_up_best / 2.0)

    @property
    def width(self):
        return self.rho_up - self.rho_low


@dataclass(frozen=True)
class NormBounds:
    alpha: float
    beta: float


def bounds_at(spec, record):
    """Lower/upper bounds on ``J*`` and the gap diagnostics for one fixed point.

    A non-positive ``L(P)`` gives a vacuous lower bound, reported as
    ``J_low = -inf``.

    Raises
    ------
    NotPositiveDefinite
        If ``record.P`` is not positive definite.
    """
    P = linalg.as_symmetric(record.P, "P")
    linalg.cholesky(P)
    tau, n = record.tau, spec.n
    Phi = riccati.blocks(spec, P).Phi
    root = linalg.sym_sqrt_inv(P)
    L = float(linalg.lambda_min(root @ Phi @ root))
    lam_Pinv = 1.0 / float(linalg.lambda_min(P))
    U = record.gamma / (1.0 - tau)
    return StageBounds(
        tau=tau,
        J_low=math.log(L) if L > 0.0 else -math.inf,
        J_up=math.log(U),
        Delta=tau / (n * (1.0 - tau)) * lam_Pinv,
        lambda_max_Pinv=lam_Pinv,
        L=L,
        U=U,
        inner_iters=record.inner_iters,
        converged=record.converged,
    )


def aggregate(spec, result):
    """Best bounds over the converged stages of a continuation run.

    Selection uses strict improvement, so the first stage attaining the best
    value wins ties. Non-converged stages are skipped.
    """
    J_low, J_up = -math.inf, math.inf
    tau_low = tau_up = None
    K_up = None
    per_tau = []
    for rec in result.records:
        if not rec.converged:
            continue
        stage = bounds_at(spec, rec)
        per_tau.append(stage)
        if stage.J_low > J_low:
            J_low, tau_low = stage.J_low, rec.tau
        if stage.J_up < J_up:
            J_up, tau_up, K_up = stage.J_up, rec.tau, rec.K
    if not per_tau:
        raise NoConvergedStage("no stage of the continuation run converged")
    return BoundsCertificate(J_low, J_up, tau_low, tau_up, np.array(K_up), per_tau)


def norm_bounds(spec):
    """Quick bracket ``alpha <= rho* <= beta`` from one step of the mean-square norm.

    ``alpha^2`` and ``beta^2`` are the extreme eigenvalues of ``Phi(I)``.
    """
    if not linalg.lambda_min(spec.R0) > 0.0:
        raise Degenerate("R0 is singular; the spec is degenerate")
    values = linalg.sym_eigen(riccati.phi(spec, np.eye(spec.n))).values
    return NormBounds(alpha=math.sqrt(max(0.0, values[0])), beta=math.sqrt(max(0.0, values[-1])))


def closed_loop_rate(spec, K, tol=1e-12, max_iters=100_000):
    """Mean-square rate of the linear policy ``u = -K x``.

    Returns the square root of the dominant eigenvalue of the positive map
    ``T(S) = Acl S Acl^T + sigma^2 Abcl S Abcl^T``, found by trace-normalized
    power iteration from ``I / n``. Iteration stops when the trace ratio
    changes by at most ``tol`` (relative) between consecutive steps.

    Raises
    ------
    OracleNonConvergence
        If the ratio has not settled after `max_iters` steps. The exception
        carries the min/max of the last 100 ratios as ``bracket``.
    """
    Acl, Abcl = spec.closed_loop(K)
    s2 = spec.sigma ** 2
    n = spec.n
    Sigma = np.eye(n) / n
    prev = None
    recent = []
    for _ in range(max_iters):
        T = Acl @ Sigma @ Acl.T + s2 * (Abcl @ Sigma @ Abcl.T)
        ratio = float(np.trace(T))
        if ratio == 0.0:
            return 0.0
        Sigma = T / ratio
        Sigma = 0.5 * (Sigma + Sigma.T)
        if prev is not None and abs(ratio - prev) <= tol * ratio:
            return math.sqrt(ratio)
        prev = ratio
        recent.append(ratio)
        if len(recent) > 100:
            recent.pop(0)
    bracket = (math.sqrt(min(recent)), math.sqrt(max(recent)))
    raise OracleNonConvergence(
        f"power iteration did not settle in {max_iters} steps; rate in {bracket}",
        bracket=bracket,
    )


def delta_monotone_report(certificate, rtol=1e-9):
    """Indices where ``Delta`` fails to decrease along decreasing tau.

    Empirically ``Delta`` shrinks as tau decreases; this is reported, not
    enforced. A warning is emitted when violations exist.
    """
    deltas = [s.Delta for s in certificate.per_tau]
    bad = [i for i in range(1, len(deltas)) if deltas[i] > deltas[i - 1] * (1.0 + rtol)]
    if bad:
        warnings.warn(f"Delta increased at {len(bad)} stage(s): {bad}", RuntimeWarning, stacklevel=2)
    return bad
