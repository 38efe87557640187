"""Riccati-type blocks, the one-step value operator and its regularized form.

For a quadratic value ``h(x) = x^T P x`` one step of the dynamics gives

    E[h(x_next)] = x^T (A^T P A + s^2 A_bar^T P A_bar) x + 2 x^T S(P) u + u^T R(P) u

with ``R(P) = B^T P B + s^2 B_bar^T P B_bar`` and
``S(P) = A^T P B + s^2 A_bar^T P B_bar`` (``s = sigma``). Minimizing over
``u`` gives ``u = -K(P) x`` with ``K(P) = R(P)^{-1} S(P)^T`` and the value
``x^T Phi(P) x``. The expectation over the noise is exact: only E[w] = 0 and
E[w^2] = sigma^2 enter.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import Degenerate, DegenerateTrace, NotPositiveDefinite, NotPSD

PSD_TOL = 1e-10

__all__ = [
    "RiccatiBlocks",
    "LipschitzConstants",
    "blocks",
    "phi",
    "gain",
    "hat_phi",
    "delta_tau",
    "constants",
]


@dataclass(frozen=True)
class RiccatiBlocks:
    R: np.ndarray
    S: np.ndarray
    Phi: np.ndarray
    K: np.ndarray
    singular_R: bool = False


@dataclass(frozen=True)
class LipschitzConstants:
    alpha_A: float
    alpha_S: float
    alpha_R: float
    c_R: float
    L_Phi: float
    C_Phi: float
    Lambda_tau: float
    delta_tau: float


def _assemble(spec, P):
    s2 = spec.sigma ** 2
    A, Ab, B, Bb = spec.A, spec.A_bar, spec.B, spec.B_bar
    PB = P @ B
    PBb = P @ Bb
    R = B.T @ PB + s2 * (Bb.T @ PBb)
    R = 0.5 * (R + R.T)
    S = A.T @ PB + s2 * (Ab.T @ PBb)
    drift = A.T @ P @ A + s2 * (Ab.T @ P @ Ab)
    singular = False
    try:
        K = linalg.solve_spd(R, S.T)
    except NotPositiveDefinite:
        # PSD boundary: fall back to the Moore-Penrose inverse
        K = linalg.pinv_psd(R) @ S.T
        singular = True
    Phi = drift - S @ K
    Phi = 0.5 * (Phi + Phi.T)
    return RiccatiBlocks(R=R, S=S, Phi=Phi, K=K, singular_R=singular)


def _check_psd(P, n):
    P = linalg.as_symmetric(P, "P")
    if P.shape != (n, n):
        raise ValueError(f"P has shape {P.shape}, expected {(n, n)}")
    scale = max(1.0, float(np.max(np.abs(P))))
    lmin = linalg.lambda_min(P)
    if lmin < -PSD_TOL * scale:
        raise NotPSD(f"lambda_min(P) = {lmin:.3e}")
    return P


def blocks(spec, P):
    """Evaluate ``R(P)``, ``S(P)``, ``Phi(P)`` and the minimizing gain ``K(P)``.

    If ``R(P)`` is singular (only possible for ``P`` on the boundary of the
    PSD cone, or for a degenerate spec) the pseudo-inverse replaces the
    inverse and ``singular_R`` is set.
    """
    return _assemble(spec, _check_psd(P, spec.n))


def phi(spec, P):
    """The one-step optimal value operator ``Phi(P)``."""
    return blocks(spec, P).Phi


def gain(spec, P):
    """Feedback gain ``K(P) = R(P)^{-1} S(P)^T`` (an m x n array).

    Raises
    ------
    NotPositiveDefinite
        If ``R(P)`` is not positive definite.
    """
    b = blocks(spec, P)
    if b.singular_R:
        raise NotPositiveDefinite("R(P) is singular; the gain is not unique")
    return b.K


def hat_phi(spec, P, tau):
    """One step of the regularized, trace-normalized value operator.

    Computes ``Y = (1 - tau) Phi(P) + (tau / n) I`` and returns
    ``(Y / trace(Y), trace(Y))``. At a fixed point the second value is the
    growth factor ``gamma`` used by the upper bound.

    `P` is expected to be PSD with unit trace; only the trace is checked here
    since this function sits in the inner solver loop.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau!r}")
    P = np.asarray(P, dtype=float)
    if abs(np.trace(P) - 1.0) > 1e-10:
        raise ValueError(f"P must have unit trace, got {np.trace(P)!r}")
    next_P, trace_Y, _ = _hat_phi(spec, P, tau)
    return next_P, trace_Y


def _hat_phi(spec, P, tau):
    b = _assemble(spec, P)
    n = spec.n
    Y = (1.0 - tau) * b.Phi
    Y[np.diag_indices(n)] += tau / n
    trace_Y = float(np.trace(Y))
    if not (np.isfinite(trace_Y) and trace_Y > 0.0):
        raise DegenerateTrace(f"trace of regularized update is {trace_Y!r}")
    return Y / trace_Y, trace_Y, b


def delta_tau(spec, tau, C_A=None):
    """Eigenvalue floor ``(tau/n) / ((1 - tau) C_A + tau)`` of the fixed-point slice."""
    if C_A is None:
        C_A = spec.C_A
    return (tau / spec.n) / ((1.0 - tau) * C_A + tau)


def constants(spec, tau, a=None):
    """Explicit Lipschitz and contraction constants for the regularized operator.

    Parameters
    ----------
    spec : SystemSpec
    tau : float
        Regularization weight in (0, 1).
    a : float, optional
        Eigenvalue floor of the slice on which ``L_Phi`` and ``C_Phi`` are
        evaluated. Defaults to ``delta_tau``. ``Lambda_tau`` always uses
        ``delta_tau``.

    Notes
    -----
    ``Lambda_tau < 1`` is sufficient, not necessary, for contraction; solver
    convergence is judged from residuals.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau!r}")
    r0_min = linalg.lambda_min(spec.R0)
    if not r0_min > 0.0:
        raise Degenerate(f"lambda_min(R0) = {r0_min:.3e}")

    s2 = spec.sigma ** 2
    nA, nAb = linalg.spectral_norm(spec.A), linalg.spectral_norm(spec.A_bar)
    nB, nBb = linalg.spectral_norm(spec.B), linalg.spectral_norm(spec.B_bar)
    alpha_A = nA ** 2 + s2 * nAb ** 2
    alpha_S = nA * nB + s2 * nAb * nBb
    alpha_R = nB ** 2 + s2 * nBb ** 2

    def lipschitz(floor):
        c_R = 1.0 / (floor * r0_min)
        L = alpha_A + 2.0 * alpha_S ** 2 * c_R + alpha_S ** 2 * alpha_R * c_R ** 2
        C = alpha_A + alpha_S ** 2 * c_R
        return c_R, L, C

    n = spec.n
    d = delta_tau(spec, tau)
    floor = d if a is None else a
    if not floor > 0.0:
        raise ValueError(f"slice floor a must be > 0, got {a!r}")
    c_R, L_Phi, C_Phi = lipschitz(floor)

    _, L_d, C_d = lipschitz(d)
    Lambda = (1.0 - tau) * L_d / tau + (
        (1.0 - tau) * ((1.0 - tau) * C_d + tau / n) * n * L_d / tau ** 2
    )
    return LipschitzConstants(
        alpha_A=alpha_A,
        alpha_S=alpha_S,
        alpha_R=alpha_R,
        c_R=c_R,
        L_Phi=L_Phi,
        C_Phi=C_Phi,
        Lambda_tau=Lambda,
        delta_tau=d,
    )
