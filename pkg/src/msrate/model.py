"""Problem instances: the system matrices, noise level and their validation.

The controlled system is

    x_{k+1} = (A + A_bar w_k) x_k + (B + B_bar w_k) u_k,   w_k ~ N(0, sigma^2)

with a scalar noise channel shared by the drift and input matrices.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InvalidSigma, ParseError

CONFIG_KEYS = ("n", "m", "A", "A_bar", "B", "B_bar", "sigma")

__all__ = [
    "SystemSpec",
    "ValidationReport",
    "validate",
    "load_spec",
    "spec_from_dict",
    "spec_to_dict",
    "dump_spec",
    "dumps_spec",
    "scale_A",
    "with_sigma",
    "config_hash",
]


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Matrices ``(A, A_bar, B, B_bar)`` and noise standard deviation `sigma`.

    Arrays are copied and marked read-only on construction.
    """

    A: np.ndarray
    A_bar: np.ndarray
    B: np.ndarray
    B_bar: np.ndarray
    sigma: float
    n: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        mats = {}
        for name in ("A", "A_bar", "B", "B_bar"):
            value = getattr(self, name)
            try:
                arr = np.array(value, dtype=float)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{name} is not a numeric matrix") from exc
            if arr.ndim == 1 and name in ("B", "B_bar"):
                arr = arr.reshape(-1, 1)
            if arr.ndim != 2 or arr.size == 0:
                raise DimensionMismatch(f"{name} must be a non-empty 2D matrix, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ParseError(f"{name} has non-finite entries")
            mats[name] = arr

        n = mats["A"].shape[0]
        m = mats["B"].shape[1]
        expected = {"A": (n, n), "A_bar": (n, n), "B": (n, m), "B_bar": (n, m)}
        for name, shape in expected.items():
            if mats[name].shape != shape:
                raise DimensionMismatch(
                    f"{name} has shape {mats[name].shape}, expected {shape}"
                )
        sigma = float(self.sigma)
        if not (np.isfinite(sigma) and sigma > 0.0):
            raise InvalidSigma(f"sigma must be > 0, got {self.sigma!r}")

        for name, arr in mats.items():
            object.__setattr__(self, name, _frozen(arr))
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)

    @property
    def R0(self):
        """``B^T B + sigma^2 B_bar^T B_bar``."""
        s2 = self.sigma ** 2
        R0 = self.B.T @ self.B + s2 * self.B_bar.T @ self.B_bar
        return 0.5 * (R0 + R0.T)

    @property
    def C_A(self):
        """``lambda_max(A A^T + sigma^2 A_bar A_bar^T)``."""
        s2 = self.sigma ** 2
        return float(linalg.lambda_max(self.A @ self.A.T + s2 * self.A_bar @ self.A_bar.T))

    def closed_loop(self, K):
        """Closed-loop pair ``(A - B K, A_bar - B_bar K)`` for ``u = -K x``."""
        K = np.atleast_2d(np.asarray(K, dtype=float))
        if K.shape != (self.m, self.n):
            raise DimensionMismatch(f"gain has shape {K.shape}, expected {(self.m, self.n)}")
        return self.A - self.B @ K, self.A_bar - self.B_bar @ K

    def __eq__(self, other):
        if not isinstance(other, SystemSpec):
            return NotImplemented
        return self.sigma == other.sigma and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("A", "A_bar", "B", "B_bar")
        )

    __hash__ = None


@dataclass(frozen=True)
class ValidationReport:
    nondegenerate: bool
    stacked_rank: int
    C_A: float
    R0_min_eig: float

    def lines(self):
        return [
            f"nondegenerate: {str(self.nondegenerate).lower()}",
            f"stacked_rank: {self.stacked_rank}",
            f"C_A: {self.C_A:.17g}",
            f"R0_min_eig: {self.R0_min_eig:.17g}",
        ]


def validate(spec):
    """Check the nondegeneracy condition: ``[B; sigma*B_bar]`` has full column rank.

    Also reports the constants ``C_A`` and ``lambda_min(R0)`` used by the
    contraction analysis.
    """
    stacked = np.vstack([spec.B, spec.sigma * spec.B_bar])
    rank = linalg.column_rank(stacked)
    return ValidationReport(
        nondegenerate=rank == spec.m,
        stacked_rank=rank,
        C_A=spec.C_A,
        R0_min_eig=float(linalg.lambda_min(spec.R0)),
    )


def spec_from_dict(data):
    """Build a :class:`SystemSpec` from the JSON config mapping.

    The mapping must contain exactly the keys ``n, m, A, A_bar, B, B_bar,
    sigma``; ``n`` and ``m`` are cross-checked against the matrix shapes.
    """
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ParseError(f"unknown config keys: {unknown}")
    missing = [k for k in CONFIG_KEYS if k not in data]
    if missing:
        raise ParseError(f"missing config keys: {missing}")

    for key in ("n", "m"):
        if not isinstance(data[key], int) or isinstance(data[key], bool) or data[key] < 1:
            raise ParseError(f"{key} must be a positive integer")
    sigma = data["sigma"]
    if not isinstance(sigma, (int, float)) or isinstance(sigma, bool):
        raise ParseError("sigma must be a number")
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be > 0, got {sigma!r}")

    mats = {}
    for key in ("A", "A_bar", "B", "B_bar"):
        rows = data[key]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ParseError(f"{key} must be an array of row arrays")
        if len({len(r) for r in rows}) > 1:
            raise DimensionMismatch(f"{key} has ragged rows")
        try:
            mats[key] = np.array(rows, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{key} has non-numeric entries") from exc

    n, m = data["n"], data["m"]
    expected = {"A": (n, n), "A_bar": (n, n), "B": (n, m), "B_bar": (n, m)}
    for key, shape in expected.items():
        if mats[key].shape != shape:
            raise DimensionMismatch(f"{key} has shape {mats[key].shape}, expected {shape}")
    return SystemSpec(sigma=float(sigma), **mats)


def load_spec(path):
    """Read a JSON config file into a :class:`SystemSpec`."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return spec_from_dict(data)


def spec_to_dict(spec):
    return {
        "n": spec.n,
        "m": spec.m,
        "A": spec.A.tolist(),
        "A_bar": spec.A_bar.tolist(),
        "B": spec.B.tolist(),
        "B_bar": spec.B_bar.tolist(),
        "sigma": spec.sigma,
    }


def dumps_spec(spec):
    """JSON text for `spec`, one matrix row per line."""
    # json writes floats with repr(), which round-trips exactly
    data = spec_to_dict(spec)
    lines = []
    for key in CONFIG_KEYS:
        value = data[key]
        if isinstance(value, list):
            rows = ",\n    ".join(json.dumps(row) for row in value)
            lines.append(f'  "{key}": [\n    {rows}\n  ]')
        else:
            lines.append(f'  "{key}": {json.dumps(value)}')
    return "{\n" + ",\n".join(lines) + "\n}\n"


def dump_spec(spec, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_spec(spec))


def config_hash(spec):
    """SHA-256 of the canonical JSON encoding of `spec`."""
    blob = json.dumps(spec_to_dict(spec), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def scale_A(spec, theta):
    """Copy of `spec` with ``A`` replaced by ``theta * A``."""
    if not theta > 0:
        raise ValueError(f"theta must be > 0, got {theta!r}")
    return SystemSpec(spec.A * theta, spec.A_bar, spec.B, spec.B_bar, spec.sigma)


def with_sigma(spec, sigma):
    """Copy of `spec` with a different noise level."""
    return SystemSpec(spec.A, spec.A_bar, spec.B, spec.B_bar, sigma)
