"""Shared domain types, profile validation and numeric configuration."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np


class ProfileError(ValueError):
    """Invalid variance profile input."""


class NonSquareError(ProfileError):
    pass


class NegativeEntryError(ProfileError):
    pass


class NonFiniteError(ProfileError):
    pass


class AllZeroError(ProfileError):
    pass


class NoConvergenceError(RuntimeError):
    """An iterative solve exhausted its iteration budget."""


class RankDeficientError(RuntimeError):
    """The derivative linear system is numerically rank deficient."""


class OutsideSupportError(ValueError):
    """Requested radius lies outside the support of the measure."""


class InsufficientGridError(ValueError):
    """The radial grid does not reach close enough to zero."""


@dataclass(frozen=True)
class VarianceProfile:
    """A validated n-by-n grid of entry variances sigma_ij^2.

    ``normalized`` is the matrix V with V_ij = sigma_ij^2 / n, which is what
    every self-consistent equation in this package consumes.
    """

    n: int
    variances: np.ndarray
    normalized: np.ndarray

    @property
    def std_devs(self) -> np.ndarray:
        """Entrywise standard deviations sigma_ij."""
        return np.sqrt(self.variances)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.variances - self.variances.T) <= tol))


def validate_profile(raw_grid) -> VarianceProfile:
    """Check a raw rectangular grid of variances and build a profile.

    Raises NonSquareError, NegativeEntryError, NonFiniteError or
    AllZeroError on invalid input.
    """
    arr = np.array(raw_grid, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
        raise NonSquareError(f"expected a square grid, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("profile contains non-finite entries")
    if np.any(arr < 0):
        raise NegativeEntryError("profile contains negative variances")
    if not np.any(arr > 0):
        raise AllZeroError("profile is identically zero")
    n = arr.shape[0]
    variances = arr.copy()
    variances.setflags(write=False)
    normalized = arr / n
    normalized.setflags(write=False)
    return VarianceProfile(n=n, variances=variances, normalized=normalized)


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and annealing schedule for the fixed-point solver.

    Defaults follow the package-wide conventions: sup-norm fixed point
    tolerance 1e-12, geometric regularization decay by halving from 1 down
    to 1e-10, averaged iteration with weight 1/2.
    """

    fixed_point_tol: float = 1e-12
    max_iters: int = 200_000
    t_initial: float = 1.0
    t_decay: float = 0.5
    t_min: float = 1e-10
    zero_threshold: float = 1e-8
    averaging_weight: float = 0.5

    def __post_init__(self):
        if self.fixed_point_tol <= 0:
            raise ValueError("fixed_point_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if self.t_initial <= 0 or self.t_min <= 0:
            raise ValueError("t_initial and t_min must be positive")
        if not self.t_min < self.t_initial:
            raise ValueError("t_min must be smaller than t_initial")
        if not 0.0 < self.t_decay < 1.0:
            raise ValueError("t_decay must lie in (0, 1)")
        if not 0.0 < self.averaging_weight <= 1.0:
            raise ValueError("averaging_weight must lie in (0, 1]")
        if self.zero_threshold <= 0:
            raise ValueError("zero_threshold must be positive")


@dataclass(frozen=True)
class MESolution:
    """A solution (q, q_tilde) of the master equations at one (s, t).

    t == 0 denotes the regularization limit.  For the trivial regime the
    vectors are exact zeros.
    """

    s: float
    t: float
    q: np.ndarray
    q_tilde: np.ndarray
    iterations: int
    residual: float

    @property
    def is_trivial(self) -> bool:
        return bool(np.all(self.q == 0.0) and np.all(self.q_tilde == 0.0))


@dataclass(frozen=True)
class RadialMeasure:
    """Radially symmetric measure: atom at zero plus CDF/density on a grid."""

    s_grid: np.ndarray
    F: np.ndarray
    f: np.ndarray
    atom_at_zero: float
    support_radius: float


# ---------------------------------------------------------------------------
# File formats: profile CSV (n x n decimal values, no header) and flat
# key=value config files.

def write_profile_csv(profile: VarianceProfile, path) -> None:
    """Write variances as CSV, shortest round-trip decimal representation."""
    with open(path, "w") as fh:
        for row in profile.variances:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_profile_csv(path) -> VarianceProfile:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ProfileError(f"unparseable profile row: {line!r}") from exc
    if not rows:
        raise ProfileError(f"empty profile file: {path}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise NonSquareError("profile rows have inconsistent lengths")
    return validate_profile(rows)


def read_config(path) -> SolverConfig:
    """Read a flat key=value config file with SolverConfig field names."""
    fields = {f.name: f.type for f in dataclasses.fields(SolverConfig)}
    kwargs = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw!r}")
            key, value = (tok.strip() for tok in line.split("=", 1))
            if key not in fields:
                raise ValueError(f"unknown config key: {key}")
            kwargs[key] = int(value) if key == "max_iters" else float(value)
    return SolverConfig(**kwargs)


def default_s_grid(support_radius: float, count: int = 200) -> np.ndarray:
    """Uniform radial grid on (0, 1.05 * support_radius]."""
    top = 1.05 * support_radius
    return top * np.arange(1, count + 1) / count


def sqrt_rho(rho: float) -> float:
    return math.sqrt(rho)
