"""Radial measure construction from solved master equation curves.

Builds the radially symmetric deterministic equivalent measure: its CDF
F(s) = 1 - (1/n) <q(s), V q_tilde(s)>, its density (exact derivative or
finite differences), the atom at zero and the density at zero.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    InsufficientGridError,
    OutsideSupportError,
    RadialMeasure,
    SolverConfig,
    VarianceProfile,
)
from .mesolver import MECurve, anneal_to_limit, derivative_s2, solve_at_zero, solve_curve


def _cdf_value(profile: VarianceProfile, sol) -> float:
    V = profile.normalized
    return 1.0 - float(sol.q @ (V @ sol.q_tilde)) / profile.n


def cdf(curve: MECurve) -> np.ndarray:
    """CDF values F(s) over the curve's grid, clamped to [0, 1] and set to
    exactly 1 beyond the support radius sqrt(rho)."""
    profile = curve.profile
    F = np.array([_cdf_value(profile, sol) for sol in curve.solutions])
    F = np.clip(F, 0.0, 1.0)
    F[curve.s_grid >= math.sqrt(curve.rho)] = 1.0
    return np.maximum.accumulate(F)


def _nearest_index(grid: np.ndarray, s: float) -> int:
    return int(np.argmin(np.abs(grid - s)))


def density(curve: MECurve, z_modulus: float, mode: str = "exact") -> float:
    """Radial density f(|z|) at a single modulus inside the support.

    mode "exact" solves at |z| and differentiates the master equations;
    mode "fd" takes a central difference of F on the curve's grid, so its
    resolution is tied to the grid spacing.
    """
    s = float(z_modulus)
    edge = math.sqrt(curve.rho)
    if not 0.0 < s < edge:
        raise OutsideSupportError(f"|z| = {s} outside (0, {edge})")
    if mode == "exact":
        i = _nearest_index(curve.s_grid, s)
        warm = curve.solutions[i]
        sol = anneal_to_limit(curve.profile, s, curve.config,
                              warm_start=None if warm.is_trivial else warm)
        if sol.is_trivial:
            return 0.0
        dq, dqt = derivative_s2(curve.profile, sol)
        V = curve.profile.normalized
        inner = float(dq @ (V @ sol.q_tilde)) + float(sol.q @ (V @ dqt))
        return max(0.0, -inner / (math.pi * curve.profile.n))
    if mode == "fd":
        grid = curve.s_grid
        F = cdf(curve)
        i = min(max(_nearest_index(grid, s), 1), len(grid) - 2)
        dFds = (F[i + 1] - F[i - 1]) / (grid[i + 1] - grid[i - 1])
        return max(0.0, dFds / (2.0 * math.pi * grid[i]))
    raise ValueError(f"unknown density mode: {mode!r}")


def grid_density(curve: MECurve, mode: str = "fd") -> np.ndarray:
    """Density along the full grid; fd mode uses np.gradient of the CDF,
    exact mode differentiates the equations point by point."""
    grid = curve.s_grid
    edge = math.sqrt(curve.rho)
    if mode == "fd":
        F = cdf(curve)
        f = np.gradient(F, grid) / (2.0 * math.pi * grid)
    elif mode == "exact":
        f = np.empty(len(grid))
        V = curve.profile.normalized
        n = curve.profile.n
        for i, sol in enumerate(curve.solutions):
            if sol.is_trivial:
                f[i] = 0.0
                continue
            dq, dqt = derivative_s2(curve.profile, sol)
            inner = float(dq @ (V @ sol.q_tilde)) + float(sol.q @ (V @ dqt))
            f[i] = -inner / (math.pi * n)
    else:
        raise ValueError(f"unknown density mode: {mode!r}")
    f = np.maximum(f, 0.0)
    f[grid >= edge] = 0.0
    return f


def density_at_zero(profile: VarianceProfile,
                    config: SolverConfig | None = None):
    """Density at z = 0: (f0, cross_check).

    f0 = (1/(pi n)) sum_i q_i(0) qt_i(0); the cross check evaluates the
    equivalent form (1/(pi n)) sum_i 1 / ((V^T q)_i (V qt)_i).
    """
    sol = solve_at_zero(profile, config)
    V = profile.normalized
    n = profile.n
    f0 = float(np.sum(sol.q * sol.q_tilde)) / (math.pi * n)
    cross = float(np.sum(1.0 / ((V.T @ sol.q) * (V @ sol.q_tilde)))) / (math.pi * n)
    return f0, cross


def atom_at_zero(curve: MECurve) -> float:
    """Point mass at zero: limit of F(s) as s -> 0, extrapolated linearly
    in s^2 from the two smallest grid points."""
    grid = curve.s_grid
    if len(grid) < 2 or grid[1] > 0.25 * math.sqrt(curve.rho):
        raise InsufficientGridError(
            "need at least two grid points close to zero for the atom")
    F1 = _cdf_value(curve.profile, curve.solutions[0])
    F2 = _cdf_value(curve.profile, curve.solutions[1])
    s1sq, s2sq = grid[0] ** 2, grid[1] ** 2
    F0 = F1 - s1sq * (F2 - F1) / (s2sq - s1sq)
    return float(min(max(F0, 0.0), 1.0))


def density_lower_bound(profile: VarianceProfile, sol) -> float:
    """Diagnostic ratio sum(q qt / Psi) / sum(Psi q^2 qt^2) at a nontrivial
    limit solution; positive whenever the density is positive.  Exposed raw,
    with no normalization convention attached."""
    if sol.is_trivial:
        raise ValueError("lower bound requires a nontrivial solution")
    V = profile.normalized
    q, qt = sol.q, sol.q_tilde
    inv_psi = sol.s ** 2 + (V @ qt) * (V.T @ q)
    num = float(np.sum(inv_psi * q * qt))
    den = float(np.sum((q ** 2) * (qt ** 2) / inv_psi))
    return num / den


def build_measure(profile: VarianceProfile, s_grid=None,
                  config: SolverConfig | None = None,
                  mode: str = "fd", workers: int = 1) -> RadialMeasure:
    """Solve the curve and assemble the full radial measure.

    Density over the grid uses finite differences by default; pass
    mode="exact" for the derivative-system density at every point.
    """
    from .core import default_s_grid
    from .profiles import spectral_radius

    config = config or SolverConfig()
    rho = spectral_radius(profile)
    if s_grid is None:
        s_grid = default_s_grid(math.sqrt(rho))
    curve = solve_curve(profile, s_grid, config, workers=workers)
    F = cdf(curve)
    f = grid_density(curve, mode=mode)
    atom = atom_at_zero(curve)
    return RadialMeasure(s_grid=curve.s_grid, F=F, f=f,
                         atom_at_zero=atom, support_radius=math.sqrt(rho))
