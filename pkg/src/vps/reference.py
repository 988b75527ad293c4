"""Closed-form oracle measures.

Pure closed forms with no solver dependency, so that test failures against
them localize to the solver.  Covers the constant-variance (circular law)
profile and the block atom profile.
"""

from __future__ import annotations

import math


def circular_F(variance: float, s: float) -> float:
    """Radial CDF of the circular law scaled to variance V: min(s^2 / V, 1)."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    if s < 0:
        raise ValueError("s must be nonnegative")
    return min(s * s / variance, 1.0)


def circular_density(variance: float, z_modulus: float) -> float:
    """Uniform density 1 / (pi V) on the disk of radius sqrt(V)."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    if z_modulus * z_modulus >= variance:
        return 0.0
    return 1.0 / (math.pi * variance)


def block_atom_edge(k: int) -> float:
    """Support radius rho* = (k - 1)^{1/4} / sqrt(k) of the block atom measure."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return (k - 1) ** 0.25 / math.sqrt(k)


def block_atom_F(k: int, s: float) -> float:
    """Radial CDF (1/k) sqrt((k-2)^2 + 4 k^2 s^4) up to the edge, then 1.

    Carries an atom of weight 1 - 2/k at zero.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s > block_atom_edge(k):
        return 1.0
    return math.sqrt((k - 2) ** 2 + 4.0 * k * k * s ** 4) / k


def block_atom_density(k: int, z_modulus: float) -> float:
    """Radial density (4k/pi) |z|^2 / sqrt((k-2)^2 + 4 k^2 |z|^4) inside the
    support, 0 beyond it."""
    if k < 2:
        raise ValueError("k must be >= 2")
    z = abs(z_modulus)
    if z > block_atom_edge(k):
        return 0.0
    return (4.0 * k / math.pi) * z * z / math.sqrt((k - 2) ** 2 + 4.0 * k * k * z ** 4)


def rank_deficiency_bound(k: int, m: int) -> int:
    """Deterministic kernel dimension m (k - 2) of every sample of the
    block atom model with block size m."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    return m * (k - 2)
