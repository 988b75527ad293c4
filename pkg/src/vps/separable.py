"""Scalar reductions for separable profiles sigma_ij^2 = d_i * dt_j.

For such profiles the 2n master equations collapse to one scalar equation
for u(s) in [0, 1]:

    (1/n) sum_i d_i dt_i / (s^2 + d_i dt_i u) = 1,

with F(s) = 1 - u(s).  Sampled variants replace the sum by an integral over
[0, 1] evaluated by composite trapezoid quadrature.  Girko's Sombrero
distribution covers the two-level case in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import OutsideSupportError
from .profiles import SeparableProfile


class NoRootError(RuntimeError):
    """The scalar equation has no root in [0, 1]; the input is corrupt."""


class QuadratureUnstableError(RuntimeError):
    """The quadrature integrand varies too sharply between adjacent nodes."""


@dataclass(frozen=True)
class SeparableSolution:
    s: float
    u: float
    converged: bool


def _solve_u_from_products(prods: np.ndarray, weights: np.ndarray, s: float,
                           tol: float) -> SeparableSolution:
    """Root of sum_i w_i * p_i / (s^2 + p_i u) = 1 on u in [0, 1].

    prods holds the pointwise products d_i * dt_i, weights the averaging
    weights (1/n for the discrete case, quadrature weights otherwise).
    The left side is strictly decreasing in u.
    """
    s2 = s * s
    rho = float(np.sum(weights * prods))

    def lhs(u):
        return float(np.sum(weights * prods / (s2 + prods * u)))

    if s2 >= rho:
        return SeparableSolution(s=s, u=0.0, converged=True)
    # lhs(0) = rho / s^2 > 1 >= lhs at u = 1 iff s is inside the support
    if lhs(1.0) > 1.0:
        raise NoRootError(f"no root in [0, 1] at s = {s}")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if lhs(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return SeparableSolution(s=s, u=0.5 * (lo + hi), converged=True)


def solve_u(sep: SeparableProfile, s: float, tol: float = 1e-14) -> SeparableSolution:
    """u(s) for a discrete separable profile; u(0) = 1, u = 0 for s >= sqrt(rho)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    prods = sep.d * sep.d_tilde
    weights = np.full(sep.n, 1.0 / sep.n)
    if s == 0.0:
        return SeparableSolution(s=0.0, u=1.0, converged=True)
    return _solve_u_from_products(prods, weights, s, tol)


def _density_from_products(prods, weights, s2, u) -> float:
    denom2 = (s2 + prods * u) ** 2
    num = float(np.sum(weights * prods / denom2))
    den = float(np.sum(weights * prods ** 2 / denom2))
    return num / (math.pi * den)


def separable_density(sep: SeparableProfile, z_modulus: float,
                      tol: float = 1e-14) -> float:
    """Radial density at |z| inside the support (0, sqrt(rho))."""
    s = float(z_modulus)
    if not 0.0 < s < math.sqrt(sep.rho):
        raise OutsideSupportError(f"|z| = {s} outside (0, {math.sqrt(sep.rho)})")
    u = solve_u(sep, s, tol).u
    prods = sep.d * sep.d_tilde
    weights = np.full(sep.n, 1.0 / sep.n)
    return _density_from_products(prods, weights, s * s, u)


def separable_density_zero(sep: SeparableProfile) -> float:
    """f(0) = (1/(n pi)) sum_i 1 / (d_i dt_i), exact."""
    return float(np.sum(1.0 / (sep.d * sep.d_tilde))) / (sep.n * math.pi)


def _quad_nodes(d_func, dtilde_func, quad_points: int):
    """Trapezoid nodes, weights and products for the sampled problem."""
    if quad_points < 2:
        raise ValueError("quad_points must be >= 2")
    x = np.linspace(0.0, 1.0, quad_points)
    d = np.array([float(d_func(xi)) for xi in x])
    dt = np.array([float(dtilde_func(xi)) for xi in x])
    if np.any(d < 0) or np.any(dt < 0):
        raise ValueError("d and d_tilde must be nonnegative on [0, 1]")
    prods = d * dt
    jump = np.abs(np.diff(prods)).max()
    if prods.max() > 0 and jump > 0.5 * prods.max():
        raise QuadratureUnstableError(
            "integrand varies too sharply between adjacent quadrature nodes; "
            "increase quad_points")
    h = x[1] - x[0]
    weights = np.full(quad_points, h)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return prods, weights


def sampled_rho(d_func, dtilde_func, quad_points: int = 2000) -> float:
    """rho_inf = integral of d(x) dt(x) over [0, 1] by trapezoid quadrature."""
    prods, weights = _quad_nodes(d_func, dtilde_func, quad_points)
    return float(np.sum(weights * prods))


def sampled_separable_u(d_func, dtilde_func, s: float,
                        quad_points: int = 2000,
                        tol: float = 1e-14) -> SeparableSolution:
    """u_inf(s) solving integral d dt / (s^2 + d dt u) dx = 1."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return SeparableSolution(s=0.0, u=1.0, converged=True)
    prods, weights = _quad_nodes(d_func, dtilde_func, quad_points)
    return _solve_u_from_products(prods, weights, s, tol)


def sampled_separable_density(d_func, dtilde_func, z_modulus: float,
                              quad_points: int = 2000,
                              tol: float = 1e-14) -> float:
    """Limit radial density for a sampled separable profile."""
    s = float(z_modulus)
    prods, weights = _quad_nodes(d_func, dtilde_func, quad_points)
    rho = float(np.sum(weights * prods))
    if not 0.0 < s < math.sqrt(rho):
        raise OutsideSupportError(f"|z| = {s} outside (0, {math.sqrt(rho)})")
    u = _solve_u_from_products(prods, weights, s, tol).u
    return _density_from_products(prods, weights, s * s, u)


def sombrero_density(a: float, b: float, alpha: float, z_modulus: float) -> float:
    """Girko's Sombrero radial density for the two-level separable profile
    taking value a on an alpha fraction of indices and b on the rest.

    Support radius is sqrt(alpha a + beta b) with beta = 1 - alpha; the
    density is 0 beyond it.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    beta = 1.0 - alpha
    rho = alpha * a + beta * b
    z2 = z_modulus * z_modulus
    if z2 >= rho:
        return 0.0
    c = a * b * (2.0 * rho - (a + b))
    num = z2 * (a - b) ** 2 + c
    root = math.sqrt(z2 * z2 * (a - b) ** 2 + 2.0 * z2 * c + (a * b) ** 2)
    return ((a + b) - num / root) / (2.0 * math.pi * a * b)
