"""Fixed-point solver for the regularized master equations.

The 2n unknowns (q, q_tilde) at radial parameter s and regularization t are
found by the averaged iteration

    r      <- (1 - w) r      + w * Psi * (V^T r      + t)
    r_tilde<- (1 - w) r_tilde + w * Psi * (V  r_tilde + t)

with Psi_i = 1 / (s^2 + ((V r_tilde)_i + t)((V^T r)_i + t)).  The t -> 0
limit is approached by geometric annealing with warm starts; the trivial
regime (s above the support radius) is detected after annealing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    MESolution,
    NoConvergenceError,
    RankDeficientError,
    SolverConfig,
    VarianceProfile,
)


@dataclass(frozen=True)
class MECurve:
    """Master equation solutions along an increasing radial grid."""

    profile: VarianceProfile
    s_grid: np.ndarray
    solutions: tuple
    rho: float
    config: SolverConfig
    q0: MESolution | None = None
    failed_indices: tuple = ()


def psi(profile: VarianceProfile, q, q_tilde, s: float, t: float) -> np.ndarray:
    """Entrywise weights Psi_i = 1 / (s^2 + ((V qt)_i + t)((V^T q)_i + t))."""
    V = profile.normalized
    phi = V @ q_tilde + t
    phit = V.T @ q + t
    denom = s * s + phi * phit
    if np.any(denom == 0.0):
        raise ZeroDivisionError("degenerate Psi denominator (s = t = 0 with zero vectors)")
    return 1.0 / denom


def _positivity_cap(x, dx):
    """Largest g such that x + g * dx >= 0.1 * x componentwise."""
    neg = dx < 0.0
    if not neg.any():
        return math.inf
    return float(np.min(0.9 * x[neg] / -dx[neg]))


def _step(V, q, qt, s2, t):
    phi = V @ qt + t
    phit = V.T @ q + t
    p = 1.0 / (s2 + phi * phit)
    return p * phit, p * phi


def _rebalance(q, qt):
    """Gauge rescaling (q, qt) -> (c q, qt / c) enforcing sum(q) = sum(qt).

    The rescaling is an exact symmetry of the t = 0 equations and the trace
    identity picks the balanced member; without it the iteration restores
    balance only at a rate proportional to t.
    """
    sq = q.sum()
    sqt = qt.sum()
    if sq <= 0.0 or sqt <= 0.0:
        return q, qt
    c = math.sqrt(sqt / sq)
    return c * q, qt / c


def _newton_refine(V, q, qt, s2, t, tol, max_steps=40):
    """Newton iteration on x - I(x) = 0 from a fixed-point iterate.

    Used when plain iteration slows down near the critical radius; the
    Jacobian of I reuses the structure of the derivative linear system.
    Returns (q, qt, residual, steps) with residual measured as the
    fixed-point step size, or None when Newton stalls or leaves the
    positive cone.
    """
    n = len(q)
    eye = np.eye(2 * n)
    best = math.inf
    for step in range(1, max_steps + 1):
        a = V @ qt + t
        b = V.T @ q + t
        p = 1.0 / (s2 + a * b)
        Fq = p * b - q
        Fqt = p * a - qt
        residual = max(np.abs(Fq).max(), np.abs(Fqt).max())
        scale = max(1.0, q.max(), qt.max())
        if residual <= tol * scale:
            return q, qt, residual, step
        if residual > 0.9 * best:
            return None
        best = residual
        p2 = p * p
        J = np.block([
            [s2 * p2[:, None] * V.T, -(p2 * b * b)[:, None] * V],
            [-(p2 * a * a)[:, None] * V.T, s2 * p2[:, None] * V],
        ])
        try:
            dx = np.linalg.solve(eye - J, np.concatenate([Fq, Fqt]))
        except np.linalg.LinAlgError:
            return None
        nq = q + dx[:n]
        nqt = qt + dx[n:]
        if nq.min() <= 0.0 or nqt.min() <= 0.0:
            return None
        q, qt = _rebalance(nq, nqt)
    return None


def solve_regularized(profile: VarianceProfile, s: float, t: float,
                      config: SolverConfig | None = None,
                      warm_start: MESolution | None = None) -> MESolution:
    """Unique positive solution of the regularized system at (s, t), t > 0."""
    if t <= 0:
        raise ValueError("t must be positive; use anneal_to_limit for the t -> 0 limit")
    config = config or SolverConfig()
    V = profile.normalized
    n = profile.n
    if warm_start is not None:
        q = np.array(warm_start.q, dtype=float)
        qt = np.array(warm_start.q_tilde, dtype=float)
    else:
        q = np.ones(n)
        qt = np.ones(n)
    w = config.averaging_weight
    s2 = s * s
    residual = math.inf
    # block Aitken extrapolation: near the support edge the contraction
    # rate approaches 1 and plain iteration stalls; summing the geometric
    # tail every `block` steps restores fast convergence
    block = 32
    last_q, last_qt = q.copy(), qt.copy()
    prev_norm = None
    for it in range(1, config.max_iters + 1):
        nq, nqt = _step(V, q, qt, s2, t)
        residual = max(np.abs(nq - q).max(), np.abs(nqt - qt).max())
        q = (1.0 - w) * q + w * nq
        qt = (1.0 - w) * qt + w * nqt
        q, qt = _rebalance(q, qt)
        # relative criterion: solutions grow like 1/t, pushing the floating
        # point residual floor above any fixed absolute tolerance
        scale = max(1.0, q.max(), qt.max())
        if residual <= config.fixed_point_tol * scale:
            break
        if it % 2048 == 0:
            # persistent slow convergence: hand the iterate to Newton
            refined = _newton_refine(V, q, qt, s2, t, config.fixed_point_tol)
            if refined is not None:
                q, qt, residual, _ = refined
                break
        if it % block == 0:
            dq = q - last_q
            dqt = qt - last_qt
            norm = max(np.abs(dq).max(), np.abs(dqt).max())
            if prev_norm is not None and 0.0 < norm < prev_norm:
                r = norm / prev_norm
                if r > 0.2:
                    # cap the gain so the extrapolated iterate keeps a
                    # positive margin in every component
                    gain = r / (1.0 - r)
                    gain = min(gain, _positivity_cap(q, dq), _positivity_cap(qt, dqt))
                    if gain > 0.0:
                        q = q + gain * dq
                        qt = qt + gain * dqt
                        norm = None
            prev_norm = norm
            last_q, last_qt = q.copy(), qt.copy()
    else:
        raise NoConvergenceError(
            f"no fixed point after {config.max_iters} iterations at s={s}, t={t} "
            f"(residual {residual:.3e})")
    # direct consequence of the defining equations
    bound = 1.0 / t + 1e-9 / t
    if q.max() > bound or qt.max() > bound:
        raise NoConvergenceError(f"solution violates the 1/t bound at s={s}, t={t}")
    return MESolution(s=s, t=t, q=q, q_tilde=qt, iterations=it, residual=float(residual))


def _t_schedule(config: SolverConfig):
    ts = []
    t = config.t_initial
    while t > config.t_min:
        ts.append(t)
        t *= config.t_decay
    ts.append(config.t_min)
    return ts


def _anneal(profile: VarianceProfile, s: float, config: SolverConfig,
            warm_start: MESolution | None):
    """Run the full t schedule at fixed s; returns (last solution, total
    iterations, per-stage sup norms).

    Each stage is warm-started by linear extrapolation in t from the two
    previous stages (r(t) is smooth in t), clipped away from zero to keep
    the iterate strictly positive.
    """
    sol = warm_start
    prev = None  # previous-stage solution at this same s
    iters = 0
    norms = []
    for t in _t_schedule(config):
        start = sol
        if prev is not None and sol.t > 0.0 and prev.t > sol.t:
            frac = (t - sol.t) / (sol.t - prev.t)
            gq = np.maximum(sol.q + frac * (sol.q - prev.q), 0.05 * sol.q)
            gqt = np.maximum(sol.q_tilde + frac * (sol.q_tilde - prev.q_tilde),
                             0.05 * sol.q_tilde)
            start = MESolution(s=s, t=t, q=gq, q_tilde=gqt,
                               iterations=0, residual=math.inf)
        nxt = solve_regularized(profile, s, t, config, warm_start=start)
        iters += nxt.iterations
        norms.append(max(nxt.q.max(), nxt.q_tilde.max()))
        # only same-s regularized stages feed the extrapolation
        prev = sol if (sol is not None and sol.t > 0.0) else None
        sol = nxt
    return sol, iters, norms


def anneal_to_limit(profile: VarianceProfile, s: float,
                    config: SolverConfig | None = None,
                    warm_start: MESolution | None = None) -> MESolution:
    """t -> 0 limit q(s) by annealing t geometrically with warm starts.

    Returns exact zeros in the trivial regime.  A just-supercritical s leaves
    a residue of order t_min / (s^2 - rho) that can exceed zero_threshold, so
    triviality is also declared when the final norm is still decaying
    proportionally to t across the last annealing stages.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    config = config or SolverConfig()
    sol, iters, norms = _anneal(profile, s, config, warm_start)
    norm = norms[-1]
    # trivial iff the final norm still tracks t: the ratio of the last two
    # stage norms is closer to the ratio of their t values than to 1
    ts = _t_schedule(config)
    decaying = False
    if len(norms) >= 2 and norms[-2] > 0:
        ratio_n = norms[-1] / norms[-2]
        ratio_t = ts[-1] / ts[-2]
        decaying = ratio_n < 0.5 * (1.0 + ratio_t)
    if norm < config.zero_threshold or (decaying and norm < 1e-3):
        z = np.zeros(profile.n)
        return MESolution(s=s, t=0.0, q=z, q_tilde=z.copy(),
                          iterations=iters, residual=sol.residual)
    return MESolution(s=s, t=0.0, q=sol.q, q_tilde=sol.q_tilde,
                      iterations=iters, residual=sol.residual)


def solve_at_zero(profile: VarianceProfile,
                  config: SolverConfig | None = None) -> MESolution:
    """Boundary solution q(0) = lim_{t->0} r(0, t).

    The limit exists for block fully indecomposable profiles and satisfies
    q_i(0) (V qt(0))_i = 1 and qt_i(0) (V^T q(0))_i = 1.  Profiles with an
    atom at zero have no limit; the anneal then either exhausts its budget
    or leaves a large balance residual, and NoConvergenceError is raised.
    """
    config = config or SolverConfig()
    V = profile.normalized
    sol, iters, _ = _anneal(profile, 0.0, config, None)
    balance = max(np.abs(sol.q * (V @ sol.q_tilde) - 1.0).max(),
                  np.abs(sol.q_tilde * (V.T @ sol.q) - 1.0).max())
    if balance > max(1e-6, 10 * profile.n * config.fixed_point_tol):
        raise NoConvergenceError(
            f"t -> 0 limit at s = 0 did not stabilize (balance residual {balance:.3e}); "
            "the profile may carry an atom at zero")
    return MESolution(s=0.0, t=0.0, q=sol.q, q_tilde=sol.q_tilde,
                      iterations=iters, residual=float(balance))


def derivative_s2(profile: VarianceProfile, sol: MESolution):
    """Exact derivative (d q / d s^2, d qt / d s^2) at a nontrivial solution.

    Solves the overdetermined (2n+1) x 2n least-squares system whose first
    2n rows linearize the master equations and whose last row enforces the
    trace constraint sum(dq) = sum(dqt).
    """
    if sol.is_trivial or sol.s <= 0:
        raise ValueError("derivative requires a nontrivial solution at s > 0")
    V = profile.normalized
    n = profile.n
    q, qt, s = sol.q, sol.q_tilde, sol.s
    phi = V @ qt
    phit = V.T @ q
    p = 1.0 / (s * s + phi * phit)
    s2 = s * s
    M = np.block([
        [s2 * (p ** 2)[:, None] * V.T, -(q ** 2)[:, None] * V],
        [-(qt ** 2)[:, None] * V.T, s2 * (p ** 2)[:, None] * V],
    ])
    trace_row = np.concatenate([np.ones(n), -np.ones(n)])
    A = np.vstack([np.eye(2 * n) - M, trace_row])
    b = -np.concatenate([p * q, p * qt, [0.0]])
    x, _, rank, sv = np.linalg.lstsq(A, b, rcond=None)
    if rank < 2 * n or sv[-1] < 1e-13 * sv[0]:
        raise RankDeficientError(f"derivative system rank {rank} < {2 * n}")
    return x[:n], x[n:]


def solve_curve(profile: VarianceProfile, s_grid,
                config: SolverConfig | None = None,
                include_zero: bool = False,
                workers: int = 1) -> MECurve:
    """Solve the annealed limit along an increasing radial grid.

    Default mode sweeps from the largest s downward, warm-starting each
    point from its neighbor (solutions grow as s decreases).  With
    workers > 1 the grid is solved cold-start in parallel instead.
    """
    from .profiles import spectral_radius

    config = config or SolverConfig()
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or len(s_grid) == 0:
        raise ValueError("s_grid must be a nonempty vector")
    if np.any(np.diff(s_grid) <= 0) or s_grid[0] <= 0:
        raise ValueError("s_grid must be strictly increasing and positive")
    rho = spectral_radius(profile)

    failed = []

    def _point(i, warm):
        # per-point failures are recorded, not fatal: the placeholder keeps
        # the grid aligned and is flagged by residual = inf
        try:
            return anneal_to_limit(profile, s_grid[i], config, warm_start=warm)
        except NoConvergenceError:
            failed.append(i)
            z = np.zeros(profile.n)
            return MESolution(s=float(s_grid[i]), t=0.0, q=z, q_tilde=z.copy(),
                              iterations=config.max_iters, residual=math.inf)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(lambda i: _point(i, None), range(len(s_grid))))
    else:
        sols = [None] * len(s_grid)
        prev = None
        for i in range(len(s_grid) - 1, -1, -1):
            warm = None if (prev is None or prev.is_trivial
                            or not math.isfinite(prev.residual)) else prev
            prev = _point(i, warm)
            sols[i] = prev

    q0 = None
    if include_zero:
        q0 = solve_at_zero(profile, config)
    return MECurve(profile=profile, s_grid=s_grid, solutions=tuple(sols),
                   rho=rho, config=config, q0=q0,
                   failed_indices=tuple(sorted(failed)))
