import math

import numpy as np
import pytest

from vps.core import NoConvergenceError, SolverConfig, validate_profile
from vps.mesolver import (
    anneal_to_limit,
    derivative_s2,
    psi,
    solve_at_zero,
    solve_curve,
    solve_regularized,
)
from vps.profiles import build_block_atom, build_separable


def constant_profile(n, variance=1.0):
    return validate_profile(variance * np.ones((n, n)))


def scalar_regularized_root(s, t):
    """Bisection oracle for r = (r+t) / (s^2 + (r+t)^2), the constant
    profile reduction of the regularized system."""
    def g(r):
        return (r + t) / (s * s + (r + t) ** 2) - r
    lo, hi = 0.0, 1.0 / t
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestPsi:
    def test_constant_ones(self):
        p = constant_profile(8)
        out = psi(p, np.ones(8), np.ones(8), s=1.0, t=0.0)
        assert np.allclose(out, 0.5)

    def test_zero_vectors_large_s(self):
        p = constant_profile(8)
        out = psi(p, np.zeros(8), np.zeros(8), s=2.0, t=0.0)
        assert np.allclose(out, 0.25)

    def test_separable_at_zero(self):
        p, _ = build_separable([1.0, 2.0], [3.0, 1.0])
        q = np.ones(2)
        # (V qt)_i (V^T q)_i entrywise with V = outer(d, dt)/n
        V = p.normalized
        expected = 1.0 / ((V @ q) * (V.T @ q))
        assert np.allclose(psi(p, q, q, s=0.0, t=0.0), expected)

    def test_degenerate_raises(self):
        p = constant_profile(4)
        with pytest.raises(ZeroDivisionError):
            psi(p, np.zeros(4), np.zeros(4), s=0.0, t=0.0)


class TestSolveRegularized:
    def test_matches_scalar_oracle(self):
        p = constant_profile(16)
        sol = solve_regularized(p, s=1.0, t=0.1)
        assert np.allclose(sol.q, scalar_regularized_root(1.0, 0.1), atol=1e-10)
        assert np.allclose(sol.q, sol.q_tilde)

    def test_small_t_approaches_limit(self):
        p = constant_profile(16)
        sol = solve_regularized(p, s=0.6, t=1e-8)
        assert np.allclose(sol.q, 0.8, atol=1e-6)

    def test_large_s_first_order(self):
        p = constant_profile(8)
        t = 1e-3
        sol = solve_regularized(p, s=30.0, t=t)
        assert np.allclose(sol.q, t / 900.0, rtol=1e-2)

    def test_rejects_nonpositive_t(self):
        with pytest.raises(ValueError):
            solve_regularized(constant_profile(4), s=0.5, t=0.0)

    def test_trace_identity(self):
        rng = np.random.default_rng(0)
        p = validate_profile(rng.uniform(0.5, 1.5, size=(10, 10)))
        sol = solve_regularized(p, s=0.7, t=1e-6)
        assert abs(sol.q.sum() - sol.q_tilde.sum()) <= 10 * 1e-9

    def test_one_over_t_bound(self):
        p = constant_profile(8)
        for t in (1.0, 1e-2, 1e-4):
            sol = solve_regularized(p, s=0.3, t=t)
            assert sol.q.max() <= 1.0 / t * (1 + 1e-9)


class TestAnnealToLimit:
    def test_scalar_limit(self):
        p = constant_profile(16)
        sol = anneal_to_limit(p, 0.6)
        assert np.allclose(sol.q, 0.8, atol=1e-8)
        assert sol.t == 0.0

    def test_trivial_regime_exact_zeros(self):
        p = constant_profile(16)
        sol = anneal_to_limit(p, 1.5)
        assert sol.is_trivial
        assert np.all(sol.q == 0.0)

    def test_just_supercritical_is_trivial(self):
        # close above the edge the annealed residue scales with t and can
        # sit above zero_threshold; the decay signature must catch it
        p = constant_profile(16)
        sol = anneal_to_limit(p, 1.0029)
        assert sol.is_trivial

    def test_just_subcritical_nontrivial(self):
        p = constant_profile(16)
        sol = anneal_to_limit(p, 0.95)
        assert not sol.is_trivial
        assert np.allclose(sol.q, math.sqrt(1 - 0.95 ** 2), atol=1e-7)

    def test_block_atom_two_values(self):
        p = build_block_atom(3, 1)
        sol = anneal_to_limit(p, 0.3)
        # first block carries one value, blocks 2..k another
        q1, q2 = sol.q[0], sol.q[1]
        assert abs(sol.q[2] - q2) < 1e-10
        assert abs(q1 - q2) > 1e-3
        # verify the fixed point by direct residual of the defining equations
        V = p.normalized
        r1 = V.T @ sol.q / (0.09 + (V @ sol.q_tilde) * (V.T @ sol.q))
        assert np.allclose(r1, sol.q, atol=1e-9)

    def test_rejects_nonpositive_s(self):
        with pytest.raises(ValueError):
            anneal_to_limit(constant_profile(4), 0.0)

    def test_symmetry_q_equals_qtilde(self):
        rng = np.random.default_rng(5)
        a = rng.uniform(0.5, 1.5, size=(8, 8))
        p = validate_profile((a + a.T) / 2)
        sol = anneal_to_limit(p, 0.5)
        assert np.abs(sol.q - sol.q_tilde).max() <= 1e-10

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(6)
        a = rng.uniform(0.5, 1.5, size=(8, 8))
        p = validate_profile(a)
        perm = rng.permutation(8)
        pp = validate_profile(a[np.ix_(perm, perm)])
        sol = anneal_to_limit(p, 0.6)
        sol_p = anneal_to_limit(pp, 0.6)
        assert np.allclose(sol.q[perm], sol_p.q, atol=1e-9)
        assert np.allclose(sol.q_tilde[perm], sol_p.q_tilde, atol=1e-9)


class TestSolveAtZero:
    def test_constant_profile_ones(self):
        sol = solve_at_zero(constant_profile(12))
        assert np.allclose(sol.q, 1.0, atol=1e-8)
        assert np.allclose(sol.q_tilde, 1.0, atol=1e-8)

    def test_variance_four(self):
        sol = solve_at_zero(constant_profile(12, variance=4.0))
        assert np.allclose(sol.q, 0.5, atol=1e-8)

    def test_balance_relations(self):
        rng = np.random.default_rng(8)
        p = validate_profile(rng.uniform(0.5, 2.0, size=(10, 10)))
        sol = solve_at_zero(p)
        V = p.normalized
        assert np.abs(sol.q * (V @ sol.q_tilde) - 1.0).max() <= 1e-7
        assert np.abs(sol.q_tilde * (V.T @ sol.q) - 1.0).max() <= 1e-7

    def test_scaled_profile_doubly_stochastic(self):
        rng = np.random.default_rng(9)
        d = rng.uniform(0.5, 2.0, size=6)
        p, _ = build_separable(d, d)
        sol = solve_at_zero(p)
        scaled = sol.q[:, None] * p.normalized * sol.q_tilde[None, :]
        assert np.allclose(scaled.sum(axis=1), 1.0, atol=1e-8)
        assert np.allclose(scaled.sum(axis=0), 1.0, atol=1e-8)

    def test_atom_profile_raises(self):
        with pytest.raises(NoConvergenceError):
            solve_at_zero(build_block_atom(3, 3),
                          SolverConfig(max_iters=20_000))


class TestDerivative:
    def test_scalar_closed_form(self):
        p = constant_profile(16)
        sol = anneal_to_limit(p, 0.6)
        dq, dqt = derivative_s2(p, sol)
        assert np.allclose(dq, -0.625, atol=1e-8)    # -1/(2 sqrt(1-s^2))
        assert np.allclose(dqt, -0.625, atol=1e-8)

    def test_small_s_limit(self):
        p = constant_profile(16)
        sol = anneal_to_limit(p, 0.05)
        dq, _ = derivative_s2(p, sol)
        assert np.allclose(dq, -0.5, atol=1e-3)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(3):
            p = validate_profile(rng.uniform(0.5, 1.5, size=(8, 8)))
            s = 0.5
            sol = anneal_to_limit(p, s)
            dq, dqt = derivative_s2(p, sol)
            h = 1e-4
            hi = anneal_to_limit(p, math.sqrt(s * s + h))
            lo = anneal_to_limit(p, math.sqrt(s * s - h))
            fd_q = (hi.q - lo.q) / (2 * h)
            assert np.abs(dq - fd_q).max() <= 1e-5

    def test_rejects_trivial(self):
        p = constant_profile(8)
        sol = anneal_to_limit(p, 2.0)
        with pytest.raises(ValueError):
            derivative_s2(p, sol)


class TestSolveCurve:
    def test_scalar_curve(self):
        p = constant_profile(16)
        grid = np.arange(0.2, 0.95, 0.1)
        curve = solve_curve(p, grid)
        for s, sol in zip(grid, curve.solutions):
            assert np.allclose(sol.q, math.sqrt(1 - s * s), atol=1e-8)

    def test_supercritical_point_zeroed(self):
        p = constant_profile(16)
        curve = solve_curve(p, np.array([0.5, 1.1]))
        assert curve.solutions[1].is_trivial
        assert not curve.solutions[0].is_trivial

    def test_inner_product_nonincreasing(self):
        p = build_block_atom(3, 5)
        grid = np.linspace(0.05, 0.75, 20)
        curve = solve_curve(p, grid)
        V = p.normalized
        inner = [sol.q @ (V @ sol.q_tilde) / p.n for sol in curve.solutions]
        assert np.all(np.diff(inner) <= 1e-10)

    def test_rejects_bad_grid(self):
        p = constant_profile(4)
        with pytest.raises(ValueError):
            solve_curve(p, np.array([0.5, 0.4]))
        with pytest.raises(ValueError):
            solve_curve(p, np.array([]))

    def test_parallel_matches_sequential(self):
        p = constant_profile(12)
        grid = np.linspace(0.3, 1.2, 8)
        seq = solve_curve(p, grid)
        par = solve_curve(p, grid, workers=4)
        for a, b in zip(seq.solutions, par.solutions):
            assert np.allclose(a.q, b.q, atol=1e-9)
