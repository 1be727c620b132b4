"""Tests for the LP/SDP kernels, including the independent dual-route oracles
(vertex enumeration for LPs, phase-grid brute force for small SDPs)."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotabeam import (LpProblem, SdpProblem, SolveStatus, SolverTolerances,
                      principal_eigpair, solve_lp, solve_sdp)
from rotabeam.errors import StructuralError

TOL = SolverTolerances()


def lp_vertex_oracle(prob: LpProblem):
    """Enumerate all intersections of constraint/bound hyperplanes, keep the
    feasible ones, return the best objective. Only for tiny problems."""
    dim = prob.objective.shape[0]
    planes = [(np.asarray(r), b) for r, b in prob.ineq_constraints]
    for i, (lo, hi) in enumerate(prob.box_bounds):
        e = np.zeros(dim)
        e[i] = 1.0
        if np.isfinite(hi):
            planes.append((e.copy(), hi))
        if np.isfinite(lo):
            planes.append((-e, -lo))
    best = -math.inf
    for combo in itertools.combinations(range(len(planes)), dim):
        a = np.array([planes[i][0] for i in combo])
        b = np.array([planes[i][1] for i in combo])
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        x = np.linalg.solve(a, b)
        feasible = all(r @ x <= rhs + 1e-9 for r, rhs in planes)
        if feasible:
            best = max(best, float(prob.objective @ x))
    return best


def phase_grid_best(a_list, resolution=1000):
    """Best min_q |a_q^H w|^2 over w = (1/sqrt(2)) [1, e^{j chi}]."""
    chis = np.linspace(0, 2 * math.pi, resolution, endpoint=False)
    ws = np.stack([np.ones_like(chis), np.exp(1j * chis)]) / math.sqrt(2)
    vals = np.full(chis.shape, np.inf)
    for a in a_list:
        vals = np.minimum(vals, np.abs(a.conj() @ ws) ** 2)
    return float(vals.max())


class TestSolveLp:
    def test_two_upper_bounds(self):
        prob = LpProblem(np.array([1.0]),
                         [(np.array([1.0]), 3.0), (np.array([1.0]), 5.0)],
                         [(None, None)])
        x, obj, status = solve_lp(prob, TOL)
        assert status is SolveStatus.OPTIMAL
        assert obj == pytest.approx(3.0, abs=1e-9)

    def test_zero_gradient_surrogate(self):
        # max tau s.t. tau <= g0 + 0 . (phi - phi0), phi boxed
        g0 = 7.25
        prob = LpProblem(
            np.array([0.0, 0.0, 1.0]),
            [(np.array([0.0, 0.0, 1.0]), g0)],
            [(-1.0, 1.0), (-1.0, 1.0), (None, None)])
        _, obj, status = solve_lp(prob, TOL)
        assert status is SolveStatus.OPTIMAL
        assert obj == pytest.approx(g0, abs=1e-9)

    def test_infeasible_reported(self):
        prob = LpProblem(np.array([1.0]),
                         [(np.array([1.0]), 0.0), (np.array([-1.0]), -1.0)],
                         [(None, None)])
        x, obj, status = solve_lp(prob, TOL)
        assert status is SolveStatus.INFEASIBLE

    def test_unbounded_reported(self):
        prob = LpProblem(np.array([1.0]), [], [(None, None)])
        _, _, status = solve_lp(prob, TOL)
        assert status is SolveStatus.UNBOUNDED

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            LpProblem(np.array([1.0, 2.0]), [(np.array([1.0]), 0.0)],
                      [(None, None), (None, None)])

    def test_vertex_enumeration_equivalence(self):
        rng = np.random.default_rng(20240811)
        checked = 0
        for _ in range(200):
            dim = int(rng.integers(1, 4))
            n_cons = int(rng.integers(1, 7))
            prob = LpProblem(
                rng.normal(size=dim),
                [(rng.normal(size=dim), float(rng.normal())) for _ in range(n_cons)],
                [(-3.0, 3.0)] * dim)
            ref = lp_vertex_oracle(prob)
            x, obj, status = solve_lp(prob, TOL)
            if status is not SolveStatus.OPTIMAL or not np.isfinite(ref):
                continue
            assert obj == pytest.approx(ref, abs=1e-8)
            checked += 1
        assert checked >= 100

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_random_feasible_points_never_beat_optimum(self, seed):
        rng = np.random.default_rng(seed)
        dim = 3
        prob = LpProblem(rng.normal(size=dim),
                         [(rng.normal(size=dim), float(rng.uniform(0.5, 2.0)))
                          for _ in range(5)],
                         [(-2.0, 2.0)] * dim)
        x, obj, status = solve_lp(prob, TOL)
        if status is not SolveStatus.OPTIMAL:
            return
        pts = rng.uniform(-2.0, 2.0, size=(1000, dim))
        rows = np.array([r for r, _ in prob.ineq_constraints])
        rhs = np.array([b for _, b in prob.ineq_constraints])
        feas = np.all(pts @ rows.T <= rhs + 1e-12, axis=1)
        if feas.any():
            assert (pts[feas] @ prob.objective).max() <= obj + 1e-7


class TestSolveSdp:
    def test_dim_one(self):
        prob = SdpProblem(1, np.zeros((1, 1)),
                          [np.array([[3.0]]), np.array([[2.0]])], 1.0)
        w, tau, status = solve_sdp(prob, TOL)
        assert status is SolveStatus.OPTIMAL
        assert w[0, 0] == pytest.approx(1.0, abs=1e-6)
        assert tau == pytest.approx(2.0, abs=1e-6)

    def test_single_direction_matched_filter(self):
        a = np.array([2.0, 2.0], dtype=complex)
        prob = SdpProblem(2, np.zeros((2, 2)), [np.outer(a, a.conj())], 0.5)
        _, tau, status = solve_sdp(prob, TOL)
        assert status is SolveStatus.OPTIMAL
        assert tau == pytest.approx(8.0, rel=1e-5)

    def test_against_phase_grid(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            # two rank-one constraints: the N = 2 relaxation is tight there
            # up to the phase-grid resolution
            a_list = [rng.normal(size=2) + 1j * rng.normal(size=2)
                      for _ in range(2)]
            prob = SdpProblem(2, np.zeros((2, 2)),
                              [np.outer(a, a.conj()) for a in a_list], 0.5)
            _, tau, status = solve_sdp(prob, TOL)
            assert status is SolveStatus.OPTIMAL
            ref = phase_grid_best(a_list)
            assert tau == pytest.approx(ref, rel=0.02)
            # relaxation upper-bounds the unit-modulus optimum
            assert tau >= ref - TOL.feas_tol

    def test_feasibility_contract(self):
        rng = np.random.default_rng(3)
        a_list = [rng.normal(size=4) + 1j * rng.normal(size=4)
                  for _ in range(6)]
        mats = [np.outer(a, a.conj()) for a in a_list]
        prob = SdpProblem(4, np.zeros((4, 4)), mats, 0.25)
        w, tau, status = solve_sdp(prob, TOL)
        assert status is SolveStatus.OPTIMAL
        evals = np.linalg.eigvalsh(w)
        assert evals[0] >= -TOL.feas_tol
        assert np.abs(np.real(np.diag(w)) - 0.25).max() <= TOL.feas_tol
        for m in mats:
            assert np.real(np.trace(m @ w)) >= tau - 1e-5

    def test_non_hermitian_rejected(self):
        bad = np.array([[1.0, 2.0], [3.0, 1.0]])
        with pytest.raises(StructuralError):
            SdpProblem(2, bad, [], 0.5, tau_coupled=False)

    def test_linear_objective_steers_solution(self):
        # penalizing everything orthogonal to a chosen direction must
        # concentrate the matrix on that direction
        rng = np.random.default_rng(0)
        n = 4
        u = np.exp(1j * rng.uniform(0, 2 * math.pi, n)) / math.sqrt(n)
        c = -50.0 * (np.eye(n) - np.outer(u, u.conj()))
        prob = SdpProblem(n, 0.5 * (c + c.conj().T),
                          [np.outer(u, u.conj())], 1 / n)
        w, _, status = solve_sdp(prob, TOL)
        assert status is SolveStatus.OPTIMAL
        evals = np.linalg.eigvalsh(w)
        assert evals[-1] / evals.sum() == pytest.approx(1.0, abs=1e-6)


class TestPrincipalEigpair:
    def test_identity(self):
        lam, v = principal_eigpair(np.eye(3))
        assert lam == pytest.approx(1.0)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        k = int(np.argmax(np.abs(v)))
        assert v[k].real >= 0 and abs(v[k].imag) < 1e-12

    def test_diagonal(self):
        lam, v = principal_eigpair(np.diag([5.0, 2.0, 1.0]))
        assert lam == pytest.approx(5.0)
        assert abs(v[0]) == pytest.approx(1.0, abs=1e-12)

    def test_rank_one_reconstruction(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(2, 8))
            w_vec = np.exp(1j * rng.uniform(0, 2 * math.pi, n)) / math.sqrt(n)
            lam, v = principal_eigpair(np.outer(w_vec, w_vec.conj()))
            assert lam == pytest.approx(1.0, abs=1e-10)
            # up to global phase
            corr = abs(v.conj() @ w_vec)
            assert corr == pytest.approx(1.0, abs=1e-10)

    def test_non_hermitian_rejected(self):
        with pytest.raises(StructuralError):
            principal_eigpair(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_residual_bound(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        w = 0.5 * (m + m.conj().T)
        lam, v = principal_eigpair(w)
        res = np.linalg.norm(w @ v - lam * v)
        assert res <= 1e-8 * np.linalg.norm(w)
