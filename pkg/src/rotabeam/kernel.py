"""Dense convex kernels sized for this problem class.

The LP path wraps scipy's HiGHS; the small Hermitian SDP path wraps a
parametrized cvxpy program solved by Clarabel (interior point), compiled
once per (dim, n_constraints) shape and reused across the penalty loop.
Both sit behind explicit problem/tolerance contracts so callers never see
the backing solver.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import cvxpy as cp
import numpy as np
from scipy.optimize import linprog

from .errors import StructuralError

HERMITIAN_TOL = 1e-12


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITER_LIMIT = "iteration_limit"
    UNBOUNDED = "unbounded"


@dataclass
class SolverTolerances:
    feas_tol: float = 1e-7
    gap_tol: float = 1e-6
    max_iters: int = 200

    def __post_init__(self):
        if self.feas_tol <= 0 or self.gap_tol <= 0 or self.max_iters <= 0:
            raise StructuralError("solver tolerances must be positive")


@dataclass
class LpProblem:
    """maximize objective . x  s.t.  row . x <= rhs, box bounds."""

    objective: np.ndarray
    ineq_constraints: list  # of (row, rhs)
    box_bounds: list  # of (lower, upper), may be +-inf

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        dim = self.objective.shape[0]
        rows = []
        for row, rhs in self.ineq_constraints:
            row = np.asarray(row, dtype=float)
            if row.shape != (dim,):
                raise StructuralError("constraint row dimension mismatch")
            rows.append((row, float(rhs)))
        self.ineq_constraints = rows
        if len(self.box_bounds) != dim:
            raise StructuralError("box_bounds length mismatch")
        bounds = []
        for lo, hi in self.box_bounds:
            lo = -math.inf if lo is None else float(lo)
            hi = math.inf if hi is None else float(hi)
            if lo > hi:
                raise StructuralError("box lower bound exceeds upper bound")
            bounds.append((lo, hi))
        self.box_bounds = bounds


def solve_lp(prob: LpProblem, tol: SolverTolerances):
    """Returns (x, objective, status)."""
    c = -prob.objective
    if prob.ineq_constraints:
        a_ub = np.array([r for r, _ in prob.ineq_constraints])
        b_ub = np.array([b for _, b in prob.ineq_constraints])
    else:
        a_ub, b_ub = None, None
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=prob.box_bounds,
                  method="highs",
                  options={"primal_feasibility_tolerance": min(tol.feas_tol, 1e-9),
                           "dual_feasibility_tolerance": min(tol.gap_tol, 1e-9)})
    if res.status == 0:
        return np.asarray(res.x), float(prob.objective @ res.x), SolveStatus.OPTIMAL
    if res.status == 2:
        return None, -math.inf, SolveStatus.INFEASIBLE
    if res.status == 3:
        return None, math.inf, SolveStatus.UNBOUNDED
    x = np.asarray(res.x) if res.x is not None else None
    obj = float(prob.objective @ x) if x is not None else -math.inf
    return x, obj, SolveStatus.ITER_LIMIT


@dataclass
class SdpProblem:
    """Hermitian matrix variable W (side length dim) with fixed diagonal.

    maximize  tau + Re Tr(C W)   s.t.  Re Tr(A_q W) >= tau for all q,
                                       diag(W) = diag_value,  W >= 0,
    with the tau terms present only when tau_coupled is True.
    """

    dim: int
    linear_objective_matrix: np.ndarray
    gain_matrices: list
    diag_value: float
    tau_coupled: bool = True

    def __post_init__(self):
        self.linear_objective_matrix = _check_hermitian(
            np.asarray(self.linear_objective_matrix, dtype=complex), self.dim)
        self.gain_matrices = [
            _check_hermitian(np.asarray(a, dtype=complex), self.dim)
            for a in self.gain_matrices]
        if not self.tau_coupled and self.gain_matrices:
            raise StructuralError("gain constraints require tau_coupled=True")


def _check_hermitian(m: np.ndarray, dim: int) -> np.ndarray:
    if m.shape != (dim, dim):
        raise StructuralError("matrix dimension mismatch")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL * scale:
        raise StructuralError("matrix is not Hermitian")
    return 0.5 * (m + m.conj().T)


class _CompiledSdp:
    """Parametrized cvxpy problem cached per (dim, n_constraints, tau_coupled)."""

    def __init__(self, dim: int, n_cons: int, tau_coupled: bool):
        self.w = cp.Variable((dim, dim), hermitian=True)
        self.c_flat = cp.Parameter((1, dim * dim), complex=True)
        self.diag_value = cp.Parameter()
        w_vec = cp.vec(self.w, order="F")
        cons = [self.w >> 0, cp.diag(self.w) == self.diag_value]
        obj = cp.real(self.c_flat @ w_vec)[0]
        self.tau = None
        self.a_flat = None
        if tau_coupled:
            self.tau = cp.Variable()
            obj = obj + self.tau
            if n_cons:
                self.a_flat = cp.Parameter((n_cons, dim * dim), complex=True)
                cons.append(cp.real(self.a_flat @ w_vec) >= self.tau)
        self.problem = cp.Problem(cp.Maximize(obj), cons)


_SDP_CACHE: dict = {}


def _trace_rows(mats) -> np.ndarray:
    """Rows r with r . vec(W, order='F') = Tr(M W)."""
    return np.stack([m.reshape(-1) for m in mats])  # row-major flatten


def solve_sdp(prob: SdpProblem, tol: SolverTolerances):
    """Returns (W, tau, status); tau is nan when tau_coupled is False."""
    key = (prob.dim, len(prob.gain_matrices), prob.tau_coupled)
    compiled = _SDP_CACHE.get(key)
    if compiled is None:
        compiled = _CompiledSdp(*key)
        _SDP_CACHE[key] = compiled
    compiled.c_flat.value = _trace_rows([prob.linear_objective_matrix])
    compiled.diag_value.value = prob.diag_value
    if compiled.a_flat is not None:
        compiled.a_flat.value = _trace_rows(prob.gain_matrices)
    p = compiled.problem
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            # warm_start would reuse the previous solver's data layout,
            # which breaks when parameter sparsity changes between calls.
            # The reduced tolerances let heavily-penalized subproblems exit
            # with an almost-solved iterate instead of a numerical error;
            # the feasibility screens below decide whether to accept it.
            p.solve(solver=cp.CLARABEL, max_iter=tol.max_iters,
                    warm_start=False,
                    reduced_tol_gap_abs=1e-3, reduced_tol_gap_rel=1e-3,
                    reduced_tol_feas=1e-2, reduced_tol_ktratio=1e-2)
        except cp.error.SolverError:
            p.solve(solver=cp.SCS, eps=min(tol.feas_tol, tol.gap_tol),
                    max_iters=20000)
    status_map = {
        cp.OPTIMAL: SolveStatus.OPTIMAL,
        cp.OPTIMAL_INACCURATE: SolveStatus.ITER_LIMIT,
        cp.INFEASIBLE: SolveStatus.INFEASIBLE,
        cp.INFEASIBLE_INACCURATE: SolveStatus.INFEASIBLE,
    }
    status = status_map.get(p.status, SolveStatus.ITER_LIMIT)
    if (p.status == cp.OPTIMAL_INACCURATE and compiled.w.value is not None
            and _iterate_strict(compiled, prob, tol)):
        # the interior point stopped on its reduced-accuracy criterion but
        # the iterate already meets our feasibility contract
        status = SolveStatus.OPTIMAL
    if compiled.w.value is not None and not _iterate_sane(compiled, prob):
        # non-converged interior-point iterates can be arbitrarily bad;
        # fall back to a first-order solve before reporting failure
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                p.solve(solver=cp.SCS, eps=1e-6, max_iters=20000)
            except cp.error.SolverError:
                pass
        status = status_map.get(p.status, SolveStatus.ITER_LIMIT)
        if compiled.w.value is None or not _iterate_sane(compiled, prob):
            return None, math.nan, SolveStatus.ITER_LIMIT
    if compiled.w.value is None:
        return None, math.nan, status
    w_val = 0.5 * (compiled.w.value + compiled.w.value.conj().T)
    tau_val = float(compiled.tau.value) if compiled.tau is not None else math.nan
    return w_val, tau_val, status


def _iterate_strict(compiled: _CompiledSdp, prob: SdpProblem,
                    tol: SolverTolerances) -> bool:
    """Feasibility contract check used to accept reduced-accuracy statuses."""
    w_val = compiled.w.value
    if not np.all(np.isfinite(w_val)):
        return False
    w_h = 0.5 * (w_val + w_val.conj().T)
    if np.abs(np.real(np.diag(w_h)) - prob.diag_value).max() > 10 * tol.feas_tol:
        return False
    if np.linalg.eigvalsh(w_h)[0] < -10 * tol.feas_tol:
        return False
    if compiled.tau is not None:
        tau_val = compiled.tau.value
        if tau_val is None or not np.isfinite(tau_val):
            return False
        if prob.gain_matrices:
            traces = np.real(_trace_rows(prob.gain_matrices)
                             @ w_h.T.reshape(-1))
            if traces.min() < tau_val - 1e-5:
                return False
    return True


def _iterate_sane(compiled: _CompiledSdp, prob: SdpProblem) -> bool:
    """Loose feasibility screen rejecting divergent iterates."""
    w_val = compiled.w.value
    if not np.all(np.isfinite(w_val)):
        return False
    if np.abs(np.real(np.diag(w_val)) - prob.diag_value).max() > 1e-4:
        return False
    if np.linalg.eigvalsh(0.5 * (w_val + w_val.conj().T))[0] < -1e-4:
        return False
    if compiled.tau is not None and not np.isfinite(compiled.tau.value):
        return False
    return True


def principal_eigpair(w: np.ndarray):
    """Largest eigenvalue and its eigenvector, phase-normalized so the
    largest-magnitude entry is real nonnegative."""
    w = np.asarray(w, dtype=complex)
    scale = max(np.abs(w).max(), 1.0)
    if np.abs(w - w.conj().T).max() > 1e-10 * scale:
        raise StructuralError("matrix is not Hermitian")
    vals, vecs = np.linalg.eigh(0.5 * (w + w.conj().T))
    lam = float(vals[-1])
    v = vecs[:, -1]
    k = int(np.argmax(np.abs(v)))
    pivot = v[k]
    if abs(pivot) > 0:
        v = v * (pivot.conjugate() / abs(pivot))
    v = v / np.linalg.norm(v)
    return lam, v
