"""Max-min coverage synthesis for the hierarchically rotatable array.

The inner solve alternates a successive-convex-approximation step on the
per-antenna rotations (linearized gains, LP, monotone backtracking) with a
penalty-based semidefinite-relaxation step on the analog beamformer
(growing log-det penalty until the lifted matrix is numerically rank one).
The outer solve grid-searches the array rotation and keeps the best inner
solution.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernel, model
from .errors import ConfigurationError, RotabeamError
from .kernel import SdpProblem, SolveStatus, SolverTolerances
from .model import (AngularGrid, ArrayConfig, Beamformer, CoverageRegion,
                    RotationState)


@dataclass(frozen=True)
class AlgoSettings:
    ao_tol: float = 1e-5
    sca_tol: float = 1e-4
    sdr_tol: float = 1e-4
    penalty_init: float = 1e-3
    penalty_growth: float = 1.2
    rank_delta: float = 1e-4
    logdet_eps: float = 1e-6
    outer_grid_l: int = 100
    max_ao_iters: int = 30
    max_sca_iters: int = 50
    max_penalty_iters: int = 50
    feas_tol: float = 1e-7
    gap_tol: float = 1e-6

    def __post_init__(self):
        if self.penalty_growth <= 1:
            raise ConfigurationError("penalty_growth must exceed 1")
        if min(self.ao_tol, self.sca_tol, self.sdr_tol) <= 0:
            raise ConfigurationError("tolerances must be positive")
        if self.outer_grid_l < 1:
            raise ConfigurationError("outer_grid_l must be >= 1")

    def kernel_tolerances(self) -> SolverTolerances:
        return SolverTolerances(feas_tol=self.feas_tol, gap_tol=self.gap_tol)


@dataclass
class IterationCounts:
    ao: int = 0
    sca: int = 0
    sdr: int = 0


@dataclass
class InnerSolution:
    phi: np.ndarray
    w: Beamformer
    worst_gain: float
    trace: list
    iters: IterationCounts
    termination: str
    rank_metrics: list = field(default_factory=list)
    sdr_terminations: list = field(default_factory=list)


@dataclass
class SolveReport:
    psi_star: float
    inner: InnerSolution
    per_psi_curve: list  # of (psi, worst_gain)
    wall_time_s: float
    settings: AlgoSettings


@dataclass
class SdrResult:
    w: Beamformer
    tau: float
    rank_metric: float
    iterations: int
    termination: str  # "rank_converged" | "RankCapHit" | solver status tag
    active: set = field(default_factory=set)  # final working set of directions


def init_phi(region: CoverageRegion, psi: float, cfg: ArrayConfig) -> np.ndarray:
    """Steer every boresight toward the region center, clamped to the
    rotation box."""
    phi0 = np.clip(region.center - psi, -cfg.phi_max, cfg.phi_max)
    return np.full(cfg.n_antennas, phi0)


def init_w(region: CoverageRegion, psi: float, cfg: ArrayConfig) -> Beamformer:
    """Matched filter toward the region center: entry phases equal the
    steering phases there, so combining at the center is coherent."""
    v = model.steering_vector(region.center, psi, cfg)
    return Beamformer(v / math.sqrt(cfg.n_antennas))


def _sqrt_gain_dphi(incidence: np.ndarray, cfg: ArrayConfig) -> np.ndarray:
    """d sqrt(G(theta_e - phi_n)) / d phi_n, zero outside the support."""
    x = np.asarray(incidence, dtype=float)
    inside = np.abs(x) < math.pi / 2
    xc = np.where(inside, x, 0.0)
    d = math.sqrt(cfg.g_max) * cfg.directivity_p * np.cos(xc) ** (cfg.directivity_p - 1) * np.sin(xc)
    return np.where(inside, d, 0.0)


def sca_gradient(theta_q: float, psi: float, phi: np.ndarray, w: Beamformer,
                 cfg: ArrayConfig) -> np.ndarray:
    """Gradient of the sampled gain w.r.t. the per-antenna rotations."""
    state = RotationState(psi, phi)
    a = model.array_response(theta_q, state, cfg)
    v = model.steering_vector(theta_q, psi, cfg)
    inner = np.vdot(w.weights, a)  # w^H a
    d_amp = _sqrt_gain_dphi((theta_q - psi) - phi, cfg)
    # (d a^H / d phi_n) w has single entry conj(v_n) * d_amp_n * w_n
    return 2.0 * np.real(inner * v.conj() * d_amp * w.weights)


def _gradient_matrix(grid: AngularGrid, psi: float, phi: np.ndarray, w: Beamformer,
                     cfg: ArrayConfig) -> tuple:
    """Sampled gains and their (Q, N) gradient stack, vectorized."""
    state = RotationState(psi, phi)
    theta_e = grid.samples - psi
    inc = theta_e[:, None] - phi[None, :]
    amp = np.sqrt(model.element_gain(inc, cfg))
    n = np.arange(cfg.n_antennas)
    v = np.exp(-2j * np.pi * cfg.spacing_wl * np.outer(np.sin(theta_e), n))
    a = amp * v
    inner = a.conj() @ w.weights  # a^H w per sample
    gains = np.abs(inner) ** 2
    d_amp = _sqrt_gain_dphi(inc, cfg)
    grads = 2.0 * np.real(np.conj(inner)[:, None] * v.conj() * d_amp * w.weights[None, :])
    return gains, grads


def sca_phi_step(grid: AngularGrid, psi: float, phi_i: np.ndarray, w: Beamformer,
                 cfg: ArrayConfig, settings: AlgoSettings) -> tuple:
    """One linearized max-min step on phi with monotone backtracking.

    Returns (phi_next, true worst-case gain at phi_next).
    """
    gains, grads = _gradient_matrix(grid, psi, phi_i, w, cfg)
    n = cfg.n_antennas
    # variables x = [phi (N), tau]; constraint tau - grad.phi <= g_i - grad.phi_i
    rows = np.hstack([-grads, np.ones((grid.total_q, 1))])
    rhs = gains - grads @ phi_i
    objective = np.zeros(n + 1)
    objective[-1] = 1.0
    bounds = [(-cfg.phi_max, cfg.phi_max)] * n + [(None, None)]
    prob = kernel.LpProblem(objective, list(zip(rows, rhs)), bounds)
    x, _, status = kernel.solve_lp(prob, settings.kernel_tolerances())
    if status is not SolveStatus.OPTIMAL or x is None:
        raise RotabeamError(f"SCA subproblem unexpectedly {status}")
    phi_full = np.clip(x[:n], -cfg.phi_max, cfg.phi_max)

    def true_worst(p):
        g, _ = _gradient_matrix(grid, psi, p, w, cfg)
        return float(g.min())

    base = float(gains.min())
    step = 1.0
    fallback = None
    for _ in range(21):
        cand = phi_i + step * (phi_full - phi_i)
        val = true_worst(cand)
        if val > base:
            return cand, val
        if val == base and fallback is None:
            # non-decreasing but not improving (e.g. the full step jumped
            # symmetrically across a peak); keep halving in case a shorter
            # step strictly improves
            fallback = (cand, val)
        step *= 0.5
    if fallback is not None:
        return fallback
    return phi_i.copy(), base


def build_gain_matrices(grid: AngularGrid, psi: float, phi: np.ndarray,
                        cfg: ArrayConfig) -> np.ndarray:
    """Rank-one outer products a(theta_q) a^H(theta_q) for all samples."""
    a = model.response_matrix(grid.samples, RotationState(psi, phi), cfg)
    return np.einsum("qm,qn->qmn", a, a.conj())


def _recover_beamformer(w_mat: np.ndarray, n: int) -> Beamformer:
    _, v = kernel.principal_eigpair(w_mat)
    phases = np.angle(v)
    return Beamformer(np.exp(1j * phases) / math.sqrt(n))


_RANDOMIZATION_DRAWS = 64
_POLISH_GRID = 64
_POLISH_SWEEPS = 2


def _polish_phases(a_resp: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Coordinate descent on the beamformer phases over a fine grid.

    One antenna at a time, the rest of the beam sum is held fixed and the
    entry's phase is set to the grid value maximizing the sampled worst
    case. Cheap (vectorized over the grid) and keeps |w_n| untouched.
    """
    w = weights.copy()
    n = w.shape[0]
    grid = np.exp(2j * np.pi * np.arange(_POLISH_GRID) / _POLISH_GRID)
    scale = 1.0 / math.sqrt(n)
    for _ in range(_POLISH_SWEEPS):
        contrib = a_resp.conj() * w[None, :]  # (Q, N)
        total = contrib.sum(axis=1)
        for k in range(n):
            partial = total - contrib[:, k]
            trials = partial[:, None] + np.outer(a_resp[:, k].conj() * scale,
                                                 grid)
            worsts = (np.abs(trials) ** 2).min(axis=0)
            base = float((np.abs(partial + contrib[:, k]) ** 2).min())
            j = int(np.argmax(worsts))
            if worsts[j] > base:
                w[k] = scale * grid[j]
                contrib[:, k] = a_resp[:, k].conj() * w[k]
                total = partial + contrib[:, k]
    return w


def _recovery_candidates(evals: np.ndarray, evecs: np.ndarray, n: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus candidates from a lifted iterate: the projected
    principal eigenvector plus Gaussian randomization draws z ~ CN(0, W).

    Randomization matters on wide regions, where the relaxed optimum is
    genuinely high-rank and its principal eigenvector alone recovers a
    beam that covers only part of the region. Returns an (n, K) stack of
    columns with entries of modulus 1/sqrt(n).
    """
    half = (evecs * np.sqrt(np.clip(evals, 0.0, None)))
    z = half @ ((rng.standard_normal((n, _RANDOMIZATION_DRAWS))
                 + 1j * rng.standard_normal((n, _RANDOMIZATION_DRAWS)))
                / math.sqrt(2))
    cands = np.concatenate([evecs[:, -1:], z], axis=1)
    return np.exp(1j * np.angle(cands)) / math.sqrt(n)


_WORKING_SET_SIZES = (48, 96, 192, 384)
_PENALTY_NORM_CAP = 2e3


def _solve_with_working_set(mats: np.ndarray, c_mat: np.ndarray, n: int,
                            active: set, tols) -> tuple:
    """Solve the full SDP via an exact active-set outer loop.

    Only the constraints in `active` enter the solver; violated ones are
    added and the subproblem re-solved until the returned iterate is
    feasible for all of them. Working sets are padded to a few fixed sizes
    so the compiled-problem cache stays small.
    """
    q = mats.shape[0]
    if q <= _WORKING_SET_SIZES[0]:
        prob = SdpProblem(n, c_mat, list(mats), 1.0 / n, tau_coupled=True)
        return (*kernel.solve_sdp(prob, tols), active)
    flat = mats.reshape(q, n * n)
    for _ in range(12):
        idx = sorted(active)
        size = next((s for s in _WORKING_SET_SIZES if s >= len(idx)), q)
        size = min(size, q)
        padded = (idx * ((size // len(idx)) + 1))[:size]
        prob = SdpProblem(n, c_mat, [mats[i] for i in padded], 1.0 / n,
                          tau_coupled=True)
        w_sol, tau, status = kernel.solve_sdp(prob, tols)
        if w_sol is None:
            return w_sol, tau, status, active
        traces = np.real(flat @ w_sol.T.reshape(-1))
        violated = np.where(traces < tau - 10 * tols.feas_tol)[0]
        if violated.size == 0:
            return w_sol, tau, status, active
        worst = violated[np.argsort(traces[violated])][:64]
        active |= set(int(i) for i in worst)
        if len(active) >= q:
            prob = SdpProblem(n, c_mat, list(mats), 1.0 / n, tau_coupled=True)
            return (*kernel.solve_sdp(prob, tols), active)
    prob = SdpProblem(n, c_mat, list(mats), 1.0 / n, tau_coupled=True)
    return (*kernel.solve_sdp(prob, tols), active)


def sdr_w_step(grid: AngularGrid, psi: float, phi: np.ndarray, cfg: ArrayConfig,
               settings: AlgoSettings, w_init: Beamformer | None = None,
               abort_below: float | None = None,
               active_init: set | None = None) -> SdrResult:
    """Penalty-based SDR update of the analog beamformer.

    The first subproblem is the plain relaxation; subsequent subproblems
    majorize the log-det penalty at the previous iterate with a growing
    weight until the lifted matrix is numerically rank one. A beamformer
    is recovered from every iterate and the best one (by true sampled
    worst-case gain) is kept as the incumbent. The linearized penalty is
    blind to concentration inside the support of the current iterate, so
    when the rank metric stagnates the weight growth is accelerated and,
    if stagnation persists, the penalty is re-linearized at the rank-one
    lift of the incumbent; that is a valid majorization point and makes
    the next subproblem collapse onto a certified rank-one matrix. The
    returned tau is the true sampled worst-case gain of the recovered
    beamformer.

    `abort_below` is a certified pruning threshold for outer searches over
    configurations whose rotations are fixed for the whole call: the first
    subproblem's relaxed optimum upper-bounds every unit-modulus beamformer
    at this (psi, phi), so when it cannot beat the threshold the schedule
    stops after one solve (termination "bound_pruned").
    """
    n = cfg.n_antennas
    a_resp = model.response_matrix(grid.samples, RotationState(psi, phi), cfg)
    mats = np.einsum("qm,qn->qmn", a_resp, a_resp.conj())
    tols = settings.kernel_tolerances()
    rng = np.random.default_rng(1234)
    w_mat = None
    lin_point = None
    eta = settings.penalty_init
    rank_metric = 0.0
    termination = "RankCapHit"
    iters = 0
    status = SolveStatus.OPTIMAL
    w_best = w_init
    tau_best = -math.inf
    if w_best is not None:
        g = np.abs(a_resp.conj() @ w_best.weights) ** 2
        tau_best = float(g.min())
    # seed the working set: a caller-provided set (e.g. from the previous
    # alternating iteration, where the binding directions barely move),
    # else the lowest-gain directions of the incumbent
    if active_init:
        active = set(int(i) for i in active_init if 0 <= int(i) < grid.total_q)
    elif w_init is not None and grid.total_q > _WORKING_SET_SIZES[0]:
        g0 = np.abs(a_resp.conj() @ w_init.weights) ** 2
        active = set(int(i) for i in np.argsort(g0)[:_WORKING_SET_SIZES[0] // 2])
    else:
        active = set(range(min(grid.total_q, _WORKING_SET_SIZES[0])))
    accel = 1
    stall_count = 0
    snapped = False
    prev_rank = -1.0
    for _ in range(settings.max_penalty_iters):
        if iters == 0:
            # unpenalized relaxation; linearizing the log-det at a rank-one
            # incumbent would pin the iterate there (penalty ~ eta/eps per
            # unit of orthogonal mass dwarfs any achievable gain)
            c_mat = np.zeros((n, n), dtype=complex)
        else:
            # Hermitian inverse via eigendecomposition; symmetrized to keep
            # the kernel's Hermitian contract despite rounding
            evals_p, evecs_p = np.linalg.eigh(lin_point)
            inv_evals = 1.0 / np.maximum(evals_p + settings.logdet_eps, 1e-300)
            # cap the penalty spectrum: with Tr(W) pinned at 1, any weight
            # far above the achievable gain acts the same while keeping the
            # subproblem well-scaled for the interior-point kernel
            inv_evals = np.minimum(inv_evals, _PENALTY_NORM_CAP / eta)
            inv = (evecs_p * inv_evals) @ evecs_p.conj().T
            c_mat = -eta * 0.5 * (inv + inv.conj().T)
            eta *= settings.penalty_growth ** accel
        w_sol, tau_sub, status, active = _solve_with_working_set(mats, c_mat, n,
                                                                 active, tols)
        iters += 1
        if w_sol is None:
            termination = f"solver_{status.value}"
            break
        if iters == 1 and abort_below is not None and tau_sub is not None \
                and status is SolveStatus.OPTIMAL and tau_sub <= abort_below:
            termination = "bound_pruned"
            rank_metric = float(np.linalg.eigvalsh(w_sol)[-1]
                                / max(np.trace(w_sol).real, 1e-300))
            break
        w_mat = w_sol
        lin_point = w_sol
        evals, evecs = np.linalg.eigh(0.5 * (w_sol + w_sol.conj().T))
        rank_metric = float(evals[-1] / max(evals.sum(), 1e-300))
        cands = _recovery_candidates(evals, evecs, n, rng)
        worsts = np.abs(a_resp.conj() @ cands).min(axis=0) ** 2
        k = int(np.argmax(worsts))
        polished = _polish_phases(a_resp, cands[:, k])
        tau_pol = float((np.abs(a_resp.conj() @ polished) ** 2).min())
        improved = tau_pol > tau_best
        if improved:
            tau_best = tau_pol
            w_best = Beamformer(polished)
        if rank_metric >= 1.0 - settings.rank_delta:
            termination = "rank_converged"
            break
        if iters == 1 and not improved and w_init is not None:
            # the relaxation's recovered candidate does not beat the
            # incumbent; skip straight to the certification solve
            stall_count = 3
        elif rank_metric - prev_rank < 1e-3:
            stall_count += 1
            accel = min(accel * 2, 16)
        else:
            stall_count = 0
            accel = 1
        prev_rank = rank_metric
        if stall_count >= 1 and not snapped and w_best is not None:
            # re-linearize at the incumbent's rank-one lift: the heavy
            # weight on its orthogonal complement pins the next iterate
            # to a rank-one matrix without losing the incumbent's gain
            lin_point = np.outer(w_best.weights, w_best.weights.conj())
            snapped = True
    if w_best is not None:
        w = w_best
    elif w_mat is not None:
        w = _recover_beamformer(w_mat, n)
    else:
        w = init_w_from_grid(grid, psi, cfg)
    tau = float((np.abs(a_resp.conj() @ w.weights) ** 2).min())
    return SdrResult(w=w, tau=tau, rank_metric=rank_metric, iterations=iters,
                     termination=termination, active=active)


def init_w_from_grid(grid: AngularGrid, psi: float, cfg: ArrayConfig) -> Beamformer:
    """Conjugate steering toward the grid mean; fallback when no region is
    at hand."""
    center = float(np.mean(grid.samples))
    v = model.steering_vector(center, psi, cfg)
    return Beamformer(v.conj() / math.sqrt(cfg.n_antennas))


def _sampled_worst(grid: AngularGrid, psi: float, phi: np.ndarray, w: Beamformer,
                   cfg: ArrayConfig) -> float:
    g = model.gains_over_grid(grid, RotationState(psi, phi), w, cfg)
    return float(g.min())


_ABORT_MIN_AO = 5


def _outpaced(trace: list, iters_done: int, max_iters: int,
              abort_below: float | None) -> bool:
    """True when an optimistic linear extrapolation of the alternating
    loop's recent progress cannot reach the outer search's incumbent.

    The trace is monotone, so the largest improvement over the last three
    rounds is an optimistic per-round rate; improvements in practice decay.
    Requires a minimum number of rounds so one slow start cannot abort a
    candidate that would have taken off.
    """
    if abort_below is None or iters_done < _ABORT_MIN_AO or len(trace) < 4:
        return False
    recent = max(trace[-1] - trace[-2], trace[-2] - trace[-3],
                 trace[-3] - trace[-4])
    return trace[-1] + recent * (max_iters - iters_done) < abort_below


def solve_inner(region: CoverageRegion, grid: AngularGrid, psi: float,
                cfg: ArrayConfig, settings: AlgoSettings,
                phi0: np.ndarray | None = None,
                w0: Beamformer | None = None,
                abort_below: float | None = None) -> InnerSolution:
    """Alternating optimization of per-antenna rotation and beamformer at a
    fixed array rotation."""
    phi = init_phi(region, psi, cfg) if phi0 is None else np.clip(phi0, -cfg.phi_max, cfg.phi_max)
    w = init_w(region, psi, cfg) if w0 is None else w0
    counts = IterationCounts()
    rank_metrics: list = []
    sdr_terms: list = []
    active_set: set | None = None
    current = _sampled_worst(grid, psi, phi, w, cfg)
    trace = [current]
    termination = "max_ao_iters"
    for _ in range(settings.max_ao_iters):
        counts.ao += 1
        # SCA loop on phi to its own convergence
        prev_tau = current
        for _ in range(settings.max_sca_iters):
            phi, tau = sca_phi_step(grid, psi, phi, w, cfg, settings)
            counts.sca += 1
            if abs(tau - prev_tau) < settings.sca_tol:
                prev_tau = tau
                break
            prev_tau = tau
        # SDR step on w; keep the incumbent if the recovered gain is lower
        sdr = sdr_w_step(grid, psi, phi, cfg, settings, w_init=w,
                         active_init=active_set)
        counts.sdr += sdr.iterations
        rank_metrics.append(sdr.rank_metric)
        sdr_terms.append(sdr.termination)
        active_set = sdr.active
        if sdr.tau > prev_tau:
            w = sdr.w
        new = _sampled_worst(grid, psi, phi, w, cfg)
        trace.append(max(new, trace[-1]))
        improvement = new - current
        current = max(new, current)
        if improvement < settings.ao_tol:
            termination = "converged"
            break
        if _outpaced(trace, counts.ao, settings.max_ao_iters, abort_below):
            termination = "outpaced"
            break
    worst = _sampled_worst(grid, psi, phi, w, cfg)
    return InnerSolution(phi=phi, w=w, worst_gain=worst, trace=trace, iters=counts,
                         termination=termination, rank_metrics=rank_metrics,
                         sdr_terminations=sdr_terms)


def outer_psi_grid(cfg: ArrayConfig, settings: AlgoSettings) -> np.ndarray:
    l = settings.outer_grid_l
    if l == 1 or cfg.psi_max == 0:
        return np.array([0.0])
    return np.linspace(-cfg.psi_max, cfg.psi_max, l)


def solve_outer(region: CoverageRegion, cfg: ArrayConfig, settings: AlgoSettings,
                total_q: int = 1000, grid: AngularGrid | None = None) -> SolveReport:
    """Exhaustive 1D search over the array rotation."""
    t0 = time.perf_counter()
    if grid is None:
        grid = model.sample_region(region, total_q)
    psis = outer_psi_grid(cfg, settings)
    best = None
    best_psi = None
    curve = []
    for psi in psis:
        sol = solve_inner(region, grid, float(psi), cfg, settings,
                          abort_below=None if best is None else best.worst_gain)
        curve.append((float(psi), sol.worst_gain))
        if best is None or sol.worst_gain > best.worst_gain:
            best = sol
            best_psi = float(psi)
    return SolveReport(psi_star=best_psi, inner=best, per_psi_curve=curve,
                       wall_time_s=time.perf_counter() - t0, settings=settings)
