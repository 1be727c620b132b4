"""Benchmark array architectures sharing the optimizer's subroutines.

Each scheme restricts the degrees of freedom of the full hierarchical
design: no rotation at all, array-wise only, antenna-wise only, coordinate
descent on the per-antenna rotations, or center-steered rotations. All
return the same report shape so downstream tooling treats them uniformly.
"""

from __future__ import annotations

import math
import time
from enum import Enum

import numpy as np

from . import model, optimizer
from .model import AngularGrid, ArrayConfig, Beamformer, CoverageRegion, RotationState
from .optimizer import (AlgoSettings, InnerSolution, IterationCounts,
                        SolveReport, sdr_w_step, solve_inner, solve_outer)


class SchemeId(Enum):
    HR6DMA = "HR6DMA"
    AntennaRA = "AntennaRA"
    ArrayRA = "ArrayRA"
    NRA = "NRA"
    ARS = "ARS"
    CSAR = "CSAR"


# deterministic output / dominance ordering
SCHEME_ORDER = (SchemeId.HR6DMA, SchemeId.AntennaRA, SchemeId.ArrayRA,
                SchemeId.NRA, SchemeId.ARS, SchemeId.CSAR)


def _ensure_grid(region, total_q, grid):
    return model.sample_region(region, total_q) if grid is None else grid


def _sdr_only_inner(region: CoverageRegion, grid: AngularGrid, psi: float,
                    phi: np.ndarray, cfg: ArrayConfig, settings: AlgoSettings,
                    w0: Beamformer | None = None,
                    abort_below: float | None = None) -> InnerSolution:
    """Beamformer-only solve at a fixed rotation configuration.

    The rotations never change here, so an outer search may pass its
    incumbent gain as `abort_below`: the relaxation bound then prunes
    rotation candidates that provably cannot win.
    """
    w = optimizer.init_w(region, psi, cfg) if w0 is None else w0
    g0 = optimizer._sampled_worst(grid, psi, phi, w, cfg)
    sdr = sdr_w_step(grid, psi, phi, cfg, settings, w_init=w,
                     abort_below=abort_below)
    if sdr.tau > g0:
        w = sdr.w
    worst = optimizer._sampled_worst(grid, psi, phi, w, cfg)
    return InnerSolution(phi=phi, w=w, worst_gain=worst, trace=[g0, worst],
                         iters=IterationCounts(ao=1, sca=0, sdr=sdr.iterations),
                         termination="converged", rank_metrics=[sdr.rank_metric],
                         sdr_terminations=[sdr.termination])


def _outer_search(inner_fn, cfg: ArrayConfig, settings: AlgoSettings) -> SolveReport:
    t0 = time.perf_counter()
    psis = optimizer.outer_psi_grid(cfg, settings)
    best, best_psi, curve = None, None, []
    for psi in psis:
        sol = inner_fn(float(psi), None if best is None else best.worst_gain)
        curve.append((float(psi), sol.worst_gain))
        if best is None or sol.worst_gain > best.worst_gain:
            best, best_psi = sol, float(psi)
    return SolveReport(psi_star=best_psi, inner=best, per_psi_curve=curve,
                       wall_time_s=time.perf_counter() - t0, settings=settings)


def solve_hr6dma(region, cfg, settings, total_q=1000, grid=None) -> SolveReport:
    grid = _ensure_grid(region, total_q, grid)
    return solve_outer(region, cfg, settings, grid=grid)


def solve_nra(region, cfg, settings, total_q=1000, grid=None) -> SolveReport:
    """Fixed array, fixed boresights; beamformer only."""
    grid = _ensure_grid(region, total_q, grid)
    t0 = time.perf_counter()
    phi = np.zeros(cfg.n_antennas)
    sol = _sdr_only_inner(region, grid, 0.0, phi, cfg, settings)
    return SolveReport(psi_star=0.0, inner=sol, per_psi_curve=[(0.0, sol.worst_gain)],
                       wall_time_s=time.perf_counter() - t0, settings=settings)


def solve_array_ra(region, cfg, settings, total_q=1000, grid=None) -> SolveReport:
    """Array rotation plus beamformer; boresights stay at the normal."""
    grid = _ensure_grid(region, total_q, grid)
    phi = np.zeros(cfg.n_antennas)
    return _outer_search(
        lambda psi, bound: _sdr_only_inner(region, grid, psi, phi, cfg,
                                           settings, abort_below=bound),
        cfg, settings)


def solve_antenna_ra(region, cfg, settings, total_q=1000, grid=None) -> SolveReport:
    """Per-antenna rotation plus beamformer at a fixed array."""
    grid = _ensure_grid(region, total_q, grid)
    t0 = time.perf_counter()
    sol = solve_inner(region, grid, 0.0, cfg, settings)
    return SolveReport(psi_star=0.0, inner=sol, per_psi_curve=[(0.0, sol.worst_gain)],
                       wall_time_s=time.perf_counter() - t0, settings=settings)


ARS_GRID_STEP = math.radians(1.0)


def _ars_inner(region, grid, psi, cfg, settings,
               abort_below=None) -> InnerSolution:
    """Coordinate descent on the rotations with beamformer refreshes
    between sweeps."""
    phi = optimizer.init_phi(region, psi, cfg)
    w = optimizer.init_w(region, psi, cfg)
    n_points = max(int(round(2 * cfg.phi_max / ARS_GRID_STEP)) + 1, 1)
    candidates = np.linspace(-cfg.phi_max, cfg.phi_max, n_points) if cfg.phi_max > 0 \
        else np.array([0.0])
    counts = IterationCounts()
    rank_metrics, sdr_terms = [], []
    active_set = None
    current = optimizer._sampled_worst(grid, psi, phi, w, cfg)
    trace = [current]
    termination = "max_ao_iters"
    theta_e = grid.samples - psi
    v = np.exp(-2j * np.pi * cfg.spacing_wl
               * np.outer(np.sin(theta_e), np.arange(cfg.n_antennas)))
    cand_amp = np.sqrt(model.element_gain(theta_e[:, None] - candidates[None, :],
                                          cfg))  # (Q, C)
    for _ in range(settings.max_ao_iters):
        counts.ao += 1
        for n in range(cfg.n_antennas):
            # try every candidate rotation for antenna n, others fixed:
            # only column n of the response changes, so the rest of the
            # beam sum is shared across candidates
            amp = np.sqrt(model.element_gain(theta_e[:, None] - phi[None, :], cfg))
            contrib = amp * v.conj() * w.weights[None, :]  # (Q, N)
            partial = contrib.sum(axis=1) - contrib[:, n]
            trial_contrib = cand_amp * (v[:, n].conj() * w.weights[n])[:, None]
            worsts = (np.abs(partial[:, None] + trial_contrib) ** 2).min(axis=0)
            k = int(np.argmax(worsts))
            if worsts[k] > current:
                phi[n] = candidates[k]
                current = float(worsts[k])
        sdr = sdr_w_step(grid, psi, phi, cfg, settings, w_init=w,
                         active_init=active_set)
        active_set = sdr.active
        counts.sdr += sdr.iterations
        rank_metrics.append(sdr.rank_metric)
        sdr_terms.append(sdr.termination)
        if sdr.tau > current:
            w = sdr.w
        new = optimizer._sampled_worst(grid, psi, phi, w, cfg)
        improvement = new - trace[-1]
        trace.append(max(new, trace[-1]))
        current = trace[-1]
        if improvement < settings.ao_tol:
            termination = "converged"
            break
        if optimizer._outpaced(trace, counts.ao, settings.max_ao_iters,
                               abort_below):
            termination = "outpaced"
            break
    worst = optimizer._sampled_worst(grid, psi, phi, w, cfg)
    return InnerSolution(phi=phi, w=w, worst_gain=worst, trace=trace, iters=counts,
                         termination=termination, rank_metrics=rank_metrics,
                         sdr_terminations=sdr_terms)


def solve_ars(region, cfg, settings, total_q=1000, grid=None) -> SolveReport:
    grid = _ensure_grid(region, total_q, grid)
    # the rotations move between beamformer refreshes, so the relaxation
    # bound from one sweep cannot prune a candidate outright; the incumbent
    # still feeds the progress-projection abort of the coordinate loop
    return _outer_search(
        lambda psi, bound: _ars_inner(region, grid, psi, cfg, settings,
                                      abort_below=bound),
        cfg, settings)


def solve_csar(region, cfg, settings, total_q=1000, grid=None) -> SolveReport:
    """Center-steered rotations per array angle; beamformer only."""
    grid = _ensure_grid(region, total_q, grid)

    def inner(psi, bound):
        phi = optimizer.init_phi(region, psi, cfg)
        return _sdr_only_inner(region, grid, psi, phi, cfg, settings,
                               abort_below=bound)

    return _outer_search(inner, cfg, settings)


_SOLVERS = {
    SchemeId.HR6DMA: solve_hr6dma,
    SchemeId.AntennaRA: solve_antenna_ra,
    SchemeId.ArrayRA: solve_array_ra,
    SchemeId.NRA: solve_nra,
    SchemeId.ARS: solve_ars,
    SchemeId.CSAR: solve_csar,
}

# freer scheme -> restricted schemes whose feasible sets it contains;
# restricted schemes are lifted first so later checks see final values
_DOMINANCE = {
    SchemeId.AntennaRA: (SchemeId.NRA,),
    SchemeId.ArrayRA: (SchemeId.NRA,),
    SchemeId.HR6DMA: (SchemeId.AntennaRA, SchemeId.ArrayRA, SchemeId.ARS,
                      SchemeId.CSAR, SchemeId.NRA),
}


def _warm_start(freer: SchemeId, donor: SolveReport, region, grid, cfg,
                settings) -> InnerSolution:
    """Refine the donor's solution under the freer scheme's degrees of
    freedom; monotone safeguards make the result at least as good."""
    psi = donor.psi_star
    if freer in (SchemeId.HR6DMA, SchemeId.AntennaRA, SchemeId.ARS):
        return solve_inner(region, grid, psi, cfg, settings,
                           phi0=donor.inner.phi, w0=donor.inner.w)
    # ArrayRA: rotations stay fixed at the donor's (zero for NRA donors)
    return _sdr_only_inner(region, grid, psi, donor.inner.phi, cfg, settings,
                           w0=donor.inner.w)


def compare_all(region: CoverageRegion, cfg: ArrayConfig, settings: AlgoSettings,
                total_q: int = 1000, schemes=None, grid: AngularGrid | None = None,
                enforce_dominance: bool = True) -> dict:
    """Run the requested schemes on one shared grid; enforce degree-of-
    freedom dominance by warm-starting a freer scheme from a restricted
    one whenever its own run lands lower."""
    grid = _ensure_grid(region, total_q, grid)
    if schemes is None:
        schemes = SCHEME_ORDER
    reports = {}
    for scheme in SCHEME_ORDER:
        if scheme in schemes:
            reports[scheme] = _SOLVERS[scheme](region, cfg, settings, grid=grid)
    if enforce_dominance:
        for freer, restricted_list in _DOMINANCE.items():
            if freer not in reports:
                continue
            for restricted in restricted_list:
                if restricted not in reports:
                    continue
                gap = reports[restricted].inner.worst_gain - reports[freer].inner.worst_gain
                if gap > 0:
                    sol = _warm_start(freer, reports[restricted], region, grid,
                                      cfg, settings)
                    if sol.worst_gain > reports[freer].inner.worst_gain:
                        old = reports[freer]
                        reports[freer] = SolveReport(
                            psi_star=reports[restricted].psi_star, inner=sol,
                            per_psi_curve=old.per_psi_curve,
                            wall_time_s=old.wall_time_s, settings=settings)
    return reports
