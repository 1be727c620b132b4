"""Independent brute-force and finite-difference verifiers.

These deliberately avoid the optimizer's vectorized code paths: the direct
gain evaluator is a scalar loop over antennas, and the exhaustive search
enumerates rotation/phase lattices using only that evaluator's building
blocks. Used by tests as ground truth on desk-scale instances.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .model import ArrayConfig, Beamformer, RotationState

COUNT_GUARD = 10 ** 8


@dataclass
class BruteForceSpec:
    """Lattice description for the exhaustive max-min search."""

    thetas: np.ndarray
    phase_grid_points: int = 32
    phi_grid_points: int = 32
    psi_grid_points: int = 32

    def __post_init__(self):
        self.thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        if min(self.phase_grid_points, self.phi_grid_points, self.psi_grid_points) < 1:
            raise ConfigurationError("grid point counts must be >= 1")

    def config_count(self, n_antennas: int) -> int:
        return (self.psi_grid_points * self.phi_grid_points ** n_antennas
                * self.phase_grid_points ** (n_antennas - 1))


@dataclass
class OracleResult:
    worst_gain: float
    psi: float
    phi: np.ndarray
    w: np.ndarray
    lattice: dict  # axis -> spacing, the honest tolerance for comparisons


def direct_gain_oracle(theta: float, state: RotationState, w: Beamformer,
                       cfg: ArrayConfig) -> float:
    """Scalar-loop evaluation of |sum_n conj(a_n) w_n|^2."""
    theta_e = theta - state.psi
    acc = 0j
    for n in range(cfg.n_antennas):
        inc = theta_e - float(state.phi[n])
        if abs(inc) <= math.pi / 2:
            amp = math.sqrt(cfg.g_max) * math.cos(inc) ** cfg.directivity_p
        else:
            amp = 0.0
        phase = -2.0 * math.pi * cfg.spacing_wl * n * math.sin(theta_e)
        a_n = amp * cmath.exp(1j * phase)
        acc += a_n.conjugate() * complex(w.weights[n])
    return abs(acc) ** 2


def _axis(limit: float, points: int) -> np.ndarray:
    if points == 1 or limit == 0:
        return np.array([0.0])
    return np.linspace(-limit, limit, points)


def brute_force_maxmin(spec: BruteForceSpec, cfg: ArrayConfig) -> OracleResult:
    """Exhaustive search over the (psi, phi, phase) lattice.

    The first beamformer phase is pinned at zero (gain is invariant to a
    global phase). Deterministic smallest-index tie-break along the
    enumeration order psi, phi (lexicographic), phase (lexicographic).
    """
    n = cfg.n_antennas
    if n > 3:
        raise ConfigurationError("oracle supports at most 3 antennas")
    if spec.config_count(n) > COUNT_GUARD:
        raise ConfigurationError(
            f"lattice of {spec.config_count(n)} configurations exceeds the "
            f"{COUNT_GUARD} guard")
    psis = _axis(cfg.psi_max, spec.psi_grid_points)
    phis = _axis(cfg.phi_max, spec.phi_grid_points)
    chis = np.linspace(0.0, 2 * math.pi, spec.phase_grid_points, endpoint=False)
    # all relative-phase combinations as beamformer columns, w_1 pinned
    phase_combos = np.array(list(itertools.product(chis, repeat=n - 1)))
    if phase_combos.size == 0:
        phase_combos = np.zeros((1, 0))
    w_cols = np.hstack([np.zeros((phase_combos.shape[0], 1)), phase_combos])
    w_all = np.exp(1j * w_cols) / math.sqrt(n)  # (C, N)
    thetas = spec.thetas
    best = -1.0
    best_cfg = None
    for psi in psis:
        theta_e = thetas - psi
        # per-antenna responses on the phi lattice: (N, P, T)
        inc = theta_e[None, None, :] - phis[None, :, None]
        inc = np.broadcast_to(inc, (n, phis.size, thetas.size))
        amp = np.where(np.abs(inc) <= math.pi / 2,
                       math.sqrt(cfg.g_max) * np.cos(np.clip(inc, -math.pi / 2, math.pi / 2)) ** cfg.directivity_p,
                       0.0)
        ph = np.exp(-2j * math.pi * cfg.spacing_wl *
                    np.outer(np.arange(n), np.sin(theta_e)))  # (N, T)
        resp = amp * ph[:, None, :]
        for combo in itertools.product(range(phis.size), repeat=n):
            a_conj = np.stack([resp[i, combo[i], :].conj() for i in range(n)], axis=1)  # (T, N)
            gains = np.abs(a_conj @ w_all.T) ** 2  # (T, C)
            worst = gains.min(axis=0)
            c = int(np.argmax(worst))
            if worst[c] > best:
                best = float(worst[c])
                best_cfg = (float(psi), phis[list(combo)].copy(), w_all[c].copy())
    psi_b, phi_b, w_b = best_cfg
    lattice = {
        "psi": float(psis[1] - psis[0]) if psis.size > 1 else 0.0,
        "phi": float(phis[1] - phis[0]) if phis.size > 1 else 0.0,
        "phase": float(chis[1] - chis[0]) if chis.size > 1 else 0.0,
    }
    return OracleResult(worst_gain=best, psi=psi_b, phi=phi_b, w=w_b, lattice=lattice)


def fd_gradient_check(seed: int, trials: int, cfg: ArrayConfig | None = None,
                      step: float = 1e-6) -> float:
    """Worst relative error of the analytic rotation gradient against
    central finite differences of the scalar-loop gain."""
    from .optimizer import sca_gradient  # local import to keep routes separate

    cfg = cfg or ArrayConfig()
    rng = np.random.default_rng(seed)
    n = cfg.n_antennas
    worst = 0.0
    for _ in range(trials):
        psi = rng.uniform(-cfg.psi_max, cfg.psi_max)
        phi = rng.uniform(-cfg.phi_max, cfg.phi_max, size=n)
        margin = math.pi / 2 - 0.01
        lo, hi = phi.max() - margin, phi.min() + margin
        theta_e = rng.uniform(lo, hi)
        theta = theta_e + psi
        w = Beamformer(np.exp(1j * rng.uniform(0, 2 * math.pi, n)) / math.sqrt(n))
        grad = sca_gradient(theta, psi, phi, w, cfg)
        fd = np.empty(n)
        for k in range(n):
            up, dn = phi.copy(), phi.copy()
            up[k] += step
            dn[k] -= step
            g_up = direct_gain_oracle(theta, RotationState(psi, up), w, cfg)
            g_dn = direct_gain_oracle(theta, RotationState(psi, dn), w, cfg)
            fd[k] = (g_up - g_dn) / (2 * step)
        denom = max(float(np.abs(fd).max()), 1e-8)
        rel = float(np.abs(grad - fd).max()) / denom
        worst = max(worst, rel)
    return worst
