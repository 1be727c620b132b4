"""Array geometry, element gains, responses and worst-case gain evaluation.

Everything here is pure and deterministic: rotation states and beamformers
are evaluated, never mutated. Angles are radians throughout, distances in
wavelengths unless a field name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConstraintError, DomainError

MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class ArrayConfig:
    """Physical description of the rotatable uniform linear array."""

    n_antennas: int = 10
    spacing_wl: float = 0.5
    psi_max: float = math.pi / 3
    phi_max: float = math.pi / 3
    directivity_p: float = 1.0
    g_max: float = 4.0

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ConfigurationError("n_antennas must be >= 1")
        if self.spacing_wl <= 0:
            raise ConfigurationError("spacing_wl must be > 0")
        for name in ("psi_max", "phi_max"):
            v = getattr(self, name)
            if not 0 <= v <= math.pi / 2:
                raise ConfigurationError(f"{name} must lie in [0, pi/2]")
        if self.directivity_p < 0.5:
            raise ConfigurationError("directivity_p must be >= 0.5")
        if self.g_max <= 0:
            raise ConfigurationError("g_max must be > 0")


def boresight_gain_3d(directivity_p: float) -> float:
    """Peak gain 2(2p+1) implied by 3D power conservation.

    Provided as a helper only; ArrayConfig keeps g_max independent so the
    2D-normalized value 4 (with p = 1) used by all experiments is the
    default.
    """
    if directivity_p < 0.5:
        raise ConfigurationError("directivity_p must be >= 0.5")
    return 2.0 * (2.0 * directivity_p + 1.0)


@dataclass(frozen=True)
class RotationState:
    """One hierarchical configuration: array rotation plus per-antenna
    rotations."""

    psi: float
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))

    def validate(self, cfg: ArrayConfig) -> None:
        if abs(self.psi) > cfg.psi_max + 1e-12:
            raise ConstraintError(f"|psi|={abs(self.psi):.6g} exceeds psi_max")
        if self.phi.shape != (cfg.n_antennas,):
            raise ConstraintError("phi length must equal n_antennas")
        if np.any(np.abs(self.phi) > cfg.phi_max + 1e-12):
            raise ConstraintError("per-antenna rotation exceeds phi_max")


@dataclass(frozen=True)
class Beamformer:
    """Length-N analog beamformer with per-entry modulus 1/sqrt(N)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        object.__setattr__(self, "weights", w)
        n = w.shape[0]
        target = 1.0 / math.sqrt(n)
        if np.any(np.abs(np.abs(w) - target) > MODULUS_TOL * target):
            raise ConstraintError("beamformer entries must have modulus 1/sqrt(N)")

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class CoverageRegion:
    """Union of disjoint AoD intervals inside [-pi/2, pi/2].

    Point targets (alpha == beta) are allowed so that single-direction
    scenarios can be expressed; proper intervals must be strictly
    increasing and disjoint.
    """

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        if not ivs:
            raise ConfigurationError("region must contain at least one interval")
        prev = -math.pi / 2 - 1e-15
        for i, (a, b) in enumerate(ivs):
            if b < a:
                raise ConfigurationError(f"intervals[{i}]: beta < alpha")
            if a < prev if i == 0 else a <= prev:
                raise ConfigurationError(f"intervals[{i}]: not disjoint/ascending")
            if a < -math.pi / 2 - 1e-12 or b > math.pi / 2 + 1e-12:
                raise ConfigurationError(f"intervals[{i}]: outside [-pi/2, pi/2]")
            prev = b

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    @property
    def center(self) -> float:
        """Mean of the interval midpoints."""
        return float(np.mean([(a + b) / 2 for a, b in self.intervals]))


@dataclass(frozen=True)
class AngularGrid:
    """Deterministic sample set of a coverage region."""

    samples: np.ndarray
    per_interval_counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        object.__setattr__(self, "per_interval_counts", tuple(int(c) for c in self.per_interval_counts))

    @property
    def total_q(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class LinkBudget:
    """Diagnostic link parameters for absolute received power."""

    tx_power: float
    ref_gain: float
    distance_m: float
    pathloss_exp: float
    wavelength_m: float

    def __post_init__(self):
        for name in ("tx_power", "ref_gain", "distance_m", "pathloss_exp", "wavelength_m"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be strictly positive")


def element_gain(phi_rel, cfg: ArrayConfig):
    """Cosine-power directional gain; zero outside +-pi/2 incidence."""
    x = np.asarray(phi_rel, dtype=float)
    inside = np.abs(x) <= math.pi / 2
    g = np.where(inside, cfg.g_max * np.cos(np.where(inside, x, 0.0)) ** (2 * cfg.directivity_p), 0.0)
    if np.isscalar(phi_rel) or np.ndim(phi_rel) == 0:
        return float(g)
    return g


def antenna_positions(psi: float, cfg: ArrayConfig) -> np.ndarray:
    """(N, 2) antenna coordinates in wavelengths; centroid at the origin."""
    if abs(psi) > cfg.psi_max + 1e-12:
        raise ConstraintError(f"|psi|={abs(psi):.6g} exceeds psi_max={cfg.psi_max:.6g}")
    n = np.arange(1, cfg.n_antennas + 1)
    offsets = (2 * n - cfg.n_antennas - 1) / 2 * cfg.spacing_wl
    return np.outer(offsets, np.array([math.cos(psi), math.sin(psi)]))


def steering_vector(theta: float, psi: float, cfg: ArrayConfig) -> np.ndarray:
    """Unit-modulus phase ramp for effective AoD theta - psi."""
    theta_e = theta - psi
    n = np.arange(cfg.n_antennas)
    return np.exp(-2j * np.pi * cfg.spacing_wl * n * math.sin(theta_e))


def array_response(theta: float, state: RotationState, cfg: ArrayConfig) -> np.ndarray:
    """Element-gain-weighted steering vector a = D v."""
    theta_e = theta - state.psi
    amp = np.sqrt(element_gain(theta_e - state.phi, cfg))
    return amp * steering_vector(theta, state.psi, cfg)


def response_matrix(thetas: np.ndarray, state: RotationState, cfg: ArrayConfig) -> np.ndarray:
    """(Q, N) stack of array responses, vectorized over directions."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    theta_e = thetas - state.psi
    inc = theta_e[:, None] - state.phi[None, :]
    amp = np.sqrt(element_gain(inc, cfg))
    n = np.arange(cfg.n_antennas)
    phase = np.exp(-2j * np.pi * cfg.spacing_wl * np.outer(np.sin(theta_e), n))
    return amp * phase


def beamforming_gain(theta: float, state: RotationState, w: Beamformer, cfg: ArrayConfig) -> float:
    """|a^H w|^2 toward a single direction."""
    a = array_response(theta, state, cfg)
    return float(np.abs(np.vdot(a, w.weights)) ** 2)


def gains_over_grid(grid: AngularGrid, state: RotationState, w: Beamformer, cfg: ArrayConfig) -> np.ndarray:
    """Beamforming gain at every grid sample."""
    a = response_matrix(grid.samples, state, cfg)
    return np.abs(a.conj() @ w.weights) ** 2


def received_power(theta: float, state: RotationState, w: Beamformer, cfg: ArrayConfig,
                   link: LinkBudget) -> float:
    """Absolute received power in watts: P_t |h|^2 |a^H w|^2 with
    |h|^2 = ref_gain * r^(-2 gamma)."""
    if link.distance_m <= 0:
        raise DomainError("distance_m must be positive")
    path = link.ref_gain * link.distance_m ** (-2.0 * link.pathloss_exp)
    return link.tx_power * path * beamforming_gain(theta, state, w, cfg)


def sample_region(region: CoverageRegion, total_q: int) -> AngularGrid:
    """Uniformly sample each interval, allocating counts proportionally to
    width with largest-remainder rounding and a 2-sample floor per proper
    interval (1 for point targets). Endpoints are hit exactly."""
    widths = np.array([b - a for a, b in region.intervals])
    mins = np.where(widths > 0, 2, 1)
    if total_q < int(mins.sum()):
        raise ConfigurationError(
            f"total_q={total_q} below the minimum {int(mins.sum())} for this region")
    counts = mins.copy()
    extra = total_q - int(mins.sum())
    if extra > 0 and widths.sum() > 0:
        share = widths / widths.sum() * extra
        add = np.floor(share).astype(int)
        rem = share - add
        counts = counts + add
        # largest remainder; ties broken toward the earliest interval
        order = np.lexsort((np.arange(len(rem)), -rem))
        for i in order[: extra - int(add.sum())]:
            counts[i] += 1
    samples = []
    for (a, b), q in zip(region.intervals, counts):
        if b == a:
            samples.append(np.array([a]))
        else:
            samples.append(np.linspace(a, b, q))
    return AngularGrid(np.concatenate(samples), tuple(int(c) for c in counts))


def worst_case_gain(grid: AngularGrid, state: RotationState, w: Beamformer,
                    cfg: ArrayConfig) -> tuple:
    """Minimum gain over the grid and the smallest index attaining it."""
    if grid.total_q == 0:
        raise DomainError("grid is empty")
    g = gains_over_grid(grid, state, w, cfg)
    idx = int(np.argmin(g))
    return float(g[idx]), idx


def uniform_beamformer(n: int) -> Beamformer:
    return Beamformer(np.full(n, 1.0 / math.sqrt(n), dtype=complex))
