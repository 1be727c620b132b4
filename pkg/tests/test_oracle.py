"""Tests for the brute-force and finite-difference oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotabeam import (ArrayConfig, Beamformer, BruteForceSpec, CoverageRegion,
                      RotationState, beamforming_gain, brute_force_maxmin,
                      direct_gain_oracle, fd_gradient_check, sample_region)
from rotabeam.errors import ConfigurationError
from rotabeam.model import uniform_beamformer


class TestDirectGainOracle:
    def test_coherent_maximum(self):
        cfg = ArrayConfig()
        g = direct_gain_oracle(0.0, RotationState(0.0, np.zeros(10)),
                               uniform_beamformer(10), cfg)
        assert g == pytest.approx(40.0)

    def test_cancellation(self):
        cfg = ArrayConfig(n_antennas=2)
        w = Beamformer(np.array([1.0, -1.0]) / math.sqrt(2))
        g = direct_gain_oracle(0.0, RotationState(0.0, np.zeros(2)), w, cfg)
        assert g == pytest.approx(0.0, abs=1e-12)

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=200, deadline=None)
    def test_independent_agreement(self, seed):
        cfg = ArrayConfig()
        rng = np.random.default_rng(seed)
        theta = float(rng.uniform(-1.5, 1.5))
        psi = float(rng.uniform(-cfg.psi_max, cfg.psi_max))
        phi = rng.uniform(-cfg.phi_max, cfg.phi_max, 10)
        w = Beamformer(np.exp(1j * rng.uniform(0, 2 * math.pi, 10))
                       / math.sqrt(10))
        state = RotationState(psi, phi)
        assert direct_gain_oracle(theta, state, w, cfg) == pytest.approx(
            beamforming_gain(theta, state, w, cfg), abs=1e-12, rel=1e-12)


class TestBruteForce:
    def test_count_guard(self):
        with pytest.raises(ConfigurationError):
            spec = BruteForceSpec(np.array([0.0]), phase_grid_points=10 ** 5,
                                  phi_grid_points=10 ** 4,
                                  psi_grid_points=10 ** 4)
            brute_force_maxmin(spec, ArrayConfig(n_antennas=3))

    def test_n1_single_direction(self):
        cfg = ArrayConfig(n_antennas=1)
        spec = BruteForceSpec(np.array([0.5]), phase_grid_points=1,
                              phi_grid_points=65, psi_grid_points=65)
        res = brute_force_maxmin(spec, cfg)
        assert res.worst_gain == pytest.approx(cfg.g_max, rel=1e-3)

    def test_n2_single_direction_matched_filter(self):
        cfg = ArrayConfig(n_antennas=2)
        spec = BruteForceSpec(np.array([0.2]), phase_grid_points=64,
                              phi_grid_points=33, psi_grid_points=17)
        res = brute_force_maxmin(spec, cfg)
        assert res.worst_gain == pytest.approx(2 * cfg.g_max, rel=0.01)

    def test_lattice_reported(self):
        cfg = ArrayConfig(n_antennas=2)
        spec = BruteForceSpec(np.array([0.0]), phase_grid_points=16,
                              phi_grid_points=9, psi_grid_points=9)
        res = brute_force_maxmin(spec, cfg)
        assert set(res.lattice) == {"psi", "phi", "phase"}
        assert res.lattice["phase"] == pytest.approx(2 * math.pi / 16)

    def test_oracle_dominates_feasible_point(self):
        # the oracle's optimum over its superset lattice is at least the
        # gain of any feasible lattice configuration
        cfg = ArrayConfig(n_antennas=2)
        grid = sample_region(CoverageRegion(((-0.2, 0.2),)), 5)
        spec = BruteForceSpec(grid.samples, phase_grid_points=32,
                              phi_grid_points=9, psi_grid_points=9)
        res = brute_force_maxmin(spec, cfg)
        state = RotationState(0.0, np.zeros(2))
        w = uniform_beamformer(2)
        feasible = min(beamforming_gain(float(t), state, w, cfg)
                       for t in grid.samples)
        assert res.worst_gain >= feasible - 1e-12

    def test_determinism(self):
        cfg = ArrayConfig(n_antennas=2)
        spec = BruteForceSpec(np.array([-0.1, 0.1]), phase_grid_points=16,
                              phi_grid_points=9, psi_grid_points=5)
        r1 = brute_force_maxmin(spec, cfg)
        r2 = brute_force_maxmin(spec, cfg)
        assert r1.worst_gain == r2.worst_gain
        assert r1.psi == r2.psi
        assert np.array_equal(r1.phi, r2.phi)


class TestFdGradientCheck:
    def test_hundred_trials_tight(self):
        err = fd_gradient_check(seed=2024, trials=100)
        assert err <= 1e-5

    def test_seed_determinism(self):
        assert fd_gradient_check(seed=7, trials=10) == \
            fd_gradient_check(seed=7, trials=10)
