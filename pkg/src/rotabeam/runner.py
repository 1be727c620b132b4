"""Experiment orchestration and persistence.

Reports are JSON (structured, diff-friendly), tabular outputs are CSV with
fixed headers, and each report path renders a matplotlib figure next to
the delimited file unless asked not to.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from pathlib import Path

import numpy as np

from . import plotting
from .baselines import SCHEME_ORDER, SchemeId, compare_all
from .errors import ConfigurationError
from .model import (AngularGrid, Beamformer, CoverageRegion, RotationState,
                    gains_over_grid, response_matrix, sample_region)
from .oracle import BruteForceSpec, brute_force_maxmin
from .scenario import Scenario

ARTIFACT_VERSION = "0.1.0"
DB_FLOOR = -120.0

PATTERN_HEADER = ["theta_rad", "scheme", "gain_linear", "gain_db"]
SWEEP_HEADER = ["width_rad", "scheme", "worst_gain_linear", "worst_gain_db",
                "psi_star_rad", "wall_ms"]

NARROW_WIDTH_RAD = math.radians(30.0)
WIDE_WIDTH_RAD = math.radians(80.0)


def to_db(gain: float) -> float:
    """10 log10 with a floor for zero gain."""
    if gain <= 10 ** (DB_FLOOR / 10):
        return DB_FLOOR
    return 10.0 * math.log10(gain)


def _report_entry(report) -> dict:
    inner = report.inner
    return {
        "worst_gain": inner.worst_gain,
        "psi_star": report.psi_star,
        "phi": [float(x) for x in inner.phi],
        "w_real": [float(x) for x in inner.w.weights.real],
        "w_imag": [float(x) for x in inner.w.weights.imag],
        "trace": [float(x) for x in inner.trace],
        "iterations": dataclasses.asdict(inner.iters),
        "termination": inner.termination,
        "rank_metrics": [float(x) for x in inner.rank_metrics],
        "sdr_terminations": list(inner.sdr_terminations),
        "per_psi_curve": [[float(p), float(g)] for p, g in report.per_psi_curve],
        "wall_ms": report.wall_time_s * 1e3,
    }


def solve_scenario(scenario: Scenario) -> dict:
    """Run the scenario's schemes; returns (reports keyed by SchemeId)."""
    return compare_all(scenario.region, scenario.array, scenario.algo,
                       total_q=scenario.total_q, schemes=scenario.schemes)


def build_report(scenario: Scenario, reports: dict) -> dict:
    return {
        "artifact_version": ARTIFACT_VERSION,
        "scenario": scenario.to_dict(),
        "schemes": {s.value: _report_entry(reports[s])
                    for s in SCHEME_ORDER if s in reports},
    }


def write_json(payload: dict, out_path) -> None:
    with open(out_path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def run_solve(scenario: Scenario, out_path) -> int:
    reports = solve_scenario(scenario)
    write_json(build_report(scenario, reports), out_path)
    return 0


def run_sweep(scenario: Scenario, widths_rad, out_path, render: bool = True) -> int:
    """Symmetric-region width sweep; one CSV row per (width, scheme)."""
    rows = []
    meta_widths = []
    for width in widths_rad:
        if width <= 0:
            raise ConfigurationError("sweep widths must be positive")
        region = CoverageRegion(((-width / 2, width / 2),))
        sub = dataclasses.replace(scenario, region=region)
        reports = solve_scenario(sub)
        for scheme in SCHEME_ORDER:
            if scheme not in reports:
                continue
            rep = reports[scheme]
            rows.append([width, scheme.value, rep.inner.worst_gain,
                         to_db(rep.inner.worst_gain), rep.psi_star,
                         rep.wall_time_s * 1e3])
        regime = ("narrow" if width < NARROW_WIDTH_RAD
                  else "wide" if width > WIDE_WIDTH_RAD else "intermediate")
        meta_widths.append({"width_rad": width, "regime": regime})
    _write_csv(out_path, SWEEP_HEADER, rows)
    meta = {"artifact_version": ARTIFACT_VERSION,
            "scenario": scenario.to_dict(), "widths": meta_widths}
    write_json(meta, str(out_path) + ".meta.json")
    if render:
        plotting.render_sweep_figure(rows, Path(out_path).with_suffix(".png"))
    return 0


def run_pattern(scenario: Scenario, theta_min: float, theta_max: float,
                n_samples: int, out_path, render: bool = True) -> int:
    """Solve, then dump dense beam patterns of the optimized configurations."""
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    reports = solve_scenario(scenario)
    thetas = np.linspace(theta_min, theta_max, n_samples) if n_samples > 1 \
        else np.array([theta_min])
    rows = []
    config_meta = {}
    for scheme in SCHEME_ORDER:
        if scheme not in reports:
            continue
        rep = reports[scheme]
        state = RotationState(rep.psi_star, rep.inner.phi)
        a = response_matrix(thetas, state, scenario.array)
        gains = np.abs(a.conj() @ rep.inner.w.weights) ** 2
        for theta, gain in zip(thetas, gains):
            rows.append([float(theta), scheme.value, float(gain), to_db(float(gain))])
        config_meta[scheme.value] = {
            "psi_star": rep.psi_star,
            "phi": [float(x) for x in rep.inner.phi],
            "worst_gain": rep.inner.worst_gain,
        }
    rows.sort(key=lambda r: (r[0], SCHEME_ORDER.index(SchemeId(r[1]))))
    _write_csv(out_path, PATTERN_HEADER, rows)
    meta = {"artifact_version": ARTIFACT_VERSION,
            "scenario": scenario.to_dict(), "configurations": config_meta}
    write_json(meta, str(out_path) + ".meta.json")
    if render:
        plotting.render_pattern_figure(rows, scenario.region.intervals,
                                       Path(out_path).with_suffix(".png"))
    return 0


def run_oracle(spec: BruteForceSpec, scenario: Scenario, out_path) -> int:
    result = brute_force_maxmin(spec, scenario.array)
    payload = {
        "artifact_version": ARTIFACT_VERSION,
        "worst_gain": result.worst_gain,
        "psi": result.psi,
        "phi": [float(x) for x in result.phi],
        "w_real": [float(x) for x in result.w.real],
        "w_imag": [float(x) for x in result.w.imag],
        "lattice": result.lattice,
    }
    write_json(payload, out_path)
    return 0


def _write_csv(out_path, header, rows) -> None:
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
