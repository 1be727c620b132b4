"""Figure rendering for the report paths.

Figures are written next to the delimited outputs; the CSV stays the data
boundary and the plots are a convenience view of the same rows.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SCHEME_STYLE = {
    "HR6DMA": dict(color="tab:red", lw=2.0),
    "AntennaRA": dict(color="tab:blue", lw=1.4),
    "ArrayRA": dict(color="tab:green", lw=1.4),
    "NRA": dict(color="tab:gray", lw=1.4),
    "ARS": dict(color="tab:orange", lw=1.4, ls="--"),
    "CSAR": dict(color="tab:purple", lw=1.4, ls="--"),
}


def _style(scheme: str) -> dict:
    return _SCHEME_STYLE.get(scheme, dict(lw=1.2))


def render_pattern_figure(rows, region_intervals, out_path) -> None:
    """Beam patterns (dB vs AoD) with the target region shaded.

    rows: iterable of (theta_rad, scheme, gain_linear, gain_db).
    """
    by_scheme: dict = {}
    for theta, scheme, _, gain_db in rows:
        by_scheme.setdefault(scheme, ([], []))
        by_scheme[scheme][0].append(theta)
        by_scheme[scheme][1].append(gain_db)
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for a, b in region_intervals:
        ax.axvspan(a, b, color="0.92", zorder=0)
    for scheme, (thetas, gains) in by_scheme.items():
        ax.plot(thetas, gains, label=scheme, **_style(scheme))
    ax.set_xlabel("AoD (rad)")
    ax.set_ylabel("beamforming gain (dB)")
    ax.set_ylim(bottom=-30)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_sweep_figure(rows, out_path) -> None:
    """Worst-case gain vs region width.

    rows: iterable of (width_rad, scheme, worst_gain_linear, ...).
    """
    by_scheme: dict = {}
    for row in rows:
        width, scheme, gain = row[0], row[1], row[2]
        by_scheme.setdefault(scheme, ([], []))
        by_scheme[scheme][0].append(width)
        by_scheme[scheme][1].append(gain)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for scheme, (widths, gains) in by_scheme.items():
        ax.plot(widths, gains, marker="o", ms=3.5, label=scheme, **_style(scheme))
    ax.set_xlabel("region width (rad)")
    ax.set_ylabel("minimum beamforming gain")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
