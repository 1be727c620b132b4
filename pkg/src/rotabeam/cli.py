"""Command-line interface.

Subcommands: solve, compare, sweep, pattern, oracle. Exit codes: 0 on
success, 1 on solver failure, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from . import runner
from .baselines import SCHEME_ORDER
from .errors import ConfigurationError, RotabeamError
from .model import sample_region
from .oracle import BruteForceSpec
from .scenario import Scenario, load_scenario

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2


def _load(args) -> Scenario:
    if args.config is None:
        return Scenario()
    return load_scenario(args.config)


def _common(parser):
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="scenario JSON (defaults apply when omitted)")
    parser.add_argument("--out", metavar="PATH", required=True,
                        help="output file")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    parser.add_argument("--threads", type=int, default=0, metavar="K",
                        help="outer-loop parallelism, 0 = auto (currently "
                             "single-threaded; accepted for compatibility)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotabeam",
        description="Worst-case beam coverage synthesis for hierarchically "
                    "rotatable arrays")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the scenario's schemes, write a JSON report")
    _common(p_solve)

    p_cmp = sub.add_parser("compare", help="solve with all schemes")
    _common(p_cmp)

    p_sweep = sub.add_parser("sweep", help="region-width sweep, write CSV")
    _common(p_sweep)
    p_sweep.add_argument("--widths-deg", required=True,
                         help="comma-separated region widths in degrees")
    p_sweep.add_argument("--no-plot", action="store_true")

    p_pat = sub.add_parser("pattern", help="solve and dump dense beam patterns as CSV")
    _common(p_pat)
    p_pat.add_argument("--theta-min", type=float, default=-math.pi / 2)
    p_pat.add_argument("--theta-max", type=float, default=math.pi / 2)
    p_pat.add_argument("--samples", type=int, default=721)
    p_pat.add_argument("--no-plot", action="store_true")

    p_or = sub.add_parser("oracle", help="brute-force lattice search on a small instance")
    _common(p_or)
    p_or.add_argument("--phase-points", type=int, default=32)
    p_or.add_argument("--phi-points", type=int, default=32)
    p_or.add_argument("--psi-points", type=int, default=32)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = _load(args)
        if args.command in ("solve", "compare"):
            if args.command == "compare":
                scenario = dataclasses.replace(scenario, schemes=SCHEME_ORDER)
            code = runner.run_solve(scenario, args.out)
        elif args.command == "sweep":
            widths = [math.radians(float(tok))
                      for tok in args.widths_deg.split(",") if tok.strip()]
            if not widths:
                raise ConfigurationError("--widths-deg: no widths given")
            code = runner.run_sweep(scenario, widths, args.out,
                                    render=not args.no_plot)
        elif args.command == "pattern":
            code = runner.run_pattern(scenario, args.theta_min, args.theta_max,
                                      args.samples, args.out,
                                      render=not args.no_plot)
        else:  # oracle
            grid = sample_region(scenario.region, scenario.total_q)
            spec = BruteForceSpec(thetas=grid.samples,
                                  phase_grid_points=args.phase_points,
                                  phi_grid_points=args.phi_points,
                                  psi_grid_points=args.psi_points)
            code = runner.run_oracle(spec, scenario, args.out)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RotabeamError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if not args.quiet:
        print(f"wrote {args.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
