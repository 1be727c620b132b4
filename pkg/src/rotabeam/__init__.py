"""Worst-case beam coverage synthesis for hierarchically rotatable arrays."""

from .baselines import SchemeId, compare_all
from .kernel import (LpProblem, SdpProblem, SolveStatus, SolverTolerances,
                     principal_eigpair, solve_lp, solve_sdp)
from .model import (AngularGrid, ArrayConfig, Beamformer, CoverageRegion,
                    LinkBudget, RotationState, antenna_positions, array_response,
                    beamforming_gain, element_gain, received_power, sample_region,
                    steering_vector, worst_case_gain)
from .optimizer import (AlgoSettings, InnerSolution, SolveReport, init_phi,
                        init_w, sca_gradient, sca_phi_step, sdr_w_step,
                        solve_inner, solve_outer)
from .oracle import (BruteForceSpec, brute_force_maxmin, direct_gain_oracle,
                     fd_gradient_check)
from .scenario import Scenario, load_scenario, write_scenario

__version__ = "0.1.0"
