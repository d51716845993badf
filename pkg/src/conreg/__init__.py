"""Constrained regularization for finite-dimensional linear inverse problems.

Minimize a sum-of-powers regularizer subject to a bound on the data
misfit, with convergence-rate, stability, and optimal-transport
machinery built around the solver.
"""

from .core import (Problem, SolveReport, SolveStatus, discrepancy, feasible,
                   feasibility_tolerance, regularizer_value, value_function)
from .solvers import (SolverOptions, nonconvex_solve, prox_lp,
                      residual_method_solve, tikhonov_min)
from .bregman import (SourceCertificate, bregman_distance, generalized_bregman,
                      r_coercivity_check, source_certificate, subgradient_lp,
                      verify_source_inequality)
from .rates import (RateInstanceSpec, RateTable, build_rate_instance,
                    expected_rate, fit_loglog_slope, run_rate_experiment)
from .stability import (StabilityReport, check_value_right_continuity,
                        instability_demo, run_data_stability,
                        run_operator_stability)
from .transport import (DiscreteMeasure, GridDensity, density_estimate,
                        empirical_measure, entropy, wasserstein_discrete,
                        wasserstein_oracle_permutation, wp_convexity_check)
from .oracle import grid_search_solve, support_enumeration_solve

__version__ = "0.1.0"
