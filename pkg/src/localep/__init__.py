"""Simulation and verification tools for local empirical processes."""

from localep.densities import (Density, Sample, eval_density, make_density, sample,
                               smoothed_density, triangular, truncated_gaussian_mixture,
                               uniform_box)
from localep.function_classes import (FunctionNet, build_net, gram_matrix, inner_product,
                                      kernel_norm_sq, l2_distance)
from localep.limit_set import (LimitBallModel, SolverError, dist_to_unit_ball, in_epsilon_ball,
                               project_to_ball, rate_function, strassen_rate_1d, tail_rate)
from localep.local_process import (BandwidthSchedule, LocalEmpiricalProcess, LocalKDE,
                                   ProcessEval, increment_process, kde, kde_band, kde_sup_stat,
                                   local_empirical, oscillation_modulus, validate_schedule)
from localep.poissonization import (covariance_check, fact6_check, gaussian_compare,
                                    ldp_tail_rate, poissonized_process)

__version__ = "0.1.0"
