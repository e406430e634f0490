"""Convex entropy minimization under moment and marginal constraints.

Solve ``minimize I(Q) subject to T Q in C`` on a finite weighted ground space
through its concave dual, recover the minimizer as ``gamma'(<y, theta>)`` and
certify it with the duality gap and the Young identity.
"""
from .constraints import (MarginalMap, MomentMap, SupportValue, TargetSet, adjoint, apply_T,
                          gram_matrix, marginal_adjoint, support_inf)
from .dual import (DualResult, DualTrace, MomentProblem, SolverOptions, Status,
                   dual_gradient, dual_hessian, dual_objective, solve_dual)
from .errors import *  # noqa: F401,F403
from .measure import (GroundSpace, HolderReport, entropy_value, holder_check, integrate,
                      luxemburg_norm)
from .oracle import OracleResult, brute_force_primal
from .qualification import Verdict, feasibility_check, icor_check
from .recovery import DualCertificate, certificate, gamma_star_of, recover, solve
from .sinkhorn import (MarginalProblem, MarginalSolution, ScalingPair, as_moment_problem,
                       ipf_step, marginal_dual_objective, marginals_certificate,
                       solve_marginals, update_cols, update_rows)
from .young import (CATALOG, Delta2Result, EntropySpec, Interval, YoungFamily, catalog,
                    conjugate_numeric, delta2_classify, from_gamma_star, young_family)

__version__ = "0.1.0"
