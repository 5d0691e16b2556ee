"""Certified accelerated inexact proximal methods for strongly convex
composite minimization, with per-run empirical verification of the
convergence guarantees.
"""

from .errors import (AccelProxError, CapabilityError, DataError,
                     LineSearchFailure, ParameterError, SolverFailure,
                     StepError)
from .problems import (CompositeProblem, make_l1_composite,
                       make_logistic_ridge, make_quadratic, make_quartic,
                       random_logistic_data)
from .core import (AcceptanceRecord, InexactTriple, LambdaPolicy,
                   MethodConfig, SolverState, StoppingRule, Tolerances, Trace,
                   TraceRecord, advance_with_triple, ahpe_step,
                   check_error_criterion, compute_a_next, compute_x_tilde,
                   run_ahpe, update_x_next)
from .solvers import SubproblemSolver, exact_prox, inner_loop_solve
from .certificates import (BoundReport, CertificateBundle,
                           constrained_product_min,
                           prox_quadratic_closed_forms, verify_trace)
from .largestep import LargeStepConfig, bisect_lambda, run_largestep
from .tensor import (TensorConfig, TensorTriple, lift_tensor_solution,
                     run_tensor, solve_tensor_subproblem_p2,
                     tensor_model_grad, tensor_model_value)
from .proxgrad import (PGConfig, compute_lambda_pg, lift_pg_solution,
                       pg_exact_solution, perturbed_pg_solution, run_proxgrad)

__version__ = "0.1.0"

__all__ = [
    "AccelProxError", "CapabilityError", "DataError", "LineSearchFailure",
    "ParameterError", "SolverFailure", "StepError",
    "CompositeProblem", "make_l1_composite", "make_logistic_ridge",
    "make_quadratic", "make_quartic", "random_logistic_data",
    "AcceptanceRecord", "InexactTriple", "LambdaPolicy", "MethodConfig",
    "SolverState", "StoppingRule", "Tolerances", "Trace", "TraceRecord",
    "advance_with_triple", "ahpe_step", "check_error_criterion",
    "compute_a_next", "compute_x_tilde", "run_ahpe", "update_x_next",
    "SubproblemSolver", "exact_prox", "inner_loop_solve",
    "BoundReport", "CertificateBundle", "constrained_product_min",
    "prox_quadratic_closed_forms", "verify_trace",
    "LargeStepConfig", "bisect_lambda", "run_largestep",
    "TensorConfig", "TensorTriple", "lift_tensor_solution", "run_tensor",
    "solve_tensor_subproblem_p2", "tensor_model_grad", "tensor_model_value",
    "PGConfig", "compute_lambda_pg", "lift_pg_solution", "pg_exact_solution",
    "perturbed_pg_solution", "run_proxgrad",
    "__version__",
]
