"""Adaptive step-size driver enforcing the large-step condition.

Each outer step searches for lam such that
    phi(lam) = lam * ||y(lam) - x~(lam)||^(p-1)
lands in a window whose lower edge theta > 0 is the large-step threshold.
The extrapolated point moves along the segment x~ = y + tau(lam)(x - y)
as lam varies, with tau increasing from 0 to 1, and phi grows with lam
for exact subproblem solves, so a doubling bracket plus log-scale
bisection locates the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (InexactTriple, MethodConfig, SolverState, StoppingRule,
                   Tolerances, Trace, advance_with_triple, compute_a_next,
                   compute_x_tilde)
from .errors import CapabilityError, LineSearchFailure, ParameterError
from .problems import Array, CompositeProblem

__all__ = ["LargeStepConfig", "tau_of_lambda", "step_residual",
           "bisect_lambda", "run_largestep"]

# One-sided windows are closed with this multiple of theta so the
# bisection has a finite target band.
ONE_SIDED_CAP = 10.0

_LAM_MAX = 1e18
_LAM_MIN = 1e-18


@dataclass(frozen=True)
class LargeStepConfig:
    """Driver parameters.

    p >= 2 is the residual exponent, theta > 0 the large-step threshold,
    sigma in [0, 1) the relative-error tolerance.  The window's upper
    edge is window_upper_sqrt_coef * sqrt(1 + lam mu) when that
    coefficient is set, else window_upper_const, else ONE_SIDED_CAP *
    theta.  The search seeds at lam_seed on the first step and at the
    previously accepted lam afterwards, expanding brackets by
    bracket_factor and spending at most max_evals subproblem solves per
    step.
    """

    p: float
    theta: float
    sigma: float
    stopping: StoppingRule
    window_upper_const: Optional[float] = None
    window_upper_sqrt_coef: Optional[float] = None
    bracket_factor: float = 2.0
    max_evals: int = 80
    lam_seed: float = 1.0
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.p < 2:
            raise ParameterError(f"p must be >= 2, got {self.p}")
        if not self.theta > 0:
            raise ParameterError(f"theta must be > 0, got {self.theta}")
        if not 0.0 <= self.sigma < 1.0:
            raise ParameterError(f"sigma must be in [0, 1), got {self.sigma}")
        if self.bracket_factor <= 1.0:
            raise ParameterError(
                f"bracket_factor must be > 1, got {self.bracket_factor}")
        if self.max_evals < 3:
            raise ParameterError(f"max_evals must be >= 3, got {self.max_evals}")
        if not self.lam_seed > 0:
            raise ParameterError(f"lam_seed must be > 0, got {self.lam_seed}")
        if self.window_upper_const is not None and \
                self.window_upper_sqrt_coef is not None:
            raise ParameterError(
                "set window_upper_const or window_upper_sqrt_coef, not both")
        if self.window_upper_const is not None and \
                self.window_upper_const <= self.theta:
            raise ParameterError("window upper edge must exceed theta")

    def upper_edge(self, lam: float, mu: float) -> float:
        if self.window_upper_sqrt_coef is not None:
            return self.window_upper_sqrt_coef * math.sqrt(1.0 + lam * mu)
        if self.window_upper_const is not None:
            return self.window_upper_const
        return ONE_SIDED_CAP * self.theta


def tau_of_lambda(state: SolverState, lam: float, mu: float) -> float:
    """Extrapolation weight tau with x~ = y + tau (x - y).

    tau(lam) = (a(lam) - mu A lam) / (A + a(lam)); it is 1 when A = 0 and
    increases continuously from 0 to 1 as lam sweeps (0, inf) otherwise.
    """
    a = compute_a_next(state.A, lam, mu)
    return (a - mu * state.A * lam) / (state.A + a)


def step_residual(problem: CompositeProblem, state: SolverState, lam: float,
                  solver, config: LargeStepConfig):
    """Solve the subproblem at lam; returns (triple, phi, x_tilde).

    phi = lam * ||y - x~||^(p-1) is the quantity the window constrains.
    """
    a = compute_a_next(state.A, lam, problem.mu)
    x_tilde = compute_x_tilde(state, a, lam, problem.mu, config.tolerances)
    triple = solver.solve(problem, x_tilde, lam, config.sigma, problem.mu)
    step_norm = float(np.linalg.norm(triple.y - x_tilde))
    phi = lam * step_norm ** (config.p - 1.0)
    return triple, phi, x_tilde


def bisect_lambda(problem: CompositeProblem, state: SolverState, solver,
                  config: LargeStepConfig, lam_seed: Optional[float] = None):
    """Place phi(lam) inside the window; returns (lam, triple, x_tilde, evals).

    Brackets by repeated scaling from the seed, then bisects on the log
    scale.  Raises LineSearchFailure when the evaluation budget is
    exhausted or the bracket collapses without entering the window
    (degenerate geometry, e.g. an already-stationary extrapolation).
    """
    mu = problem.mu
    lam = float(lam_seed if lam_seed is not None else config.lam_seed)
    evals = 0

    def classify(lam_val):
        nonlocal evals
        evals += 1
        triple, phi, x_tilde = step_residual(problem, state, lam_val, solver, config)
        if phi < config.theta:
            side = -1
        elif phi > config.upper_edge(lam_val, mu):
            side = +1
        else:
            side = 0
        return side, triple, phi, x_tilde

    side, triple, phi, x_tilde = classify(lam)
    if side == 0:
        return lam, triple, x_tilde, evals

    lam_lo = lam_hi = None
    if side < 0:
        lam_lo = lam
        while evals < config.max_evals:
            lam *= config.bracket_factor
            if lam > _LAM_MAX:
                raise LineSearchFailure(
                    f"phi stayed below theta={config.theta:g} up to lam={lam:g}",
                    lam_lo=lam_lo, lam_hi=lam, evaluations=evals,
                    reason="below_theta")
            side, triple, phi, x_tilde = classify(lam)
            if side == 0:
                return lam, triple, x_tilde, evals
            if side > 0:
                lam_hi = lam
                break
            lam_lo = lam
    else:
        lam_hi = lam
        while evals < config.max_evals:
            lam /= config.bracket_factor
            if lam < _LAM_MIN:
                raise LineSearchFailure(
                    f"phi stayed above the window down to lam={lam:g}",
                    lam_lo=lam, lam_hi=lam_hi, evaluations=evals)
            side, triple, phi, x_tilde = classify(lam)
            if side == 0:
                return lam, triple, x_tilde, evals
            if side < 0:
                lam_lo = lam
                break
            lam_hi = lam

    if lam_lo is None or lam_hi is None:
        raise LineSearchFailure(
            f"bracketing budget exhausted after {evals} evaluations",
            lam_lo=lam_lo, lam_hi=lam_hi, evaluations=evals)

    while evals < config.max_evals:
        lam_mid = math.sqrt(lam_lo * lam_hi)
        if lam_hi - lam_lo <= 1e-12 * lam_hi:
            raise LineSearchFailure(
                f"bracket collapsed at lam={lam_mid:g} without entering the "
                f"window [{config.theta:g}, ...]",
                lam_lo=lam_lo, lam_hi=lam_hi, evaluations=evals)
        side, triple, phi, x_tilde = classify(lam_mid)
        if side == 0:
            return lam_mid, triple, x_tilde, evals
        if side < 0:
            lam_lo = lam_mid
        else:
            lam_hi = lam_mid
    raise LineSearchFailure(
        f"bisection budget {config.max_evals} exhausted "
        f"(bracket [{lam_lo:g}, {lam_hi:g}])",
        lam_lo=lam_lo, lam_hi=lam_hi, evaluations=evals)


def run_largestep(problem: CompositeProblem, x0: Array,
                  config: LargeStepConfig, solver,
                  _algorithm: str = "largestep",
                  _extra_params: Optional[dict] = None) -> Trace:
    """Run the accelerated method with the large-step window search."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.dim,):
        raise ParameterError(f"x0 must have shape ({problem.dim},), got {x0.shape}")
    if config.stopping.value_gap_tol is not None and problem.known_minimizer is None:
        raise CapabilityError("value-gap stopping needs a reference minimizer")

    state = SolverState(k=0, x=x0, y=x0.copy(), A=0.0)
    records = []
    termination = "max_iter"
    lam_prev: Optional[float] = None
    total_evals = 0
    for _ in range(config.stopping.max_iter):
        try:
            lam, triple, x_tilde, evals = bisect_lambda(problem, state, solver,
                                                        config, lam_prev)
        except LineSearchFailure as exc:
            # once the iterate is converged to float resolution the step
            # norm is numerically zero and no lam can lift phi over theta;
            # with accepted steps behind us that is termination, not failure
            if exc.reason == "below_theta" and records:
                termination = "window_stalled"
                break
            raise
        total_evals += evals
        state, record = advance_with_triple(problem, state, lam, triple,
                                            x_tilde, config.sigma,
                                            config.tolerances)
        records.append(record)
        lam_prev = lam
        if (config.stopping.grad_norm_tol is not None
                and record.v_norm <= config.stopping.grad_norm_tol):
            termination = "grad_norm"
            break
        if (config.stopping.value_gap_tol is not None
                and record.value_gap <= config.stopping.value_gap_tol):
            termination = "value_gap"
            break

    x_star = problem.known_minimizer
    params = {"theta": config.theta, "p": config.p,
              "solver_evals_total": float(total_evals),
              "acceptance_slack": config.tolerances.acceptance_slack}
    if config.window_upper_sqrt_coef is not None:
        params["window_upper_sqrt_coef"] = config.window_upper_sqrt_coef
    elif config.window_upper_const is not None:
        params["window_upper_const"] = config.window_upper_const
    else:
        params["window_upper_const"] = ONE_SIDED_CAP * config.theta
    if records:
        params["lambda_min"] = min(r.lam for r in records)
    if _extra_params:
        params.update(_extra_params)
    return Trace(
        algorithm=_algorithm, problem_name=problem.name, mu=problem.mu,
        sigma=config.sigma, x0=x0, records=records, params=params,
        d0=float(np.linalg.norm(x0 - x_star)) if x_star is not None else None,
        h_star=problem.h_star if x_star is not None else None,
        termination=termination, final_x=state.x, final_y=state.y)
