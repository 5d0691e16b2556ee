"""Inexact-prox subproblem solvers.

A solver takes (problem, x~, lam, sigma, mu) and returns an InexactTriple
whose certificate passes the relative-error criterion at that sigma.  Two
families ship: exact solves for structured problems (residual identically
zero) and a certified forward-backward inner loop that stops at the first
iterate whose computable residual passes the criterion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import InexactTriple, Tolerances
from .errors import CapabilityError, ParameterError, SolverFailure
from .problems import Array, CompositeProblem

__all__ = ["SubproblemSolver", "exact_prox", "inner_loop_solve"]


def exact_prox(problem: CompositeProblem, x_tilde: Array, lam: float) -> InexactTriple:
    """Exact proximal step y = argmin f + g + ||. - x~||^2 / (2 lam).

    Supported structures: f identically zero with quadratic g (dense
    linear solve of (I + lam Q) y = x~ + lam b) and one-dimensional
    problems (root of the monotone fixed-point map built from f_prox and
    the gradient of g).  The returned v = (x~ - y)/lam makes the residual
    lam v + y - x~ vanish identically, so residual_ratio is exactly 0 and
    eps is 0; the inclusion holds to solver precision.
    """
    if not lam > 0:
        raise ParameterError(f"lam must be > 0, got {lam}")
    x_tilde = np.asarray(x_tilde, dtype=float)
    structure = problem.structure
    if problem.f_is_zero and structure.get("g_kind") == "quadratic":
        Q, b = structure["Q"], structure["b"]
        y = np.linalg.solve(np.eye(problem.dim) + lam * Q, x_tilde + lam * b)
    elif problem.dim == 1:
        y = np.array([_prox_1d(problem, float(x_tilde[0]), lam)])
    else:
        raise CapabilityError(
            f"exact prox supports quadratic g with zero f or dim 1, "
            f"got {problem.name!r}")
    v = (x_tilde - y) / lam
    return InexactTriple(y=y, v=v, eps=0.0, lam=lam, residual_ratio=0.0)


def _prox_1d(problem: CompositeProblem, x_tilde: float, lam: float) -> float:
    """Root of psi(y) = f_prox(x~ - lam g'(y), lam) - y, strictly decreasing."""

    def psi(y: float) -> float:
        arr = np.array([y])
        forward = x_tilde - lam * float(problem.g_grad(arr)[0])
        return float(problem.f_prox(np.array([forward]), lam)[0]) - y

    lo, hi = x_tilde - 1.0, x_tilde + 1.0
    for _ in range(200):
        if psi(lo) > 0 >= psi(hi):
            break
        lo, hi = x_tilde - 2.0 * (x_tilde - lo), x_tilde + 2.0 * (hi - x_tilde)
    else:
        raise SolverFailure("could not bracket the 1-d prox root")
    if psi(lo) == 0.0:
        return lo
    return brentq(psi, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def inner_loop_solve(problem: CompositeProblem, x_tilde: Array, lam: float,
                     sigma: float, budget: int,
                     tolerances: Tolerances = Tolerances(),
                     tol_floor: float = 0.0) -> InexactTriple:
    """Forward-backward loop on f + g + ||. - x~||^2/(2 lam), certified stop.

    Starts at x~ with the fixed step 1/(lip_grad + 1/lam).  Each iterate
    carries the exact certificate u = (w - y+)/s from its prox step, so
    v = u + grad g(y+) and eps = 0; the first iterate passing the error
    criterion at sigma is returned.  Exhausting the budget raises
    SolverFailure with the best residual ratio seen; tol_floor > 0 aborts
    early once successive ratios stop improving by that relative amount.
    """
    if not lam > 0:
        raise ParameterError(f"lam must be > 0, got {lam}")
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if budget < 1:
        raise ParameterError(f"budget must be >= 1, got {budget}")

    x_tilde = np.asarray(x_tilde, dtype=float)
    step = 1.0 / (problem.lip_grad + 1.0 / lam)
    y = x_tilde.copy()
    best_ratio = np.inf
    prev_ratio = np.inf
    for it in range(budget):
        grad_reg = problem.g_grad(y) + (y - x_tilde) / lam
        w = y - step * grad_reg
        y_next = problem.f_prox(w, step)
        u = (w - y_next) / step
        v = u + problem.g_grad(y_next)
        diff = y_next - x_tilde
        resid = lam * v + diff
        lhs = float(resid @ resid) / (1.0 + lam * problem.mu)
        step_sq = float(diff @ diff)
        ratio = lhs / step_sq if step_sq > 0 else (0.0 if lhs == 0.0 else np.inf)
        slack = tolerances.acceptance_slack * (1.0 + step_sq)
        if lhs <= sigma ** 2 * step_sq + slack:
            return InexactTriple(y=y_next, v=v, eps=0.0, lam=lam,
                                 residual_ratio=ratio)
        best_ratio = min(best_ratio, ratio)
        if tol_floor > 0 and np.isfinite(prev_ratio):
            if prev_ratio - ratio <= tol_floor * max(1.0, ratio):
                raise SolverFailure(
                    f"inner loop stalled at ratio {ratio:.6e} after {it + 1} "
                    f"iterations", best_ratio=best_ratio, iterations=it + 1)
        prev_ratio = ratio
        y = y_next
    raise SolverFailure(
        f"inner loop budget {budget} exhausted; best residual ratio "
        f"{best_ratio:.6e} vs sigma^2 = {sigma ** 2:.6e}",
        best_ratio=float(best_ratio), iterations=budget)


@dataclass(frozen=True)
class SubproblemSolver:
    """Dispatching solver front end used by the outer loops.

    kind is "exact_structured" or "inner_loop"; inner_budget caps inner
    iterations and inner_tol_floor is the stall threshold (0 disables).
    """

    kind: str
    inner_budget: int = 200
    inner_tol_floor: float = 0.0
    tolerances: Tolerances = Tolerances()

    def __post_init__(self):
        if self.kind not in ("exact_structured", "inner_loop"):
            raise ParameterError(f"unknown solver kind {self.kind!r}")

    def solve(self, problem: CompositeProblem, x_tilde: Array, lam: float,
              sigma: float, mu: float) -> InexactTriple:
        if self.kind == "exact_structured":
            return exact_prox(problem, x_tilde, lam)
        return inner_loop_solve(problem, x_tilde, lam, sigma,
                                self.inner_budget, self.tolerances,
                                self.inner_tol_floor)
