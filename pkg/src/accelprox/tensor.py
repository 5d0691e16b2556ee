"""Second-order model subproblems and their lift to outer certificates.

The smooth part g is replaced by its regularized second-order model at
z = P(x),

    m(y) = g(z) + <grad g(z), y-z> + 0.5 <H(z)(y-z), y-z>
           + (M/6) ||y-z||^3,

convex whenever M is at least twice the Hessian Lipschitz constant.  An
approximate model-prox solution (y, u, eps) at (x, lam) satisfies
u in the eps-subdifferential of f at y and

    ||lam (u + grad m(y)) + y - x||^2 / (1 + lam mu) + 2 lam eps
        <= sigma_hat^2 ||y - x||^2.

Lifting replaces the model gradient by the true one: v = u + grad g(y)
satisfies the outer relative-error criterion with

    sigma = lam (L + M) ||y - x||^(p-1) / (p! sqrt(1 + lam mu)) + sigma_hat,

which the step-size window keeps at or below sigma_u + sigma_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import InexactTriple, StoppingRule, Tolerances, Trace
from .errors import (CapabilityError, ParameterError, SolverFailure, StepError)
from .largestep import LargeStepConfig, run_largestep
from .problems import Array, CompositeProblem

__all__ = ["TensorConfig", "TensorTriple", "tensor_model_value",
           "tensor_model_grad", "solve_tensor_subproblem_p2",
           "lift_tensor_solution", "run_tensor"]

_SECULAR_RTOL = 1e-14


@dataclass(frozen=True)
class TensorConfig:
    """Second-order method parameters.

    sigma_l < sigma_u are the window tolerances, sigma_hat the inner
    relative error; the outer tolerance is sigma_u + sigma_hat and the
    configuration must satisfy sigma_u + sigma_hat < 1 as well as
    sigma_l (1 + sigma_hat)^(p-1) < sigma_u (1 - sigma_hat)^(p-1), which
    keeps the step-size window nonempty under inner inexactness.  M is
    the model regularization weight, defaulting to p times the Hessian
    Lipschitz constant (the smallest value that keeps the model convex).
    """

    sigma_l: float
    sigma_u: float
    stopping: StoppingRule
    sigma_hat: float = 0.0
    M: Optional[float] = None
    p: int = 2
    bracket_factor: float = 2.0
    max_evals: int = 80
    lam_seed: float = 1.0
    inner_budget: int = 500
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not 0.0 < self.sigma_l < self.sigma_u < 1.0:
            raise ParameterError(
                f"need 0 < sigma_l < sigma_u < 1, got "
                f"sigma_l={self.sigma_l}, sigma_u={self.sigma_u}")
        if self.sigma_hat < 0:
            raise ParameterError(f"sigma_hat must be >= 0, got {self.sigma_hat}")
        if not self.sigma_u + self.sigma_hat < 1.0:
            raise ParameterError(
                f"need sigma_u + sigma_hat < 1, got {self.sigma_u + self.sigma_hat}")
        pm1 = self.p - 1
        if not (self.sigma_l * (1.0 + self.sigma_hat) ** pm1
                < self.sigma_u * (1.0 - self.sigma_hat) ** pm1):
            raise ParameterError(
                "window tolerances incompatible with sigma_hat: need "
                "sigma_l (1+sigma_hat)^(p-1) < sigma_u (1-sigma_hat)^(p-1)")
        if self.p < 2:
            raise ParameterError(f"p must be >= 2, got {self.p}")
        if self.M is not None and self.M < 0:
            raise ParameterError(f"M must be >= 0, got {self.M}")


@dataclass(frozen=True)
class TensorTriple:
    """Approximate model-prox solution; model_residual is the certified ratio."""

    y: Array
    u: Array
    eps: float
    model_residual: float

    def __post_init__(self):
        if self.eps < 0:
            raise ParameterError(f"eps must be >= 0, got {self.eps}")


def _require_hessian(problem: CompositeProblem):
    if problem.g_hess is None:
        raise CapabilityError(
            f"problem {problem.name!r} exposes no Hessian oracle")


def _check_box(problem: CompositeProblem, points, what: str):
    box = problem.lip_hess_box
    if box is None:
        return
    for pt in points:
        reach = float(np.max(np.abs(pt)))
        if reach > box * (1.0 + 1e-9):
            raise StepError(
                f"{what} left the validity box of the Hessian Lipschitz "
                f"constant (|x|_inf = {reach:.6g} > {box:.6g}); the model "
                f"error bound no longer applies")


def tensor_model_value(problem: CompositeProblem, center: Array, y: Array,
                       M: float, p: int = 2) -> float:
    """Value of the regularized second-order model of g centered at ``center``."""
    if p != 2:
        raise CapabilityError(f"model oracles ship for p = 2, got p = {p}")
    if M < 0:
        raise ParameterError(f"M must be >= 0, got {M}")
    _require_hessian(problem)
    d = y - center
    H = problem.g_hess(center)
    r = float(np.linalg.norm(d))
    return (float(problem.g_value(center)) + float(problem.g_grad(center) @ d)
            + 0.5 * float(d @ (H @ d)) + (M / 6.0) * r ** 3)


def tensor_model_grad(problem: CompositeProblem, center: Array, y: Array,
                      M: float, p: int = 2) -> Array:
    """Gradient of the model: grad g(z) + H(z) d + (M/2)||d|| d."""
    if p != 2:
        raise CapabilityError(f"model oracles ship for p = 2, got p = {p}")
    if M < 0:
        raise ParameterError(f"M must be >= 0, got {M}")
    _require_hessian(problem)
    d = y - center
    H = problem.g_hess(center)
    return problem.g_grad(center) + H @ d + 0.5 * M * float(np.linalg.norm(d)) * d


def _secular_step(shifts: Array, coeffs: Array, M: float):
    """Radius r solving || (shifts + (M/2) r)^-1 coeffs || = r.

    shifts are the (positive) eigenvalues of H + I/lam, coeffs the
    right-hand side in the eigenbasis.  Safeguarded Newton on
    psi(r) = n(r) - r, which is strictly decreasing with a unique
    nonnegative root; terminates at relative residual 1e-14.
    """

    def n_of(r: float) -> float:
        return float(np.linalg.norm(coeffs / (shifts + 0.5 * M * r)))

    n0 = n_of(0.0)
    if n0 == 0.0 or M == 0.0:
        return n0
    lo, hi = 0.0, n0
    r = n0
    for _ in range(200):
        denom = shifts + 0.5 * M * r
        d = coeffs / denom
        n_r = float(np.linalg.norm(d))
        psi = n_r - r
        if abs(psi) <= _SECULAR_RTOL * max(r, 1e-300):
            return r
        if psi > 0:
            lo = r
        else:
            hi = r
        dn = -0.5 * M * float(np.sum(d * d / denom)) / n_r if n_r > 0 else 0.0
        step_denom = dn - 1.0
        r_new = r - psi / step_denom
        if not lo < r_new < hi:
            r_new = 0.5 * (lo + hi)
        if hi - lo <= 4.0 * np.finfo(float).eps * max(hi, 1e-300):
            return r_new
        r = r_new
    return r


def solve_tensor_subproblem_p2(problem: CompositeProblem, x: Array, lam: float,
                               M: float, sigma_hat: float = 0.0,
                               inner_budget: int = 500,
                               tolerances: Tolerances = Tolerances()) -> TensorTriple:
    """Solve min f(y) + m(y) + ||y - x||^2 / (2 lam) to the stated accuracy.

    With f identically zero the minimizer is closed-form up to a scalar
    secular equation in r = ||y - z||, solved by safeguarded Newton on
    the eigendecomposition of H(z) + I/lam.  Otherwise a certified
    forward-backward loop on the model objective runs until the inner
    criterion at sigma_hat passes, which requires sigma_hat > 0.
    """
    if not lam > 0:
        raise ParameterError(f"lam must be > 0, got {lam}")
    if M < 0:
        raise ParameterError(f"M must be >= 0, got {M}")
    _require_hessian(problem)
    x = np.asarray(x, dtype=float)
    z = problem.project(x)
    _check_box(problem, [z], "model center")

    if problem.f_is_zero:
        H = problem.g_hess(z)
        rhs = -(problem.g_grad(z) + (z - x) / lam)
        eigvals, eigvecs = np.linalg.eigh(H)
        shifts = eigvals + 1.0 / lam
        if np.any(shifts <= 0):
            raise SolverFailure(
                f"model curvature not positive (min shift {shifts.min():.3e})")
        coeffs = eigvecs.T @ rhs
        r = _secular_step(shifts, coeffs, M)
        d = eigvecs @ (coeffs / (shifts + 0.5 * M * r))
        y = z + d
        u = np.zeros(problem.dim)
        eps = 0.0
    else:
        if sigma_hat <= 0:
            raise CapabilityError(
                "model subproblems with nonzero f need sigma_hat > 0 "
                "(the inner loop cannot certify an exact solve)")
        y, u, eps = _model_inner_loop(problem, x, z, lam, M, sigma_hat,
                                      inner_budget, tolerances)

    _check_box(problem, [y], "model step")
    resid = lam * (u + tensor_model_grad(problem, z, y, M)) + (y - x)
    diff_sq = float((y - x) @ (y - x))
    lhs = float(resid @ resid) / (1.0 + lam * problem.mu) + 2.0 * lam * eps
    ratio = lhs / diff_sq if diff_sq > 0 else (0.0 if lhs == 0.0 else math.inf)
    return TensorTriple(y=y, u=u, eps=eps, model_residual=ratio)


def _model_inner_loop(problem, x, z, lam, M, sigma_hat, budget, tolerances):
    """Forward-backward on f + model + prox term, Definition-style stop."""
    H = problem.g_hess(z)
    H_norm = float(np.linalg.norm(H, 2))
    radius = 1.0
    y = x.copy()
    best = math.inf
    for _ in range(budget):
        d_norm = float(np.linalg.norm(y - z))
        if d_norm > radius:
            radius = 2.0 * d_norm
        step = 1.0 / (H_norm + M * radius + 1.0 / lam)
        grad = tensor_model_grad(problem, z, y, M) + (y - x) / lam
        w = y - step * grad
        y_next = problem.f_prox(w, step)
        u = (w - y_next) / step
        resid = lam * (u + tensor_model_grad(problem, z, y_next, M)) + (y_next - x)
        diff_sq = float((y_next - x) @ (y_next - x))
        lhs = float(resid @ resid) / (1.0 + lam * problem.mu)
        slack = tolerances.acceptance_slack * (1.0 + diff_sq)
        if lhs <= sigma_hat ** 2 * diff_sq + slack:
            return y_next, u, 0.0
        best = min(best, lhs / diff_sq if diff_sq > 0 else math.inf)
        y = y_next
    raise SolverFailure(
        f"model inner loop budget {budget} exhausted; best ratio {best:.3e} "
        f"vs sigma_hat^2 = {sigma_hat ** 2:.3e}",
        best_ratio=best, iterations=budget)


def lift_tensor_solution(problem: CompositeProblem, x: Array, lam: float,
                         triple: TensorTriple, M: float, p: int = 2,
                         sigma_hat: float = 0.0):
    """Replace the model gradient by the true one; returns (InexactTriple, sigma).

    v = u + grad g(y) satisfies the outer criterion with
    sigma = lam (L + M) ||y - x||^(p-1) / (p! sqrt(1 + lam mu)) + sigma_hat,
    where L is the Hessian Lipschitz constant (p = 2).
    """
    if problem.lip_hess is None:
        raise CapabilityError(
            f"problem {problem.name!r} exposes no Hessian Lipschitz constant")
    x = np.asarray(x, dtype=float)
    y = triple.y
    _check_box(problem, [y, problem.project(x)], "lifted step")
    v = triple.u + problem.g_grad(y)
    step_norm = float(np.linalg.norm(y - x))
    sigma = (lam * (problem.lip_hess + M) * step_norm ** (p - 1.0)
             / (math.factorial(p) * math.sqrt(1.0 + lam * problem.mu))
             + sigma_hat)
    resid = lam * v + (y - x)
    lhs = float(resid @ resid) / (1.0 + lam * problem.mu) + 2.0 * lam * triple.eps
    diff_sq = step_norm ** 2
    ratio = lhs / diff_sq if diff_sq > 0 else (0.0 if lhs == 0.0 else math.inf)
    lifted = InexactTriple(y=y, v=v, eps=triple.eps, lam=lam,
                           residual_ratio=ratio)
    return lifted, sigma


@dataclass(frozen=True)
class _LiftingModelSolver:
    """Adapter presenting the model solve + lift as a subproblem solver."""

    M: float
    p: int
    sigma_hat: float
    inner_budget: int
    tolerances: Tolerances

    def solve(self, problem: CompositeProblem, x_tilde: Array, lam: float,
              sigma: float, mu: float) -> InexactTriple:
        trip = solve_tensor_subproblem_p2(problem, x_tilde, lam, self.M,
                                          self.sigma_hat, self.inner_budget,
                                          self.tolerances)
        lifted, _ = lift_tensor_solution(problem, x_tilde, lam, trip,
                                         self.M, self.p, self.sigma_hat)
        return lifted


def run_tensor(problem: CompositeProblem, x0: Array,
               config: TensorConfig) -> Trace:
    """Run the accelerated second-order method with the step-size window.

    The window keeps lam ||y - x~||^(p-1) inside
    [p! sigma_l / (L + M), p! sigma_u sqrt(1 + lam mu) / (L + M)], which
    certifies the lifted triples at sigma_u + sigma_hat and enforces the
    large-step threshold theta = p! sigma_l / (L + M).
    """
    if config.p != 2:
        raise CapabilityError(
            f"the native model solver ships for p = 2, got p = {config.p}")
    _require_hessian(problem)
    if problem.lip_hess is None:
        raise CapabilityError(
            f"problem {problem.name!r} exposes no Hessian Lipschitz constant")
    L = problem.lip_hess
    M = config.M if config.M is not None else config.p * L
    if M < config.p * L:
        raise ParameterError(
            f"M = {M} below the convexity threshold p * lip_hess = {config.p * L}")
    if L + M <= 0:
        raise ParameterError(
            "L + M must be positive; quadratic problems (L = 0) with M = 0 "
            "have no step-size window, use the exact prox solver instead")
    fact = float(math.factorial(config.p))
    theta = fact * config.sigma_l / (L + M)
    upper_coef = fact * config.sigma_u / (L + M)
    ls_config = LargeStepConfig(
        p=float(config.p), theta=theta, sigma=config.sigma_u + config.sigma_hat,
        stopping=config.stopping, window_upper_sqrt_coef=upper_coef,
        bracket_factor=config.bracket_factor, max_evals=config.max_evals,
        lam_seed=config.lam_seed, tolerances=config.tolerances)
    solver = _LiftingModelSolver(M=M, p=config.p, sigma_hat=config.sigma_hat,
                                 inner_budget=config.inner_budget,
                                 tolerances=config.tolerances)
    extra = {"M": M, "lip_hess": L, "sigma_l": config.sigma_l,
             "sigma_u": config.sigma_u, "sigma_hat": config.sigma_hat}
    return run_largestep(problem, x0, ls_config, solver,
                         _algorithm="tensor", _extra_params=extra)
