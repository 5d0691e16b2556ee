"""Accelerated inexact proximal-gradient with a fixed certified step size.

The smooth part is linearized at z = P(x~) and the composite step

    y = argmin f(.) + <grad g(z), . - x~> + ||. - x~||^2 / (2 lam)

is a single prox evaluation, exact whenever f_prox is.  Lifting the
linearization error, v = u + grad g(y) satisfies the relative-error
criterion with sigma = lam L / sqrt(1 + lam mu) + sigma_hat, and lam is
chosen as the largest root of L^2 lam^2 - sigma_u^2 mu lam - sigma_u^2,
so that lam^2 L^2 / (1 + lam mu) = sigma_u^2 exactly and the certified
tolerance is sigma_u + sigma_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .core import (InexactTriple, LambdaPolicy, MethodConfig, StoppingRule,
                   Tolerances, Trace, run_ahpe)
from .errors import CapabilityError, ParameterError, SolverFailure
from .problems import Array, CompositeProblem
from .tensor import TensorTriple

__all__ = ["PGConfig", "compute_lambda_pg", "pg_exact_solution",
           "lift_pg_solution", "perturbed_pg_solution", "run_proxgrad"]

# sigma_u = 1 is formally allowed but the (1 - sigma^2) rate factors
# blow up as sigma_u + sigma_hat -> 1; keep a margin unless overridden.
_SIGMA_U_DEFAULT_CAP = 0.99


@dataclass(frozen=True)
class PGConfig:
    sigma_u: float
    stopping: StoppingRule
    sigma_hat: float = 0.0
    allow_boundary: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        cap = 1.0 if self.allow_boundary else _SIGMA_U_DEFAULT_CAP
        if not 0.0 < self.sigma_u <= cap:
            raise ParameterError(
                f"sigma_u must lie in (0, {cap}], got {self.sigma_u} "
                f"(set allow_boundary=True to go up to 1)")
        if self.sigma_hat < 0:
            raise ParameterError(f"sigma_hat must be >= 0, got {self.sigma_hat}")
        if not self.sigma_u + self.sigma_hat < 1.0:
            raise ParameterError(
                f"need sigma_u + sigma_hat < 1, got "
                f"{self.sigma_u + self.sigma_hat}")


def compute_lambda_pg(sigma_u: float, mu: float, L: float) -> float:
    """Largest root of L^2 lam^2 - sigma_u^2 mu lam - sigma_u^2 = 0.

    Rationalized form sigma_u (sqrt((sigma_u mu / 2)^2 + L^2)
    + sigma_u mu / 2) / L^2, which avoids the cancellation of the
    textbook quotient and satisfies lam^2 L^2 / (1 + lam mu) = sigma_u^2.
    mu = 0 is accepted as the continuous limit lam = sigma_u / L.
    """
    if not 0.0 < sigma_u <= 1.0:
        raise ParameterError(f"sigma_u must lie in (0, 1], got {sigma_u}")
    if not L > 0:
        raise ParameterError(f"L must be > 0, got {L}")
    if mu < 0 or mu > L:
        raise ParameterError(f"mu must lie in [0, L], got mu={mu}, L={L}")
    half = 0.5 * sigma_u * mu
    return sigma_u * (math.hypot(half, L) + half) / (L * L)


def pg_exact_solution(problem: CompositeProblem, x_tilde: Array,
                      lam: float) -> TensorTriple:
    """One exact forward-backward step: y = f_prox(x~ - lam grad g(z), lam).

    u = (forward point - y) / lam is an exact subgradient of f at y, so
    the linearized-model residual is zero and eps = 0.
    """
    if not lam > 0:
        raise ParameterError(f"lam must be > 0, got {lam}")
    if problem.f_prox is None:
        raise CapabilityError(f"problem {problem.name!r} exposes no f_prox")
    x_tilde = np.asarray(x_tilde, dtype=float)
    z = problem.project(x_tilde)
    w = x_tilde - lam * problem.g_grad(z)
    y = problem.f_prox(w, lam)
    u = (w - y) / lam
    return TensorTriple(y=y, u=u, eps=0.0, model_residual=0.0)


def lift_pg_solution(problem: CompositeProblem, x_tilde: Array, lam: float,
                     triple: TensorTriple,
                     sigma_hat: float = 0.0) -> InexactTriple:
    """v = u + grad g(y); certified at sigma = lam L / sqrt(1+lam mu) + sigma_hat."""
    x_tilde = np.asarray(x_tilde, dtype=float)
    y = triple.y
    v = triple.u + problem.g_grad(y)
    resid = lam * v + (y - x_tilde)
    lhs = (float(resid @ resid) / (1.0 + lam * problem.mu)
           + 2.0 * lam * triple.eps)
    diff_sq = float((y - x_tilde) @ (y - x_tilde))
    ratio = lhs / diff_sq if diff_sq > 0 else (0.0 if lhs == 0.0 else math.inf)
    return InexactTriple(y=y, v=v, eps=triple.eps, lam=lam,
                         residual_ratio=ratio)


def perturbed_pg_solution(problem: CompositeProblem, x_tilde: Array,
                          lam: float, sigma_hat: float, seed: int,
                          scale: float = 0.5) -> TensorTriple:
    """Deliberately inexact step for exercising sigma_hat > 0 paths.

    Noise is added to the forward point, so the linearized-model
    residual equals the noise vector exactly; the magnitude is halved
    until the sigma_hat criterion passes.  Test harness only.
    """
    if not 0.0 < sigma_hat:
        raise ParameterError(f"sigma_hat must be > 0, got {sigma_hat}")
    if not 0.0 < scale <= 1.0:
        raise ParameterError(f"scale must lie in (0, 1], got {scale}")
    x_tilde = np.asarray(x_tilde, dtype=float)
    z = problem.project(x_tilde)
    w = x_tilde - lam * problem.g_grad(z)
    y_exact = problem.f_prox(w, lam)
    base = float(np.linalg.norm(y_exact - x_tilde))
    if base == 0.0:
        return TensorTriple(y=y_exact, u=(w - y_exact) / lam, eps=0.0,
                            model_residual=0.0)
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(problem.dim)
    direction /= np.linalg.norm(direction)
    eta = scale * sigma_hat * math.sqrt(1.0 + lam * problem.mu) * base
    for _ in range(60):
        w_pert = w + eta * direction
        y = problem.f_prox(w_pert, lam)
        u = (w_pert - y) / lam
        diff_sq = float((y - x_tilde) @ (y - x_tilde))
        lhs = eta * eta / (1.0 + lam * problem.mu)
        if diff_sq > 0 and lhs <= sigma_hat ** 2 * diff_sq:
            return TensorTriple(y=y, u=u, eps=0.0,
                                model_residual=lhs / diff_sq)
        eta *= 0.5
    raise SolverFailure(
        "could not fit a perturbation under the sigma_hat criterion")


@dataclass(frozen=True)
class _LiftingPGSolver:
    sigma_hat: float

    def solve(self, problem: CompositeProblem, x_tilde: Array, lam: float,
              sigma: float, mu: float) -> InexactTriple:
        trip = pg_exact_solution(problem, x_tilde, lam)
        return lift_pg_solution(problem, x_tilde, lam, trip, self.sigma_hat)


def run_proxgrad(problem: CompositeProblem, x0: Array,
                 config: PGConfig) -> Trace:
    """Run the accelerated proximal-gradient method with its fixed lam."""
    if problem.lip_grad is None:
        raise CapabilityError(
            f"problem {problem.name!r} exposes no gradient Lipschitz constant")
    if not problem.mu > 0:
        raise ParameterError(
            "the rate guarantees need mu > 0; non-strongly-convex runs "
            "are out of scope")
    if problem.f_prox is None:
        raise CapabilityError(f"problem {problem.name!r} exposes no f_prox")
    L = problem.lip_grad
    lam = compute_lambda_pg(config.sigma_u, problem.mu, L)
    identity = lam * lam * L * L / (1.0 + lam * problem.mu)
    if abs(identity - config.sigma_u ** 2) > 1e-12 * max(1.0, identity):
        raise ParameterError(
            f"step-size identity violated: lam^2 L^2/(1+lam mu) = {identity!r} "
            f"vs sigma_u^2 = {config.sigma_u ** 2!r}")
    if not lam > config.sigma_u / L:
        raise ParameterError(
            f"lam = {lam} failed the strict lower bound sigma_u / L")
    method = MethodConfig(sigma=config.sigma_u + config.sigma_hat,
                          lambda_policy=LambdaPolicy.constant(lam),
                          stopping=config.stopping,
                          tolerances=config.tolerances)
    gamma = math.sqrt(config.sigma_u / (1.0 + config.sigma_u))
    extra = {"L": L, "sigma_u": config.sigma_u, "sigma_hat": config.sigma_hat,
             "lambda_pg": lam, "gamma": gamma}
    solver = _LiftingPGSolver(sigma_hat=config.sigma_hat)
    return run_ahpe(problem, x0, method, solver,
                    _algorithm="proxgrad", _extra_params=extra)
