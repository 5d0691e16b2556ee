"""Accelerated inexact proximal-point engine for strongly convex problems.

One outer step at scaling coefficient A and step size lam:

1. grow the coefficient by the largest root a of
       a^2 - (1 + 2 mu A) lam a - (1 + mu A) A lam = 0,
2. extrapolate  x~ = cx * x + cy * y  with
       cx = (a - mu A lam) / (A + a),   cy = (A + mu A lam) / (A + a),
3. obtain (y+, v, eps) with v in the eps-enlarged subdifferential of
   f + g at y+ and relative-error certificate
       ||lam v + y+ - x~||^2 / (1 + lam mu) + 2 lam eps
           <= sigma^2 ||y+ - x~||^2,
4. update  x+ = ((1+mu A) x + mu a y+ - a v) / (1 + mu A+),  A+ = A + a.

Everything here is pure: steps build new state objects, traces are plain
records, and no module-level mutable state exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CapabilityError, ParameterError, StepError
from .problems import Array, CompositeProblem

_PROBE_SEED = 0x5EED

__all__ = [
    "Tolerances", "SolverState", "InexactTriple", "AcceptanceRecord",
    "LambdaPolicy", "StoppingRule", "MethodConfig", "TraceRecord", "Trace",
    "compute_a_next", "compute_x_tilde", "check_error_criterion",
    "update_x_next", "advance_with_triple", "ahpe_step", "run_ahpe",
]


@dataclass(frozen=True)
class Tolerances:
    """Floating-point slack used by runtime checks.

    acceptance_slack scales the additive slack 1e-12 * (1 + ||y - x~||^2)
    on the error criterion; identity_tol bounds the residual of the
    coefficient equation relative to max(1, a^2); affine_tol bounds the
    deviation of the extrapolation weights from summing to one;
    growth_rtol is the relative slack on the per-step A growth check;
    inclusion_tol scales the slack of the sampled subgradient-inequality
    spot check at inclusion_probes points.
    """

    acceptance_slack: float = 1e-12
    identity_tol: float = 1e-10
    affine_tol: float = 1e-12
    growth_rtol: float = 1e-10
    inclusion_tol: float = 1e-8
    inclusion_probes: int = 16


@dataclass(frozen=True)
class SolverState:
    """Outer-iteration state (k, x, y, A)."""

    k: int
    x: Array
    y: Array
    A: float

    def __post_init__(self):
        if self.k < 0:
            raise ParameterError(f"k must be >= 0, got {self.k}")
        if not math.isfinite(self.A) or self.A < 0:
            raise ParameterError(f"A must be finite and >= 0, got {self.A}")


@dataclass(frozen=True)
class InexactTriple:
    """Certified inexact proximal step (y, v, eps) at step size lam.

    residual_ratio is the left-hand side of the error criterion divided
    by ||y - x~||^2 (inf when the step is zero but the residual is not).
    """

    y: Array
    v: Array
    eps: float
    lam: float
    residual_ratio: float

    def __post_init__(self):
        if self.eps < 0:
            raise ParameterError(f"eps must be >= 0, got {self.eps}")
        if not self.lam > 0:
            raise ParameterError(f"lam must be > 0, got {self.lam}")


@dataclass(frozen=True)
class AcceptanceRecord:
    """Outcome of the relative-error criterion at one candidate step."""

    accepted: bool
    residual_ratio: float
    lhs: float
    rhs: float
    step_sq: float
    inclusion_checked: bool
    inclusion_ok: bool


@dataclass(frozen=True)
class LambdaPolicy:
    """Step-size policy: constant value or an explicit schedule.

    Window-search policies are implemented by the adaptive driver, not by
    ``run_ahpe``; requesting one here raises at run time.
    """

    kind: str
    value: Optional[float] = None
    schedule: Optional[tuple] = None

    @staticmethod
    def constant(value: float) -> "LambdaPolicy":
        if not value > 0:
            raise ParameterError(f"constant lambda must be > 0, got {value}")
        return LambdaPolicy(kind="constant", value=float(value))

    @staticmethod
    def from_schedule(values: Sequence[float]) -> "LambdaPolicy":
        vals = tuple(float(v) for v in values)
        if not vals or any(v <= 0 for v in vals):
            raise ParameterError("schedule must be nonempty with positive entries")
        return LambdaPolicy(kind="schedule", schedule=vals)

    @staticmethod
    def search() -> "LambdaPolicy":
        return LambdaPolicy(kind="search")

    def lam_at(self, k: int) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "schedule":
            if k >= len(self.schedule):
                raise ParameterError(
                    f"lambda schedule exhausted at step {k} (length {len(self.schedule)})")
            return self.schedule[k]
        raise ParameterError(
            "search policies are handled by the adaptive driver, not run_ahpe")


@dataclass(frozen=True)
class StoppingRule:
    """Stop on certificate-vector norm, value gap, or the iteration cap.

    max_iter always backstops; the norm test uses ||v^k||, the gap test
    needs a reference minimizer on the problem.
    """

    max_iter: int
    grad_norm_tol: Optional[float] = None
    value_gap_tol: Optional[float] = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        for name, tol in (("grad_norm_tol", self.grad_norm_tol),
                          ("value_gap_tol", self.value_gap_tol)):
            if tol is not None and not tol > 0:
                raise ParameterError(f"{name} must be > 0, got {tol}")


@dataclass(frozen=True)
class MethodConfig:
    """Outer-loop configuration: error tolerance sigma, step policy, stopping."""

    sigma: float
    lambda_policy: LambdaPolicy
    stopping: StoppingRule
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not 0.0 <= self.sigma <= 1.0:
            raise ParameterError(f"sigma must be in [0, 1], got {self.sigma}")


@dataclass
class TraceRecord:
    """Per-iteration observables; distances are NaN without a reference point."""

    k: int
    lam: float
    a: float
    A: float
    value_gap: float
    dist_x: float
    dist_y: float
    v_norm: float
    eps: float
    residual_ratio: float
    step_norm: float

    FIELDS = ("k", "lam", "a", "A", "value_gap", "dist_x", "dist_y",
              "v_norm", "eps", "residual_ratio", "step_norm")


@dataclass
class Trace:
    """Run output: per-step records plus the constants certificates need."""

    algorithm: str
    problem_name: str
    mu: float
    sigma: float
    x0: Array
    records: list
    params: dict = field(default_factory=dict)
    d0: Optional[float] = None
    h_star: Optional[float] = None
    termination: str = ""
    final_x: Optional[Array] = None
    final_y: Optional[Array] = None

    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])


def compute_a_next(A: float, lam: float, mu: float) -> float:
    """Largest root of a^2 - (1 + 2 mu A) lam a - (1 + mu A) A lam = 0.

    Both the linear coefficient and the constant term are nonpositive on
    the admissible range, so the quadratic formula has no cancellation.
    A = 0 returns lam exactly.
    """
    if not lam > 0:
        raise ParameterError(f"lam must be > 0, got {lam}")
    if A < 0 or mu < 0:
        raise ParameterError(f"need A >= 0 and mu >= 0, got A={A}, mu={mu}")
    if A == 0.0:
        return lam
    b = (1.0 + 2.0 * mu * A) * lam
    c = (1.0 + mu * A) * A * lam
    return 0.5 * (b + math.sqrt(b * b + 4.0 * c))


def compute_x_tilde(state: SolverState, a_next: float, lam: float, mu: float,
                    tolerances: Tolerances = Tolerances()) -> Array:
    """Extrapolated point x~ = cx x + cy y; the weights sum to one."""
    A = state.A
    denom = A + a_next
    if not denom > 0:
        raise ParameterError(f"A + a must be > 0, got {denom}")
    cx = (a_next - mu * A * lam) / denom
    cy = (A + mu * A * lam) / denom
    if abs(cx + cy - 1.0) > tolerances.affine_tol:
        raise StepError(f"extrapolation weights sum to {cx + cy!r}, not 1")
    if cx <= 0 and A > 0:
        raise StepError(f"extrapolation weight on x must be positive, got {cx}")
    return cx * state.x + cy * state.y


def check_error_criterion(problem: CompositeProblem, x_tilde: Array,
                          triple: InexactTriple, sigma: float,
                          tolerances: Tolerances = Tolerances()) -> AcceptanceRecord:
    """Evaluate the relative-error certificate for a candidate triple.

    Accepts when
        ||lam v + y - x~||^2 / (1 + lam mu) + 2 lam eps
            <= sigma^2 ||y - x~||^2 + slack,
    slack = acceptance_slack * (1 + ||y - x~||^2).  The subdifferential
    inclusion is structural (solvers construct v from a prox or model
    step); when the problem exposes f_value it is spot-checked here via
    the eps-subgradient inequality at a fixed set of random probes.
    """
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    lam, y, v, eps = triple.lam, triple.y, triple.v, triple.eps
    diff = y - x_tilde
    step_sq = float(diff @ diff)
    resid = lam * v + diff
    lhs = float(resid @ resid) / (1.0 + lam * problem.mu) + 2.0 * lam * eps
    rhs = sigma ** 2 * step_sq
    slack = tolerances.acceptance_slack * (1.0 + step_sq)
    accepted = lhs <= rhs + slack
    if step_sq > 0:
        ratio = lhs / step_sq
    else:
        ratio = 0.0 if lhs <= slack else math.inf

    inclusion_checked = False
    inclusion_ok = True
    if problem.f_value is not None:
        inclusion_checked = True
        u = v - problem.g_grad(y)
        f_y = float(problem.f_value(y))
        rng = np.random.default_rng(_PROBE_SEED)
        radius = 1.0 + float(np.linalg.norm(y))
        for _ in range(tolerances.inclusion_probes):
            w = y + radius * rng.standard_normal(y.shape)
            gap = (float(problem.f_value(w)) - f_y - float(u @ (w - y)) + eps)
            tol = tolerances.inclusion_tol * (
                1.0 + abs(f_y) + float(np.linalg.norm(u)) * float(np.linalg.norm(w - y)))
            if gap < -tol:
                inclusion_ok = False
                break
    return AcceptanceRecord(accepted=accepted and inclusion_ok,
                            residual_ratio=ratio, lhs=lhs, rhs=rhs,
                            step_sq=step_sq, inclusion_checked=inclusion_checked,
                            inclusion_ok=inclusion_ok)


def update_x_next(state: SolverState, a_next: float, y_next: Array,
                  v_next: Array, mu: float) -> Array:
    """Convex-combination update of the accelerated iterate.

    x+ = ((1 + mu A) x + mu a y+ - a v) / (1 + mu A+), A+ = A + a.  With
    mu = 0 this is the classical x - a v extragradient update.
    """
    A_next = state.A + a_next
    denom = 1.0 + mu * A_next
    return ((1.0 + mu * state.A) / denom) * state.x \
        + (mu * a_next / denom) * y_next - (a_next / denom) * v_next


def _growth_floor(lam: float, mu: float) -> float:
    t = mu * lam
    return 1.0 + t + math.sqrt(t * (1.0 + t))


def _step_invariants(state: SolverState, a: float, lam: float, mu: float,
                     tolerances: Tolerances) -> None:
    A = state.A
    residual = a * a - (1.0 + 2.0 * mu * A) * lam * a - (1.0 + mu * A) * A * lam
    if abs(residual) > tolerances.identity_tol * max(1.0, a * a):
        raise StepError(
            f"coefficient equation residual {residual:.3e} exceeds tolerance "
            f"at k={state.k} (a={a!r}, A={A!r}, lam={lam!r})")
    if not a - mu * A * lam > 0:
        raise StepError(f"coefficient a - mu A lam = {a - mu * A * lam!r} not positive")
    if A > 0:
        ratio = (A + a) / A
        floor = _growth_floor(lam, mu)
        if ratio < floor * (1.0 - tolerances.growth_rtol):
            raise StepError(
                f"growth ratio {ratio!r} below floor {floor!r} at k={state.k}")


def _make_record(problem: CompositeProblem, state: SolverState, lam: float,
                 a: float, triple: InexactTriple, x_tilde: Array) -> TraceRecord:
    x_star = problem.known_minimizer
    if x_star is not None:
        gap = problem.h_value(state.y) - problem.h_star
        dist_x = float(np.linalg.norm(state.x - x_star))
        dist_y = float(np.linalg.norm(state.y - x_star))
    else:
        gap = dist_x = dist_y = math.nan
    return TraceRecord(
        k=state.k, lam=lam, a=a, A=state.A, value_gap=gap,
        dist_x=dist_x, dist_y=dist_y,
        v_norm=float(np.linalg.norm(triple.v)), eps=triple.eps,
        residual_ratio=triple.residual_ratio,
        step_norm=float(np.linalg.norm(triple.y - x_tilde)))


def advance_with_triple(problem: CompositeProblem, state: SolverState,
                        lam: float, triple: InexactTriple, x_tilde: Array,
                        sigma: float, tolerances: Tolerances):
    """Accept a solved triple and advance the outer state by one step.

    Re-checks the error criterion (StepError on violation, so a run can
    never silently accumulate bad steps), verifies the coefficient
    invariants, and returns (state+, record).
    """
    a = compute_a_next(state.A, lam, problem.mu)
    _step_invariants(state, a, lam, problem.mu, tolerances)
    record_chk = check_error_criterion(problem, x_tilde, triple, sigma, tolerances)
    if not record_chk.accepted:
        raise StepError(
            f"solver triple rejected at k={state.k}: ratio "
            f"{record_chk.residual_ratio:.6e} vs sigma^2 = {sigma ** 2:.6e}")
    x_next = update_x_next(state, a, triple.y, triple.v, problem.mu)
    new_state = SolverState(k=state.k + 1, x=x_next, y=triple.y, A=state.A + a)
    record = _make_record(problem, new_state, lam, a, triple, x_tilde)
    return new_state, record


def ahpe_step(problem: CompositeProblem, state: SolverState, lam: float,
              solver, config: MethodConfig):
    """One outer step at step size lam; returns (state+, record, triple)."""
    tol = config.tolerances
    a = compute_a_next(state.A, lam, problem.mu)
    _step_invariants(state, a, lam, problem.mu, tol)
    x_tilde = compute_x_tilde(state, a, lam, problem.mu, tol)
    triple = solver.solve(problem, x_tilde, lam, config.sigma, problem.mu)
    new_state, record = advance_with_triple(problem, state, lam, triple,
                                            x_tilde, config.sigma, tol)
    return new_state, record, triple


def run_ahpe(problem: CompositeProblem, x0: Array, config: MethodConfig,
             solver, _algorithm: str = "ahpe",
             _extra_params: Optional[dict] = None) -> Trace:
    """Run the accelerated method from x0 (= y0) under a step-size policy."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.dim,):
        raise ParameterError(f"x0 must have shape ({problem.dim},), got {x0.shape}")
    if config.stopping.value_gap_tol is not None and problem.known_minimizer is None:
        raise CapabilityError("value-gap stopping needs a reference minimizer")

    state = SolverState(k=0, x=x0, y=x0.copy(), A=0.0)
    records: list[TraceRecord] = []
    termination = "max_iter"
    for k in range(config.stopping.max_iter):
        lam = config.lambda_policy.lam_at(k)
        state, record, _ = ahpe_step(problem, state, lam, solver, config)
        records.append(record)
        if (config.stopping.grad_norm_tol is not None
                and record.v_norm <= config.stopping.grad_norm_tol):
            termination = "grad_norm"
            break
        if (config.stopping.value_gap_tol is not None
                and record.value_gap <= config.stopping.value_gap_tol):
            termination = "value_gap"
            break

    x_star = problem.known_minimizer
    params = {"acceptance_slack": config.tolerances.acceptance_slack}
    if config.lambda_policy.kind == "constant":
        params["lambda_constant"] = config.lambda_policy.value
        params["lambda_min"] = config.lambda_policy.value
    elif config.lambda_policy.kind == "schedule":
        used = [r.lam for r in records]
        if used:
            params["lambda_min"] = min(used)
    if _extra_params:
        params.update(_extra_params)
    return Trace(
        algorithm=_algorithm, problem_name=problem.name, mu=problem.mu,
        sigma=config.sigma, x0=x0, records=records, params=params,
        d0=float(np.linalg.norm(x0 - x_star)) if x_star is not None else None,
        h_star=problem.h_star if x_star is not None else None,
        termination=termination, final_x=state.x, final_y=state.y)
