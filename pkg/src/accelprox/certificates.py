"""Runtime certificates: evaluate the proven bounds against a recorded run.

Every check compares an observed trace column against a bound computed
from run constants (d0, mu, sigma, step sizes, ...) with the uniform
additive slack  slack(b) = tol * (1 + |b|), tol = 1e-9 by default.  A
report never mutates the trace; corrupted inputs surface as failed
reports, not exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Trace
from .errors import ParameterError

__all__ = [
    "PerKEntry", "BoundReport", "CertificateBundle",
    "quadratic_identity_report", "accumulation_report",
    "norm_sandwich_report", "residual_ratio_report",
    "summed_residual_report", "rate_bounds_alg1",
    "rate_bounds_alg1_bounded_lambda", "ak_growth_bounds",
    "ak_growth_report", "superlinear_envelope", "largestep_reports",
    "proxgrad_reports", "window_report", "constrained_product_min",
    "prox_quadratic_closed_forms", "verify_trace",
]

DEFAULT_SLACK = 1e-9


@dataclass(frozen=True)
class PerKEntry:
    """One bound evaluation: margin >= 0 means the entry is satisfied."""

    k: int
    bound: float
    observed: float
    margin: float
    ok: bool


@dataclass
class BoundReport:
    """Outcome of one bound over a whole trace."""

    name: str
    satisfied: bool
    worst_margin: float
    per_k: list
    skipped: bool = False
    note: str = ""


@dataclass
class CertificateBundle:
    """All reports for a trace; ok is the conjunction of non-skipped ones."""

    reports: list
    ok: bool

    def by_name(self, name: str) -> BoundReport:
        for rep in self.reports:
            if rep.name == name:
                return rep
        raise KeyError(name)


def _slack(bound: float, tol: float) -> float:
    return tol * (1.0 + abs(bound))


def _upper_report(name: str, entries, tol: float, note: str = "") -> BoundReport:
    """Assemble a report from (k, bound, observed) upper-bound triples."""
    per_k = []
    for k, bound, observed in entries:
        if math.isnan(observed) or math.isnan(bound):
            continue
        margin = bound + _slack(bound, tol) - observed
        per_k.append(PerKEntry(k=k, bound=bound, observed=observed,
                               margin=margin, ok=margin >= 0.0))
    if not per_k:
        return BoundReport(name=name, satisfied=True, worst_margin=math.inf,
                           per_k=[], skipped=True, note=note or "no checkable entries")
    worst = min(e.margin for e in per_k)
    return BoundReport(name=name, satisfied=worst >= 0.0, worst_margin=worst,
                       per_k=per_k, note=note)


def _lower_report(name: str, entries, tol: float, note: str = "") -> BoundReport:
    """Assemble a report from (k, bound, observed) lower-bound triples."""
    per_k = []
    for k, bound, observed in entries:
        if math.isnan(observed) or math.isnan(bound):
            continue
        margin = observed - bound + _slack(bound, tol)
        per_k.append(PerKEntry(k=k, bound=bound, observed=observed,
                               margin=margin, ok=margin >= 0.0))
    if not per_k:
        return BoundReport(name=name, satisfied=True, worst_margin=math.inf,
                           per_k=[], skipped=True, note=note or "no checkable entries")
    worst = min(e.margin for e in per_k)
    return BoundReport(name=name, satisfied=worst >= 0.0, worst_margin=worst,
                       per_k=per_k, note=note)


def _skipped(name: str, note: str) -> BoundReport:
    return BoundReport(name=name, satisfied=True, worst_margin=math.inf,
                       per_k=[], skipped=True, note=note)


def _prev_A(trace: Trace):
    """A value preceding each record (A_0 = 0)."""
    prev = 0.0
    for rec in trace.records:
        yield prev, rec
        prev = rec.A


def quadratic_identity_report(trace: Trace, tol: float = 1e-10) -> BoundReport:
    """Residual of the coefficient equation at every step.

    With A- the previous scaling coefficient, each recorded a must satisfy
    a^2 - (1 + 2 mu A-) lam a - (1 + mu A-) A- lam = 0 up to
    tol * max(1, a^2).
    """
    mu = trace.mu
    entries = []
    for A_prev, rec in _prev_A(trace):
        resid = (rec.a ** 2 - (1.0 + 2.0 * mu * A_prev) * rec.lam * rec.a
                 - (1.0 + mu * A_prev) * A_prev * rec.lam)
        entries.append((rec.k, tol * max(1.0, rec.a ** 2), abs(resid)))
    return _upper_report("quadratic_identity", entries, tol=0.0)


def accumulation_report(trace: Trace, tol: float = DEFAULT_SLACK) -> BoundReport:
    """Check A_k = A_{k-1} + a_k as stored (detects corrupted A columns)."""
    entries = []
    for A_prev, rec in _prev_A(trace):
        resid = abs(rec.A - (A_prev + rec.a))
        entries.append((rec.k, tol * max(1.0, abs(rec.A)), resid))
    return _upper_report("A_accumulation", entries, tol=0.0)


def _acceptance_slack(trace: Trace) -> float:
    return float(trace.params.get("acceptance_slack", 1e-12))


def norm_sandwich_report(trace: Trace, tol: float = DEFAULT_SLACK) -> BoundReport:
    """Two-sided bound tying ||lam v|| to the step length.

    (1 - sigma sqrt(1 + lam mu)) ||y - x~|| <= ||lam v||
        <= (1 + sigma sqrt(1 + lam mu)) ||y - x~||.
    """
    sigma, mu = trace.sigma, trace.mu
    accept_slack = _acceptance_slack(trace)
    per_k = []
    for rec in trace.records:
        root = sigma * math.sqrt(1.0 + rec.lam * mu)
        s_sq = rec.step_norm ** 2
        # steps accepted under the additive criterion slack can overshoot
        # the clean sandwich by the same amount, propagated here
        pad = math.sqrt((1.0 + rec.lam * mu) * accept_slack * (1.0 + s_sq))
        lo = max(0.0, (1.0 - root) * rec.step_norm - pad)
        hi = (1.0 + root) * rec.step_norm + pad
        obs = rec.lam * rec.v_norm
        margin = min(hi + _slack(hi, tol) - obs, obs - lo + _slack(lo, tol))
        per_k.append(PerKEntry(k=rec.k, bound=hi, observed=obs,
                               margin=margin, ok=margin >= 0.0))
    if not per_k:
        return _skipped("norm_sandwich", "empty trace")
    worst = min(e.margin for e in per_k)
    return BoundReport(name="norm_sandwich", satisfied=worst >= 0.0,
                       worst_margin=worst, per_k=per_k)


def residual_ratio_report(trace: Trace, tol: float = DEFAULT_SLACK) -> BoundReport:
    """Recorded residual ratios must not exceed sigma^2 plus acceptance slack."""
    accept_slack = _acceptance_slack(trace)
    entries = []
    for rec in trace.records:
        s_sq = rec.step_norm ** 2
        bound = trace.sigma ** 2
        if s_sq > 0.0:
            bound += accept_slack * (1.0 + s_sq) / s_sq
        entries.append((rec.k, bound, rec.residual_ratio))
    return _upper_report("residual_ratio", entries, tol)


def summed_residual_report(trace: Trace, tol: float = DEFAULT_SLACK) -> BoundReport:
    """Cumulative weighted step lengths: sum_j (A_j/lam_j)||y-x~||^2 <= d0^2/(1-sigma^2)."""
    if trace.d0 is None:
        return _skipped("summed_residual", "no reference minimizer")
    if trace.sigma >= 1.0:
        return _skipped("summed_residual", "requires sigma < 1")
    cap = trace.d0 ** 2 / (1.0 - trace.sigma ** 2)
    total = 0.0
    entries = []
    for rec in trace.records:
        total += (rec.A / rec.lam) * rec.step_norm ** 2
        entries.append((rec.k, cap, total))
    return _upper_report("summed_residual", entries, tol)


def rate_bounds_alg1(trace: Trace, tol: float = DEFAULT_SLACK) -> list:
    """Scaling-coefficient bounds: gap, distances, certificate norm, eps.

    h(y^k) - h* <= d0^2 / (2 A_k); ||x*-y^k||^2 <= d0^2/(mu A_k);
    ||x*-x^k||^2 <= d0^2/(1 + mu A_k); and for k >= 2, with A- = A_{k-1},
    ||v^k||^2 <= 6 (1 + sigma sqrt(1 + mu lam_k))^2 d0^2 / (lam_k^2 mu A-)
    and eps_k <= 3 sigma^2 d0^2 / (lam_k mu A-).
    """
    if trace.d0 is None:
        return [_skipped(n, "no reference minimizer") for n in
                ("value_gap_vs_A", "dist_y_sq_vs_A", "dist_x_sq_vs_A",
                 "v_norm_sq_vs_A", "eps_vs_A")]
    d0sq = trace.d0 ** 2
    mu, sigma = trace.mu, trace.sigma
    gap_e, disty_e, distx_e, v_e, eps_e = [], [], [], [], []
    for A_prev, rec in _prev_A(trace):
        gap_e.append((rec.k, d0sq / (2.0 * rec.A), rec.value_gap))
        disty_e.append((rec.k, d0sq / (mu * rec.A), rec.dist_y ** 2))
        distx_e.append((rec.k, d0sq / (1.0 + mu * rec.A), rec.dist_x ** 2))
        if A_prev > 0:
            amp = 1.0 + sigma * math.sqrt(1.0 + mu * rec.lam)
            v_e.append((rec.k, 6.0 * amp ** 2 * d0sq / (rec.lam ** 2 * mu * A_prev),
                        rec.v_norm ** 2))
            eps_e.append((rec.k, 3.0 * sigma ** 2 * d0sq / (rec.lam * mu * A_prev),
                          rec.eps))
    return [
        _upper_report("value_gap_vs_A", gap_e, tol),
        _upper_report("dist_y_sq_vs_A", disty_e, tol),
        _upper_report("dist_x_sq_vs_A", distx_e, tol),
        _upper_report("v_norm_sq_vs_A", v_e, tol,
                      note="first step not covered"),
        _upper_report("eps_vs_A", eps_e, tol, note="first step not covered"),
    ]


def _alpha(mu: float, lam_min: float) -> float:
    t = mu * lam_min
    return math.sqrt(t / (1.0 + t))


def rate_bounds_alg1_bounded_lambda(trace: Trace, lam_min: float = None,
                                    tol: float = DEFAULT_SLACK) -> list:
    """Linear-rate envelopes valid when every step size is >= lam_min.

    With alpha = sqrt(mu lam_min / (1 + mu lam_min)):
      A_k >= lam_min (1 - alpha)^{-(k-1)},
      h(y^k) - h* <= d0^2/(2 lam_min) (1 - alpha)^{k-1},
      max dist <= d0 / sqrt(mu lam_min) (1 - alpha)^{(k-1)/2},
    and shifted envelopes for ||v^k|| and eps_k from the second step on.
    """
    names = ("A_geometric", "value_gap_linear", "dist_linear",
             "v_norm_linear", "eps_linear")
    if trace.d0 is None:
        return [_skipped(n, "no reference minimizer") for n in names]
    if not trace.records:
        return [_skipped(n, "empty trace") for n in names]
    lams = trace.lambdas()
    if lam_min is None:
        lam_min = trace.params.get("lambda_min", float(lams.min()))
    if lams.min() < lam_min * (1.0 - 1e-12):
        raise ParameterError(
            f"observed lambda {lams.min()!r} below stated floor {lam_min!r}")
    mu, sigma, d0 = trace.mu, trace.sigma, trace.d0
    alpha = _alpha(mu, lam_min)
    decay = 1.0 - alpha

    A_e, gap_e, dist_e, v_e, eps_e = [], [], [], [], []
    v_amp = (math.sqrt(6.0) * (1.0 + sigma * math.sqrt(1.0 + mu * lam_min))
             * d0 / (math.sqrt(mu) * lam_min ** 1.5))
    eps_amp = 3.0 * sigma ** 2 * d0 ** 2 / (mu * lam_min ** 2)
    for rec in trace.records:
        k = rec.k
        A_e.append((k, lam_min * math.exp(-(k - 1) * math.log(decay)), rec.A))
        gap_e.append((k, d0 ** 2 / (2.0 * lam_min) * decay ** (k - 1),
                      rec.value_gap))
        dist_e.append((k, d0 / math.sqrt(mu * lam_min) * decay ** ((k - 1) / 2.0),
                       max(rec.dist_x, rec.dist_y)))
        if k >= 2:
            v_e.append((k, v_amp * decay ** ((k - 2) / 2.0), rec.v_norm))
            eps_e.append((k, eps_amp * decay ** (k - 2), rec.eps))
    return [
        _lower_report("A_geometric", A_e, tol),
        _upper_report("value_gap_linear", gap_e, tol),
        _upper_report("dist_linear", dist_e, tol),
        _upper_report("v_norm_linear", v_e, tol, note="first step not covered"),
        _upper_report("eps_linear", eps_e, tol, note="first step not covered"),
    ]


def ak_growth_bounds(lambda_seq, mu: float) -> dict:
    """Both product lower bounds for the scaling coefficient prefix-wise.

    For each prefix lam_1..lam_k the coefficient A_k is at least
      lam_1 prod_{j=2..k} 1 / (1 - sqrt(mu lam_j / (1 + mu lam_j)))
    and at least
      lam_1 prod_{j=2..k} (1 + 2 mu lam_j).
    Returned as arrays aligned with the sequence (k = 1 gives lam_1).
    """
    lams = np.asarray(list(lambda_seq), dtype=float)
    if lams.size == 0 or np.any(lams <= 0):
        raise ParameterError("lambda_seq must be nonempty with positive entries")
    if mu < 0:
        raise ParameterError(f"mu must be >= 0, got {mu}")
    t = mu * lams
    alphas = np.sqrt(t / (1.0 + t))
    # 1 - alpha = (1 - alpha^2)/(1 + alpha) = 1/((1+t)(1+alpha)), stable
    # for huge t where the direct difference rounds to zero
    log_one_minus = -(np.log1p(t) + np.log1p(alphas))
    log_recip = np.concatenate(([0.0], -log_one_minus[1:]))
    log_double = np.concatenate(([0.0], np.log1p(2.0 * t[1:])))
    base = math.log(lams[0])
    return {
        "reciprocal_form": np.exp(base + np.cumsum(log_recip)),
        "doubling_form": np.exp(base + np.cumsum(log_double)),
    }


def ak_growth_report(trace: Trace, tol: float = DEFAULT_SLACK) -> list:
    """Observed A_k against both product lower bounds."""
    if not trace.records:
        return [_skipped("A_product_reciprocal", "empty trace"),
                _skipped("A_product_doubling", "empty trace")]
    bounds = ak_growth_bounds(trace.lambdas(), trace.mu)
    recs = trace.records
    rec_e = [(r.k, b, r.A) for r, b in zip(recs, bounds["reciprocal_form"])]
    dbl_e = [(r.k, b, r.A) for r, b in zip(recs, bounds["doubling_form"])]
    return [_lower_report("A_product_reciprocal", rec_e, tol),
            _lower_report("A_product_doubling", dbl_e, tol)]


def superlinear_envelope(k: int, lambda1: float, mu: float, theta: float,
                         sigma: float, p: float, d0: float) -> float:
    """Lower envelope for A_{k+1} under the large-step condition.

    A_{k+1} >= lambda1 (1 + 2 mu C d0^{-2(p-1)/(p+1)} k^{(p-1)/(p+1)})^k
    with C = lambda1^{(p-1)/(p+1)} theta^{2/(p+1)} (1-sigma^2)^{(p-1)/(p+1)};
    k = 0 returns lambda1.
    """
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    for name, val in (("lambda1", lambda1), ("theta", theta), ("d0", d0)):
        if not val > 0:
            raise ParameterError(f"{name} must be > 0, got {val}")
    if not 0.0 <= sigma < 1.0:
        raise ParameterError(f"sigma must be in [0, 1), got {sigma}")
    if p < 2:
        raise ParameterError(f"p must be >= 2, got {p}")
    if mu < 0:
        raise ParameterError(f"mu must be >= 0, got {mu}")
    if k == 0:
        return lambda1
    e = (p - 1.0) / (p + 1.0)
    C = lambda1 ** e * theta ** (2.0 / (p + 1.0)) * (1.0 - sigma ** 2) ** e
    growth = 2.0 * mu * C * d0 ** (-2.0 * e) * float(k) ** e
    return lambda1 * math.exp(k * math.log1p(growth))


def window_report(trace: Trace, tol: float = DEFAULT_SLACK) -> BoundReport:
    """Membership of lam * ||y - x~||^(p-1) in the accepted step window.

    The lower edge is theta; the upper edge is either a constant or
    coef * sqrt(1 + lam mu), per the trace parameters.
    """
    params = trace.params
    theta, p = params.get("theta"), params.get("p")
    if theta is None or p is None:
        return _skipped("window_membership", "trace has no window parameters")
    upper_const = params.get("window_upper_const")
    upper_sqrt = params.get("window_upper_sqrt_coef")
    per_k = []
    for rec in trace.records:
        phi = rec.lam * rec.step_norm ** (p - 1.0)
        if upper_sqrt is not None:
            hi = upper_sqrt * math.sqrt(1.0 + rec.lam * trace.mu)
        elif upper_const is not None:
            hi = upper_const
        else:
            hi = math.inf
        margin = min(phi - theta + _slack(theta, tol),
                     hi + _slack(hi if math.isfinite(hi) else 0.0, tol) - phi)
        per_k.append(PerKEntry(k=rec.k, bound=hi, observed=phi,
                               margin=margin, ok=margin >= 0.0))
    if not per_k:
        return _skipped("window_membership", "empty trace")
    worst = min(e.margin for e in per_k)
    return BoundReport(name="window_membership", satisfied=worst >= 0.0,
                       worst_margin=worst, per_k=per_k)


def largestep_reports(trace: Trace, tol: float = DEFAULT_SLACK) -> list:
    """Certificates specific to the large-step condition.

    Covers the weighted step-size sum, the step-size floor, the
    superlinear envelope on A, the induced gap/distance envelopes, and
    the shifted envelopes on ||v|| and eps (first step not covered).
    """
    names = ("largestep_sum", "lambda_floor", "A_superlinear",
             "value_gap_superlinear", "dist_sq_superlinear",
             "v_norm_sq_superlinear", "eps_superlinear")
    params = trace.params
    theta, p = params.get("theta"), params.get("p")
    if theta is None or p is None:
        return [_skipped(n, "trace has no large-step parameters") for n in names]
    if trace.d0 is None:
        return [_skipped(n, "no reference minimizer") for n in names]
    if not trace.records:
        return [_skipped(n, "empty trace") for n in names]
    mu, sigma, d0 = trace.mu, trace.sigma, trace.d0
    if sigma >= 1.0:
        return [_skipped(n, "requires sigma < 1") for n in names]
    lam1 = trace.records[0].lam
    e = (p - 1.0) / (p + 1.0)
    C = lam1 ** e * theta ** (2.0 / (p + 1.0)) * (1.0 - sigma ** 2) ** e
    lam_floor = C * d0 ** (-2.0 * e)
    sum_cap = d0 ** 2 / (theta ** (2.0 / (p - 1.0)) * (1.0 - sigma ** 2))

    sum_e, floor_e, A_e, gap_e, dist_e, v_e, eps_e = [], [], [], [], [], [], []
    total = 0.0
    v_amp_sq = ((1.0 + sigma * math.sqrt(1.0 + mu * lam_floor)) ** 2
                * 6.0 * d0 ** (2.0 * (3.0 * p - 1.0) / (p + 1.0))
                / (mu * C ** 2 * lam1))
    eps_amp = (3.0 * sigma ** 2 * d0 ** (4.0 * p / (p + 1.0)) / (mu * C * lam1))
    for rec in trace.records:
        k = rec.k
        total += rec.A / rec.lam ** ((p + 1.0) / (p - 1.0))
        sum_e.append((k, sum_cap, total))
        floor_e.append((k, lam_floor, rec.lam))
        env = superlinear_envelope(k - 1, lam1, mu, theta, sigma, p, d0)
        A_e.append((k, env, rec.A))
        gap_e.append((k, d0 ** 2 / (2.0 * env), rec.value_gap))
        dist_e.append((k, d0 ** 2 / (mu * env),
                       max(rec.dist_x, rec.dist_y) ** 2))
        if k >= 2:
            env_prev = superlinear_envelope(k - 2, lam1, mu, theta, sigma, p, d0)
            v_e.append((k, v_amp_sq * lam1 / env_prev, rec.v_norm ** 2))
            eps_e.append((k, eps_amp * lam1 / env_prev, rec.eps))
    return [
        _upper_report("largestep_sum", sum_e, tol),
        _lower_report("lambda_floor", floor_e, tol),
        _lower_report("A_superlinear", A_e, tol),
        _upper_report("value_gap_superlinear", gap_e, tol),
        _upper_report("dist_sq_superlinear", dist_e, tol),
        _upper_report("v_norm_sq_superlinear", v_e, tol,
                      note="first step not covered"),
        _upper_report("eps_superlinear", eps_e, tol,
                      note="first step not covered"),
    ]


def proxgrad_reports(trace: Trace, tol: float = DEFAULT_SLACK) -> list:
    """Certificates for the constant-step forward-backward instance.

    With gamma = sqrt(sigma_u / (1 + sigma_u)) and rate
    1 - gamma sqrt(mu / L): gap, distance, certificate-norm, and eps
    envelopes, plus the defining identity lam^2 L^2/(1 + lam mu) = sigma_u^2.
    """
    names = ("pg_value_gap", "pg_dist", "pg_v_norm", "pg_eps",
             "pg_lambda_identity")
    params = trace.params
    L, sigma_u, lam = params.get("L"), params.get("sigma_u"), params.get("lambda_pg")
    if L is None or sigma_u is None or lam is None:
        return [_skipped(n, "trace has no forward-backward parameters")
                for n in names]
    if trace.d0 is None:
        return [_skipped(n, "no reference minimizer") for n in names]
    mu, sigma, d0 = trace.mu, trace.sigma, trace.d0
    gamma = math.sqrt(sigma_u / (1.0 + sigma_u))
    rate = 1.0 - gamma * math.sqrt(mu / L)
    gap_e, dist_e, v_e, eps_e = [], [], [], []
    v_amp = (6.0 * d0 * L ** 1.5 / (math.sqrt(mu) * sigma_u ** 1.5)
             * (1.0 + sigma * math.sqrt(1.0 + sigma_u * mu / L)))
    eps_amp = 3.0 * sigma ** 2 * d0 ** 2 * L ** 2 / (sigma_u ** 2 * mu)
    for rec in trace.records:
        k = rec.k
        gap_e.append((k, L * d0 ** 2 / (2.0 * sigma_u) * rate ** (k - 1),
                      rec.value_gap))
        dist_e.append((k, math.sqrt(L / (sigma_u * mu)) * d0 * rate ** ((k - 1) / 2.0),
                       max(rec.dist_x, rec.dist_y)))
        if k >= 2:
            v_e.append((k, v_amp * rate ** ((k - 2) / 2.0), rec.v_norm))
            eps_e.append((k, eps_amp * rate ** (k - 2), rec.eps))
    ident_resid = abs(lam ** 2 * L ** 2 / (1.0 + lam * mu) - sigma_u ** 2)
    ident = _upper_report("pg_lambda_identity",
                          [(1, 1e-12 * sigma_u ** 2, ident_resid)], tol=0.0)
    return [
        _upper_report("pg_value_gap", gap_e, tol),
        _upper_report("pg_dist", dist_e, tol),
        _upper_report("pg_v_norm", v_e, tol, note="first step not covered"),
        _upper_report("pg_eps", eps_e, tol, note="first step not covered"),
        ident,
    ]


def constrained_product_min(k: int, c: float, q: float) -> float:
    """Optimal value of min prod_j (1 + t_j) over t > 0 with sum t_j^{-q} <= c.

    The minimum is attained at equal coordinates and equals
    (1 + (k/c)^{1/q})^k.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not c > 0 or not q > 0:
        raise ParameterError(f"need c > 0 and q > 0, got c={c}, q={q}")
    return float((1.0 + (k / c) ** (1.0 / q)) ** k)


def prox_quadratic_closed_forms(v, y, z, mu: float, eps: float, lam: float) -> dict:
    """Closed forms for q(x) = <v, x-y> + (mu/2)||x-y||^2 - eps + ||x-z||^2/(2 lam).

    Returns the minimizer (z + lam mu y - lam v)/(1 + lam mu), the minimum
    value (||y-z||^2 - ||lam v + y - z||^2/(1+lam mu) - 2 lam eps)/(2 lam),
    and the curvature (1 + lam mu)/(2 lam) of the exact expansion
    q(x) = min + curvature ||x - x*||^2.
    """
    if not lam > 0:
        raise ParameterError(f"lam must be > 0, got {lam}")
    if mu < 0 or eps < 0:
        raise ParameterError(f"need mu >= 0 and eps >= 0, got mu={mu}, eps={eps}")
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    denom = 1.0 + lam * mu
    minimizer = (z + lam * mu * y - lam * v) / denom
    shifted = lam * v + y - z
    min_value = (float((y - z) @ (y - z))
                 - float(shifted @ shifted) / denom - 2.0 * lam * eps) / (2.0 * lam)
    return {"minimizer": minimizer, "min_value": min_value,
            "curvature": denom / (2.0 * lam)}


def verify_trace(trace: Trace, tol: float = DEFAULT_SLACK) -> CertificateBundle:
    """Run every certificate applicable to the trace's algorithm.

    Structural checks (coefficient equation, accumulation, residual
    ratios, norm sandwich, summed residuals) run for every trace; the
    scaling-coefficient and bounded-step bounds need a reference
    minimizer; large-step and forward-backward envelopes activate on
    their parameter blocks.
    """
    reports = [
        quadratic_identity_report(trace),
        accumulation_report(trace),
        residual_ratio_report(trace, tol),
        norm_sandwich_report(trace, tol),
        summed_residual_report(trace, tol),
    ]
    reports.extend(rate_bounds_alg1(trace, tol))
    if trace.records:
        reports.extend(rate_bounds_alg1_bounded_lambda(trace, tol=tol))
        reports.extend(ak_growth_report(trace, tol))
    if trace.algorithm in ("largestep", "tensor"):
        reports.append(window_report(trace, tol))
        reports.extend(largestep_reports(trace, tol))
    if trace.algorithm == "proxgrad":
        reports.extend(proxgrad_reports(trace, tol))
    ok = all(rep.satisfied for rep in reports)
    return CertificateBundle(reports=reports, ok=ok)
