"""Composite problem model: min f(x) + g(x) with g strongly convex.

A problem bundles the oracles the solvers consume: value/prox/subgradient
for the nonsmooth part f, value/gradient/Hessian for the smooth part g,
the strong-convexity modulus mu, and curvature constants.  All oracles are
pure functions of their arguments; instances are safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import DataError, ParameterError

Array = np.ndarray

# Peak curvature of the logistic sigmoid derivative: max_t |d/dt s''(t)|
# for s(t) = log(1 + exp(-t)), attained where the sigmoid equals (3±√3)/6.
LOGISTIC_THIRD_DERIV_PEAK = 1.0 / (6.0 * np.sqrt(3.0))


@dataclass(frozen=True)
class CompositeProblem:
    """Oracle bundle for min f(x) + g(x) over R^dim.

    Parameters
    ----------
    dim : int
        Ambient dimension.
    mu : float
        Strong-convexity modulus declared for g (mu > 0).  Declaring less
        than the true modulus is sound; more is not.
    lip_grad : float
        Lipschitz constant of grad g (on the stated validity region).
    lip_hess : float or None
        Lipschitz constant of the Hessian of g, used by the second-order
        model.  None when no Hessian oracle is available.
    lip_hess_box : float or None
        Sup-norm radius of the box on which ``lip_hess`` is valid.  None
        means the constant holds globally.
    f_value, f_prox, f_subgrad : callables
        Nonsmooth-part oracles.  ``f_prox(w, t)`` returns
        argmin_y f(y) + ||y - w||^2 / (2 t); ``f_subgrad`` returns one
        subgradient selection.
    g_value, g_grad : callables
        Smooth-part oracles.
    g_hess : callable or None
        Hessian oracle, required by the second-order solver.
    known_minimizer : ndarray or None
        Reference minimizer of f + g, accurate to the generator's stated
        tolerance; None when not available.
    project : callable
        Projection onto the domain used by model-based solvers.  Identity
        by default (unconstrained domain).
    stationarity_residual : callable or None
        Norm of the minimal-norm element of the subdifferential of f + g,
        used to certify ``known_minimizer``.
    structure : dict
        Structural tags and raw data (matrices, weights) that let exact
        subproblem solvers specialize.
    name : str
        Short identifier echoed into traces and reports.
    meta : dict
        Generator parameters (seed, conditioning, ...) echoed verbatim.
    """

    dim: int
    mu: float
    lip_grad: float
    lip_hess: Optional[float]
    f_value: Callable[[Array], float]
    f_prox: Callable[[Array, float], Array]
    f_subgrad: Callable[[Array], Array]
    g_value: Callable[[Array], float]
    g_grad: Callable[[Array], Array]
    g_hess: Optional[Callable[[Array], Array]]
    known_minimizer: Optional[Array]
    project: Callable[[Array], Array]
    stationarity_residual: Optional[Callable[[Array], float]]
    structure: dict
    name: str
    meta: dict = field(default_factory=dict)
    lip_hess_box: Optional[float] = None

    def h_value(self, x: Array) -> float:
        """Objective value f(x) + g(x)."""
        return float(self.f_value(x)) + float(self.g_value(x))

    @property
    def h_star(self) -> float:
        """Objective value at the reference minimizer."""
        if self.known_minimizer is None:
            raise ParameterError(f"problem {self.name!r} has no reference minimizer")
        return self.h_value(self.known_minimizer)

    @property
    def f_is_zero(self) -> bool:
        return self.structure.get("f_kind") == "zero"


def _identity(x: Array) -> Array:
    return x


def _zero_f_oracles(dim: int):
    zero = np.zeros(dim)

    def f_value(x: Array) -> float:
        return 0.0

    def f_prox(w: Array, t: float) -> Array:
        return w

    def f_subgrad(x: Array) -> Array:
        return zero

    return f_value, f_prox, f_subgrad


def _check_scalar(name: str, value: float, low: float = 0.0) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= low:
        raise ParameterError(f"{name} must be finite and > {low}, got {value}")
    return value


def _random_spd_quadratic(dim: int, mu: float, L: float, rng: np.random.Generator):
    """Random SPD matrix with spectrum in [mu, L], both endpoints attained."""
    if dim == 1:
        # One eigenvalue only; pin it to L so lip_grad is exact.
        return np.array([[L]])
    gauss = rng.standard_normal((dim, dim))
    basis, _ = np.linalg.qr(gauss)
    eigs = np.linspace(mu, L, dim)
    return (basis * eigs) @ basis.T


def _damped_newton(grad, hess, x0: Array, tol: float, max_iter: int = 200) -> Array:
    """Newton iteration with halving damping; for smooth strongly convex g."""
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        gvec = grad(x)
        gnorm = np.linalg.norm(gvec)
        if gnorm <= tol:
            return x
        step = np.linalg.solve(hess(x), gvec)
        t = 1.0
        while t > 1e-12:
            cand = x - t * step
            if np.linalg.norm(grad(cand)) < gnorm:
                x = cand
                break
            t *= 0.5
        else:
            return x
    return x


def make_quadratic(dim: int, mu: float, L: float, seed: int) -> CompositeProblem:
    """Strongly convex quadratic with f identically zero.

    g(x) = 0.5 x'Qx - b'x with spectrum of Q in [mu, L]; for dim >= 2 both
    endpoints are eigenvalues, so mu and lip_grad are exact.  The linear
    term is standard normal.  The minimizer solves Qx = b.

    Parameters
    ----------
    dim : int
        Dimension, >= 1.
    mu, L : float
        Extreme eigenvalues, 0 < mu <= L.
    seed : int
        Generator seed; fixes Q, b, and hence the returned problem.
    """
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    mu = _check_scalar("mu", mu)
    L = _check_scalar("L", L)
    if L < mu:
        raise ParameterError(f"need mu <= L, got mu={mu}, L={L}")

    rng = np.random.default_rng(seed)
    Q = _random_spd_quadratic(dim, mu, L, rng)
    b = rng.standard_normal(dim)
    x_star = np.linalg.solve(Q, b)

    f_value, f_prox, f_subgrad = _zero_f_oracles(dim)

    def g_value(x: Array) -> float:
        return 0.5 * float(x @ (Q @ x)) - float(b @ x)

    def g_grad(x: Array) -> Array:
        return Q @ x - b

    def g_hess(x: Array) -> Array:
        return Q

    def stationarity_residual(x: Array) -> float:
        return float(np.linalg.norm(g_grad(x)))

    return CompositeProblem(
        dim=dim, mu=mu, lip_grad=L, lip_hess=0.0,
        f_value=f_value, f_prox=f_prox, f_subgrad=f_subgrad,
        g_value=g_value, g_grad=g_grad, g_hess=g_hess,
        known_minimizer=x_star, project=_identity,
        stationarity_residual=stationarity_residual,
        structure={"f_kind": "zero", "g_kind": "quadratic", "Q": Q, "b": b},
        name=f"quadratic(dim={dim},mu={mu:g},L={L:g},seed={seed})",
        meta={"generator": "quadratic", "dim": dim, "mu": mu, "L": L, "seed": seed},
    )


def make_logistic_ridge(samples: Array, labels: Array, mu: float) -> CompositeProblem:
    """Binary logistic loss plus a ridge term, f identically zero.

    g(x) = sum_i log(1 + exp(-l_i <a_i, x>)) + (mu/2) ||x||^2.  The Hessian
    Lipschitz constant is the analytic global bound
    n_samples * max_i ||a_i||^3 / (6 sqrt 3), validated by sampling in the
    test suite.  An empty sample set degrades to the pure ridge term.

    Parameters
    ----------
    samples : ndarray, shape (n_samples, dim)
    labels : ndarray, shape (n_samples,)
        Entries must be -1 or +1.
    mu : float
        Ridge weight, > 0.
    """
    A = np.atleast_2d(np.asarray(samples, dtype=float))
    l = np.asarray(labels, dtype=float).ravel()
    if A.size == 0:
        A = A.reshape(0, A.shape[1] if A.ndim == 2 and A.shape[1] else 1)
    if A.shape[0] != l.shape[0]:
        raise DataError(f"got {A.shape[0]} samples but {l.shape[0]} labels")
    if l.size and not np.all(np.isin(l, (-1.0, 1.0))):
        raise DataError("labels must be -1 or +1")
    mu = _check_scalar("mu", mu)
    dim = A.shape[1]
    if dim < 1:
        raise DataError("samples must have at least one feature")

    signed = A * l[:, None] if l.size else A
    row_norms = np.linalg.norm(A, axis=1) if l.size else np.zeros(0)
    lip_grad = (np.linalg.norm(A, 2) ** 2 / 4.0 if l.size else 0.0) + mu
    lip_hess = (
        float(l.size) * float(row_norms.max()) ** 3 * LOGISTIC_THIRD_DERIV_PEAK
        if l.size else 0.0
    )

    f_value, f_prox, f_subgrad = _zero_f_oracles(dim)

    def margins(x: Array) -> Array:
        return signed @ x

    def g_value(x: Array) -> float:
        t = margins(x)
        return float(np.logaddexp(0.0, -t).sum()) + 0.5 * mu * float(x @ x)

    def g_grad(x: Array) -> Array:
        t = margins(x)
        return -signed.T @ expit(-t) + mu * x

    def g_hess(x: Array) -> Array:
        t = margins(x)
        w = expit(t) * expit(-t)
        return (signed.T * w) @ signed + mu * np.eye(dim)

    def stationarity_residual(x: Array) -> float:
        return float(np.linalg.norm(g_grad(x)))

    x_star = _damped_newton(g_grad, g_hess, np.zeros(dim),
                            tol=1e-13 * (1.0 + np.linalg.norm(g_grad(np.zeros(dim)))))

    return CompositeProblem(
        dim=dim, mu=mu, lip_grad=float(lip_grad), lip_hess=lip_hess,
        f_value=f_value, f_prox=f_prox, f_subgrad=f_subgrad,
        g_value=g_value, g_grad=g_grad, g_hess=g_hess,
        known_minimizer=x_star, project=_identity,
        stationarity_residual=stationarity_residual,
        structure={"f_kind": "zero", "g_kind": "logistic_ridge"},
        name=f"logistic_ridge(n={A.shape[0]},dim={dim},mu={mu:g})",
        meta={"generator": "logistic_ridge", "dim": dim, "mu": mu,
              "n_samples": int(A.shape[0])},
    )


def random_logistic_data(n_samples: int, dim: int, seed: int):
    """Seeded standard-normal design with labels from a planted separator."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n_samples, dim))
    w = rng.standard_normal(dim)
    labels = np.where(A @ w + 0.5 * rng.standard_normal(n_samples) >= 0, 1.0, -1.0)
    return A, labels


def _soft_threshold(v: Array, t: float) -> Array:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _l1_stationarity_residual(x: Array, grad: Array, weight: float) -> float:
    r = np.where(
        x > 0, grad + weight,
        np.where(x < 0, grad - weight, np.maximum(np.abs(grad) - weight, 0.0)),
    )
    return float(np.linalg.norm(r))


def make_l1_composite(dim: int, mu: float, L: float, l1_weight: float,
                      seed: int) -> CompositeProblem:
    """l1-regularized quadratic: f = w||x||_1, g a random strongly convex quadratic.

    The reference minimizer comes from a plain forward-backward iteration
    (step 2/(mu+L), run until the stationarity residual drops below 1e-12)
    and is cross-checked against the coordinate-wise optimality conditions.

    Parameters
    ----------
    dim, mu, L, seed
        As in ``make_quadratic``.
    l1_weight : float
        Weight w of the l1 term, > 0.
    """
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    mu = _check_scalar("mu", mu)
    L = _check_scalar("L", L)
    if L < mu:
        raise ParameterError(f"need mu <= L, got mu={mu}, L={L}")
    w = _check_scalar("l1_weight", l1_weight)

    rng = np.random.default_rng(seed)
    Q = _random_spd_quadratic(dim, mu, L, rng)
    b = rng.standard_normal(dim)

    def f_value(x: Array) -> float:
        return w * float(np.abs(x).sum())

    def f_prox(v: Array, t: float) -> Array:
        return _soft_threshold(v, t * w)

    def f_subgrad(x: Array) -> Array:
        # Selection: 0 on the kink.
        return w * np.sign(x)

    def g_value(x: Array) -> float:
        return 0.5 * float(x @ (Q @ x)) - float(b @ x)

    def g_grad(x: Array) -> Array:
        return Q @ x - b

    def g_hess(x: Array) -> Array:
        return Q

    def stationarity_residual(x: Array) -> float:
        return _l1_stationarity_residual(x, g_grad(x), w)

    # Reference solve: forward-backward with the distance-optimal step.
    step = 2.0 / (mu + L)
    x = np.zeros(dim)
    for _ in range(200_000):
        x = _soft_threshold(x - step * g_grad(x), step * w)
        if stationarity_residual(x) <= 1e-12:
            break
    if stationarity_residual(x) > 1e-8:
        raise DataError(
            f"l1 reference solve stalled at residual {stationarity_residual(x):.3e}")

    return CompositeProblem(
        dim=dim, mu=mu, lip_grad=L, lip_hess=0.0,
        f_value=f_value, f_prox=f_prox, f_subgrad=f_subgrad,
        g_value=g_value, g_grad=g_grad, g_hess=g_hess,
        known_minimizer=x, project=_identity,
        stationarity_residual=stationarity_residual,
        structure={"f_kind": "l1", "g_kind": "quadratic", "Q": Q, "b": b,
                   "l1_weight": w},
        name=f"l1_composite(dim={dim},mu={mu:g},L={L:g},w={w:g},seed={seed})",
        meta={"generator": "l1_composite", "dim": dim, "mu": mu, "L": L,
              "l1_weight": w, "seed": seed},
    )


def make_quartic(dim: int, mu: float, seed: int, coupling_scale: float = 0.1,
                 box_radius: float = 1.0, tilt_scale: float = 0.0) -> CompositeProblem:
    """Separable quartic plus ridge and a PSD quadratic coupling, f zero.

    g(x) = 0.25 sum_i x_i^4 + (mu/2)||x||^2 + 0.5 x'Px - tilt'x.  The
    Hessian of the quartic part is not globally Lipschitz; the constant
    ``lip_hess = 6 * box_radius`` is valid on the box ||x||_inf <=
    box_radius, recorded in ``lip_hess_box``.  Solvers that rely on the
    constant must keep their evaluation points inside that box (the
    second-order solver enforces this at runtime).

    With ``tilt_scale = 0`` the minimizer is exactly the origin.
    """
    if dim < 1:
        raise ParameterError(f"dim must be >= 1, got {dim}")
    mu = _check_scalar("mu", mu)
    box_radius = _check_scalar("box_radius", box_radius)
    if coupling_scale < 0 or tilt_scale < 0:
        raise ParameterError("coupling_scale and tilt_scale must be >= 0")

    rng = np.random.default_rng(seed)
    if coupling_scale > 0 and dim > 1:
        raw = rng.standard_normal((dim, dim))
        P = raw.T @ raw
        P *= coupling_scale / np.linalg.norm(P, 2)
    else:
        P = np.zeros((dim, dim))
    tilt = tilt_scale * rng.standard_normal(dim) if tilt_scale > 0 else np.zeros(dim)

    f_value, f_prox, f_subgrad = _zero_f_oracles(dim)

    def g_value(x: Array) -> float:
        return (0.25 * float((x ** 4).sum()) + 0.5 * mu * float(x @ x)
                + 0.5 * float(x @ (P @ x)) - float(tilt @ x))

    def g_grad(x: Array) -> Array:
        return x ** 3 + mu * x + P @ x - tilt

    def g_hess(x: Array) -> Array:
        return np.diag(3.0 * x ** 2) + mu * np.eye(dim) + P

    def stationarity_residual(x: Array) -> float:
        return float(np.linalg.norm(g_grad(x)))

    if tilt_scale > 0:
        x_star = _damped_newton(g_grad, g_hess, np.zeros(dim), tol=1e-13)
    else:
        x_star = np.zeros(dim)

    lip_grad = 3.0 * box_radius ** 2 + mu + (np.linalg.norm(P, 2) if dim > 1 else 0.0)

    return CompositeProblem(
        dim=dim, mu=mu, lip_grad=float(lip_grad), lip_hess=6.0 * box_radius,
        f_value=f_value, f_prox=f_prox, f_subgrad=f_subgrad,
        g_value=g_value, g_grad=g_grad, g_hess=g_hess,
        known_minimizer=x_star, project=_identity,
        stationarity_residual=stationarity_residual,
        structure={"f_kind": "zero", "g_kind": "quartic", "P": P, "tilt": tilt},
        name=f"quartic(dim={dim},mu={mu:g},seed={seed})",
        meta={"generator": "quartic", "dim": dim, "mu": mu, "seed": seed,
              "coupling_scale": coupling_scale, "box_radius": box_radius,
              "tilt_scale": tilt_scale},
        lip_hess_box=box_radius,
    )
