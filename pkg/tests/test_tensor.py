import math

import numpy as np
import pytest
from scipy.optimize import minimize

from accelprox import (CapabilityError, ParameterError, StepError,
                       StoppingRule, check_error_criterion, exact_prox,
                       lift_tensor_solution, make_l1_composite,
                       make_logistic_ridge, make_quadratic, make_quartic,
                       random_logistic_data, run_tensor,
                       solve_tensor_subproblem_p2, tensor_model_grad,
                       tensor_model_value, verify_trace)
from accelprox.tensor import TensorConfig

RNG = np.random.default_rng(20240817)

QUAD = make_quadratic(dim=6, mu=0.5, L=4.0, seed=11)
QUARTIC = make_quartic(dim=5, mu=1.0, seed=3)


class TestModelOracles:
    def test_model_reproduces_quadratic_with_m_zero(self):
        # second-order model of a quadratic is the quadratic itself
        for _ in range(100):
            z = RNG.standard_normal(QUAD.dim)
            y = RNG.standard_normal(QUAD.dim)
            m = tensor_model_value(QUAD, z, y, M=0.0)
            assert m == pytest.approx(QUAD.g_value(y), rel=1e-12, abs=1e-12)

    def test_model_grad_is_derivative_of_model_value(self):
        z = 0.3 * RNG.standard_normal(QUARTIC.dim)
        y = 0.3 * RNG.standard_normal(QUARTIC.dim)
        g = tensor_model_grad(QUARTIC, z, y, M=7.0)
        h = 1e-6
        for _ in range(10):
            d = RNG.standard_normal(QUARTIC.dim)
            d /= np.linalg.norm(d)
            num = (tensor_model_value(QUARTIC, z, y + h * d, M=7.0)
                   - tensor_model_value(QUARTIC, z, y - h * d, M=7.0)) / (2 * h)
            assert num == pytest.approx(float(g @ d), rel=1e-6, abs=1e-7)

    def test_cubic_term_weight(self):
        z = np.zeros(QUAD.dim)
        y = np.ones(QUAD.dim)
        diff = tensor_model_value(QUAD, z, y, M=6.0) - tensor_model_value(
            QUAD, z, y, M=0.0)
        assert diff == pytest.approx(math.sqrt(QUAD.dim) ** 3, rel=1e-12)

    def test_p3_model_unsupported(self):
        z = np.zeros(QUAD.dim)
        with pytest.raises(CapabilityError):
            tensor_model_value(QUAD, z, z, M=1.0, p=3)
        with pytest.raises(CapabilityError):
            tensor_model_grad(QUAD, z, z, M=1.0, p=3)

    def test_negative_m_rejected(self):
        z = np.zeros(QUAD.dim)
        with pytest.raises(ParameterError):
            tensor_model_value(QUAD, z, z, M=-1.0)


class TestSecularSolve:
    def test_m_zero_reduces_to_exact_prox(self):
        for lam in (0.2, 1.0, 5.0):
            x = RNG.standard_normal(QUAD.dim)
            trip = solve_tensor_subproblem_p2(QUAD, x, lam, M=0.0)
            ref = exact_prox(QUAD, x, lam)
            assert np.allclose(trip.y, ref.y, rtol=1e-12, atol=1e-12)
            assert trip.eps == 0.0
            assert np.all(trip.u == 0.0)

    def test_regularized_step_is_stationary(self):
        for _ in range(20):
            x = RNG.standard_normal(QUAD.dim)
            lam = float(RNG.uniform(0.1, 3.0))
            M = float(RNG.uniform(0.5, 10.0))
            trip = solve_tensor_subproblem_p2(QUAD, x, lam, M=M)
            resid = tensor_model_grad(QUAD, x, trip.y, M=M) + (trip.y - x) / lam
            scale = 1.0 + np.linalg.norm(trip.y - x)
            assert np.linalg.norm(resid) <= 1e-10 * scale
            assert trip.model_residual <= 1e-18

    def test_agrees_with_general_purpose_minimizer(self):
        prob = make_quadratic(dim=4, mu=0.3, L=2.0, seed=5)
        x = np.array([1.0, -0.5, 0.25, 2.0])
        lam, M = 0.7, 4.0

        def objective(y):
            return tensor_model_value(prob, x, y, M=M) + \
                float((y - x) @ (y - x)) / (2 * lam)

        ref = minimize(objective, x, method="BFGS",
                       options={"gtol": 1e-12, "maxiter": 500})
        trip = solve_tensor_subproblem_p2(prob, x, lam, M=M)
        assert np.allclose(trip.y, ref.x, atol=1e-6)

    def test_zero_gradient_center_takes_zero_step(self):
        trip = solve_tensor_subproblem_p2(QUARTIC, np.zeros(QUARTIC.dim),
                                          lam=1.0, M=12.0)
        assert np.linalg.norm(trip.y) == 0.0

    def test_center_outside_validity_box_rejected(self):
        with pytest.raises(StepError):
            solve_tensor_subproblem_p2(QUARTIC, 3.0 * np.ones(QUARTIC.dim),
                                       lam=1.0, M=12.0)


class TestModelInnerLoop:
    def setup_method(self):
        self.prob = make_l1_composite(dim=8, mu=0.4, L=3.0, l1_weight=0.2,
                                      seed=9)

    def test_certified_at_sigma_hat(self):
        x = RNG.standard_normal(self.prob.dim)
        trip = solve_tensor_subproblem_p2(self.prob, x, lam=0.8, M=2.0,
                                          sigma_hat=0.3)
        step_sq = float((trip.y - x) @ (trip.y - x))
        assert trip.model_residual <= 0.3 ** 2 + 1e-12 * (1 + step_sq) / step_sq

    def test_nonzero_f_needs_positive_sigma_hat(self):
        x = RNG.standard_normal(self.prob.dim)
        with pytest.raises(CapabilityError):
            solve_tensor_subproblem_p2(self.prob, x, lam=0.8, M=2.0,
                                       sigma_hat=0.0)


class TestLift:
    def test_lifted_triple_passes_outer_criterion(self):
        # the window is irrelevant here, only the certificate algebra
        x = 0.25 * RNG.standard_normal(QUARTIC.dim)
        for lam in (0.05, 0.2, 0.8):
            trip = solve_tensor_subproblem_p2(QUARTIC, x, lam, M=12.0)
            lifted, sigma = lift_tensor_solution(QUARTIC, x, lam, trip, M=12.0)
            assert lifted.lam == lam
            if sigma < 1.0:
                rec = check_error_criterion(QUARTIC, x, lifted, sigma)
                assert rec.accepted

    def test_lift_sigma_scales_with_step_norm(self):
        x_small = 0.01 * np.ones(QUARTIC.dim)
        x_large = 0.5 * np.ones(QUARTIC.dim)
        lam = 0.3
        _, s_small = lift_tensor_solution(
            QUARTIC, x_small, lam,
            solve_tensor_subproblem_p2(QUARTIC, x_small, lam, M=12.0), M=12.0)
        _, s_large = lift_tensor_solution(
            QUARTIC, x_large, lam,
            solve_tensor_subproblem_p2(QUARTIC, x_large, lam, M=12.0), M=12.0)
        assert s_small < s_large


class TestRunTensor:
    def test_quartic_run_verifies_and_converges_fast(self):
        cfg = TensorConfig(sigma_l=0.1, sigma_u=0.5,
                           stopping=StoppingRule(max_iter=25))
        x0 = 0.3 * np.ones(QUARTIC.dim)
        tr = run_tensor(QUARTIC, x0, cfg)
        assert tr.algorithm == "tensor"
        assert tr.records[-1].value_gap <= 1e-12
        assert len(tr.records) <= 25
        bundle = verify_trace(tr)
        assert bundle.ok, [r.name for r in bundle.reports if not r.satisfied]

    def test_m_defaults_to_twice_hessian_lipschitz(self):
        cfg = TensorConfig(sigma_l=0.1, sigma_u=0.5,
                           stopping=StoppingRule(max_iter=3))
        tr = run_tensor(QUARTIC, 0.2 * np.ones(QUARTIC.dim), cfg)
        assert tr.params["M"] == pytest.approx(2.0 * QUARTIC.lip_hess)

    def test_m_below_convexity_threshold_rejected(self):
        cfg = TensorConfig(sigma_l=0.1, sigma_u=0.5, M=1.0,
                           stopping=StoppingRule(max_iter=3))
        with pytest.raises(ParameterError):
            run_tensor(QUARTIC, 0.2 * np.ones(QUARTIC.dim), cfg)

    def test_p3_driver_unsupported(self):
        cfg = TensorConfig(sigma_l=0.1, sigma_u=0.5, p=3,
                           stopping=StoppingRule(max_iter=3))
        with pytest.raises(CapabilityError):
            run_tensor(QUARTIC, 0.2 * np.ones(QUARTIC.dim), cfg)

    def test_quadratic_with_zero_m_has_no_window(self):
        cfg = TensorConfig(sigma_l=0.1, sigma_u=0.5,
                           stopping=StoppingRule(max_iter=3))
        with pytest.raises(ParameterError):
            run_tensor(QUAD, np.ones(QUAD.dim), cfg)

    def test_logistic_run_keeps_all_certificates(self):
        samples, labels = random_logistic_data(n_samples=30, dim=6, seed=2)
        prob = make_logistic_ridge(samples, labels, mu=0.5)
        cfg = TensorConfig(sigma_l=0.1, sigma_u=0.5,
                           stopping=StoppingRule(max_iter=8))
        tr = run_tensor(prob, np.zeros(6) + 0.5, cfg)
        bundle = verify_trace(tr)
        assert bundle.ok, [r.name for r in bundle.reports if not r.satisfied]


class TestConfigValidation:
    def test_ordering_enforced(self):
        with pytest.raises(ParameterError):
            TensorConfig(sigma_l=0.5, sigma_u=0.5,
                         stopping=StoppingRule(max_iter=3))

    def test_total_tolerance_below_one(self):
        with pytest.raises(ParameterError):
            TensorConfig(sigma_l=0.1, sigma_u=0.8, sigma_hat=0.25,
                         stopping=StoppingRule(max_iter=3))

    def test_window_compatibility_with_inner_error(self):
        # sigma_l (1+s)^(p-1) must stay below sigma_u (1-s)^(p-1)
        with pytest.raises(ParameterError):
            TensorConfig(sigma_l=0.4, sigma_u=0.5, sigma_hat=0.2,
                         stopping=StoppingRule(max_iter=3))
