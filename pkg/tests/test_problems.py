import numpy as np
import pytest

from accelprox import DataError, ParameterError
from accelprox.problems import (LOGISTIC_THIRD_DERIV_PEAK, make_l1_composite,
                                make_logistic_ridge, make_quadratic,
                                make_quartic, random_logistic_data)


def central_diff_grad(fun, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


class TestQuadratic:
    def test_minimizer_stationary(self):
        prob = make_quadratic(dim=12, mu=0.05, L=2.0, seed=0)
        assert np.linalg.norm(prob.g_grad(prob.known_minimizer)) <= 1e-10

    def test_spectrum_spans_mu_to_L(self):
        prob = make_quadratic(dim=8, mu=0.1, L=3.0, seed=4)
        eigs = np.linalg.eigvalsh(prob.structure["Q"])
        assert abs(eigs.min() - 0.1) <= 1e-12
        assert abs(eigs.max() - 3.0) <= 1e-12

    def test_dim_one_pins_curvature_to_L(self):
        prob = make_quadratic(dim=1, mu=0.5, L=2.0, seed=1)
        assert abs(prob.structure["Q"][0, 0] - 2.0) <= 1e-15

    def test_zero_f_oracles(self):
        prob = make_quadratic(dim=5, mu=0.1, L=1.0, seed=2)
        w = np.arange(5.0)
        assert prob.f_value(w) == 0.0
        assert np.array_equal(prob.f_prox(w, 0.7), w)
        assert prob.f_is_zero

    def test_gradient_matches_value(self):
        prob = make_quadratic(dim=6, mu=0.2, L=1.5, seed=3)
        rng = np.random.default_rng(9)
        for _ in range(5):
            x = rng.standard_normal(6)
            num = central_diff_grad(prob.g_value, x)
            assert np.allclose(prob.g_grad(x), num, atol=1e-5)

    def test_h_star_is_attained_value(self):
        prob = make_quadratic(dim=4, mu=0.3, L=1.0, seed=5)
        assert abs(prob.h_star - prob.h_value(prob.known_minimizer)) == 0.0

    def test_bad_parameters(self):
        with pytest.raises(ParameterError):
            make_quadratic(dim=0, mu=0.1, L=1.0, seed=0)
        with pytest.raises(ParameterError):
            make_quadratic(dim=3, mu=2.0, L=1.0, seed=0)


class TestLogisticRidge:
    def setup_method(self):
        self.samples, self.labels = random_logistic_data(30, 6, seed=7)
        self.prob = make_logistic_ridge(self.samples, self.labels, mu=0.3)

    def test_labels_validated(self):
        bad = self.labels.copy()
        bad[0] = 0.5
        with pytest.raises(DataError):
            make_logistic_ridge(self.samples, bad, mu=0.3)

    def test_gradient_vs_central_differences(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            x = rng.standard_normal(6)
            num = central_diff_grad(self.prob.g_value, x)
            assert np.allclose(self.prob.g_grad(x), num, rtol=1e-5, atol=1e-7)

    def test_hessian_vs_gradient_differences(self):
        rng = np.random.default_rng(13)
        x = rng.standard_normal(6)
        H = self.prob.g_hess(x)
        h = 1e-6
        for i in range(6):
            e = np.zeros(6)
            e[i] = h
            col = (self.prob.g_grad(x + e) - self.prob.g_grad(x - e)) / (2 * h)
            assert np.allclose(H[:, i], col, rtol=1e-4, atol=1e-6)

    def test_minimizer_stationary(self):
        g = self.prob.g_grad(self.prob.known_minimizer)
        assert np.linalg.norm(g) <= 1e-10

    def test_lip_grad_dominates_hessian(self):
        # the curvature bound must hold at arbitrary points, not just x*
        rng = np.random.default_rng(21)
        for _ in range(20):
            x = 3.0 * rng.standard_normal(6)
            top = np.linalg.norm(self.prob.g_hess(x), 2)
            assert top <= self.prob.lip_grad + 1e-9

    def test_hessian_lipschitz_constant(self):
        rng = np.random.default_rng(22)
        L2 = self.prob.lip_hess
        for _ in range(50):
            x = 2.0 * rng.standard_normal(6)
            y = 2.0 * rng.standard_normal(6)
            lhs = np.linalg.norm(self.prob.g_hess(x) - self.prob.g_hess(y), 2)
            assert lhs <= L2 * np.linalg.norm(x - y) + 1e-9

    def test_third_derivative_peak_constant(self):
        # max over s of |d^3/ds^3 log(1+e^s)| is attained where the second
        # derivative p(1-p) satisfies p = (3 +- sqrt(3))/6
        s = np.linspace(-8, 8, 200001)
        p = 1.0 / (1.0 + np.exp(-s))
        third = np.abs(p * (1 - p) * (1 - 2 * p))
        assert third.max() <= LOGISTIC_THIRD_DERIV_PEAK + 1e-12
        assert third.max() >= LOGISTIC_THIRD_DERIV_PEAK - 1e-6

    def test_empty_sample_set_is_pure_ridge(self):
        prob = make_logistic_ridge(np.zeros((0, 4)), np.zeros(0), mu=0.7)
        assert np.allclose(prob.known_minimizer, 0.0)
        x = np.array([1.0, -2.0, 0.5, 3.0])
        assert abs(prob.g_value(x) - 0.35 * float(x @ x)) <= 1e-12


class TestL1Composite:
    def setup_method(self):
        self.prob = make_l1_composite(dim=15, mu=0.1, L=1.5, l1_weight=0.4,
                                      seed=11)

    def test_prox_is_soft_threshold(self):
        rng = np.random.default_rng(30)
        w = rng.standard_normal(15)
        t = 0.8
        got = self.prob.f_prox(w, t)
        want = np.sign(w) * np.maximum(np.abs(w) - t * 0.4, 0.0)
        assert np.allclose(got, want, atol=1e-15)

    def test_reference_minimizer_coordinate_optimality(self):
        # independent re-derivation: at the minimum, coordinates with
        # x_i != 0 satisfy grad_i + w sign(x_i) = 0, zeros satisfy
        # |grad_i| <= w
        x = self.prob.known_minimizer
        g = self.prob.g_grad(x)
        w = 0.4
        for i in range(15):
            if x[i] != 0.0:
                assert abs(g[i] + w * np.sign(x[i])) <= 1e-8
            else:
                assert abs(g[i]) <= w + 1e-8

    def test_subgradient_inequality(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            y = rng.standard_normal(15)
            u = self.prob.f_subgrad(y)
            z = rng.standard_normal(15) * 2.0
            assert (self.prob.f_value(z)
                    >= self.prob.f_value(y) + float(u @ (z - y)) - 1e-10)

    def test_h_star_below_sampled_values(self):
        rng = np.random.default_rng(32)
        star = self.prob.h_star
        for _ in range(100):
            x = self.prob.known_minimizer + 0.5 * rng.standard_normal(15)
            assert self.prob.h_value(x) >= star - 1e-12


class TestQuartic:
    def test_origin_is_minimizer_without_tilt(self):
        prob = make_quartic(dim=10, mu=1.0, seed=7)
        assert np.array_equal(prob.known_minimizer, np.zeros(10))
        assert np.linalg.norm(prob.g_grad(np.zeros(10))) == 0.0

    def test_gradient_and_hessian_consistency(self):
        prob = make_quartic(dim=6, mu=0.5, seed=8, tilt_scale=0.2)
        rng = np.random.default_rng(40)
        x = 0.5 * rng.standard_normal(6)
        num = central_diff_grad(prob.g_value, x)
        assert np.allclose(prob.g_grad(x), num, rtol=1e-5, atol=1e-7)
        h = 1e-6
        H = prob.g_hess(x)
        for i in range(6):
            e = np.zeros(6)
            e[i] = h
            col = (prob.g_grad(x + e) - prob.g_grad(x - e)) / (2 * h)
            assert np.allclose(H[:, i], col, rtol=1e-4, atol=1e-6)

    def test_hessian_lipschitz_valid_on_box(self):
        prob = make_quartic(dim=5, mu=1.0, seed=9, box_radius=1.0)
        rng = np.random.default_rng(41)
        for _ in range(100):
            x = rng.uniform(-1.0, 1.0, 5)
            y = rng.uniform(-1.0, 1.0, 5)
            lhs = np.linalg.norm(prob.g_hess(x) - prob.g_hess(y), 2)
            assert lhs <= prob.lip_hess * np.linalg.norm(x - y) + 1e-9

    def test_lip_grad_valid_on_box(self):
        prob = make_quartic(dim=5, mu=1.0, seed=10, box_radius=1.0)
        rng = np.random.default_rng(42)
        for _ in range(50):
            x = rng.uniform(-1.0, 1.0, 5)
            assert np.linalg.norm(prob.g_hess(x), 2) <= prob.lip_grad + 1e-9

    def test_tilted_minimizer_stationary(self):
        prob = make_quartic(dim=6, mu=1.0, seed=11, tilt_scale=0.1)
        assert np.linalg.norm(prob.g_grad(prob.known_minimizer)) <= 1e-10
