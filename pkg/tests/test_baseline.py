"""Trimmed binary-outcome baselines: IRLS logistic and OLS."""

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import expit

from densjump.baseline import (
    BorFit,
    Method,
    fit_bor,
    fit_logistic,
    fit_ols,
    trim_binarize,
)
from densjump.errors import DataError, SeparationError
from densjump.model import build_dataset


def intercept_dataset(y, t=0.5):
    y = np.asarray(y, dtype=float)
    return build_dataset(y, np.ones((y.size, 1)), t)


def logistic_nll(beta, X, y):
    z = X @ beta
    # stable -loglik: log(1+e^z) - y z
    return float(np.sum(np.logaddexp(0.0, z) - y * z))


class TestTrimBinarize:
    def test_three_row_example(self):
        data = intercept_dataset([0.41, 0.52, 0.9])
        X_sub, ystar = trim_binarize(data, 0.1)
        assert X_sub.shape == (2, 1)
        np.testing.assert_array_equal(ystar, [0.0, 1.0])

    def test_half_window_keeps_everything(self):
        data = intercept_dataset([0.01, 0.3, 0.5, 0.77, 0.99])
        X_sub, ystar = trim_binarize(data, 0.5)
        assert X_sub.shape[0] == 5
        np.testing.assert_array_equal(ystar, [0, 0, 1, 1, 1])

    def test_boundary_rows_included(self):
        data = intercept_dataset([0.4, 0.6, 0.9])
        X_sub, ystar = trim_binarize(data, 0.1)
        # |y - t| == delta sits inside the window
        assert X_sub.shape[0] == 2

    def test_empty_window_rejected(self):
        data = intercept_dataset([0.05, 0.95])
        with pytest.raises(DataError):
            trim_binarize(data, 0.1)

    def test_single_class_rejected(self):
        data = intercept_dataset([0.55, 0.6, 0.52])
        with pytest.raises(DataError):
            trim_binarize(data, 0.12)

    def test_delta_out_of_range(self):
        data = intercept_dataset([0.41, 0.52, 0.9])
        with pytest.raises(DataError):
            trim_binarize(data, 0.7)


class TestLogistic:
    def test_balanced_intercept_is_zero(self):
        X = np.ones((8, 1))
        y = np.array([1, 0, 1, 0, 1, 0, 1, 0], dtype=float)
        fit = fit_logistic(X, y)
        np.testing.assert_allclose(fit.coefficients, [0.0], atol=1e-12)

    def test_three_quarters_gives_log3(self):
        X = np.ones((8, 1))
        y = np.array([1, 1, 1, 1, 1, 1, 0, 0], dtype=float)
        fit = fit_logistic(X, y)
        np.testing.assert_allclose(fit.coefficients, [np.log(3.0)], rtol=1e-10)
        # intercept-only Wald se: 1/sqrt(n p (1-p))
        np.testing.assert_allclose(
            fit.standard_errors, [1.0 / np.sqrt(8 * 0.75 * 0.25)], rtol=1e-10
        )

    def test_score_equations_at_convergence(self):
        rng = np.random.default_rng(31)
        X = np.column_stack([np.ones(300), rng.normal(size=(300, 3))])
        truth = np.array([0.4, 1.0, -0.7, 0.2])
        y = (rng.random(300) < expit(X @ truth)).astype(float)
        fit = fit_logistic(X, y)
        score = X.T @ (y - expit(X @ fit.coefficients))
        assert np.max(np.abs(score)) < 1e-8

    def test_matches_direct_likelihood_optimizer(self):
        rng = np.random.default_rng(32)
        X = np.column_stack([np.ones(200), rng.normal(size=(200, 2))])
        y = (rng.random(200) < expit(X @ np.array([0.2, -0.8, 0.5]))).astype(float)
        fit = fit_logistic(X, y)
        res = minimize(logistic_nll, np.zeros(3), args=(X, y), method="BFGS",
                       options={"gtol": 1e-12})
        np.testing.assert_allclose(fit.coefficients, res.x, atol=1e-6)

    def test_separation_detected(self):
        x = np.linspace(-2, 2, 40)
        X = np.column_stack([np.ones(40), x])
        y = (x > 0).astype(float)
        with pytest.raises(SeparationError):
            fit_logistic(X, y)

    def test_rank_deficiency(self):
        X = np.ones((30, 2))
        y = np.array([0, 1] * 15, dtype=float)
        with pytest.raises(DataError):
            fit_logistic(X, y)

    def test_constant_shift_moves_only_intercept(self):
        rng = np.random.default_rng(33)
        X = np.column_stack([np.ones(250), rng.normal(size=(250, 2))])
        y = (rng.random(250) < expit(X @ np.array([0.1, 0.9, -0.4]))).astype(float)
        base = fit_logistic(X, y)
        shifted = X.copy()
        shifted[:, 1] += 2.5
        other = fit_logistic(shifted, y)
        np.testing.assert_allclose(other.coefficients[1:], base.coefficients[1:],
                                   atol=1e-8)
        np.testing.assert_allclose(
            other.coefficients[0],
            base.coefficients[0] - 2.5 * base.coefficients[1],
            atol=1e-8,
        )


class TestOls:
    def test_intercept_only_is_mean(self):
        X = np.ones((5, 1))
        y = np.array([1, 0, 1, 1, 0], dtype=float)
        fit = fit_ols(X, y)
        np.testing.assert_allclose(fit.coefficients, [0.6], rtol=1e-12)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(34)
        X = np.column_stack([np.ones(60), rng.normal(size=(60, 3))])
        y = (rng.random(60) < 0.5).astype(float)
        fit = fit_ols(X, y)
        oracle = np.linalg.solve(X.T @ X, X.T @ y)
        np.testing.assert_allclose(fit.coefficients, oracle, atol=1e-10)

    def test_residuals_orthogonal_to_design(self):
        rng = np.random.default_rng(35)
        X = np.column_stack([np.ones(80), rng.normal(size=(80, 2))])
        y = (rng.random(80) < 0.4).astype(float)
        fit = fit_ols(X, y)
        resid = y - X @ fit.coefficients
        assert np.max(np.abs(X.T @ resid)) < 1e-10

    def test_classical_se_oracle(self):
        # orthogonal two-column design worked out in closed form
        X = np.column_stack([np.ones(4), [-1.0, -1.0, 1.0, 1.0]])
        y = np.array([0.0, 1.0, 1.0, 1.0])
        fit = fit_ols(X, y)
        np.testing.assert_allclose(fit.coefficients, [0.75, 0.25], rtol=1e-12)
        # residuals (-.5,.5,0,0): sigma2 = 0.5/2 = 0.25; se = 0.5/sqrt(4)
        np.testing.assert_allclose(fit.standard_errors, [0.25, 0.25], rtol=1e-12)

    def test_needs_residual_degrees_of_freedom(self):
        X = np.ones((1, 1))
        with pytest.raises(DataError):
            fit_ols(X, np.array([1.0]))


class TestBorFitContract:
    def test_ci_is_wald(self):
        X = np.ones((8, 1))
        y = np.array([1, 1, 1, 1, 1, 1, 0, 0], dtype=float)
        fit = fit_logistic(X, y)
        np.testing.assert_allclose(
            fit.ci95[:, 0], fit.coefficients - 1.96 * fit.standard_errors, rtol=1e-12
        )
        np.testing.assert_allclose(
            fit.ci95[:, 1], fit.coefficients + 1.96 * fit.standard_errors, rtol=1e-12
        )

    def test_inconsistent_ci_rejected(self):
        with pytest.raises(DataError):
            BorFit(
                coefficients=np.array([1.0]),
                standard_errors=np.array([0.5]),
                ci95=np.array([[0.0, 2.5]]),
                n_trimmed=10,
                method=Method.LOGISTIC,
            )

    def test_fit_bor_counts_window_rows(self):
        rng = np.random.default_rng(36)
        n = 400
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        y = np.clip(rng.beta(2.0, 2.0, size=n), 1e-3, 1 - 1e-3)
        data = build_dataset(y, X, 0.5)
        fit = fit_bor(data, 0.25, Method.LOGISTIC)
        assert fit.n_trimmed == int(np.sum(np.abs(y - 0.5) <= 0.25))
        assert fit.method is Method.LOGISTIC
        ols = fit_bor(data, 0.25, Method.LEAST_SQUARES)
        assert ols.method is Method.LEAST_SQUARES
        assert ols.n_trimmed == fit.n_trimmed
