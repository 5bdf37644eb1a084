"""Binary-outcome regression baselines on the trimmed sample.

Trim to |y - t| <= delta, binarize ystar = I(y >= t), then regress ystar
on x by maximum-likelihood logistic regression or ordinary least squares.
Both report Wald-style 95% intervals (estimate +/- 1.96 se).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .errors import ConvergenceError, DataError, SeparationError
from .model import Dataset

IRLS_TOL = 1e-10
IRLS_MAX_ITER = 100
SEPARATION_NORM = 1e3


class Method(Enum):
    LOGISTIC = "logistic"
    LEAST_SQUARES = "least_squares"


@dataclass(frozen=True)
class BorFit:
    """Fitted baseline: point estimates, Wald inference, sample accounting.

    n_trimmed counts the rows retained inside the window (the n_Delta of
    the trimmed analysis, not the number discarded).
    """

    coefficients: np.ndarray
    standard_errors: np.ndarray
    ci95: np.ndarray
    n_trimmed: int
    method: Method

    def __post_init__(self):
        p = self.coefficients.shape[0]
        if self.standard_errors.shape != (p,) or self.ci95.shape != (p, 2):
            raise DataError("inconsistent fit dimensions")
        expect = self.coefficients[:, None] + np.outer(
            self.standard_errors, [-1.96, 1.96]
        )
        if not np.allclose(self.ci95, expect, rtol=0, atol=1e-12):
            raise DataError("ci95 must equal estimate +/- 1.96 se")


def _wald(coefficients, standard_errors, n, method) -> BorFit:
    ci = coefficients[:, None] + np.outer(standard_errors, [-1.96, 1.96])
    return BorFit(
        coefficients=coefficients,
        standard_errors=standard_errors,
        ci95=ci,
        n_trimmed=n,
        method=method,
    )


def trim_binarize(data: Dataset, delta: float):
    """Rows with |y - t| <= delta and their binarized outcome I(y >= t)."""
    if not 0.0 < delta <= min(data.t, 1.0 - data.t):
        raise DataError(f"delta must lie in (0, {min(data.t, 1.0 - data.t)}]")
    keep = np.abs(data.y - data.t) <= delta
    if not np.any(keep):
        raise DataError("trimming window retains no rows")
    X_sub = data.X[keep]
    ystar = (data.y[keep] >= data.t).astype(np.float64)
    if ystar.min() == ystar.max():
        raise DataError("trimmed window contains a single outcome class")
    return X_sub, ystar


def _check_rank(X):
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DataError("design matrix is rank deficient on the trimmed rows")


def fit_logistic(X, ystar) -> BorFit:
    """Maximum-likelihood logistic regression via IRLS.

    Newton steps until the largest coefficient update drops below 1e-10;
    divergence of the coefficient norm past 1e3 is reported as separation
    rather than regularized away.
    """
    X = np.asarray(X, dtype=np.float64)
    ystar = np.asarray(ystar, dtype=np.float64)
    n, p = X.shape
    _check_rank(X)
    beta = np.zeros(p)
    for _ in range(IRLS_MAX_ITER):
        prob = expit(X @ beta)
        w = prob * (1.0 - prob)
        info = X.T @ (X * w[:, None])
        try:
            step = np.linalg.solve(info, X.T @ (ystar - prob))
        except np.linalg.LinAlgError as exc:
            raise SeparationError(f"information matrix became singular: {exc}")
        beta = beta + step
        if np.linalg.norm(beta) > SEPARATION_NORM:
            raise SeparationError(
                "coefficient norm diverged; classes are (quasi-)separated"
            )
        if np.max(np.abs(step)) < IRLS_TOL:
            prob = expit(X @ beta)
            w = prob * (1.0 - prob)
            info = X.T @ (X * w[:, None])
            se = np.sqrt(np.diag(np.linalg.inv(info)))
            return _wald(beta, se, n, Method.LOGISTIC)
    raise ConvergenceError(f"IRLS did not converge in {IRLS_MAX_ITER} iterations")


def fit_ols(X, ystar) -> BorFit:
    """Least squares of the binarized outcome with classical standard errors."""
    X = np.asarray(X, dtype=np.float64)
    ystar = np.asarray(ystar, dtype=np.float64)
    n, p = X.shape
    if n <= p:
        raise DataError("need more rows than columns for residual variance")
    _check_rank(X)
    gram = X.T @ X
    beta = np.linalg.solve(gram, X.T @ ystar)
    resid = ystar - X @ beta
    sigma2 = resid @ resid / (n - p)
    se = np.sqrt(sigma2 * np.diag(np.linalg.inv(gram)))
    return _wald(beta, se, n, Method.LEAST_SQUARES)


def fit_bor(data: Dataset, delta: float, method: Method = Method.LOGISTIC) -> BorFit:
    """Trim, binarize, and fit in one step on a Dataset."""
    X_sub, ystar = trim_binarize(data, delta)
    if method is Method.LOGISTIC:
        return fit_logistic(X_sub, ystar)
    return fit_ols(X_sub, ystar)
