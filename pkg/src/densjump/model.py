"""Discontinuity beta-regression model.

The response y in (0,1) follows a beta-like density whose shape
parameters depend on covariates through a bounded link, with a
covariate-dependent downward mass distortion below a known threshold t:

    f(y | x) proportional to y^(a(x)-1) (1-y)^(b(x)-1) exp(-1{y<t} j(x))

where a(x) = s(x'gamma1), b(x) = s(x'gamma2), and the jump size
j(x) = (x'alpha)_+ is the log of the density ratio across t. Fits can be
restricted to a window [t-delta, t+delta], in which case the density is
renormalized on the window.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import _kernels
from .errors import DataError, DegenerateWindowError

__all__ = [
    "LinkConfig",
    "ParamVector",
    "Dataset",
    "Window",
    "DEFAULT_LINK",
    "link_s",
    "jump_link",
    "jump_surface",
    "standardize_design",
    "build_dataset",
    "make_window",
    "ensure_window_usable",
    "log_likelihood",
    "log_prior",
    "log_posterior_unnorm",
    "log_density_pointwise",
    "log_density_terms",
    "make_log_posterior",
]


@dataclass(frozen=True)
class LinkConfig:
    """Bounds of the logistic shape link s(z) = lo + (hi-lo) sigmoid(z)."""

    lo: float = 0.1
    hi: float = 30.0

    def __post_init__(self):
        if not (0.0 < self.lo < self.hi < np.inf):
            raise ValueError("link bounds must satisfy 0 < lo < hi")


DEFAULT_LINK = LinkConfig()


@dataclass
class ParamVector:
    """Model coefficients theta = (gamma1, gamma2, alpha), each length p.

    The flat layout used by the sampler and all dump formats is the
    concatenation gamma1 | gamma2 | alpha.
    """

    gamma1: np.ndarray
    gamma2: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        self.gamma1 = np.asarray(self.gamma1, dtype=float)
        self.gamma2 = np.asarray(self.gamma2, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        p = self.gamma1.shape[0]
        if self.gamma2.shape != (p,) or self.alpha.shape != (p,):
            raise ValueError("gamma1, gamma2, alpha must share one length p")

    @property
    def p(self) -> int:
        return self.gamma1.shape[0]

    @property
    def dim(self) -> int:
        return 3 * self.p

    @classmethod
    def from_flat(cls, theta, p: int) -> "ParamVector":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (3 * p,):
            raise ValueError(f"flat parameter vector must have length {3 * p}")
        return cls(theta[:p], theta[p : 2 * p], theta[2 * p :])

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.gamma1, self.gamma2, self.alpha])


@dataclass
class Dataset:
    """Response, standardized design matrix, and threshold.

    X has an all-ones first column; every other column is centered and
    scaled to unit sample variance (ddof=1) on the full dataset, with the
    applied constants recorded in column_means / column_sds (the intercept
    slot holds 0 / 1). meta carries ingestion or generation annotations.
    """

    y: np.ndarray
    X: np.ndarray
    t: float
    column_means: np.ndarray
    column_sds: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        self.column_means = np.asarray(self.column_means, dtype=float)
        self.column_sds = np.asarray(self.column_sds, dtype=float)
        n, p = self.X.shape
        if self.y.shape != (n,):
            raise DataError("y length must match the design matrix rows")
        if self.column_means.shape != (p,) or self.column_sds.shape != (p,):
            raise DataError("standardization constants must have length p")
        if not (0.0 < self.t < 1.0):
            raise DataError("threshold must lie strictly inside (0, 1)")
        if np.any(self.y <= 0.0) or np.any(self.y >= 1.0):
            raise DataError("responses must lie strictly inside (0, 1)")
        if not np.all(self.X[:, 0] == 1.0):
            raise DataError("first design column must be the intercept (all ones)")
        if n > 1 and p > 1:
            mu = self.X[:, 1:].mean(axis=0)
            var = self.X[:, 1:].var(axis=0, ddof=1)
            if np.any(np.abs(mu) > 1e-8) or np.any(np.abs(var - 1.0) > 1e-8):
                raise DataError(
                    "non-intercept columns must be standardized "
                    "(mean 0, unit sample variance)"
                )
        # likelihood caches, shared by every evaluation on this dataset
        self.log_y = np.log(self.y)
        self.log_1my = np.log1p(-self.y)
        self.below = (self.y < self.t).astype(np.float64)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass
class Window:
    """Trimming interval [t-delta, t+delta] and the samples it retains."""

    delta: float
    t1: float
    t2: float
    indices: np.ndarray

    @property
    def n_retained(self) -> int:
        return self.indices.shape[0]


def standardize_design(X):
    """Center/scale the non-intercept columns of a design matrix.

    X must already carry its all-ones intercept in column 0. Returns
    (X_standardized, means, sds) where the intercept slot records (0, 1).
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if not np.all(X[:, 0] == 1.0):
        raise DataError("first design column must be the intercept (all ones)")
    means = np.zeros(p)
    sds = np.ones(p)
    out = X.copy()
    if p > 1:
        means[1:] = X[:, 1:].mean(axis=0)
        sds[1:] = X[:, 1:].std(axis=0, ddof=1)
        if np.any(sds[1:] == 0.0) or not np.all(np.isfinite(sds[1:])):
            bad = int(np.argmin(sds[1:])) + 1
            raise DataError(f"design column {bad} is constant; cannot standardize")
        out[:, 1:] = (X[:, 1:] - means[1:]) / sds[1:]
    return out, means, sds


def build_dataset(y, X, t, meta=None) -> Dataset:
    """Standardize a raw intercept-bearing design and assemble a Dataset.

    Standardization constants are computed once here, on the full data,
    before any trimming; trimmed fits reuse the same columns so that
    coefficients are comparable across windows.
    """
    Xs, means, sds = standardize_design(X)
    return Dataset(
        y=np.asarray(y, dtype=float),
        X=Xs,
        t=float(t),
        column_means=means,
        column_sds=sds,
        meta=dict(meta or {}),
    )


def make_window(data: Dataset, delta: float) -> Window:
    """Window [t-delta, t+delta] with the inclusive index filter."""
    half = min(data.t, 1.0 - data.t)
    if not (0.0 < delta <= half + 1e-12):
        raise DataError(f"delta must lie in (0, {half}]")
    t1 = data.t - delta
    t2 = data.t + delta
    indices = np.flatnonzero((data.y >= t1) & (data.y <= t2))
    return Window(delta=float(delta), t1=t1, t2=t2, indices=indices)


def full_window(data: Dataset) -> Window:
    """The untrimmed window; for t = 1/2 this is delta = 1/2."""
    return make_window(data, min(data.t, 1.0 - data.t))


def ensure_window_usable(data: Dataset, w: Window) -> None:
    """Refuse windows whose posterior would be prior-dominated.

    A usable window retains at least 3p samples and has data on both
    sides of the threshold (below: y < t, above: y >= t).
    """
    yw = data.y[w.indices]
    if w.n_retained < 3 * data.p:
        raise DegenerateWindowError(
            f"window [{w.t1:.4g}, {w.t2:.4g}] retains {w.n_retained} samples; "
            f"need at least 3p = {3 * data.p}"
        )
    n_below = int(np.sum(yw < data.t))
    if n_below == 0 or n_below == w.n_retained:
        raise DegenerateWindowError(
            f"window [{w.t1:.4g}, {w.t2:.4g}] has all samples on one side "
            "of the threshold"
        )


def link_s(z, cfg: LinkConfig = DEFAULT_LINK):
    """Bounded shape link lo + (hi-lo) e^z/(1+e^z), elementwise."""
    return cfg.lo + (cfg.hi - cfg.lo) * expit(np.asarray(z, dtype=float))


def jump_link(z):
    """Positive part g(z) = max(z, 0): jumps are never downward."""
    return np.maximum(np.asarray(z, dtype=float), 0.0)


def jump_surface(theta: ParamVector, X_rows):
    """Per-row jump size j(x) = (x'alpha)_+.

    exp(j(x)) is the ratio of the density just above t to just below t.
    """
    X_rows = np.atleast_2d(np.asarray(X_rows, dtype=float))
    if X_rows.shape[1] != theta.p:
        raise ValueError("row width must equal the parameter block length p")
    return jump_link(X_rows @ theta.alpha)


def _window_terms(theta_flat, data, w, indices, link):
    """Per-observation log densities at the given sample indices."""
    p = data.p
    g1 = theta_flat[:p]
    g2 = theta_flat[p : 2 * p]
    al = theta_flat[2 * p :]
    Xs = data.X[indices]
    a = link_s(Xs @ g1, link)
    b = link_s(Xs @ g2, link)
    jmp = jump_link(Xs @ al)
    out = np.empty(indices.shape[0])
    _kernels.loglik_terms(
        data.log_y[indices],
        data.log_1my[indices],
        data.below[indices],
        a,
        b,
        jmp,
        data.t,
        w.t1,
        w.t2,
        out,
    )
    return out


def log_likelihood(theta: ParamVector, data: Dataset, w: Window, link=DEFAULT_LINK):
    """Window-restricted log likelihood of theta."""
    return float(np.sum(_window_terms(theta.to_flat(), data, w, w.indices, link)))


def log_prior(theta: ParamVector, p: int | None = None):
    """Gaussian prior log density, normalizing constants included.

    alpha coordinates are N(0,1); each gamma coordinate is N(0, 1/p).
    Carrying the normalizers keeps prior density ratios exact.
    """
    if p is None:
        p = theta.p
    elif p != theta.p:
        raise ValueError("stated p disagrees with the parameter blocks")
    quad = 0.5 * (
        np.dot(theta.alpha, theta.alpha)
        + p * (np.dot(theta.gamma1, theta.gamma1) + np.dot(theta.gamma2, theta.gamma2))
    )
    norm = -1.5 * p * np.log(2.0 * np.pi) + p * np.log(p)
    return float(norm - quad)


def log_posterior_unnorm(theta: ParamVector, data: Dataset, w: Window, link=DEFAULT_LINK):
    """log likelihood + log prior (posterior up to the evidence constant)."""
    return log_likelihood(theta, data, w, link) + log_prior(theta)


def log_density_pointwise(
    theta: ParamVector, data: Dataset, w: Window, i: int, link=DEFAULT_LINK
):
    """Normalized conditional log density of observation i on the window."""
    if i not in w.indices:
        raise IndexError(f"sample {i} is outside the window")
    out = _window_terms(theta.to_flat(), data, w, np.array([i]), link)
    return float(out[0])


def log_density_terms(theta_flat, data: Dataset, w: Window, indices, link=DEFAULT_LINK):
    """Vector of per-observation log densities for an index subset.

    The subset must be contained in the window; this is the bulk interface
    the WAIC computation loops over draws with.
    """
    indices = np.asarray(indices, dtype=np.intp)
    theta_flat = np.asarray(theta_flat, dtype=float)
    return _window_terms(theta_flat, data, w, indices, link)


def make_log_posterior(data: Dataset, w: Window, link=DEFAULT_LINK, validate=True):
    """Closure computing the unnormalized log posterior from a flat theta.

    Slices the window once so the per-evaluation cost inside the sampler
    is three mat-vecs and one compiled kernel pass.
    """
    if validate:
        ensure_window_usable(data, w)
    p = data.p
    idx = w.indices
    Xw = np.ascontiguousarray(data.X[idx])
    log_y = np.ascontiguousarray(data.log_y[idx])
    log_1my = np.ascontiguousarray(data.log_1my[idx])
    below = np.ascontiguousarray(data.below[idx])
    t, t1, t2 = data.t, w.t1, w.t2
    lo, hi = link.lo, link.hi
    log2pi = np.log(2.0 * np.pi)
    prior_norm = -1.5 * p * log2pi + p * np.log(p)
    out = np.empty(idx.shape[0])

    def log_post(theta_flat: np.ndarray) -> float:
        g1 = theta_flat[:p]
        g2 = theta_flat[p : 2 * p]
        al = theta_flat[2 * p :]
        a = lo + (hi - lo) * expit(Xw @ g1)
        b = lo + (hi - lo) * expit(Xw @ g2)
        jmp = np.maximum(Xw @ al, 0.0)
        _kernels.loglik_terms(log_y, log_1my, below, a, b, jmp, t, t1, t2, out)
        quad = 0.5 * (al @ al + p * (g1 @ g1 + g2 @ g2))
        return float(out.sum() + prior_norm - quad)

    return log_post
