"""Log-scale beta function, regularized incomplete beta, and the jump-model
normalizing constants.

All four operations accept scalars or aligned arrays (numpy broadcasting
rules) and return numpy scalars/arrays, so the sampler can price thousands
of normalizing constants per call without Python-level loops.
"""

import numpy as np

from . import _kernels
from .errors import ConvergenceError  # noqa: F401  (re-export: raised from here)


def _as_batch(*arrays):
    """Broadcast inputs to a flat common shape; return (flat arrays, shape)."""
    bcast = np.broadcast_arrays(*[np.asarray(v, dtype=np.float64) for v in arrays])
    shape = bcast[0].shape
    return [np.ascontiguousarray(v).ravel() for v in bcast], shape


def _restore(out, shape):
    return out[0] if shape == () else out.reshape(shape)


def log_beta(a, b):
    """ln B(a, b) for positive shapes, elementwise."""
    (a_, b_), shape = _as_batch(a, b)
    if np.any(a_ <= 0.0) or np.any(b_ <= 0.0):
        raise ValueError("beta shapes must be strictly positive")
    out = np.empty_like(a_)
    _kernels.log_beta_batch(a_, b_, out)
    return _restore(out, shape)


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta I_x(a, b), elementwise."""
    (x_, a_, b_), shape = _as_batch(x, a, b)
    if np.any(a_ <= 0.0) or np.any(b_ <= 0.0):
        raise ValueError("beta shapes must be strictly positive")
    if np.any(x_ < 0.0) or np.any(x_ > 1.0):
        raise ValueError("incomplete beta argument x must lie in [0, 1]")
    out = np.empty_like(x_)
    _kernels.reg_inc_beta_batch(x_, a_, b_, out)
    return _restore(out, shape)


def log_norm_const(t, j, a, b):
    """ln c(t; j, a, b): log normalizer of the jump-penalized beta kernel.

    c(t; j, a, b) = int_0^1 y^(a-1) (1-y)^(b-1) exp(-j 1{y<t}) dy,
    evaluated through its closed form B(a,b) {1 - (1 - e^-j) I_t(a,b)}.
    """
    (t_, j_, a_, b_), shape = _as_batch(t, j, a, b)
    if np.any(a_ <= 0.0) or np.any(b_ <= 0.0):
        raise ValueError("beta shapes must be strictly positive")
    if np.any(t_ <= 0.0) or np.any(t_ >= 1.0):
        raise ValueError("threshold t must lie strictly inside (0, 1)")
    if np.any(j_ < 0.0):
        raise ValueError("jump size j must be nonnegative")
    out = np.empty_like(t_)
    _kernels.log_norm_const_batch(t_, j_, a_, b_, out)
    return _restore(out, shape)


def log_norm_const_trunc(t, j, a, b, t1, t2):
    """ln c(t; j, a, b, t1, t2): normalizer restricted to [t1, t2].

    Requires 0 <= t1 <= t <= t2 <= 1 with t1 < t2. Reduces to
    :func:`log_norm_const` at (t1, t2) = (0, 1).
    """
    (t_, j_, a_, b_, t1_, t2_), shape = _as_batch(t, j, a, b, t1, t2)
    if np.any(a_ <= 0.0) or np.any(b_ <= 0.0):
        raise ValueError("beta shapes must be strictly positive")
    if np.any(j_ < 0.0):
        raise ValueError("jump size j must be nonnegative")
    if np.any(t1_ < 0.0) or np.any(t2_ > 1.0) or np.any(t1_ >= t2_):
        raise ValueError("window must satisfy 0 <= t1 < t2 <= 1")
    if np.any(t_ < t1_) or np.any(t_ > t2_):
        raise ValueError("threshold t must lie inside the window [t1, t2]")
    out = np.empty_like(t_)
    _kernels.log_norm_const_trunc_batch(t_, j_, a_, b_, t1_, t2_, out)
    return _restore(out, shape)
