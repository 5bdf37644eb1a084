"""Compiled scalar/batch numeric kernels.

Everything here is numba-jitted and kept free of Python objects: these
routines sit inside the MCMC hot loop, where a single likelihood
evaluation touches every retained observation. The public, validating
wrappers live in :mod:`densjump.special`; use those unless you are on
the hot path with pre-validated inputs.
"""

import math

from numba import njit

from .errors import ConvergenceError

# Continued-fraction controls: relative tolerance, iteration cap, and the
# underflow guard of the modified Lentz recurrence.
CF_TOL = 1e-12
CF_MAX_ITER = 300
_CF_TINY = 1e-300


@njit(cache=True)
def betacf(a, b, x):
    """Modified Lentz continued fraction for the incomplete beta ratio."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            return h
    raise ConvergenceError("incomplete beta continued fraction did not converge")


@njit(cache=True)
def log_beta_sc(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@njit(cache=True)
def reg_inc_beta_sc(x, a, b):
    """Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].

    The continued fraction is evaluated on whichever of I_x(a, b) and
    1 - I_{1-x}(b, a) converges fast; the split point (a+1)/(a+b+2) keeps
    the fraction in its rapidly contracting regime for the whole shape box.
    """
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = a * math.log(x) + b * math.log1p(-x) - log_beta_sc(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(ln_front) * betacf(a, b, x) / a
    return 1.0 - math.exp(ln_front) * betacf(b, a, 1.0 - x) / b


@njit(cache=True)
def log_norm_const_sc(t, j, a, b):
    """ln of the full-interval jump-model constant.

    The bracketed factor 1 - (1 - e^-j) I_t(a,b) is formed as
    1 + expm1(-j) I_t so no digits cancel as j -> 0. When that bracket
    itself becomes small (large j with I_t near 1) it is re-expressed as
    the cancellation-free sum of tails I_{1-t}(b,a) + e^-j I_t(a,b).
    """
    it = reg_inc_beta_sc(t, a, b)
    u = math.expm1(-j) * it
    if u > -0.5:
        return log_beta_sc(a, b) + math.log1p(u)
    s = reg_inc_beta_sc(1.0 - t, b, a) + math.exp(-j) * it
    if s <= 0.0:
        return -math.inf
    return log_beta_sc(a, b) + math.log(s)


@njit(cache=True)
def log_norm_const_trunc_sc(t, j, a, b, t1, t2):
    """ln of the window-restricted jump-model constant.

    Arranged as (I_t2 - I_t) + e^-j (I_t - I_t1): both differences are
    nonnegative for t1 <= t <= t2, so the sum never cancels. Each
    difference whose endpoints sit past the median is taken between the
    reflected tails I_{1-x}(b,a) instead, where the continued fraction
    keeps full relative accuracy.
    """
    if t1 <= 0.0 and t2 >= 1.0:
        return log_norm_const_sc(t, j, a, b)
    it = reg_inc_beta_sc(t, a, b)
    rt = -1.0  # reflected tail I_{1-t}(b,a), filled on demand
    i2 = 1.0 if t2 >= 1.0 else reg_inc_beta_sc(t2, a, b)
    if it + i2 <= 1.0:
        upper = i2 - it
    else:
        rt = reg_inc_beta_sc(1.0 - t, b, a)
        r2 = 0.0 if t2 >= 1.0 else reg_inc_beta_sc(1.0 - t2, b, a)
        upper = rt - r2
    i1 = 0.0 if t1 <= 0.0 else reg_inc_beta_sc(t1, a, b)
    if it + i1 <= 1.0:
        lower = it - i1
    else:
        if rt < 0.0:
            rt = reg_inc_beta_sc(1.0 - t, b, a)
        lower = reg_inc_beta_sc(1.0 - t1, b, a) - rt
    if upper < 0.0:
        upper = 0.0
    if lower < 0.0:
        lower = 0.0
    s = upper + math.exp(-j) * lower
    if s <= 0.0:
        return -math.inf
    return log_beta_sc(a, b) + math.log(s)


# ---------------------------------------------------------------------------
# Batch loops (inputs pre-broadcast to aligned 1-d arrays by the wrappers)
# ---------------------------------------------------------------------------


@njit(cache=True)
def log_beta_batch(a, b, out):
    for i in range(a.shape[0]):
        out[i] = log_beta_sc(a[i], b[i])


@njit(cache=True)
def reg_inc_beta_batch(x, a, b, out):
    for i in range(x.shape[0]):
        out[i] = reg_inc_beta_sc(x[i], a[i], b[i])


@njit(cache=True)
def log_norm_const_batch(t, j, a, b, out):
    for i in range(t.shape[0]):
        out[i] = log_norm_const_sc(t[i], j[i], a[i], b[i])


@njit(cache=True)
def log_norm_const_trunc_batch(t, j, a, b, t1, t2, out):
    for i in range(t.shape[0]):
        out[i] = log_norm_const_trunc_sc(t[i], j[i], a[i], b[i], t1[i], t2[i])


@njit(cache=True)
def loglik_terms(log_y, log_1my, below, a, b, jmp, t, t1, t2, out):
    """Per-observation log density on the window, written into ``out``.

    ``below`` is the precomputed indicator y_i < t; log_y/log_1my are
    cached once per dataset. Shapes and jumps vary per likelihood call.
    """
    for i in range(log_y.shape[0]):
        out[i] = (
            (a[i] - 1.0) * log_y[i]
            + (b[i] - 1.0) * log_1my[i]
            - below[i] * jmp[i]
            - log_norm_const_trunc_sc(t, jmp[i], a[i], b[i], t1, t2)
        )
