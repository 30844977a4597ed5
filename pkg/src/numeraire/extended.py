"""Arithmetic on [0, inf] and [-inf, inf] valued arrays.

Conventions: ``0 * x = 0`` for every x, ``x / inf = 0`` and ``inf / x = inf``
for finite ``x >= 0``, ``inf / inf = 1``, ``log 0 = -inf``, ``log inf = inf``.
``0 / 0`` is taken to be 0 (it only arises on null sets of the integrating
measure).  Ratios are therefore total: they never produce NaN on
nonnegative inputs.
"""

import numpy as np

INF = float("inf")

# exp() of anything above this is reported as +inf
LOG_OVERFLOW = 700.0


def ext_mul(a, b):
    """Product with ``0 * inf = 0``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a * b
    zero = (a == 0) | (b == 0)
    return np.where(zero, 0.0, out)


def ext_div(a, b):
    """Ratio of nonnegative extended reals under the package conventions."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a / b
    a_inf = np.isinf(a)
    b_inf = np.isinf(b)
    out = np.where(a_inf & b_inf, 1.0, out)
    out = np.where((a == 0) & (b == 0), 0.0, out)
    out = np.where(~a_inf & b_inf, 0.0, out)
    out = np.where(a_inf & ~b_inf, INF, out)
    return out


def ext_log(x):
    """Natural log with ``log 0 = -inf`` and ``log inf = inf`` (no warnings)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(x)


def log_ratio(log_a, log_b):
    """``log(a / b)`` computed from logs, following :func:`ext_div`."""
    log_a = np.asarray(log_a, dtype=float)
    log_b = np.asarray(log_b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = log_a - log_b
    both_inf = np.isposinf(log_a) & np.isposinf(log_b)
    both_zero = np.isneginf(log_a) & np.isneginf(log_b)
    out = np.where(both_inf, 0.0, out)
    return np.where(both_zero, -INF, out)


def guarded_exp(log_x):
    """Exponentiate, mapping anything above ``LOG_OVERFLOW`` to +inf."""
    log_x = np.asarray(log_x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.exp(np.minimum(log_x, LOG_OVERFLOW))
    return np.where(log_x > LOG_OVERFLOW, INF, out)
