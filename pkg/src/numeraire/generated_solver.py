"""Numeraires for nulls generated by an e-variable family.

For a null generated by a family ``E_0``, a strictly positive e-variable
``X`` is the numeraire as soon as ``E_Q[1/X] = 1`` and ``E_Q[X_0/X] <= 1``
for every generator ``X_0``.  This module constructs candidates for the
bounded-mean and sub-Gaussian nulls and certifies them on parameter grids.
"""

import numpy as np
from scipy import optimize

from .certificate import Certificate, Check
from .errors import BracketFailure, PreconditionViolated
from .extended import INF, log_ratio
from .finite_solver import NumeraireSolution
from .measures import DiscreteMeasure, expect, normal
from .nullspec import BoundedMean, EVariable, SubGaussian

BRACKET_SHRINK = (1e-6, 1e-8, 1e-10, 1e-12)


def _ripr_from(Q, X, label="P*"):
    """The measure with density ``1/X`` with respect to ``Q``."""
    if Q.is_discrete:
        with np.errstate(divide="ignore"):
            masses = np.where(Q.mass > 0, Q.mass * np.exp(-X.log(Q.support)), 0.0)
        return DiscreteMeasure(Q.support, masses, check_mass=False, label=label)
    return Q.with_logpdf(lambda z: Q.logdensity(z) - X.log(z), label=label)


def _support_in_unit_interval(Q):
    if Q.is_discrete:
        atoms = Q.atoms
        return atoms.min() >= 0 and atoms.max() <= 1
    return Q.domain[0] >= 0 and Q.domain[1] <= 1


def bounded_mean_objective(Q, mu, acc=1e-14):
    """``(f, f')`` with ``f(lam) = E_Q[log(1 + lam (Z - mu))]``."""
    def f(lam):
        return float(expect(Q, lambda z: np.log1p(lam * (z - mu)), acc).value)

    def df(lam):
        return float(expect(Q, lambda z: (z - mu) / (1.0 + lam * (z - mu)), acc).value)

    return f, df


def _tight_bracket(df, guess, lower, upper):
    width = 1e-5 * max(1.0, abs(guess))
    while True:
        a, b = max(lower, guess - width), min(upper, guess + width)
        if df(a) >= 0 >= df(b):
            return a, b
        if a == lower and b == upper:
            raise BracketFailure("lost the sign change while polishing the root")
        width *= 10


def solve_bounded_mean(mu, Q, tol=1e-12):
    """Numeraire ``1 + lam* (Z - mu)`` against laws on [0, 1] with mean at most ``mu``.

    ``lam*`` is the root of ``E_Q[(Z - mu) / (1 + lam (Z - mu))]`` in
    ``(0, 1/mu)``, found by Brent's method.  When ``E_Q[Z] <= mu`` the
    alternative is not separated from the null and the numeraire is 1.
    """
    null = BoundedMean(mu)
    if not _support_in_unit_interval(Q):
        raise PreconditionViolated("the alternative must be supported in [0, 1]")
    f, df = bounded_mean_objective(Q, mu)
    _, df_sign = bounded_mean_objective(Q, mu, acc=1e-9)
    slope0 = df(0.0)
    notes = []
    if slope0 <= 0:
        lam, iters, resid = 0.0, 0, slope0
        notes.append("E_Q[Z] <= mu: numeraire clamped to 1")
    else:
        hi = None
        for shrink in BRACKET_SHRINK:
            cand = (1.0 - shrink) / mu
            if df_sign(cand) < 0:
                hi = cand
                break
        if hi is None:
            raise BracketFailure(
                f"E_Q[(Z-mu)/(1+lam(Z-mu))] stays positive up to lam = 1/mu; "
                f"the maximizer sits on the boundary (alternative mass near 0 is too small)")
        # locate coarsely, then polish at full accuracy away from the singular end
        rough, info0 = optimize.brentq(df_sign, 0.0, hi, xtol=1e-7, full_output=True)
        lo_b, hi_b = _tight_bracket(df, rough, 0.0, hi)
        lam, info = optimize.brentq(df, lo_b, hi_b, xtol=tol, rtol=4 * np.finfo(float).eps,
                                    full_output=True)
        iters, resid = info0.iterations + info.iterations, df(lam)
    X = EVariable(log_fn=lambda z, lam=lam: np.log1p(lam * (np.asarray(z) - mu)),
                  label="X* = 1 + lam*(Z - mu)")
    ripr = _ripr_from(Q, X)
    err = abs(resid)
    if err > 0 and err * 10 >= tol:
        notes.append(f"first-order residual {err:.2g} is within an order of magnitude of tol")
    return NumeraireSolution(X, ripr, 1.0, None, f(lam), iters, np.array([resid]), True, (), Q,
                             params={"lambda": lam, "mu": mu, "null": null}, notes=tuple(notes))


def solve_subgaussian(q_mean, sigma=1.0):
    """Numeraire ``exp(m Z/sigma - m^2/2)`` (``m = q_mean/sigma``) for ``Q = N(q_mean, sigma^2)``."""
    null = SubGaussian(sigma)
    Q = normal(q_mean, sigma)
    m = max(float(q_mean) / sigma, 0.0)
    X = EVariable(log_fn=lambda z: m * np.asarray(z) / sigma - 0.5 * m * m,
                  label=f"X* = exp({m:g} Z - {m * m / 2:g})")
    ripr = normal(0.0, sigma) if m > 0 else Q
    notes = () if q_mean > 0 else ("alternative lies in the null: numeraire is 1",)
    return NumeraireSolution(X, ripr, 1.0, None, 0.5 * m * m, 0, None, True, (), Q,
                             params={"lambda": m, "sigma": sigma, "null": null}, notes=notes)


def _generator_grid(null, grid):
    if grid is not None:
        return np.atleast_1d(np.asarray(grid, dtype=float))
    return null.generator_params()


def certify_generated(X, null, Q, grid=None, tol=1e-8, acc=1e-11):
    """Sufficient conditions for ``X`` to be the numeraire of a generated null.

    Checks positivity of ``X`` on the alternative's bulk, ``|E_Q[1/X] - 1| <= tol``
    and ``E_Q[X_0/X] <= 1 + tol`` for each generator parameter in ``grid``.
    """
    params = _generator_grid(null, grid)
    lo, hi = Q.quantile_span(1e-9)
    zs = Q.atoms if Q.is_discrete else np.linspace(lo, hi, 1001)
    if not Q.is_discrete:
        zs = zs[np.isfinite(Q.logdensity(zs))]
    logx = X.log(zs)
    positive = bool(np.all(np.isfinite(logx)))
    checks = [Check("positive", 0.0 if positive else INF, 0.0, positive,
                    {"points_checked": int(zs.size)})]
    recip = float(expect(Q, lambda z: -X.log(z), acc, log=True).value)
    checks.append(Check.from_residual("reciprocal_mean", abs(recip - 1.0), tol, {"value": recip}))

    def ratios(z):
        return log_ratio(null.generator_log(params, z), X.log(z)[None, :])

    vals = np.atleast_1d(expect(Q, ratios, acc, log=True).value)
    k = int(np.argmax(vals))
    checks.append(Check.from_residual("generators", vals[k] - 1.0, tol,
                                      {"worst_param": float(params[k]), "params": params,
                                       "values": vals}))
    return Certificate(tuple(checks), notes=(f"{params.size} generator parameters",))
