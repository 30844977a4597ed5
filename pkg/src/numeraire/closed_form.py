"""Numeraires with explicit formulas: symmetric nulls and exponential families."""

import numpy as np

from .certificate import Certificate, Check, FinitenessFlags
from .errors import InvalidMeasure, PreconditionViolated
from .extended import INF, log_ratio
from .finite_solver import NumeraireSolution
from .measures import DensityMeasure, discrete, expect, log_density_ratio, normal
from .nullspec import EVariable, ExpFamily, FiniteMixture, Symmetric, is_evariable

LOG2 = np.log(2.0)


def reflect(Q):
    """The law of ``-Z`` under ``Q`` (as a density)."""
    if Q.family == "normal":
        return normal(-Q.params["mean"], Q.params["sd"])
    lo, hi = Q.domain
    return DensityMeasure(lambda z: Q.logdensity(-np.asarray(z)), (-hi, -lo),
                          center=-Q.center, scale=Q.scale, check_mass=False, mass=1.0,
                          label=f"reflected {Q.label}")


def _symmetric_log_numeraire(Q):
    R = reflect(Q)

    def log_x(z):
        z = np.asarray(z, dtype=float)
        lq = Q.logdensity(z)
        # d = log q(-z)/q(z); X* = 2 / (1 + e^d)
        d = log_density_ratio(R, Q, z)
        out = LOG2 - np.logaddexp(0.0, d)
        return np.where(np.isneginf(lq), -INF, out)

    return log_x


def symmetric_numeraire(Q, *, tol=1e-9, grid_size=2001):
    """``X* = 2q(z)/(q(z) + q(-z))`` and ``p* = (q(z) + q(-z))/2`` on ``{q > 0}``.

    If ``Q`` has mass only on one side of zero the RIPr is a proper
    sub-probability measure.
    """
    if Q.is_discrete:
        raise InvalidMeasure("symmetric_numeraire needs a density; symmetrize the support and "
                             "use solve_finite_null for discrete alternatives")
    log_x = _symmetric_log_numeraire(Q)
    X = EVariable(log_fn=log_x, label="X* = 2q(z)/(q(z)+q(-z))")
    R = reflect(Q)

    def log_pstar(z):
        lq = Q.logdensity(z)
        out = np.logaddexp(lq, R.logdensity(z)) - LOG2
        return np.where(np.isneginf(lq), -INF, out)

    ripr = DensityMeasure(log_pstar, Q.domain, center=Q.center, scale=Q.scale,
                          check_mass=False, label="P* = (q(z)+q(-z))/2")
    entropy = float(expect(Q, lambda z: log_x(z), 1e-11).value)
    sol = NumeraireSolution(X, ripr, 1.0, None, entropy, 0, None, True, (), Q,
                            params={"null": Symmetric()})
    sol.certificate = certify_symmetric(sol, Q, tol=tol, grid_size=grid_size)
    return sol


def certify_symmetric(sol, Q, tol=1e-9, grid_size=2001, odd_tol=1e-12):
    X = sol.numeraire
    lo, hi = Q.quantile_span(1e-9)
    span = max(abs(lo), abs(hi))
    z = np.linspace(-span, span, grid_size)
    both = np.isfinite(Q.logdensity(z)) & np.isfinite(Q.logdensity(-z))
    zz = z[both]
    odd = np.abs((X(zz) - 1.0) + (X(-zz) - 1.0))
    odd_res = float(odd.max()) if odd.size else 0.0
    checks = [Check.from_residual("odd", odd_res, odd_tol, {"points": int(zz.size)})]
    ev = is_evariable(X, Symmetric(), tol, alternative=Q)
    recip = float(sol.ripr.total_mass)
    checks.append(Check.from_residual("reciprocal_mean", recip - 1.0, tol, {"value": recip}))
    one_sided = not both.any()
    flags = FinitenessFlags(q_ac_wrt_null=True, numeraire_finite=True, q_ac_wrt_ripr=True,
                            entropy_finite=bool(np.isfinite(sol.entropy_value)))
    notes = ("alternative lives on one side of zero",) if one_sided else ()
    return Certificate(tuple(checks), flags, notes).merged(ev)


def symmetric_discrete_null(Q):
    """Extreme points of the symmetric null on the symmetrized support of a discrete ``Q``.

    These are ``delta_0`` and ``(delta_a + delta_-a)/2`` for each ``a > 0``
    with ``a`` or ``-a`` an atom; the numeraire then comes from the finite solver.
    """
    if not Q.is_discrete:
        raise InvalidMeasure("symmetric_discrete_null needs a discrete alternative")
    radii = np.unique(np.abs(Q.support))
    comps, labels = [], []
    for a in radii:
        if a == 0:
            comps.append(discrete([0.0], [1.0]))
            labels.append("delta(0)")
        else:
            comps.append(discrete([-a, a], [0.5, 0.5]))
            labels.append(f"sym({a:g})")
    return FiniteMixture(comps, labels)


# exponential families ----------------------------------------------------------

def gaussian_location(theta_star=0.0, sigma=1.0, theta_max=INF):
    """Members ``N(theta sigma, sigma^2)``: ``T(z) = z / sigma`` and ``A(theta) = theta^2 / 2``."""
    ref = normal(0.0, sigma)
    return ExpFamily(lambda z: np.asarray(z, dtype=float) / sigma, theta_star, ref,
                     log_partition=lambda t: 0.5 * np.asarray(t) ** 2, theta_max=theta_max,
                     label="gaussian location")


def bernoulli(theta_star=0.0, theta_max=INF):
    """Natural parametrization on {0, 1}: ``A(theta) = log(1 + e^theta)``."""
    ref = discrete([0.0, 1.0], [1.0, 1.0], check_mass=False)
    return ExpFamily(lambda z: np.asarray(z, dtype=float), theta_star, ref,
                     log_partition=lambda t: np.logaddexp(0.0, t), theta_max=theta_max,
                     label="bernoulli")


def _convexity_spot_check(fam, theta1):
    top = fam.theta_max if np.isfinite(fam.theta_max) else fam.theta_star + 20.0
    pts = np.linspace(theta1, top, 9)
    h = 1e-3 * max(1.0, top - theta1)
    with np.errstate(all="ignore"):
        a = fam.A(pts)
        second = fam.A(pts + h) - 2 * a + fam.A(pts - h)
    if not np.all(np.isfinite(a)):
        raise PreconditionViolated("log-partition is not finite on [theta1, theta_max]")
    if np.any(second < -1e-8 * np.maximum(1.0, np.abs(a))):
        raise PreconditionViolated("log-partition fails the convexity spot check")


def expfam_numeraire(fam, theta1, *, tol=1e-9, grid_size=128):
    """``X* = exp((theta1 - theta*) T - A(theta1) + A(theta*))`` for ``Q = p_theta1``.

    The null is ``{p_theta : theta >= theta*}`` and the RIPr is ``p_theta*``.
    """
    theta1 = float(theta1)
    ts = fam.theta_star
    if not theta1 < ts:
        raise PreconditionViolated(
            "theta1 must lie strictly below theta_star (at theta1 = theta_star the numeraire is 1)")
    _convexity_spot_check(fam, theta1)
    shift = float(fam.A(ts) - fam.A(theta1))
    dt = theta1 - ts
    X = EVariable(log_fn=lambda z: dt * fam.statistic(z) + shift,
                  label=f"X* = exp({dt:g} T + {shift:.6g})")
    Q = fam.member(theta1)
    ripr = fam.member(ts)
    # H(p_theta1 | p_theta*) = (theta1 - theta*) A'(theta1) - A(theta1) + A(theta*)
    entropy = float(expect(Q, lambda z: dt * fam.statistic(z) + shift, 1e-12).value)
    sol = NumeraireSolution(X, ripr, 1.0, None, entropy, 0, None, True, (), Q,
                            params={"theta1": theta1, "theta_star": ts, "null": fam})
    sol.certificate = certify_expfam(sol, fam, tol=tol, grid_size=grid_size)
    return sol


def foc_exponents(fam, theta1, thetas):
    """``A(theta1 + theta - theta*) - A(theta1) - A(theta) + A(theta*)`` for each ``theta``."""
    thetas = np.asarray(thetas, dtype=float)
    ts = fam.theta_star
    return fam.A(theta1 + thetas - ts) - fam.A(theta1) - fam.A(thetas) + fam.A(ts)


def certify_expfam(sol, fam, tol=1e-9, grid_size=128):
    """``E_Q[p_theta / p_theta*] <= 1 + tol`` over the theta grid, and ``E_P*[X*] = 1``."""
    theta1 = sol.params["theta1"]
    thetas = fam.theta_grid(grid_size)
    Q = sol.alternative
    if fam.closed_form:
        exps = foc_exponents(fam, theta1, thetas)
        vals = np.exp(exps)
        method = "moment identity"
    else:
        ls = fam.member_logdensity(fam.theta_star)
        vals = np.array([
            expect(Q, lambda z, t=t: log_ratio(fam.member_logdensity(t)(z), ls(z)), 1e-11,
                   log=True).value for t in thetas])
        exps = np.log(vals)
        method = "quadrature"
    k = int(np.argmax(vals))
    checks = [
        Check.from_residual("foc_grid", vals[k] - 1.0, tol,
                            {"worst_theta": float(thetas[k]), "grid_size": int(thetas.size),
                             "method": method}),
        Check.from_residual("foc_exponent", float(np.max(exps)), tol, None),
    ]
    mean_under_ripr = float(expect(sol.ripr, sol.numeraire.log, 1e-11, log=True).value)
    checks.append(Check.from_residual("ripr_mean", abs(mean_under_ripr - 1.0), tol,
                                      {"value": mean_under_ripr}))
    flags = FinitenessFlags(q_ac_wrt_null=True, numeraire_finite=True, q_ac_wrt_ripr=True,
                            entropy_finite=True)
    return Certificate(tuple(checks), flags)
