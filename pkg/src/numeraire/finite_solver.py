"""Numeraire and reverse information projection for a finite null.

The relative entropy ``H(Q | sum_i lam_i P_i)`` is minimized over the
simplex with the multiplicative update ``lam_i <- lam_i E_Q[p_i / p_lam]``,
whose fixed points are exactly the points satisfying
``E_Q[p_i / p_lam] <= 1`` with equality on the active components.  Blocks
of multiplicative steps alternate with a Newton step on the active face,
accepted only when it lowers the entropy.

When a discrete ``Q`` charges points that no null component charges, the
problem is solved for ``Q`` conditioned on the remaining points and the
numeraire is set to +inf on the negligible points.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import special

from . import kernels
from .certificate import Certificate, Check
from .errors import InstanceTooLarge, NoCommonReference, NotConverged, UnsupportedNull
from .extended import INF, log_ratio
from .measures import DensityMeasure, DiscreteMeasure, expect, lebesgue_decompose, relative_entropy
from .nullspec import EVariable, FiniteMixture


@dataclass(frozen=True)
class SolverOptions:
    tol_foc: float = 1e-9
    max_iter: int = 100_000
    oracle_grid_step: float = 1e-3
    polish_every: int = 50
    acc: float = 1e-11

    def __post_init__(self):
        if not self.tol_foc > 0:
            raise ValueError("tol_foc must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class NumeraireSolution:
    """Numeraire ``X*``, RIPr ``P*`` and diagnostics.

    ``entropy_value`` is ``H(Q | P*)`` or, when ``lambda_star < 1``, the
    conditional value ``H(Q* | P*/lambda_star)``.
    """

    numeraire: EVariable
    ripr: object
    lambda_star: float
    mixture_weights: object = None
    entropy_value: float = np.nan
    iterations: int = 0
    residuals: object = None
    converged: bool = True
    negligible_set: tuple = ()
    alternative: object = None
    params: dict = field(default_factory=dict)
    certificate: object = None
    trace: object = None
    notes: tuple = ()

    def ratio(self, z):
        """``dP*/dQ = 1 / X*`` at ``z``."""
        with np.errstate(divide="ignore"):
            return np.exp(-self.numeraire.log(z))


def _check_options(opts):
    return opts if opts is not None else SolverOptions()


# ----------------------------------------------------------------------------
# objective oracles

class _DiscreteObjective:
    def __init__(self, P, q):
        self.P, self.q = P, q

    def ratios(self, lam):
        return self.P @ (self.q / (lam @ self.P))

    def hessian(self, lam):
        p = lam @ self.P
        return -(self.P * (self.q / p ** 2)) @ self.P.T

    def gain(self, lam_new, lam):
        """``F(lam_new) - F(lam)`` with ``F = E_Q[log p_lam]``."""
        p_new, p = lam_new @ self.P, lam @ self.P
        with np.errstate(divide="ignore"):
            return float(self.q @ (np.log(p_new) - np.log(p)))


class _DensityObjective:
    def __init__(self, Q, null, acc):
        self.Q, self.null, self.acc = Q, null, acc

    def ratios(self, lam):
        return np.atleast_1d(expect(self.Q, lambda z: self.null.log_ratios_to_mixture(lam, z),
                                    self.acc, log=True).value)

    def hessian(self, lam):
        n = len(lam)

        def f(z):
            lr = self.null.log_ratios_to_mixture(lam, z)
            return (lr[:, None, :] + lr[None, :, :]).reshape(n * n, -1)

        vals = np.atleast_1d(expect(self.Q, f, self.acc, log=True).value)
        return -vals.reshape(n, n)

    def gain(self, lam_new, lam):
        keep = np.flatnonzero(np.asarray(lam_new) > 0)

        def f(z):
            lr = self.null.log_ratios_to_mixture(lam, z)[keep]
            return special.logsumexp(lr + np.log(np.asarray(lam_new)[keep])[:, None], axis=0)

        return float(expect(self.Q, f, self.acc).value)


def _newton_step(obj, lam):
    """One safeguarded Newton step on the face spanned by the active components."""
    active = lam > 1e-10 * lam.max()
    if active.sum() < 2:
        return lam
    r = obj.ratios(lam)
    H = obj.hessian(lam)[np.ix_(active, active)]
    g = r[active]
    k = int(active.sum())
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = H
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.concatenate([-g, [0.0]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    d = np.zeros_like(lam)
    d[active] = sol[:k]
    if not np.all(np.isfinite(d)) or not np.any(d):
        return lam
    neg = d < 0
    t = 1.0
    if neg.any():
        t = min(1.0, 0.999 * float(np.min(-lam[neg] / d[neg])))
    for _ in range(30):
        cand = np.clip(lam + t * d, 0.0, None)
        cand /= cand.sum()
        if obj.gain(cand, lam) >= 0:
            return cand
        t *= 0.5
    return lam


def _minimize(obj, n, opts, discrete):
    """Alternate multiplicative blocks and Newton polish until the FOC holds."""
    lam = np.full(n, 1.0 / n)
    iters = 0
    trace = []
    while True:
        budget = min(opts.polish_every, opts.max_iter - iters)
        if discrete:
            lam, done, residual, tr = kernels.em_steps(obj.P, obj.q, lam, budget, opts.tol_foc)
            trace.extend(tr if not trace else tr[1:])
        else:
            done, residual = 0, np.inf
            while True:
                r = obj.ratios(lam)
                residual = float(r.max() - 1.0)
                if residual <= opts.tol_foc or done == budget:
                    break
                target = lam * r
                if not np.all(np.isfinite(target)):
                    # infinite ratio: move halfway toward the finite part of the target
                    target = np.where(np.isfinite(target), target, lam)
                    target = 0.5 * (lam + target / target.sum())
                lam = target / target.sum()
                done += 1
        iters += done
        if residual <= opts.tol_foc:
            return lam, iters, trace, True
        if iters >= opts.max_iter:
            raise NotConverged(
                f"first-order residual {residual:.3g} above {opts.tol_foc:g} after {iters} iterations",
                iterate=lam, residuals=obj.ratios(lam) - 1.0, iterations=iters)
        polished = _newton_step(obj, lam)
        if polished is not lam:
            if discrete:
                p = polished @ obj.P
                trace.append(float(obj.q @ (np.log(obj.q) - np.log(p))))
            lam = polished
            iters += 1


# ----------------------------------------------------------------------------
# assembly

def _discrete_parts(Q, null):
    if not null.is_discrete:
        raise NoCommonReference("discrete alternative against a null with density components")
    dec = lebesgue_decompose(Q, null)
    regular = (Q.mass > 0) & ~np.isin(Q.support, dec.negligible_set)
    return dec, regular


def _degenerate(Q, dec):
    atoms = Q.support[Q.mass > 0]
    X = EVariable.table(atoms, np.full(atoms.size, INF), default=0.0, label="X*")
    ripr = DiscreteMeasure(Q.support, np.zeros(Q.support.size), check_mass=False, label="P*")
    return NumeraireSolution(X, ripr, 0.0, None, INF, 0, None, True, dec.negligible_set, Q,
                             notes=("Q is singular to every null component",))


def solution_from_weights(Q, null, weights, *, iterations=0, converged=True, trace=None,
                          acc=1e-11):
    """Assemble ``X*``, ``P*`` and residuals from mixture weights (optimal or not)."""
    weights = np.asarray(weights, dtype=float)
    if Q.is_discrete:
        dec, regular = _discrete_parts(Q, null)
        if dec.lambda_star == 0.0:
            return _degenerate(Q, dec)
        pts = Q.support[regular]
        q = Q.mass[regular]
        qstar = q / q.sum()
        P = np.stack([c.mass_at(pts) for c in null.components])
        p_mix = weights @ P
        lam_star = dec.lambda_star
        p_star = lam_star * p_mix
        with np.errstate(divide="ignore"):
            x_reg = q / p_star
        neg_pts = np.asarray(dec.negligible_set, dtype=float)
        X = EVariable.table(np.concatenate([pts, neg_pts]),
                            np.concatenate([x_reg, np.full(neg_pts.size, INF)]),
                            default=0.0, label="X*")
        masses = np.zeros(Q.support.size)
        masses[regular] = p_star
        ripr = DiscreteMeasure(Q.support, masses, check_mass=False, label="P*")
        with np.errstate(divide="ignore"):
            entropy = float(np.sum(qstar * (np.log(qstar) - np.log(p_mix)))) if np.all(p_mix > 0) else INF
            residuals = P @ (qstar / p_mix) - 1.0
        return NumeraireSolution(X, ripr, lam_star, weights, entropy, iterations, residuals,
                                 converged, dec.negligible_set, Q, trace=trace)

    if null.is_discrete or any(c.is_discrete for c in null.components):
        raise NoCommonReference("density alternative against discrete null components")
    logw = np.log(np.where(weights > 0, weights, 1.0))
    active = weights > 0

    def log_pmix(z):
        logp = null.logdensities(z)[active]
        return special.logsumexp(logp + logw[active][:, None], axis=0)

    def log_pstar(z):
        lq = Q.logdensity(z)
        return np.where(np.isneginf(lq), -INF, log_pmix(z))

    def log_x(z):
        return log_ratio(Q.logdensity(z), log_pstar(z))

    comps = [c for c, a in zip(null.components, active) if a]
    center = float(np.dot(weights[active], [c.center for c in comps]))
    full_line = Q.domain[0] == -INF and Q.domain[1] == INF
    ripr = DensityMeasure(log_pstar, Q.domain, center=center, scale=max(c.scale for c in comps),
                          family="mixture" if full_line else None,
                          params={"parts": list(zip(weights[active], comps))} if full_line else None,
                          check_mass=False, label="P*")
    X = EVariable(log_fn=log_x, label="X*")
    residuals = _DensityObjective(Q, null, acc).ratios(weights) - 1.0
    entropy = relative_entropy(Q, ripr, acc=1e-10)
    return NumeraireSolution(X, ripr, 1.0, weights, entropy, iterations, residuals, converged,
                             (), Q, trace=trace)


def _check_density_support(Q, null):
    lo, hi = Q.quantile_span(1e-9)
    z = np.linspace(lo, hi, 2001)
    lq = Q.logdensity(z)
    lp = np.max(null.logdensities(z), axis=0)
    bad = np.isfinite(lq) & np.isneginf(lp)
    if bad.any():
        raise NoCommonReference(
            f"Q has positive density at z={z[bad][0]:.6g} where every null density vanishes; "
            "the numeraire is then infinite with positive Q-probability, which is only "
            "handled for discrete alternatives")


def solve_finite_null(Q, null, opts=None):
    """Numeraire and RIPr of ``Q`` against the convex hull of a finite null."""
    opts = _check_options(opts)
    if not isinstance(null, FiniteMixture):
        raise UnsupportedNull("solve_finite_null needs a FiniteMixture null")
    n = null.n
    if Q.is_discrete:
        dec, regular = _discrete_parts(Q, null)
        if dec.lambda_star == 0.0:
            return _degenerate(Q, dec)
        pts = Q.support[regular]
        q = Q.mass[regular]
        P = np.stack([c.mass_at(pts) for c in null.components])
        obj = _DiscreteObjective(P, q / q.sum())
        lam, iters, trace, ok = _minimize(obj, n, opts, True)
        return solution_from_weights(Q, null, lam, iterations=iters, converged=ok,
                                     trace=np.asarray(trace))
    if any(c.is_discrete for c in null.components):
        raise NoCommonReference("density alternative against discrete null components")
    _check_density_support(Q, null)
    obj = _DensityObjective(Q, null, opts.acc)
    lam, iters, _, ok = _minimize(obj, n, opts, False)
    return solution_from_weights(Q, null, lam, iterations=iters, converged=ok, acc=opts.acc)


# ----------------------------------------------------------------------------
# brute-force oracle

MAX_ORACLE_ATOMS = 4
MAX_ORACLE_GRID = 20_000_000


def brute_force_numeraire(Q, null, step=1e-3):
    """Exhaustive simplex-grid search for the entropy minimizer, then local zoom refinement.

    Intended as an independent test oracle on tiny discrete instances.
    """
    if not Q.is_discrete or not isinstance(null, FiniteMixture) or not null.is_discrete:
        raise UnsupportedNull("the oracle handles discrete instances only")
    atoms = Q.support[Q.mass > 0]
    if atoms.size > MAX_ORACLE_ATOMS:
        raise InstanceTooLarge(f"{atoms.size} atoms exceed the oracle limit of {MAX_ORACLE_ATOMS}")
    n = null.n
    K = int(round(1.0 / step))
    if comb(K + n - 1, n - 1) > MAX_ORACLE_GRID:
        raise InstanceTooLarge(f"simplex grid with {n} components at step {step:g} is too large")
    q_all = Q.mass[Q.mass > 0]
    P_all = np.stack([c.mass_at(atoms) for c in null.components])
    seen = P_all.max(axis=0) > 0
    lam_star = float(q_all[seen].sum())
    if lam_star == 0.0:
        X = EVariable.table(atoms, np.full(atoms.size, INF), default=0.0, label="X*")
        ripr = DiscreteMeasure(atoms, np.zeros(atoms.size), check_mass=False)
        return NumeraireSolution(X, ripr, 0.0, None, INF, 0, None, True,
                                 tuple(atoms.tolist()), Q)
    q = q_all[seen] / lam_star
    P = P_all[:, seen]
    lam, best = kernels.simplex_grid_search(P, q, K)
    lam = _zoom(P, q, lam, step)
    p_mix = lam @ P
    x = np.full(atoms.size, INF)
    x[seen] = q_all[seen] / (lam_star * p_mix)
    X = EVariable.table(atoms, x, default=0.0, label="X* (oracle)")
    masses = np.zeros(atoms.size)
    masses[seen] = lam_star * p_mix
    ripr = DiscreteMeasure(atoms, masses, check_mass=False, label="P* (oracle)")
    entropy = float(np.sum(q * (np.log(q) - np.log(p_mix))))
    return NumeraireSolution(X, ripr, lam_star, lam, entropy, K, None, True,
                             tuple(atoms[~seen].tolist()), Q)


def _zoom(P, q, lam, step, points=41, levels=12):
    n = lam.size
    if n == 1:
        return lam
    h = step
    offsets = np.linspace(-2.0, 2.0, points)

    def value(L):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.log(L @ P) @ q
        return np.where(np.all(L >= 0, axis=1), v, -np.inf)

    best = value(lam[None, :])[0]
    for _ in range(levels):
        mesh = np.stack(np.meshgrid(*([offsets * h] * (n - 1)), indexing="ij"), axis=-1)
        free = lam[:-1] + mesh.reshape(-1, n - 1)
        cand = np.hstack([free, 1.0 - free.sum(axis=1, keepdims=True)])
        vals = value(cand)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, lam = vals[i], cand[i]
        h /= 10.0
    return np.clip(lam, 0.0, None) / np.clip(lam, 0.0, None).sum()


# ----------------------------------------------------------------------------
# first-order certificate

T_GRID = (1e-3, 1e-2, 0.1, 0.25, 0.5, 0.75, 0.9)


def _conditional(Q, sol, null):
    """``Q* = Q(. | X* < inf)`` and ``z -> log(p_i / p**)`` with ``P** = P*/lambda*``."""
    lam = sol.lambda_star
    log_lam = np.log(lam)
    if Q.is_discrete:
        finite = np.isfinite(sol.numeraire(Q.support))
        Qs = Q.restricted(finite).scaled(1.0 / lam)
    else:
        Qs = Q
    if not Q.is_discrete and sol.mixture_weights is not None:
        def log_ratios(z):
            return null.log_ratios_to_mixture(sol.mixture_weights, z)
    else:
        def log_ratios(z):
            return log_ratio(null.logdensities(z), sol.ripr.logdensity(z)[None, :] - log_lam)
    return Qs, log_ratios


def first_order_certificate(sol, Q, null, tol=1e-8, t_grid=T_GRID, acc=1e-11):
    """Check ``E_Q*[p_i/p**] <= 1`` (equality on active components) and nonpositive description gains."""
    if sol.lambda_star == 0.0:
        return Certificate((Check("degenerate", 0.0, tol, True, "lambda* = 0: P* = 0"),))
    Qs, log_ratios = _conditional(Q, sol, null)
    checks = []
    r = np.atleast_1d(expect(Qs, log_ratios, acc, log=True).value)
    weights = sol.mixture_weights
    for i, label in enumerate(null.labels):
        checks.append(Check.from_residual(f"foc:{label}", r[i] - 1.0, tol, {"ratio": float(r[i])}))
        if weights is not None and weights[i] > 1e-8:
            checks.append(Check.from_residual(f"slack:{label}", abs(r[i] - 1.0), tol,
                                              {"weight": float(weights[i])}))
    ts = np.asarray(t_grid, dtype=float)
    log_t, log_1mt = np.log(ts), np.log1p(-ts)

    def gains(z):
        lr = log_ratios(z)  # (n, m)
        return np.logaddexp(log_1mt[None, :, None], log_t[None, :, None] + lr[:, None, :]).reshape(
            len(null.labels) * ts.size, -1)

    g = np.atleast_1d(expect(Qs, gains, acc).value).reshape(len(null.labels), ts.size)
    for i, label in enumerate(null.labels):
        j = int(np.argmax(g[i]))
        checks.append(Check.from_residual(f"gain:{label}", g[i, j], tol, {"t": float(ts[j])}))
    return Certificate(tuple(checks))
