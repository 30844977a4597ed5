"""Power-utility optimal e-variables and reverse Renyi projections.

For ``gamma > 1`` and ``U(x) = x^(1-gamma) / (1-gamma)`` the U-optimal
e-variable against a finite null is

    X = (dP/dQ)^(-1/gamma) / E_Q[(dP/dQ)^(1-1/gamma)],

where ``P`` maximizes ``g(lam) = E_Q[(p_lam / q)^(1-1/gamma)]`` over
mixtures ``p_lam`` of the null components.  ``g`` is concave, so it is
maximized by projected gradient ascent; the Frank-Wolfe gap
``max_i dg/dlam_i - <lam, grad g>`` measures optimality.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .certificate import Certificate, Check, FinitenessFlags
from .errors import NotAbsolutelyContinuous, NotConverged, PreconditionViolated
from .extended import INF, guarded_exp, log_ratio
from .finite_solver import SolverOptions, solve_finite_null
from .measures import DensityMeasure, DiscreteMeasure, expect, log_density_ratio, renyi_divergence
from .nullspec import EVariable, FiniteMixture, is_evariable

GAMMA_MAX = 1e4
ARMIJO = 1e-4


def utility(x, gamma):
    """``U(x) = x^(1-gamma) / (1-gamma)`` with ``U(0) = -inf`` and ``U(inf) = 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return guarded_exp((1.0 - gamma) * np.log(x)) / (1.0 - gamma)


def conjugate_utility(y, gamma):
    """``V(y) = sup_x U(x) - x y = -y^(1-1/gamma) / (1-1/gamma)``."""
    b = 1.0 - 1.0 / gamma
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return -guarded_exp(b * np.log(y)) / b


def _check_gamma(gamma):
    gamma = float(gamma)
    if not 1.0 < gamma <= GAMMA_MAX:
        raise PreconditionViolated(f"gamma must lie in (1, {GAMMA_MAX:g}]")
    return gamma


@dataclass
class RenyiSolution:
    gamma: float
    optimal_evariable: EVariable
    projection: object
    utility_value: float
    divergence_value: float
    normalizer: float
    weights: object = None
    iterations: int = 0
    converged: bool = True
    fw_gap: float = 0.0
    alternative: object = None
    trace: object = None
    certificate: object = None
    notes: tuple = field(default_factory=tuple)


class _Ratios:
    """``log(p_i / q)`` for the null components on the alternative's support."""

    def __init__(self, Q, components):
        self.Q = Q
        self.components = list(components)
        if Q.is_discrete:
            pos = Q.mass > 0
            self.points = Q.support[pos]
            self.q = Q.mass[pos]
            with np.errstate(divide="ignore"):
                self.L = np.log(np.stack([c.mass_at(self.points) for c in self.components])) \
                    - np.log(self.q)[None, :]
            uncovered = np.all(np.isneginf(self.L), axis=0)
            if uncovered.any():
                raise NotAbsolutelyContinuous(
                    f"Q charges {self.points[uncovered].tolist()} where every null component "
                    "vanishes")
        else:
            if any(c.is_discrete for c in self.components):
                raise NotAbsolutelyContinuous("a density alternative is singular to atoms")
            lo, hi = Q.quantile_span(1e-9)
            z = np.linspace(lo, hi, 1001)
            z = z[np.isfinite(Q.logdensity(z))]
            if np.any(np.all(np.isneginf(self.log_ratios(z)), axis=0)):
                raise NotAbsolutelyContinuous("Q has density where every null component vanishes")

    def log_ratios(self, z):
        z = np.asarray(z, dtype=float)
        lq = self.Q.logdensity(z)
        out = np.stack([log_density_ratio(c, self.Q, z) for c in self.components])
        return np.where(np.isneginf(lq)[None, :], -INF, out)

    def log_mix(self, lam, L):
        with np.errstate(divide="ignore"):
            return special.logsumexp(L, b=np.asarray(lam)[:, None], axis=0)

    def value_and_grad(self, lam, beta, acc):
        """``g(lam)`` and its gradient."""
        lam = np.asarray(lam, dtype=float)

        def stack(L):
            lp = self.log_mix(lam, L)
            with np.errstate(invalid="ignore"):
                grad_terms = (beta - 1.0) * lp[None, :] + L
            grad_terms = np.where(np.isneginf(L), -INF, grad_terms)
            return np.vstack([beta * lp, grad_terms])

        if self.Q.is_discrete:
            vals = guarded_exp(stack(self.L)) @ self.q
        else:
            vals = np.asarray(expect(self.Q, lambda z: stack(self.log_ratios(z)), acc,
                                     log=True).value, dtype=float)
        return float(vals[0]), beta * vals[1:]


def project_simplex(v):
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _assemble(Q, ratios, lam, gamma, acc, **extra):
    """RenyiSolution for the mixture weights ``lam``."""
    beta = 1.0 - 1.0 / gamma
    lam = np.asarray(lam, dtype=float)
    g, _ = ratios.value_and_grad(lam, beta, acc)
    log_g = np.log(g)

    def log_x_from(L):
        lp = ratios.log_mix(lam, L)
        with np.errstate(invalid="ignore"):
            return np.where(np.isneginf(lp), INF, -lp / gamma - log_g)

    if Q.is_discrete:
        pts = ratios.points
        X = EVariable.table(pts, guarded_exp(log_x_from(ratios.L)), default=0.0,
                            label=f"X*_gamma (gamma={gamma:g})")
        proj_mass = np.exp(ratios.log_mix(lam, ratios.L)) * ratios.q
        projection = DiscreteMeasure(pts, proj_mass, check_mass=False, label="P*_gamma")
    else:
        def log_x(z):
            z = np.asarray(z, dtype=float)
            lq = Q.logdensity(z)
            return np.where(np.isneginf(lq), -INF, log_x_from(ratios.log_ratios(z)))

        def log_proj(z):
            z = np.asarray(z, dtype=float)
            lq = Q.logdensity(z)
            with np.errstate(invalid="ignore"):
                out = ratios.log_mix(lam, ratios.log_ratios(z)) + lq
            return np.where(np.isneginf(lq), -INF, out)

        X = EVariable(log_fn=log_x, label=f"X*_gamma (gamma={gamma:g})")
        projection = DensityMeasure(log_proj, Q.domain, center=Q.center, scale=Q.scale,
                                    check_mass=False, label="P*_gamma")
    normalizer = float(expect(Q, lambda z: (1.0 - gamma) * X.log(z), acc, log=True).value)
    util = normalizer / (1.0 - gamma)
    divergence = renyi_divergence(Q, projection, 1.0 / gamma, acc)
    return RenyiSolution(gamma, X, projection, util, divergence, normalizer, weights=lam,
                         alternative=Q, **extra)


def renyi_point_null(Q, P0, gamma, acc=1e-12):
    """``X*_gamma = r^(1/gamma) / E_P0[r^(1/gamma)]`` with ``r = dQ/dP0``."""
    gamma = _check_gamma(gamma)
    ratios = _Ratios(Q, [P0])
    return _assemble(Q, ratios, np.ones(1), gamma, acc)


def renyi_from_weights(Q, null, weights, gamma, acc=1e-12):
    """Candidate solution at given mixture weights (no optimization)."""
    gamma = _check_gamma(gamma)
    ratios = _Ratios(Q, null.components)
    w = np.asarray(weights, dtype=float)
    return _assemble(Q, ratios, w / w.sum(), gamma, acc)


def solve_renyi_finite(Q, null, gamma, opts=None):
    """Maximize ``g`` over the simplex by projected gradient with Armijo backtracking."""
    gamma = _check_gamma(gamma)
    opts = opts or SolverOptions()
    if not isinstance(null, FiniteMixture):
        raise PreconditionViolated("solve_renyi_finite needs a finite null")
    ratios = _Ratios(Q, null.components)
    beta = 1.0 - 1.0 / gamma
    acc = opts.acc
    lam = np.full(null.n, 1.0 / null.n)
    g, grad = ratios.value_and_grad(lam, beta, acc)
    trace = [g]
    step = 1.0
    gap = INF
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        gap = float(np.max(grad) - grad @ lam)
        if gap <= opts.tol_foc:
            converged = True
            break
        accepted = False
        while step > 1e-30:
            # the projection ignores constant shifts; centering keeps small steps resolvable
            cand = project_simplex(lam + step * (grad - grad @ lam))
            d = cand - lam
            if not np.any(d):
                break
            gc, gradc = ratios.value_and_grad(cand, beta, acc)
            if np.isfinite(gc) and np.all(np.isfinite(gradc)):
                # by concavity a nonnegative slope at the endpoint means g rose along the segment
                if gc >= g + ARMIJO * (grad @ d) or gradc @ d >= 0:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            # no ascent step exists at working precision
            converged = gap <= 1e3 * opts.tol_foc
            break
        lam, g, grad = cand, gc, gradc
        trace.append(gc)
        step *= 2.0
    if not converged:
        raise NotConverged(f"projected gradient stopped with Frank-Wolfe gap {gap:.3g}",
                           iterate=lam, residuals=np.array([gap]), iterations=it)
    return _assemble(Q, ratios, lam, gamma, acc, iterations=it, converged=True, fw_gap=gap,
                     trace=np.array(trace))


# certificate -----------------------------------------------------------------

def _eval_points(Q):
    if Q.is_discrete:
        return Q.support[Q.mass > 0]
    lo, hi = Q.quantile_span(1e-9)
    z = np.linspace(lo, hi, 1001)
    return z[np.isfinite(Q.logdensity(z))]


def _default_probes(Q, null, tol, seed, n_random, acc):
    """Candidate probes, each certified as an e-variable before use."""
    ratios = _Ratios(Q, null.components)
    candidates = [EVariable.constant(1.0, label="1")]

    def log_ui(z):
        L = ratios.log_ratios(z)
        lq = Q.logdensity(z)
        return np.where(np.isneginf(lq), -INF, -np.max(L, axis=0))

    candidates.append(EVariable(log_fn=log_ui, label="q/p_max"))
    for i, comp in enumerate(null.components):
        def log_r(z, i=i):
            return -ratios.log_ratios(z)[i]
        r = EVariable(log_fn=log_r, label=f"q/p_{i + 1}")
        worst = float(np.max(null.expectations(r, acc=acc)[0]))
        if np.isfinite(worst) and worst > 0:
            candidates.append(r.scaled(1.0 / max(worst, 1.0), label=f"q/p_{i + 1} normalized"))
    try:
        if Q.is_discrete:
            sol = solve_finite_null(Q, null)
            candidates.append(EVariable(log_fn=sol.numeraire.log, label="log-optimal numeraire"))
    except Exception:  # the log-optimal probe is optional
        pass
    accepted, rejected = [], []
    for p in candidates:
        (accepted if is_evariable(p, null, tol, alternative=Q, acc=acc) else rejected).append(p)
    rng = np.random.Generator(np.random.Philox(seed))
    base = list(accepted)
    for k in range(n_random if len(base) > 1 else 0):
        w = rng.dirichlet(np.ones(len(base)))
        accepted.append(EVariable.mix(base, w, label=f"random mixture {k}"))
    return accepted, rejected


def renyi_certificate(sol, Q, null, tol=1e-8, *, probes=None, seed=0, n_random=32, acc=1e-12):
    """Optimality checks for a power-utility solution.

    Probe-based: the first-order inequality ``E_Q[X*^(-gamma) X] <= E_Q[X*^(1-gamma)]`` and
    the utility ordering are checked for each accepted probe; the
    normalization identities are checked pointwise on the alternative's support.
    """
    gamma = sol.gamma
    X = sol.optimal_evariable
    rejected = []
    if probes is None:
        probes, rejected = _default_probes(Q, null, tol, seed, n_random, acc)
    checks = list(is_evariable(X, null, tol, alternative=Q, acc=acc).checks)
    norm = sol.normalizer
    for p in probes:
        lhs = float(expect(Q, lambda z, p=p: -gamma * X.log(z) + p.log(z), acc, log=True).value)
        checks.append(Check.from_residual(f"first_order:{p.label}", lhs - norm, tol,
                                          {"lhs": lhs, "rhs": norm}))
        u = float(expect(Q, lambda z, p=p: (1.0 - gamma) * p.log(z), acc, log=True).value)
        checks.append(Check.from_residual(f"utility:{p.label}", u / (1.0 - gamma) - sol.utility_value,
                                          tol, None))
    z = _eval_points(Q)
    log_density = log_ratio(sol.projection.logdensity(z), Q.logdensity(z))
    lx = X.log(z)
    fin = np.isfinite(lx) & np.isfinite(log_density)
    pred = np.exp(-gamma * lx[fin] - np.log(norm))
    actual = np.exp(log_density[fin])
    eq20 = float(np.max(np.abs(pred - actual) / np.maximum(1.0, actual), initial=0.0))
    checks.append(Check.from_residual("projection_density", eq20, 1e-10, None))
    dual = np.exp((1.0 - gamma) * sol.divergence_value) / (1.0 - gamma)
    checks.append(Check.from_residual("duality", abs(sol.utility_value - dual), 1e-8,
                                      {"utility": sol.utility_value, "dual": float(dual)}))
    beta = 1.0 - 1.0 / gamma
    moment = float(expect(Q, lambda z: beta * log_ratio(sol.projection.logdensity(z),
                                                          Q.logdensity(z)), acc, log=True).value)
    recovered = np.exp(-log_density[fin] / gamma) / moment
    xs = np.exp(lx[fin])
    eq22 = float(np.max(np.abs(recovered - xs) / np.maximum(1.0, xs), initial=0.0))
    checks.append(Check.from_residual("recovery", eq22, 1e-9, None))
    checks.append(Check.from_residual("normalizer", norm - 1.0, tol, {"normalizer": norm}))
    notes = (f"{len(probes)} probes accepted, {len(rejected)} rejected",)
    flags = FinitenessFlags(q_ac_wrt_null=True, numeraire_finite=True, q_ac_wrt_ripr=True,
                            entropy_finite=bool(np.isfinite(sol.divergence_value)))
    return Certificate(tuple(checks), flags, notes)
