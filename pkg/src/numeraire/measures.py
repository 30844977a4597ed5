"""Finite discrete and one-dimensional density (sub-)probability measures.

A :class:`DiscreteMeasure` puts masses on finitely many real points; its
density is taken with respect to counting measure.  A :class:`DensityMeasure`
is given by a log-density with respect to Lebesgue measure on an interval.
Both are immutable after construction.

Expectations, relative entropies and Renyi divergences follow the
extended-real conventions of :mod:`numeraire.extended`; in particular
densities are compared in log space so that tails where both densities
underflow still produce finite ratios.
"""

from typing import NamedTuple

import numpy as np
from scipy import special, stats

from .errors import DomainMismatch, InvalidMeasure
from .extended import INF, ext_mul, guarded_exp, log_ratio
from .quadrature import integrate

TOL_MASS_DISCRETE = 1e-12
TOL_MASS_DENSITY = 1e-8
DEFAULT_ACC = 1e-10
DEFAULT_BUDGET = 10**6


class Expectation(NamedTuple):
    value: object
    error: object


class Measure:
    """Common interface; use :class:`DiscreteMeasure` or :class:`DensityMeasure`."""

    is_discrete = False
    label = "measure"
    family = None

    def logdensity(self, z):
        raise NotImplementedError

    def density(self, z):
        return guarded_exp(self.logdensity(z))

    @property
    def total_mass(self):
        raise NotImplementedError

    def is_probability(self, tol=None):
        if tol is None:
            tol = TOL_MASS_DISCRETE if self.is_discrete else TOL_MASS_DENSITY
        return abs(self.total_mass - 1.0) <= tol

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


class DiscreteMeasure(Measure):
    """Masses on a strictly increasing finite support.

    Duplicate points are merged.  Zero masses are kept, so the support may
    list points that the measure does not charge.
    """

    is_discrete = True

    def __init__(self, support, mass, *, check_mass=True, tol=TOL_MASS_DISCRETE, label=None):
        support = np.atleast_1d(np.asarray(support, dtype=float))
        mass = np.atleast_1d(np.asarray(mass, dtype=float))
        if support.shape != mass.shape or support.ndim != 1:
            raise InvalidMeasure("support and mass must be 1-D arrays of equal length")
        if support.size == 0:
            raise InvalidMeasure("empty support")
        if not np.all(np.isfinite(support)):
            raise InvalidMeasure("support points must be finite")
        if not np.all(np.isfinite(mass)) or np.any(mass < 0):
            raise InvalidMeasure("masses must be finite and nonnegative")
        points, inverse = np.unique(support, return_inverse=True)
        merged = np.zeros(points.size)
        np.add.at(merged, inverse, mass)
        if check_mass and merged.sum() > 1.0 + tol:
            raise InvalidMeasure(f"total mass {merged.sum():.17g} exceeds 1")
        self.support = points
        self.mass = merged
        self.support.setflags(write=False)
        self.mass.setflags(write=False)
        self.label = label or "discrete"

    @property
    def total_mass(self):
        return float(self.mass.sum())

    @property
    def atoms(self):
        """Support points carrying positive mass."""
        return self.support[self.mass > 0]

    def mass_at(self, z):
        z = np.asarray(z, dtype=float)
        idx = np.clip(np.searchsorted(self.support, z), 0, self.support.size - 1)
        return np.where(self.support[idx] == z, self.mass[idx], 0.0)

    def logdensity(self, z):
        with np.errstate(divide="ignore"):
            return np.log(self.mass_at(z))

    def with_support(self, points):
        """Same measure listed on ``support | points`` (new points get zero mass)."""
        pts = np.union1d(self.support, np.asarray(points, dtype=float))
        return DiscreteMeasure(pts, self.mass_at(pts), check_mass=False, label=self.label)

    def restricted(self, keep):
        """Zero out the masses where the boolean mask ``keep`` is False."""
        keep = np.asarray(keep, dtype=bool)
        return DiscreteMeasure(self.support, np.where(keep, self.mass, 0.0),
                               check_mass=False, label=self.label)

    def scaled(self, factor):
        return DiscreteMeasure(self.support, self.mass * factor, check_mass=False, label=self.label)

    def quantile_span(self, eps=1e-9):
        atoms = self.atoms
        return float(atoms[0]), float(atoms[-1])


class DensityMeasure(Measure):
    """Lebesgue density on ``domain`` given through its log-density.

    ``center`` and ``scale`` set the substitution used for unbounded
    integration domains and should describe where the bulk of the mass is.
    ``family`` and ``params`` identify the named families; ``frozen`` is
    the matching scipy distribution, used for quantiles.
    """

    def __init__(self, logpdf, domain=(-INF, INF), *, family=None, params=None,
                 center=None, scale=1.0, frozen=None, check_mass=True,
                 tol=TOL_MASS_DENSITY, label=None, mass=None):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise InvalidMeasure(f"empty domain {domain!r}")
        self.domain = (lo, hi)
        self._logpdf = logpdf
        self.family = family
        self.params = dict(params or {})
        self.frozen = frozen
        if center is None:
            center = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else (
                lo if np.isfinite(lo) else hi if np.isfinite(hi) else 0.0)
        self.center = float(center)
        self.scale = float(scale)
        self.label = label or (family or "density")
        self._mass = None if mass is None else float(mass)
        if check_mass:
            mass = self.total_mass
            if mass > 1.0 + tol:
                raise InvalidMeasure(f"total mass {mass:.17g} exceeds 1")

    def logdensity(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.domain[0]) & (z <= self.domain[1])
        out = np.full(z.shape, -INF)
        if inside.any():
            with np.errstate(all="ignore"):
                vals = np.asarray(self._logpdf(z[inside]), dtype=float)
            if np.isnan(vals).any() or np.isposinf(vals).any():
                raise InvalidMeasure(f"{self.label}: density is not finite on its domain")
            out[inside] = vals
        return out

    @property
    def total_mass(self):
        if self._mass is None:
            res = integrate(lambda z: guarded_exp(self.logdensity(z)), self.domain,
                            center=self.center, scale=self.scale, abstol=1e-12, reltol=1e-12)
            self._mass = float(res.value)
        return self._mass

    def with_logpdf(self, logpdf, *, label=None, check_mass=False):
        """A density on the same domain and quadrature map."""
        return DensityMeasure(logpdf, self.domain, center=self.center, scale=self.scale,
                              check_mass=check_mass, label=label or self.label)

    def quantile_span(self, eps=1e-9):
        if self.frozen is not None:
            return float(self.frozen.ppf(eps)), float(self.frozen.isf(eps))
        lo, hi = self.domain
        if np.isfinite(lo) and np.isfinite(hi):
            return lo, hi
        return _numeric_span(self, eps)


def _numeric_span(m, eps):
    """Quantile span of a density without a scipy counterpart, by bisection on tail mass."""
    def tail(x, upper):
        dom = (x, m.domain[1]) if upper else (m.domain[0], x)
        if not dom[0] < dom[1]:
            return 0.0
        return integrate(lambda z: m.density(z), dom, center=m.center, scale=m.scale,
                         abstol=eps * 1e-3).value

    span = []
    for upper in (False, True):
        edge = m.domain[1] if upper else m.domain[0]
        if np.isfinite(edge):
            span.append(edge)
            continue
        step = m.scale
        x = m.center
        while tail(x, upper) > eps:
            x = x + step if upper else x - step
            step *= 2
        a, b = (m.center, x) if upper else (x, m.center)
        for _ in range(80):
            mid = 0.5 * (a + b)
            if (tail(mid, upper) > eps) == upper:
                a = mid
            else:
                b = mid
        span.append(0.5 * (a + b))
    return span[0], span[1]


# named families ------------------------------------------------------------

def normal(mean=0.0, sd=1.0):
    if not sd > 0:
        raise InvalidMeasure("normal sd must be positive")
    d = stats.norm(mean, sd)
    return DensityMeasure(d.logpdf, family="normal", params={"mean": mean, "sd": sd},
                          center=mean, scale=sd, frozen=d, check_mass=False, mass=1.0,
                          label=f"N({mean:g},{sd:g}^2)")


def cauchy(location=0.0, scale=1.0):
    if not scale > 0:
        raise InvalidMeasure("cauchy scale must be positive")
    d = stats.cauchy(location, scale)
    return DensityMeasure(d.logpdf, family="cauchy", params={"location": location, "scale": scale},
                          center=location, scale=scale, frozen=d, check_mass=False, mass=1.0,
                          label=f"Cauchy({location:g},{scale:g})")


def uniform(a=0.0, b=1.0):
    if not a < b:
        raise InvalidMeasure("uniform needs a < b")
    d = stats.uniform(a, b - a)
    return DensityMeasure(lambda z: np.full(np.shape(z), -np.log(b - a)), (a, b),
                          family="uniform", params={"a": a, "b": b}, frozen=d,
                          check_mass=False, mass=1.0, label=f"U[{a:g},{b:g}]")


def exponential(rate=1.0):
    if not rate > 0:
        raise InvalidMeasure("exponential rate must be positive")
    d = stats.expon(scale=1.0 / rate)
    return DensityMeasure(lambda z: np.log(rate) - rate * np.asarray(z), (0.0, INF),
                          family="exponential", params={"rate": rate}, center=0.0,
                          scale=1.0 / rate, frozen=d, check_mass=False, mass=1.0,
                          label=f"Exp({rate:g})")


def discrete(points, masses, **kwargs):
    return DiscreteMeasure(points, masses, **kwargs)


def mixture(components, weights, label=None):
    """Finite mixture ``sum_i w_i P_i`` of measures of the same kind."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(components),) or np.any(weights < 0):
        raise InvalidMeasure("mixture weights must be nonnegative, one per component")
    if all(c.is_discrete for c in components):
        pts = np.unique(np.concatenate([c.support for c in components]))
        mass = sum(w * c.mass_at(pts) for w, c in zip(weights, components))
        return DiscreteMeasure(pts, mass, label=label or "mixture")
    if any(c.is_discrete for c in components):
        raise InvalidMeasure("cannot mix discrete and density components")
    keep = [(w, c) for w, c in zip(weights, components) if w > 0]
    logw = np.log([w for w, _ in keep])

    def logpdf(z):
        stack = np.stack([lw + c.logdensity(z) for lw, (_, c) in zip(logw, keep)])
        return special.logsumexp(stack, axis=0)

    lo = min(c.domain[0] for _, c in keep)
    hi = max(c.domain[1] for _, c in keep)
    center = float(sum(w * c.center for w, c in keep) / sum(w for w, _ in keep))
    scale = max(c.scale for _, c in keep)
    return DensityMeasure(logpdf, (lo, hi), family="mixture", params={"parts": keep},
                          center=center, scale=scale, check_mass=False, label=label or "mixture")


def _normal_parts(m):
    """``[(weight, normal), ...]`` if ``m`` is a normal or a mixture of normals, else None."""
    if m.family == "normal":
        return [(1.0, m)]
    if m.family == "mixture" and all(c.family == "normal" for _, c in m.params["parts"]):
        return m.params["parts"]
    return None


def _normal_log_ratio(a, b, z):
    ma, sa = a.params["mean"], a.params["sd"]
    mb, sb = b.params["mean"], b.params["sd"]
    quad = 0.5 * (1.0 / sb ** 2 - 1.0 / sa ** 2)
    lin = ma / sa ** 2 - mb / sb ** 2
    const = 0.5 * (mb ** 2 / sb ** 2 - ma ** 2 / sa ** 2) + np.log(sb / sa)
    out = lin * z + const
    if quad != 0.0:
        out = out + quad * z * z
    return out


def log_density_ratio(a, b, z):
    """``log(a(z) / b(z))`` with the cancellation between normal log-densities done exactly.

    Far in the tails both log-densities are of order ``-z^2/2`` and their
    difference computed from the rounded values is meaningless.  For normals
    and mixtures of normals each component is compared with one reference
    normal through an exact quadratic in ``z``.
    """
    z = np.asarray(z, dtype=float)
    pa, pb = _normal_parts(a), _normal_parts(b)
    if pa is None or pb is None:
        return log_ratio(a.logdensity(z), b.logdensity(z))
    if len(pa) == 1 and len(pb) == 1:
        return _normal_log_ratio(a, b, z)
    ref = pb[0][1]

    def log_rel(parts):
        stack = np.stack([np.log(w) + _normal_log_ratio(c, ref, z) for w, c in parts])
        return special.logsumexp(stack, axis=0)

    return log_rel(pa) - log_rel(pb)


# expectations ----------------------------------------------------------------

def _call(f, z):
    try:
        vals = np.asarray(f(z), dtype=float)
    except (ValueError, ArithmeticError) as exc:
        raise DomainMismatch(f"function failed on the support: {exc}") from None
    if vals.ndim == 0:
        vals = np.full(np.shape(z), float(vals))
    return vals


def expect(m, f, acc=DEFAULT_ACC, *, log=False, reltol=0.0, budget=DEFAULT_BUDGET, probe=True):
    """``E_m[f]`` with an absolute error estimate.

    ``f`` maps an array of points to an array of values, or to a ``(k, n)``
    stack of ``k`` functions evaluated at once.  With ``log=True`` it
    returns log-values instead, which avoids overflow for large ratios.
    Discrete expectations are exact weighted sums (error 0).  Divergent
    density integrals come back as +inf.
    """
    if m.is_discrete:
        pos = m.mass > 0
        pts, w = m.support[pos], m.mass[pos]
        if pts.size == 0:
            vals = _call(f, m.support[:1])
            return Expectation(np.zeros(vals.shape[:-1]) if vals.ndim > 1 else 0.0,
                               np.zeros(vals.shape[:-1]) if vals.ndim > 1 else 0.0)
        vals = _call(f, pts)
        if log:
            vals = guarded_exp(vals)
        if np.isnan(vals).any():
            raise DomainMismatch("function is undefined on part of the support")
        terms = ext_mul(w, vals)
        with np.errstate(invalid="ignore"):
            total = terms.sum(axis=-1)
        if np.isnan(total).any():
            raise DomainMismatch("expectation of the form inf - inf")
        if np.ndim(total) == 0:
            return Expectation(float(total), 0.0)
        return Expectation(total, np.zeros_like(total))

    def integrand(z):
        logp = m.logdensity(z)
        vals = _call(f, z)
        zero = np.isneginf(logp)
        if log:
            with np.errstate(invalid="ignore"):
                out = guarded_exp(np.where(zero, -INF, vals + logp))
            return out
        with np.errstate(invalid="ignore"):
            out = vals * guarded_exp(logp)
        return np.where(zero | (vals == 0), 0.0, out)

    res = integrate(integrand, m.domain, center=m.center, scale=m.scale, abstol=acc,
                    reltol=reltol, max_evals=budget, probe=probe)
    return Expectation(res.value, res.error)


def mass_of(m, indicator, acc=DEFAULT_ACC):
    """``m({indicator})`` for a boolean-valued function of the observation."""
    return expect(m, lambda z: np.asarray(indicator(z), dtype=float), acc).value


# divergences -----------------------------------------------------------------

def _discrete_pair(Q, P):
    pts = Q.support[Q.mass > 0]
    return Q.mass[Q.mass > 0], P.mass_at(pts)


def relative_entropy(Q, P, acc=DEFAULT_ACC):
    """``H(Q | P) = E_Q[-log(dP^a/dQ)]`` in [0, inf], not renormalized for sub-probabilities."""
    if Q.is_discrete != P.is_discrete:
        # one side is atomic, the other diffuse: P^a = 0 on a set of full Q-mass
        return INF
    if Q.is_discrete:
        q, p = _discrete_pair(Q, P)
        if np.any(p == 0):
            return INF
        return float(np.sum(q * (np.log(q) - np.log(p))))

    def integrand(z):
        lq = Q.logdensity(z)
        lp = P.logdensity(z)
        with np.errstate(invalid="ignore"):
            out = guarded_exp(lq) * (lq - lp)
        return np.where(np.isneginf(lq), 0.0, out)

    res = integrate(integrand, Q.domain, center=Q.center, scale=Q.scale, abstol=acc)
    return float(res.value)


def renyi_divergence(Q, P, order, acc=DEFAULT_ACC):
    """``(1/(order - 1)) log E_Q[(dP^a/dQ)^(1 - order)]`` for ``order`` in (0, 1)."""
    if not 0.0 < order < 1.0:
        raise ValueError("order must lie in (0, 1)")
    if Q.is_discrete != P.is_discrete:
        return INF
    beta = 1.0 - order
    if Q.is_discrete:
        q, p = _discrete_pair(Q, P)
        with np.errstate(divide="ignore"):
            moment = float(np.sum(q * np.exp(beta * (np.log(p) - np.log(q)))))
    else:
        def integrand(z):
            lq = Q.logdensity(z)
            lp = P.logdensity(z)
            with np.errstate(invalid="ignore"):
                return guarded_exp(np.where(np.isneginf(lq), -INF, lq + beta * (lp - lq)))

        moment = float(integrate(integrand, Q.domain, center=Q.center, scale=Q.scale,
                                 abstol=acc).value)
    if moment == 0.0:
        return INF
    return float(np.log(moment) / (order - 1.0))


# generalized Lebesgue decomposition -----------------------------------------

class LebesgueDecomposition(NamedTuple):
    regular: DiscreteMeasure
    singular: DiscreteMeasure
    negligible_set: tuple
    lambda_star: float


def lebesgue_decompose(Q, null):
    """Split a discrete ``Q`` into the part dominated by ``null`` and the rest.

    ``null`` must provide ``max_point_mass(points)``, the largest mass any
    of its members puts on each point; nulls that cannot compute this raise
    :class:`~numeraire.errors.UnsupportedNull`.
    """
    if not Q.is_discrete:
        raise InvalidMeasure("the decomposition is implemented for discrete Q only")
    sup_mass = np.asarray(null.max_point_mass(Q.support), dtype=float)
    negligible = (sup_mass <= 0) & (Q.mass > 0)
    singular = Q.restricted(negligible)
    regular = Q.restricted(~negligible)
    lam = float(regular.mass.sum())
    if Q.is_probability():
        lam = 1.0 - float(singular.mass.sum())
    return LebesgueDecomposition(regular, singular, tuple(float(z) for z in Q.support[negligible]),
                                 lam)
