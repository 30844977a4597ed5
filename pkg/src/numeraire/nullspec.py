"""Null hypotheses, e-variables and membership checks.

Null variants:

* :class:`FiniteMixture` -- finitely many probability measures (and
  implicitly their convex hull),
* :class:`BoundedMean` -- laws on [0, 1] with mean at most ``mu``,
* :class:`SubGaussian` -- laws generated by ``exp(lam Z - lam^2/2)``, lam >= 0,
* :class:`Symmetric` -- laws symmetric about zero,
* :class:`ExpFamily` -- ``{p_theta : theta >= theta_star}`` for a one-parameter
  exponential family,
* :class:`CustomGenerated` -- a user supplied generating family.

Membership of continuous families is checked on finite grids over extreme
points or members; the grid is recorded in the certificate witness.
"""

import numpy as np
from scipy import optimize, special

from .certificate import Certificate, Check
from .errors import InvalidMeasure, PreconditionViolated, UnsupportedNull
from .extended import INF, ext_log, guarded_exp
from .measures import DensityMeasure, DiscreteMeasure, expect, log_density_ratio

DEFAULT_TOL = 1e-8
DEFAULT_GRID = 512


class EVariable:
    """A nonnegative extended-real function of the observation.

    Give either ``fn`` (values) or ``log_fn`` (log-values); the other is
    derived.  Log-values are preferred for ratios of densities.
    """

    def __init__(self, fn=None, *, log_fn=None, label="X"):
        if (fn is None) == (log_fn is None):
            raise ValueError("give exactly one of fn and log_fn")
        self._fn = fn
        self._log_fn = log_fn
        self.label = label

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self._fn is not None:
            return np.broadcast_to(np.asarray(self._fn(z), dtype=float), z.shape).copy()
        return guarded_exp(self.log(z))

    def log(self, z):
        z = np.asarray(z, dtype=float)
        if self._log_fn is not None:
            return np.broadcast_to(np.asarray(self._log_fn(z), dtype=float), z.shape).copy()
        return ext_log(self(z))

    def reciprocal_log(self, z):
        return -self.log(z)

    @classmethod
    def constant(cls, c, label=None):
        c = float(c)
        return cls(lambda z: np.full(np.shape(z), c), label=label or f"{c:g}")

    @classmethod
    def table(cls, points, values, default=0.0, label="table"):
        """Tabulated values at ``points``; ``default`` everywhere else."""
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        order = np.argsort(points)
        points, values = points[order], values[order]

        def fn(z):
            idx = np.clip(np.searchsorted(points, z), 0, points.size - 1)
            return np.where(points[idx] == z, values[idx], default)

        ev = cls(fn, label=label)
        ev.points, ev.values = points, values
        return ev

    def scaled(self, c, label=None):
        logc = np.log(c)
        return EVariable(log_fn=lambda z: self.log(z) + logc, label=label or f"{c:g}*{self.label}")

    @staticmethod
    def mix(evs, weights, label="mixture"):
        weights = np.asarray(weights, dtype=float)

        keep = [(w, e) for w, e in zip(weights, evs) if w > 0]

        def log_fn(z):
            logs = np.stack([e.log(z) for _, e in keep])
            with np.errstate(divide="ignore"):
                return special.logsumexp(logs, b=np.array([w for w, _ in keep])[:, None], axis=0)

        return EVariable(log_fn=log_fn, label=label)

    def __repr__(self):
        return f"<EVariable {self.label}>"


def _expect_X(member, X, acc):
    return float(expect(member, X.log, acc, log=True).value)


class NullHypothesis:
    """Base class.  Subclasses say how to bound ``sup_P E_P[X]``."""

    kind = "null"

    def max_point_mass(self, points):
        raise UnsupportedNull(f"{self.kind} null: per-point masses are not computable")

    def expectations(self, X, *, grid_size=DEFAULT_GRID, alternative=None, acc=1e-10):
        """Return ``(values, witnesses)``: ``E_P[X]`` over the checked members."""
        raise UnsupportedNull(f"{self.kind} null has no expectation oracle")


class FiniteMixture(NullHypothesis):
    kind = "finite"

    def __init__(self, components, labels=None):
        components = list(components)
        if not components:
            raise InvalidMeasure("a finite null needs at least one component")
        for c in components:
            if not c.is_probability():
                raise InvalidMeasure(f"null component {c.label} is not a probability measure")
        self.components = components
        self.labels = list(labels) if labels is not None else [
            f"P{i + 1}" for i in range(len(components))]

    @property
    def n(self):
        return len(self.components)

    @property
    def is_discrete(self):
        return all(c.is_discrete for c in self.components)

    def logdensities(self, z):
        """``(n, m)`` stack of component log-densities."""
        return np.stack([c.logdensity(z) for c in self.components])

    def log_ratios_to_mixture(self, weights, z):
        """``(n, m)`` array of ``log(p_i / p_w)`` with ``p_w = sum_k w_k p_k``.

        Computed from pairwise log-density differences so that the ratio
        stays accurate where every density underflows.
        """
        z = np.asarray(z, dtype=float)
        w = np.asarray(weights, dtype=float)
        keep = np.flatnonzero(w > 0)
        out = np.empty((self.n, z.size))
        for i, ci in enumerate(self.components):
            diffs = np.stack([log_density_ratio(self.components[k], ci, z) for k in keep])
            with np.errstate(divide="ignore"):
                out[i] = -special.logsumexp(diffs + np.log(w[keep])[:, None], axis=0)
        return out

    def max_point_mass(self, points):
        points = np.asarray(points, dtype=float)
        masses = [c.mass_at(points) if c.is_discrete else np.zeros(points.shape)
                  for c in self.components]
        return np.max(masses, axis=0)

    def expectations(self, X, *, grid_size=DEFAULT_GRID, alternative=None, acc=1e-10):
        vals = np.array([_expect_X(c, X, acc) for c in self.components])
        return vals, list(self.labels)


class BoundedMean(NullHypothesis):
    """Laws on [0, 1] whose mean is at most ``mu``."""

    kind = "bounded_mean"

    def __init__(self, mu):
        mu = float(mu)
        if not 0.0 < mu < 0.5:
            raise PreconditionViolated("bounded-mean null needs mu in (0, 1/2)")
        self.mu = mu

    def generator_params(self, n=DEFAULT_GRID):
        return np.linspace(0.0, 1.0 / self.mu, n)

    def generator_log(self, lam, z):
        """log of ``1 + lam (z - mu)`` for each ``lam`` (rows) at each ``z`` (columns)."""
        lam = np.atleast_1d(lam)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log1p(lam * (np.asarray(z)[None, :] - self.mu))

    def max_point_mass(self, points):
        z = np.asarray(points, dtype=float)
        out = np.where(z <= self.mu, 1.0, self.mu / np.where(z > 0, z, 1.0))
        return np.where((z >= 0) & (z <= 1), out, 0.0)

    def expectations(self, X, *, grid_size=DEFAULT_GRID, alternative=None, acc=1e-10):
        # extreme points: point masses below mu and two-point laws with mean exactly mu
        a = np.linspace(0.0, self.mu, grid_size)
        b = np.linspace(self.mu, 1.0, grid_size)
        xa, xb = X(a), X(b)
        point_vals = xa
        w = np.empty((a.size, b.size))
        span = b[None, :] - a[:, None]
        safe = span > 0
        w = np.where(safe, (b[None, :] - self.mu) / np.where(safe, span, 1.0), 1.0)
        with np.errstate(invalid="ignore"):
            two = w * xa[:, None] + (1 - w) * xb[None, :]
        two = np.where(w == 1.0, xa[:, None], np.where(w == 0.0, xb[None, :], two))
        i, j = np.unravel_index(np.argmax(two), two.shape)
        k = int(np.argmax(point_vals))
        vals = np.array([point_vals[k], two[i, j]])
        witnesses = [f"delta({a[k]:.6g})",
                     f"{w[i, j]:.6g}*delta({a[i]:.6g}) + {1 - w[i, j]:.6g}*delta({b[j]:.6g})"]
        return vals, witnesses


class SubGaussian(NullHypothesis):
    """Laws under which ``exp(lam Z / sigma - lam^2 / 2)`` is an e-variable for all lam >= 0."""

    kind = "sub_gaussian"

    def __init__(self, sigma=1.0):
        if not sigma > 0:
            raise PreconditionViolated("sigma must be positive")
        self.sigma = float(sigma)

    def generator_params(self, n=64):
        return np.concatenate([[0.0], np.geomspace(1e-4, 50.0, n)])

    def generator_log(self, lam, z):
        lam = np.atleast_1d(lam)[:, None]
        return lam * np.asarray(z)[None, :] / self.sigma - 0.5 * lam ** 2

    def expectations(self, X, *, grid_size=DEFAULT_GRID, alternative=None, acc=1e-10):
        # members of the null: point masses at z <= 0 and N(m, sigma^2) with m <= 0
        from .measures import normal

        span = 10.0 * self.sigma
        if alternative is not None:
            lo, hi = alternative.quantile_span(1e-12)
            span = max(span, abs(lo), abs(hi))
        z = np.linspace(-span, 0.0, grid_size)
        xz = X(z)
        k = int(np.argmax(xz))
        means = np.linspace(-span, 0.0, 33)
        normals = [_expect_X(normal(m, self.sigma), X, acc) for m in means]
        j = int(np.argmax(normals))
        vals = np.array([xz[k], normals[j]])
        return vals, [f"delta({z[k]:.6g})", f"N({means[j]:.6g},{self.sigma:g}^2)"]


class Symmetric(NullHypothesis):
    """All laws symmetric about zero."""

    kind = "symmetric"

    def max_point_mass(self, points):
        z = np.asarray(points, dtype=float)
        return np.where(z == 0, 1.0, 0.5)

    def expectations(self, X, *, grid_size=DEFAULT_GRID, alternative=None, acc=1e-10):
        span = 50.0
        if alternative is not None:
            lo, hi = alternative.quantile_span(1e-12)
            span = max(abs(lo), abs(hi))
        z = np.linspace(0.0, span, grid_size)
        with np.errstate(invalid="ignore"):
            vals = 0.5 * (X(z) + X(-z))
        k = int(np.argmax(vals))
        return np.array([vals[k]]), [f"(delta({z[k]:.6g}) + delta({-z[k]:.6g}))/2"]


class ExpFamily(NullHypothesis):
    """``p_theta = h exp(theta T - A(theta))`` for ``theta`` in ``[theta_star, theta_max]``.

    ``reference`` carries the base density ``h`` (its mass need not be one).
    When ``log_partition`` is omitted, ``A`` is computed by quadrature.
    """

    kind = "expfam"

    def __init__(self, statistic, theta_star, reference, log_partition=None,
                 theta_max=INF, label="expfam"):
        self.statistic = statistic
        self.theta_star = float(theta_star)
        self.theta_max = float(theta_max)
        if not self.theta_star < self.theta_max:
            raise PreconditionViolated("theta_star must be below theta_max")
        self.reference = reference
        self._A = log_partition
        self.closed_form = log_partition is not None
        self.label = label

    def A(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self._A is not None:
            return np.asarray(self._A(theta), dtype=float)
        flat = [float(np.log(expect(self.reference, lambda z, t=t: t * self.statistic(z),
                                    1e-13, log=True, reltol=1e-13).value))
                for t in theta.ravel()]
        return np.reshape(flat, theta.shape)

    def dA(self, theta, h=1e-5):
        return (self.A(theta + h) - self.A(theta - h)) / (2 * h)

    def d2A(self, theta, h=1e-4):
        return (self.A(theta + h) - 2 * self.A(theta) + self.A(theta - h)) / h ** 2

    def member_logdensity(self, theta):
        a = float(self.A(theta))
        return lambda z: self.reference.logdensity(z) + theta * self.statistic(z) - a

    def member(self, theta):
        logpdf = self.member_logdensity(theta)
        ref = self.reference
        if ref.is_discrete:
            return DiscreteMeasure(ref.support, np.exp(logpdf(ref.support)),
                                   check_mass=False, label=f"p_{theta:g}")
        mean = float(self.dA(theta))
        sd = float(np.sqrt(max(self.d2A(theta), 1e-12)))
        domain = ref.domain
        center = min(max(mean, domain[0]), domain[1])
        return DensityMeasure(logpdf, domain, center=center, scale=sd, check_mass=False,
                              mass=1.0, label=f"p_{theta:g}")

    def theta_grid(self, n=128):
        """``theta_star`` followed by geometric offsets up to the top of the parameter set."""
        top = self.theta_max if np.isfinite(self.theta_max) else self.theta_star + 20.0
        span = top - self.theta_star
        return np.concatenate([[self.theta_star], self.theta_star + np.geomspace(span * 1e-4, span, n - 1)])

    def max_point_mass(self, points):
        if not self.reference.is_discrete:
            raise UnsupportedNull("expfam null with a density reference has no atoms")
        thetas = self.theta_grid(32)
        masses = [np.exp(self.member_logdensity(t)(np.asarray(points, dtype=float)))
                  for t in thetas]
        return np.max(masses, axis=0)

    def expectations(self, X, *, grid_size=128, alternative=None, acc=1e-10):
        thetas = self.theta_grid(min(grid_size, 128))
        vals = np.array([_expect_X(self.member(t), X, acc) for t in thetas])
        return vals, [f"theta={t:.6g}" for t in thetas]


class CustomGenerated(NullHypothesis):
    """A null generated by ``exp(generator_log(param, z))`` over a parameter grid.

    Membership checks need ``expectation_oracle(X) -> (value, witness)``
    returning ``sup_P E_P[X]`` over the null.
    """

    kind = "custom"

    def __init__(self, generator_log, params, expectation_oracle=None, label="custom"):
        self._generator_log = generator_log
        self.params = np.atleast_1d(np.asarray(params, dtype=float))
        self.oracle = expectation_oracle
        self.label = label

    def generator_params(self, n=None):
        return self.params

    def generator_log(self, params, z):
        z = np.asarray(z, dtype=float)
        return np.stack([np.broadcast_to(self._generator_log(p, z), z.shape)
                         for p in np.atleast_1d(params)])

    def expectations(self, X, *, grid_size=DEFAULT_GRID, alternative=None, acc=1e-10):
        if self.oracle is None:
            raise UnsupportedNull("custom generated null without an expectation oracle")
        value, witness = self.oracle(X)
        return np.array([value]), [witness]


def is_evariable(X, null, tol=DEFAULT_TOL, *, grid_size=DEFAULT_GRID, alternative=None,
                 acc=1e-10):
    """Certify ``E_P[X] <= 1 + tol`` over the (gridded) null.

    The single check ``evariable`` has residual ``max E_P[X] - 1``; the
    witness names the worst member found.
    """
    vals, witnesses = null.expectations(X, grid_size=grid_size, alternative=alternative, acc=acc)
    k = int(np.argmax(vals))
    residual = float(vals[k]) - 1.0
    witness = {"worst": witnesses[k], "expectation": float(vals[k]), "members_checked": len(vals),
               "null": null.kind, "grid_size": grid_size}
    return Certificate((Check.from_residual("evariable", residual, tol, witness),))


class Membership:
    """Outcome of an effective-null membership test."""

    def __init__(self, member, weights, violation, separating_point):
        self.member = bool(member)
        self.weights = weights
        self.violation = float(violation)
        self.separating_point = separating_point

    def __bool__(self):
        return self.member

    def __repr__(self):
        if self.member:
            return f"Membership(True, weights={np.round(self.weights, 12).tolist()})"
        return f"Membership(False, separating_point={self.separating_point})"


def effective_null_membership(candidate, null, tol=DEFAULT_TOL):
    """Is ``candidate`` set-wise dominated by some mixture of the null components?

    Solves ``min_w max_z candidate(z) - sum_i w_i P_i(z)`` over the simplex
    as a linear program.  Only discrete inputs are supported.
    """
    if not isinstance(null, FiniteMixture) or not null.is_discrete or not candidate.is_discrete:
        raise UnsupportedNull("membership is decided for discrete finite nulls only")
    pts = np.unique(np.concatenate([candidate.support] + [c.support for c in null.components]))
    c = candidate.mass_at(pts)
    P = np.stack([comp.mass_at(pts) for comp in null.components])  # (n, m)
    n, m = P.shape
    # variables (w_1..w_n, s); minimize s s.t. c_z - P^T w <= s, sum w = 1, w >= 0
    cost = np.zeros(n + 1)
    cost[-1] = 1.0
    A_ub = np.hstack([-P.T, -np.ones((m, 1))])
    b_ub = -c
    A_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
    bounds = [(0, None)] * n + [(None, None)]
    res = optimize.linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds,
                           method="highs")
    if not res.success:
        raise RuntimeError(f"membership linear program failed: {res.message}")
    w = np.clip(res.x[:n], 0.0, None)
    w = w / w.sum()
    gaps = c - w @ P
    violation = float(max(gaps.max(), 0.0))
    member = violation <= tol
    return Membership(member, w, violation, None if member else float(pts[int(np.argmax(gaps))]))
