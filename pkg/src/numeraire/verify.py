"""Certificates and diagnostics for solved instances.

Everything here is probe- or grid-based: "for every e-variable" cannot be
checked, so each certificate records the probes and grids it used.
"""

from dataclasses import dataclass

import numpy as np

from .certificate import Certificate, Check, FinitenessFlags
from .errors import AccuracyNotMet, UnsupportedNull
from .extended import INF, log_ratio
from .finite_solver import NumeraireSolution
from .measures import (DiscreteMeasure, expect, lebesgue_decompose, log_density_ratio,
                       relative_entropy)
from .nullspec import (BoundedMean, EVariable, FiniteMixture, SubGaussian,
                       effective_null_membership, is_evariable)

DEFAULT_TOL = 1e-8
N_RANDOM_PROBES = 32
GRID_POINTS = 1001
QUANTILE_EPS = 1e-9


def evaluation_grid(Q, n=GRID_POINTS, eps=QUANTILE_EPS):
    """Atoms of a discrete ``Q``; otherwise ``n`` points over its ``eps`` quantile span."""
    if Q.is_discrete:
        return Q.support.copy()
    lo, hi = Q.quantile_span(eps)
    return np.linspace(lo, hi, n)


def _solution_parts(X):
    if isinstance(X, NumeraireSolution):
        return X.numeraire, X
    return X, None


# numeraire certificate -------------------------------------------------------------

def default_probes(X, Q, null, *, n_generators=16):
    """The constant 1 and either the component ratios ``p_i / p*`` or a slice of the generators."""
    probes = [EVariable.constant(1.0, label="1")]
    if isinstance(null, FiniteMixture):
        for i, comp in enumerate(null.components):
            def log_probe(z, comp=comp):
                # p_i / p* with p* = q / X, and p* = 0 off the support of Q
                z = np.asarray(z, dtype=float)
                off = np.isneginf(Q.logdensity(z))
                with np.errstate(invalid="ignore"):
                    on = log_density_ratio(comp, Q, z) + X.log(z)
                lp = comp.logdensity(z)
                return np.where(off, np.where(np.isneginf(lp), -INF, INF), on)
            probes.append(EVariable(log_fn=log_probe, label=f"p_{i + 1}/p*"))
    elif isinstance(null, (BoundedMean, SubGaussian)):
        params = null.generator_params()
        pick = params[np.unique(np.linspace(0, params.size - 1, n_generators).astype(int))]
        for lam in pick:
            probes.append(EVariable(log_fn=lambda z, lam=lam: null.generator_log(lam, z)[0],
                                    label=f"generator({lam:.4g})"))
    return probes


def random_mixtures(probes, n, seed):
    """``n`` Dirichlet mixtures of ``probes`` from a counter-based stream."""
    if len(probes) < 2:
        return []
    rng = np.random.Generator(np.random.Philox(seed))
    return [EVariable.mix(probes, rng.dirichlet(np.ones(len(probes))), label=f"random mixture {k}")
            for k in range(n)]


def _log_ratio_mean(Q, log_num, log_den, acc):
    """``E_Q[num / den]`` with the extended-real ratio conventions."""
    return float(expect(Q, lambda z: log_ratio(log_num(z), log_den(z)), acc, log=True).value)


def numeraire_certificate(X, Q, null, probes=None, tol=DEFAULT_TOL, *, seed=0,
                          n_random=N_RANDOM_PROBES, acc=1e-11):
    """Check ``E_Q[Y / X] <= 1 + tol`` for each probe ``Y`` that is itself an e-variable.

    Probes failing the e-variable check are listed in the notes and do not
    count against ``X``.  For a discrete finite null the measure ``(1/X) dQ``
    is also tested for membership in the effective null.
    """
    X, sol = _solution_parts(X)
    base = default_probes(X, Q, null) if probes is None else list(probes)
    accepted, rejected = [], []
    for p in base:
        try:
            ok = bool(is_evariable(p, null, tol, alternative=Q, acc=acc))
        except (AccuracyNotMet, UnsupportedNull):
            ok = False
        (accepted if ok else rejected).append(p)
    if probes is None:
        # convex combinations of certified probes are e-variables as well
        accepted += random_mixtures(accepted, n_random, seed)
    checks = []
    for p in accepted:
        val = _log_ratio_mean(Q, p.log, X.log, acc)
        checks.append(Check.from_residual(f"probe:{p.label}", val - 1.0, tol, {"value": val}))
    recip = float(expect(Q, lambda z: -X.log(z), acc, log=True).value)
    checks.append(Check.from_residual("reciprocal_mean", recip - 1.0, tol, {"value": recip}))
    if isinstance(null, FiniteMixture):
        for i, comp in enumerate(null.components):
            val = float(expect(Q, lambda z, comp=comp: log_density_ratio(comp, Q, z) + X.log(z),
                               acc, log=True).value) if not Q.is_discrete else \
                _discrete_component_mean(Q, comp, X)
            checks.append(Check.from_residual(f"component:{null.labels[i]}", val - 1.0, tol,
                                              {"value": val}))
    if isinstance(null, FiniteMixture) and null.is_discrete and Q.is_discrete:
        candidate = _implied_ripr(Q, X)
        m = effective_null_membership(candidate, null, tol)
        checks.append(Check.from_residual("effective_null", m.violation, tol,
                                          {"weights": m.weights.tolist(),
                                           "separating_point": m.separating_point}))
    notes = [f"probes accepted: {len(accepted)}",
             f"probes rejected (not e-variables): {len(rejected)}"]
    notes += [f"rejected probe {p.label}" for p in rejected]
    flags = finiteness_flags(Q, null, sol if sol is not None else X)
    return Certificate(tuple(checks), flags, tuple(notes))


def _discrete_component_mean(Q, comp, X):
    pos = Q.mass > 0
    pts = Q.support[pos]
    p = comp.mass_at(pts)
    x = X(pts)
    with np.errstate(invalid="ignore"):
        terms = np.where(p == 0, 0.0, p * x)
    return float(np.sum(terms))


def _implied_ripr(Q, X):
    """The measure ``(1/X) dQ``."""
    pos = Q.mass > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        masses = np.where(pos, Q.mass * np.exp(-X.log(Q.support)), 0.0)
    return DiscreteMeasure(Q.support, masses, check_mass=False, label="(1/X) dQ")


# finiteness flags -----------------------------------------------------------------

def finiteness_flags(Q, null, solution=None):
    """Absolute-continuity and finiteness flags; undecidable entries are None.

    ``q_ac_wrt_null`` is decided for discrete alternatives against nulls with
    computable point masses.  The numeraire is checked on the atoms of a
    discrete ``Q`` or on the default grid otherwise; ``Q << P*`` holds exactly
    when the numeraire is finite ``Q``-almost surely.
    """
    q_ac = None
    if Q.is_discrete:
        try:
            q_ac = bool(lebesgue_decompose(Q, null).lambda_star >= 1.0 - 1e-15)
        except UnsupportedNull:
            pass
    if solution is None:
        return FinitenessFlags(q_ac_wrt_null=q_ac)
    X, sol = _solution_parts(solution)
    if Q.is_discrete:
        z = Q.support[Q.mass > 0]
    else:
        z = evaluation_grid(Q)
        z = z[np.isfinite(Q.logdensity(z))]
    finite = bool(np.all(np.isfinite(X.log(z))))
    entropy_finite = None
    if sol is not None:
        entropy_finite = bool(np.isfinite(sol.entropy_value))
    if not finite:
        entropy_finite = False
    return FinitenessFlags(q_ac_wrt_null=q_ac, numeraire_finite=finite, ripr_ac_wrt_q=True,
                           q_ac_wrt_ripr=finite, entropy_finite=entropy_finite)


# duality gap ----------------------------------------------------------------------

@dataclass(frozen=True)
class DualityGap:
    gap: float
    log_value: float
    entropy: float
    lambda_star: float
    conditional: bool
    both_infinite: bool

    def __float__(self):
        return float(self.gap)


def duality_gap(X, ripr, Q, acc=1e-12):
    """``|E_Q[log X] - H(Q | P*)|``, conditioned on ``{X < inf}`` when that set is not full.

    When both sides are infinite the gap is reported as 0 with
    ``both_infinite`` set.
    """
    X, _ = _solution_parts(X)
    if Q.is_discrete:
        pos = Q.mass > 0
        pts, q = Q.support[pos], Q.mass[pos]
        finite = np.isfinite(X.log(pts))
        lam = float(q[finite].sum())
        if lam == 0.0:
            return DualityGap(0.0, INF, INF, 0.0, True, True)
        qs = DiscreteMeasure(pts[finite], q[finite] / lam, check_mass=False)
        pr = DiscreteMeasure(ripr.support, ripr.mass / lam, check_mass=False)
        conditional = lam < 1.0
    else:
        qs, pr, lam, conditional = Q, ripr, 1.0, False
    lhs = float(expect(qs, lambda z: X.log(z), acc).value)
    rhs = float(relative_entropy(qs, pr, acc))
    if np.isinf(lhs) and np.isinf(rhs):
        return DualityGap(0.0, lhs, rhs, lam, conditional, True)
    return DualityGap(abs(lhs - rhs), lhs, rhs, lam, conditional, False)


# description gain -----------------------------------------------------------------

@dataclass(frozen=True)
class DescriptionGain:
    values: np.ndarray  # (len(others), len(t_grid))
    t_grid: np.ndarray
    labels: tuple

    def max(self):
        return float(np.max(self.values))


def description_gain(Q, p_star, others, t_grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
                     acc=1e-11):
    """``E_Q[log(((1-t) p* + t p) / p*)]`` for each ``p`` in ``others`` and ``t`` in ``t_grid``.

    Nonpositive everywhere exactly when ``p*`` is the reverse information
    projection onto the hull of ``others``.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any((t <= 0) | (t >= 1)):
        raise ValueError("t values must lie in (0, 1)")
    rows = []
    for p in others:
        def f(z, p=p):
            r = log_density_ratio(p, p_star, z)
            return np.logaddexp(np.log1p(-t)[:, None], np.log(t)[:, None] + r[None, :])
        rows.append(np.atleast_1d(expect(Q, f, acc).value))
    return DescriptionGain(np.array(rows), t, tuple(getattr(p, "label", "p") for p in others))


# key inequality ---------------------------------------------------------------------

@dataclass(frozen=True)
class LogTInequality:
    lhs: object
    rhs: object
    holds: object


def log_t_inequality(t):
    """``min(|log t|, log^2 t) / 9 <= log((2 + t + 1/t) / 4)``, vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    a = np.abs(np.log(t))
    lhs = np.minimum(a, a * a) / 9.0
    # (2 + t + 1/t) / 4 = cosh^2(a / 2); written via a so that t near 1 does not cancel
    with np.errstate(over="ignore"):
        small = np.log1p(np.sinh(np.minimum(a, 1.0) / 2.0) ** 2)
    large = a + 2.0 * np.log1p(np.exp(-a)) - 2.0 * np.log(2.0)
    rhs = np.where(a < 1.0, small, large)
    holds = lhs <= rhs
    if t.ndim == 0:
        return LogTInequality(float(lhs), float(rhs), bool(holds))
    return LogTInequality(lhs, rhs, holds)


# universal inference ----------------------------------------------------------------

@dataclass(frozen=True)
class UniversalInferenceReport:
    z: np.ndarray
    x_star: np.ndarray
    x_ui: np.ndarray
    difference: np.ndarray
    log_ratio: np.ndarray
    min_difference: float
    mass_above_tol: float
    log_gain: float
    dominates: bool


def _ui_log_ratio(Q, null, weights, z):
    """``log(X* / X^UI) = log(p_max / p*)`` from pairwise component ratios."""
    lr = null.log_ratios_to_mixture(weights, z)
    return np.max(lr, axis=0)


def universal_inference_compare(Q, null, X_star, grid=None, tol=1e-9, acc=1e-11):
    """Compare ``X*`` with ``X^UI = q / max_i p_i`` on a grid and in expected log.

    ``X_star`` may be an :class:`EVariable` or a solution carrying mixture
    weights; the latter gives ratios that stay accurate where all densities
    underflow.
    """
    X, sol = _solution_parts(X_star)
    z = evaluation_grid(Q) if grid is None else np.asarray(grid, dtype=float)
    weights = sol.mixture_weights if sol is not None else None
    accurate = weights is not None and not Q.is_discrete and (sol.lambda_star == 1.0)

    def log_ui(zz):
        L = np.stack([log_density_ratio(c, Q, zz) for c in null.components])
        lq = Q.logdensity(zz)
        return np.where(np.isneginf(lq), -INF, -np.max(L, axis=0))

    def lratio(zz):
        if accurate:
            return _ui_log_ratio(Q, null, weights, zz)
        return log_ratio(X.log(zz), log_ui(zz))

    lx_ui = log_ui(z)
    lr = lratio(z)
    x_ui = np.exp(np.minimum(lx_ui, 709.0))
    x_ui = np.where(lx_ui > 709.0, INF, x_ui)
    with np.errstate(invalid="ignore", over="ignore"):
        diff = np.where(np.isposinf(lr), INF, x_ui * np.expm1(lr))
    diff = np.where(lr == 0, 0.0, diff)
    x_star = X(z)
    if Q.is_discrete:
        pos = Q.mass > 0
        pts = Q.support[pos]
        lr_pts = lratio(pts)
        ui_pts = np.exp(log_ui(pts))
        gap_pts = np.where(np.isposinf(lr_pts), INF, ui_pts * np.expm1(lr_pts))
        mass = float(np.sum(Q.mass[pos][gap_pts > tol]))
        fin = np.isfinite(lr_pts)
        gain = float(np.sum(Q.mass[pos][fin] * lr_pts[fin])) if fin.all() else INF
    else:
        def indicator(zz):
            lrz = lratio(zz)
            with np.errstate(over="ignore", invalid="ignore"):
                g = np.where(np.isposinf(lrz), INF, np.exp(log_ui(zz)) * np.expm1(lrz))
            return (g > tol).astype(float)

        try:
            mass = float(expect(Q, indicator, 1e-7).value)
        except AccuracyNotMet:
            keep = np.isfinite(Q.logdensity(z))
            dens = np.exp(Q.logdensity(z[keep]))
            mass = float(np.trapz(dens * indicator(z[keep]), z[keep]))
        gain = float(expect(Q, lratio, acc).value)
    min_diff = float(np.min(diff))
    return UniversalInferenceReport(z, x_star, x_ui, diff, lr, min_diff, mass, gain,
                                    bool(min_diff >= -tol))


# minimizing sequences -----------------------------------------------------------------

@dataclass(frozen=True)
class SequenceDiagnostic:
    entropies: np.ndarray
    distances: np.ndarray
    cauchy_like: bool


def minimizing_sequence_diagnostic(Q, seq, acc=1e-10):
    """``H(Q | p_k)`` and ``E_Q|log p_k - log p_K|`` along a sequence ending at ``p_K``.

    ``cauchy_like`` is False when the distances over the second half of the
    sequence stay above half of the first distance, which is what an
    oscillating, non-convergent sequence produces.
    """
    seq = list(seq)
    if not seq:
        raise ValueError("empty sequence")
    last = seq[-1]
    entropies = np.array([relative_entropy(Q, p, acc) for p in seq])
    dists = []
    for p in seq:
        if p is last:
            dists.append(0.0)
            continue
        dists.append(float(expect(Q, lambda z, p=p: np.abs(log_density_ratio(p, last, z)),
                                  acc).value))
    dists = np.array(dists)
    K = len(seq)
    tail = dists[K // 2:K - 1]
    if dists.max() == 0.0 or tail.size == 0:
        cauchy = True
    else:
        cauchy = bool(np.isfinite(tail.max()) and tail.max() <= 0.5 * dists[0])
    return SequenceDiagnostic(entropies, dists, cauchy)
