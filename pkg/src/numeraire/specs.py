"""JSON problem documents: parsing into measures, nulls and tasks.

A problem document looks like::

    {
      "task": "solve",                       # solve | renyi | verify | compare_ui
      "alternative": {"family": "cauchy", "location": 0, "scale": 1},
      "null": {"type": "finite", "components": [
          {"family": "normal", "mean": 1, "sd": 1},
          {"family": "normal", "mean": -1, "sd": 1}]},
      "options": {"tol": 1e-8, "seed": 0}
    }

Measures are ``{"discrete": [[point, mass], ...]}``, a named family
(normal, cauchy, uniform, exponential), ``{"density": "<expr in z>",
"domain": [a, b]}`` (``"log_density"`` is accepted as well), or
``{"mixture": [specs], "weights": [...]}``.

Nulls are ``finite`` (``components``), ``bounded_mean`` (``mu``),
``sub_gaussian`` (``sigma``), ``symmetric`` and ``expfam``
(``family`` = gaussian | bernoulli, or ``statistic`` / ``log_partition``
expressions with a ``reference`` measure; plus ``theta_star`` and
``theta1``).

The ``renyi`` task reads ``gamma``; ``verify`` reads ``candidate``, one of
``{"constant": c}``, ``{"expression": "<expr in z>"}``,
``{"log_expression": ...}`` or ``{"table": [[z, x], ...]}``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .closed_form import bernoulli, gaussian_location
from .errors import InvalidMeasure, PreconditionViolated, SpecError
from .expression import Expression
from .measures import DensityMeasure, cauchy, discrete, exponential, mixture, normal, uniform
from .nullspec import BoundedMean, EVariable, ExpFamily, FiniteMixture, SubGaussian, Symmetric

TASKS = ("solve", "renyi", "verify", "compare_ui")
FAMILIES = {
    "normal": (normal, ("mean", "sd")),
    "cauchy": (cauchy, ("location", "scale")),
    "uniform": (uniform, ("a", "b")),
    "exponential": (exponential, ("rate",)),
}
DEFAULT_OPTIONS = {"tol": 1e-8, "max_iter": 100_000, "grid": None, "seed": 0}


def _number(x, what):
    if isinstance(x, str):
        try:
            return float(x)
        except ValueError:
            raise SpecError(f"{what}: {x!r} is not a number") from None
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SpecError(f"{what}: expected a number, got {x!r}")
    return float(x)


def parse_measure(spec, what="measure"):
    if not isinstance(spec, dict):
        raise SpecError(f"{what}: expected an object")
    try:
        if "discrete" in spec:
            pairs = spec["discrete"]
            if not pairs or any(len(p) != 2 for p in pairs):
                raise SpecError(f"{what}: discrete needs a list of [point, mass] pairs")
            pts = [_number(p[0], what) for p in pairs]
            mass = [_number(p[1], what) for p in pairs]
            return discrete(pts, mass)
        if "family" in spec:
            name = spec["family"]
            if name not in FAMILIES:
                raise SpecError(f"{what}: unknown family {name!r}")
            ctor, keys = FAMILIES[name]
            missing = [k for k in keys if k not in spec]
            if missing:
                raise SpecError(f"{what}: {name} needs {', '.join(missing)}")
            return ctor(*[_number(spec[k], f"{what}.{k}") for k in keys])
        if "density" in spec or "log_density" in spec:
            return _expression_measure(spec, what)
        if "mixture" in spec:
            comps = [parse_measure(c, f"{what}.mixture[{i}]") for i, c in enumerate(spec["mixture"])]
            weights = [_number(w, f"{what}.weights") for w in spec.get("weights", [])]
            if len(weights) != len(comps):
                raise SpecError(f"{what}: one weight per mixture component")
            return mixture(comps, weights)
    except InvalidMeasure as exc:
        raise SpecError(f"{what}: {exc}") from None
    raise SpecError(f"{what}: cannot tell which kind of measure this is")


def _expression_measure(spec, what):
    lo, hi = (_number(v, f"{what}.domain") for v in spec.get("domain", ["-inf", "inf"]))
    if "log_density" in spec:
        expr = Expression(spec["log_density"])
        logpdf = expr
    else:
        expr = Expression(spec["density"])

        def logpdf(z):
            with np.errstate(divide="ignore"):
                return np.log(expr(z))
    center = _number(spec.get("center", 0.0 if not np.isfinite(lo) else lo), f"{what}.center")
    scale = _number(spec.get("scale", 1.0), f"{what}.scale")
    return DensityMeasure(logpdf, (lo, hi), center=center, scale=scale, label=str(expr.source))


def parse_null(spec):
    if not isinstance(spec, dict) or "type" not in spec:
        raise SpecError("null: expected an object with a 'type'")
    kind = spec["type"]
    try:
        if kind == "finite":
            comps = spec.get("components")
            if not comps:
                raise SpecError("null: finite needs a non-empty 'components' list")
            measures = [parse_measure(c, f"null.components[{i}]") for i, c in enumerate(comps)]
            return FiniteMixture(measures, spec.get("labels"))
        if kind == "bounded_mean":
            return BoundedMean(_number(spec.get("mu"), "null.mu"))
        if kind == "sub_gaussian":
            return SubGaussian(_number(spec.get("sigma", 1.0), "null.sigma"))
        if kind == "symmetric":
            return Symmetric()
        if kind == "expfam":
            return parse_expfam(spec)
    except (InvalidMeasure, PreconditionViolated) as exc:
        raise SpecError(f"null: {exc}") from None
    raise SpecError(f"null: unknown type {kind!r}")


def parse_expfam(spec):
    ts = _number(spec.get("theta_star", 0.0), "null.theta_star")
    tmax = _number(spec.get("theta_max", "inf"), "null.theta_max")
    name = spec.get("family")
    if name == "gaussian":
        return gaussian_location(ts, _number(spec.get("sigma", 1.0), "null.sigma"), theta_max=tmax)
    if name == "bernoulli":
        return bernoulli(ts, theta_max=tmax)
    if name is not None:
        raise SpecError(f"null: unknown exponential family {name!r}")
    if "statistic" not in spec or "reference" not in spec:
        raise SpecError("null: expfam needs 'family' or 'statistic' with 'reference'")
    T = Expression(spec["statistic"])
    A = Expression(spec["log_partition"], ("theta",)) if "log_partition" in spec else None
    ref = parse_measure(spec["reference"], "null.reference")
    return ExpFamily(T, ts, ref, log_partition=A, theta_max=tmax)


def parse_candidate(spec):
    if not isinstance(spec, dict):
        raise SpecError("candidate: expected an object")
    if "constant" in spec:
        return EVariable.constant(_number(spec["constant"], "candidate.constant"))
    if "expression" in spec:
        e = Expression(spec["expression"])
        return EVariable(e, label=e.source)
    if "log_expression" in spec:
        e = Expression(spec["log_expression"])
        return EVariable(log_fn=e, label=f"exp({e.source})")
    if "table" in spec:
        rows = spec["table"]
        return EVariable.table([_number(r[0], "candidate.table") for r in rows],
                               [_number(r[1], "candidate.table") for r in rows])
    raise SpecError("candidate: expected constant, expression, log_expression or table")


def parse_grid(text):
    """``"a:b:n"`` (or a 3-list) into an evaluation grid."""
    if text is None:
        return None
    parts = text.split(":") if isinstance(text, str) else list(text)
    if len(parts) != 3:
        raise SpecError(f"grid must look like a:b:n, got {text!r}")
    a, b = _number(parts[0], "grid"), _number(parts[1], "grid")
    n = int(_number(parts[2], "grid"))
    if not (np.isfinite(a) and np.isfinite(b) and a < b and n >= 2):
        raise SpecError("grid needs finite a < b and n >= 2")
    return np.linspace(a, b, n)


@dataclass
class ProblemSpec:
    task: str
    alternative: object
    null: object
    options: dict
    gamma: float = None
    candidate: object = None
    theta1: float = None
    raw: dict = field(default_factory=dict)

    @property
    def grid(self):
        return parse_grid(self.options.get("grid"))


def parse_problem(doc):
    """Validate and build a :class:`ProblemSpec` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise SpecError("problem: expected a JSON object")
    task = doc.get("task", "solve")
    if task not in TASKS:
        raise SpecError(f"problem: unknown task {task!r} (expected one of {', '.join(TASKS)})")
    if "null" not in doc:
        raise SpecError("problem: missing 'null'")
    null = parse_null(doc["null"])
    theta1 = None
    if doc["null"].get("type") == "expfam":
        if "theta1" not in doc["null"]:
            raise SpecError("null: expfam needs theta1 (the alternative's parameter)")
        theta1 = _number(doc["null"]["theta1"], "null.theta1")
        alternative = doc.get("alternative")
        alternative = parse_measure(alternative, "alternative") if alternative else null.member(theta1)
    else:
        if "alternative" not in doc:
            raise SpecError("problem: missing 'alternative'")
        alternative = parse_measure(doc["alternative"], "alternative")
    if alternative.is_discrete and not alternative.is_probability():
        raise SpecError(f"alternative: total mass {alternative.total_mass:.17g} is not 1")
    options = dict(DEFAULT_OPTIONS)
    unknown = set(doc.get("options", {})) - set(DEFAULT_OPTIONS)
    if unknown:
        raise SpecError(f"options: unknown keys {sorted(unknown)}")
    options.update(doc.get("options", {}))
    options["tol"] = _number(options["tol"], "options.tol")
    options["seed"] = int(_number(options["seed"], "options.seed"))
    options["max_iter"] = int(_number(options["max_iter"], "options.max_iter"))
    parse_grid(options["grid"])
    spec = ProblemSpec(task, alternative, null, options, theta1=theta1, raw=doc)
    if task == "renyi":
        if not isinstance(null, FiniteMixture):
            raise SpecError("renyi needs a finite null")
        if "gamma" not in doc:
            raise SpecError("renyi needs gamma")
        spec.gamma = _number(doc["gamma"], "gamma")
    if task == "verify":
        if "candidate" not in doc:
            raise SpecError("verify needs a candidate")
        spec.candidate = parse_candidate(doc["candidate"])
    if task == "compare_ui":
        if not isinstance(null, FiniteMixture) or null.is_discrete != alternative.is_discrete:
            raise SpecError("compare_ui needs a finite null of the same kind as the alternative")
    return spec


def load_problem(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None
    return parse_problem(doc)
