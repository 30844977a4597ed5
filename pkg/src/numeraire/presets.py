"""Named problem documents used by the acceptance suite and the CLI."""

import copy

from .errors import UnknownPreset
from .specs import parse_problem

_GAUSSIANS = {"type": "finite", "components": [
    {"family": "normal", "mean": 1.0, "sd": 1.0},
    {"family": "normal", "mean": -1.0, "sd": 1.0},
]}

PRESETS = {
    "coin_toss_4_1": {
        "task": "solve",
        "alternative": {"discrete": [[0, 1.0], [1, 0.0]]},
        "null": {"type": "finite", "components": [
            {"discrete": [[0, 0.0], [1, 1.0]]},
            {"discrete": [[0, 1 / 3], [1, 2 / 3]]},
        ]},
    },
    "two_gaussians_cauchy": {
        "task": "solve",
        "alternative": {"family": "cauchy", "location": 0.0, "scale": 1.0},
        "null": _GAUSSIANS,
    },
    "bounded_mean_uniform": {
        "task": "solve",
        "alternative": {"family": "uniform", "a": 0.0, "b": 1.0},
        "null": {"type": "bounded_mean", "mu": 0.3},
    },
    "subgaussian": {
        "task": "solve",
        "alternative": {"family": "normal", "mean": 1.0, "sd": 1.0},
        "null": {"type": "sub_gaussian", "sigma": 1.0},
    },
    "symmetric_normal": {
        "task": "solve",
        "alternative": {"family": "normal", "mean": 1.0, "sd": 1.0},
        "null": {"type": "symmetric"},
    },
    "symmetric_exponential": {
        "task": "solve",
        "alternative": {"family": "exponential", "rate": 1.0},
        "null": {"type": "symmetric"},
    },
    "expfam_gaussian": {
        "task": "solve",
        "null": {"type": "expfam", "family": "gaussian", "theta_star": 0.0, "theta1": -1.0},
    },
    "ui_compare": {
        "task": "compare_ui",
        "alternative": {"family": "cauchy", "location": 0.0, "scale": 1.0},
        "null": _GAUSSIANS,
    },
}


def preset_document(name):
    """The JSON document of a named preset (a fresh copy)."""
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return copy.deepcopy(PRESETS[name])


def preset(name):
    """The parsed :class:`~numeraire.specs.ProblemSpec` of a named preset."""
    return parse_problem(preset_document(name))
