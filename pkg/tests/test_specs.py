import json

import numpy as np
import pytest

from numeraire.errors import SpecError, UnknownPreset
from numeraire.measures import DiscreteMeasure
from numeraire.nullspec import BoundedMean, ExpFamily, FiniteMixture, SubGaussian, Symmetric
from numeraire.presets import PRESETS, preset, preset_document
from numeraire.specs import load_problem, parse_candidate, parse_grid, parse_measure, parse_problem


class TestParseMeasure:
    def test_discrete(self):
        m = parse_measure({"discrete": [[0, 0.25], [1, 0.75]]})
        assert isinstance(m, DiscreteMeasure)
        np.testing.assert_array_equal(m.mass, [0.25, 0.75])

    def test_family(self):
        m = parse_measure({"family": "normal", "mean": 1, "sd": 2})
        assert m.params == {"mean": 1.0, "sd": 2.0}

    def test_density_expression(self):
        m = parse_measure({"density": "exp(-z)", "domain": [0, "inf"]})
        assert m.total_mass == pytest.approx(1.0, abs=1e-9)

    def test_mixture(self):
        m = parse_measure({"mixture": [{"family": "normal", "mean": 1, "sd": 1},
                                       {"family": "normal", "mean": -1, "sd": 1}],
                           "weights": [0.5, 0.5]})
        assert m.family == "mixture"

    @pytest.mark.parametrize("bad", [
        {"discrete": [[0, 0.5, 1]]},
        {"family": "gamma", "shape": 2},
        {"family": "normal", "mean": 0},
        {"density": "import os"},
        {"something": 1},
        [1, 2],
    ])
    def test_errors(self, bad):
        with pytest.raises(SpecError):
            parse_measure(bad)


class TestParseProblem:
    def test_null_kinds(self):
        docs = {
            "finite": ({"type": "finite", "components": [{"family": "normal", "mean": 0, "sd": 1}]},
                       FiniteMixture),
            "bounded": ({"type": "bounded_mean", "mu": 0.3}, BoundedMean),
            "subg": ({"type": "sub_gaussian", "sigma": 2}, SubGaussian),
            "sym": ({"type": "symmetric"}, Symmetric),
        }
        for null, cls in docs.values():
            spec = parse_problem({"alternative": {"family": "uniform", "a": 0, "b": 1}, "null": null})
            assert isinstance(spec.null, cls)

    def test_custom_expfam(self):
        spec = parse_problem({"null": {"type": "expfam", "statistic": "z", "theta_star": 0,
                                       "theta1": -1, "theta_max": 0.5,
                                       "reference": {"family": "exponential", "rate": 1}}})
        assert isinstance(spec.null, ExpFamily)
        assert spec.theta1 == -1.0

    def test_options(self):
        spec = parse_problem({"alternative": {"family": "normal", "mean": 1, "sd": 1},
                              "null": {"type": "symmetric"},
                              "options": {"tol": "1e-6", "seed": 4, "grid": "-2:2:5"}})
        assert spec.options["tol"] == 1e-6
        np.testing.assert_allclose(spec.grid, [-2, -1, 0, 1, 2])

    @pytest.mark.parametrize("doc", [
        {"task": "fly", "alternative": {"family": "normal", "mean": 0, "sd": 1}, "null": {"type": "symmetric"}},
        {"alternative": {"family": "normal", "mean": 0, "sd": 1}},
        {"null": {"type": "symmetric"}},
        {"alternative": {"family": "normal", "mean": 0, "sd": 1}, "null": {"type": "symmetric"},
         "options": {"colour": 1}},
        {"task": "renyi", "alternative": {"family": "normal", "mean": 0, "sd": 1},
         "null": {"type": "symmetric"}, "gamma": 2},
        {"task": "verify", "alternative": {"family": "normal", "mean": 0, "sd": 1},
         "null": {"type": "symmetric"}},
        {"alternative": {"family": "uniform", "a": 0, "b": 1}, "null": {"type": "bounded_mean", "mu": 0.7}},
    ])
    def test_rejects(self, doc):
        with pytest.raises(SpecError):
            parse_problem(doc)

    def test_alternative_must_be_probability(self):
        with pytest.raises(SpecError):
            parse_problem({"alternative": {"discrete": [[0, 0.5]]}, "null": {"type": "symmetric"}})

    def test_load_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(SpecError):
            load_problem(p)

    def test_load_roundtrip(self, tmp_path):
        p = tmp_path / "coin.json"
        p.write_text(json.dumps(preset_document("coin_toss_4_1")))
        assert load_problem(p).raw == preset_document("coin_toss_4_1")


class TestCandidatesAndGrid:
    def test_candidates(self):
        z = np.array([0.0, 1.0])
        np.testing.assert_allclose(parse_candidate({"constant": 2})(z), 2.0)
        np.testing.assert_allclose(parse_candidate({"expression": "1 + z"})(z), [1, 2])
        np.testing.assert_allclose(parse_candidate({"log_expression": "z"})(z), [1, np.e])
        np.testing.assert_allclose(parse_candidate({"table": [[0, 3], [1, 0]]})(z), [3, 0])

    @pytest.mark.parametrize("text", ["1:0:5", "0:1", "0:1:1", "a:b:c"])
    def test_bad_grid(self, text):
        with pytest.raises(SpecError):
            parse_grid(text)


class TestPresets:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_every_preset_parses(self, name):
        assert preset(name).task in ("solve", "compare_ui")

    def test_coin_toss(self):
        spec = preset("coin_toss_4_1")
        np.testing.assert_array_equal(spec.alternative.mass_at([0, 1]), [1, 0])
        np.testing.assert_allclose(spec.null.components[1].mass_at([0, 1]), [1 / 3, 2 / 3])

    def test_copies_are_fresh(self):
        doc = preset_document("subgaussian")
        doc["null"]["sigma"] = 5
        assert preset_document("subgaussian")["null"]["sigma"] == 1.0

    def test_unknown(self):
        with pytest.raises(UnknownPreset):
            preset("nope")
