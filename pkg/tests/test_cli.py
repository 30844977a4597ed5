import json

import numpy as np
import pytest

from numeraire.cli import dumps, run
from numeraire.presets import PRESETS, preset_document


def load(path):
    return json.loads(path.read_text())


def write(tmp_path, doc, name="problem.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


class TestSolve:
    @pytest.mark.parametrize("name", sorted(n for n in PRESETS if PRESETS[n]["task"] == "solve"))
    def test_presets_pass(self, tmp_path, name):
        out = tmp_path / "r.json"
        assert run(["solve", "--preset", name, "--out", str(out)]) == 0
        rep = load(out)
        assert rep["overall_pass"]
        assert rep["task"] == "solve"

    def test_cauchy_weights(self, tmp_path):
        out = tmp_path / "r.json"
        assert run(["solve", "--preset", "two_gaussians_cauchy", "--out", str(out)]) == 0
        np.testing.assert_allclose(load(out)["solution"]["weights"], [0.5, 0.5], atol=1e-9)

    def test_bounded_mean_lambda(self, tmp_path):
        out = tmp_path / "r.json"
        assert run(["solve", "--preset", "bounded_mean_uniform", "--out", str(out)]) == 0
        lam = load(out)["solution"]["params"]["lambda"]
        assert lam == pytest.approx(2.6721038552733858, abs=1e-10)

    def test_grid_invariant(self, tmp_path):
        out = tmp_path / "r.json"
        run(["solve", "--preset", "two_gaussians_cauchy", "--out", str(out), "--grid=-20:20:201"])
        g = load(out)["grid"]
        x, r = np.array(g["x_star"], dtype=float), np.array(g["ripr_density"], dtype=float)
        fin = np.isfinite(x)
        np.testing.assert_allclose(x[fin] * r[fin], 1.0, atol=1e-9)

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            run(["solve", "--preset", "two_gaussians_cauchy", "--out", str(out), "--seed", "11"])
        assert a.read_bytes() == b.read_bytes()

    def test_roundtrip(self, tmp_path):
        out = tmp_path / "r.json"
        run(["solve", "--preset", "coin_toss_4_1", "--out", str(out)])
        first = load(out)
        again = write(tmp_path, first["provenance"]["problem"], "again.json")
        out2 = tmp_path / "r2.json"
        run(["solve", "--problem", str(again), "--out", str(out2)])
        second = load(out2)
        assert [c["pass"] for c in first["certificates"]] == [c["pass"] for c in second["certificates"]]


class TestOtherCommands:
    def test_verify_constant_two_fails(self, tmp_path, capsys):
        doc = preset_document("coin_toss_4_1")
        doc["candidate"] = {"constant": 2}
        out = tmp_path / "r.json"
        assert run(["verify", "--problem", str(write(tmp_path, doc)), "--out", str(out)]) == 2
        rep = load(out)
        assert not next(c for c in rep["certificates"] if c["name"] == "evariable")["pass"]
        assert "certificate failed" in capsys.readouterr().err

    def test_verify_true_numeraire_passes(self, tmp_path):
        doc = preset_document("coin_toss_4_1")
        doc["candidate"] = {"table": [[0, 3], [1, 0]]}
        out = tmp_path / "r.json"
        assert run(["verify", "--problem", str(write(tmp_path, doc)), "--out", str(out)]) == 0

    def test_renyi(self, tmp_path):
        doc = {"alternative": {"discrete": [[0, 0.5], [1, 0.3], [2, 0.2]]},
               "null": {"type": "finite", "components": [
                   {"discrete": [[0, 0.2], [1, 0.3], [2, 0.5]]},
                   {"discrete": [[0, 0.1], [1, 0.6], [2, 0.3]]}]},
               "gamma": 2}
        out = tmp_path / "r.json"
        assert run(["renyi", "--problem", str(write(tmp_path, doc)), "--out", str(out)]) == 0
        assert load(out)["solution"]["normalizer"] < 1

    def test_compare_ui_csv(self, tmp_path):
        out = tmp_path / "grid.csv"
        assert run(["compare-ui", "--preset", "ui_compare", "--out", str(out), "--format", "csv"]) == 0
        header, *rows = out.read_text().splitlines()
        assert header == "z,x_star,ripr_density,x_ui"
        assert len(rows) == 1001
        assert (tmp_path / "grid.report.json").exists()

    def test_preset_command(self, tmp_path):
        out = tmp_path / "p.json"
        assert run(["preset", "symmetric_normal", "--out", str(out)]) == 0
        assert load(out) == preset_document("symmetric_normal")


class TestErrors:
    def test_malformed_json(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{")
        assert run(["solve", "--problem", str(p), "--out", str(tmp_path / "r.json")]) == 1
        assert "invalid problem" in capsys.readouterr().err

    def test_unknown_null(self, tmp_path):
        doc = {"alternative": {"family": "normal", "mean": 0, "sd": 1}, "null": {"type": "weird"}}
        assert run(["solve", "--problem", str(write(tmp_path, doc)), "--out", str(tmp_path / "r")]) == 1

    def test_missing_file(self, tmp_path):
        assert run(["solve", "--problem", str(tmp_path / "none.json"), "--out", str(tmp_path / "r")]) == 1


class TestDumps:
    def test_seventeen_digits(self):
        assert dumps(0.1) == "0.10000000000000001"
        assert dumps([np.inf, -np.inf, 1.0]) == "[Infinity, -Infinity, 1]"
        assert json.loads(dumps({"a": [np.float64(2.5), True, None]})) == {"a": [2.5, True, None]}
