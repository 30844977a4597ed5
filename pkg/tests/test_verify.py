import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numeraire.finite_solver import solution_from_weights, solve_finite_null
from numeraire.generated_solver import solve_bounded_mean
from numeraire.measures import cauchy, discrete, normal, uniform
from numeraire.nullspec import BoundedMean, EVariable, FiniteMixture
from numeraire.verify import (default_probes, description_gain, duality_gap, evaluation_grid,
                              finiteness_flags, log_t_inequality, minimizing_sequence_diagnostic,
                              numeraire_certificate, universal_inference_compare)


def coin_toss():
    Q = discrete([0, 1], [1.0, 0.0])
    null = FiniteMixture([discrete([0, 1], [0.0, 1.0]), discrete([0, 1], [1 / 3, 2 / 3])])
    return Q, null


def two_gaussians():
    return FiniteMixture([normal(1, 1), normal(-1, 1)])


class TestNumeraireCertificate:
    def test_coin_toss(self):
        Q, null = coin_toss()
        sol = solve_finite_null(Q, null)
        cert = numeraire_certificate(sol, Q, null)
        assert cert, cert.failures()
        assert cert.flags.consistent()

    def test_cauchy(self):
        Q, null = cauchy(), two_gaussians()
        sol = solve_finite_null(Q, null)
        assert numeraire_certificate(sol, Q, null)

    def test_bounded_mean_rejects_suboptimal(self):
        Q, null = uniform(0, 1), BoundedMean(0.3)
        sol = solve_bounded_mean(0.3, Q)
        lam = sol.params["lambda"] / 2
        X = EVariable(lambda z: 1 + lam * (z - 0.3), label="half")
        probes = default_probes(sol, Q, null)
        cert = numeraire_certificate(X, Q, null, probes=probes)
        assert not cert

    def test_constant_two_is_not_numeraire(self):
        Q, null = coin_toss()
        cert = numeraire_certificate(EVariable.constant(2.0), Q, null)
        assert not cert

    def test_deterministic(self):
        Q, null = cauchy(), two_gaussians()
        sol = solve_finite_null(Q, null)
        a = numeraire_certificate(sol, Q, null, seed=3).to_records()
        b = numeraire_certificate(sol, Q, null, seed=3).to_records()
        assert a == b


class TestDuality:
    def test_coin_toss_gap_zero(self):
        Q, null = coin_toss()
        sol = solve_finite_null(Q, null)
        g = duality_gap(sol, sol.ripr, Q)
        assert g.gap == 0.0
        assert g.log_value == pytest.approx(np.log(3))

    def test_conditional(self):
        Q = discrete([0, 1, 2], [1 / 3] * 3)
        null = FiniteMixture([discrete([0], [1.0]), discrete([1], [1.0])])
        sol = solve_finite_null(Q, null)
        g = duality_gap(sol, sol.ripr, Q)
        assert g.conditional and g.lambda_star == pytest.approx(2 / 3)
        assert g.gap <= 1e-12

    def test_cauchy_both_infinite(self):
        Q, null = cauchy(), two_gaussians()
        sol = solve_finite_null(Q, null)
        g = duality_gap(sol, sol.ripr, Q)
        assert g.both_infinite

    def test_flags(self):
        Q = discrete([0, 1, 2], [1 / 3] * 3)
        null = FiniteMixture([discrete([0], [1.0]), discrete([1], [1.0])])
        flags = finiteness_flags(Q, null, solve_finite_null(Q, null))
        assert flags.q_ac_wrt_null is False
        assert flags.consistent()


class TestDescriptionGain:
    def test_nonpositive_at_ripr(self):
        Q = discrete([0, 1, 2], [0.5, 0.3, 0.2])
        null = FiniteMixture([discrete([0, 1, 2], [0.2, 0.3, 0.5]), discrete([0, 1, 2], [0.6, 0.3, 0.1])])
        sol = solve_finite_null(Q, null)
        gain = description_gain(Q, sol.ripr, null.components)
        assert gain.max() <= 1e-12

    def test_positive_away_from_ripr(self):
        Q = discrete([0, 1, 2], [0.5, 0.3, 0.2])
        comps = [discrete([0, 1, 2], [0.2, 0.3, 0.5]), discrete([0, 1, 2], [0.6, 0.3, 0.1])]
        gain = description_gain(Q, comps[0], comps)
        assert gain.max() > 0


class TestLogT:
    def test_known_values(self):
        r = log_t_inequality(4.0)
        assert r.lhs == pytest.approx(np.log(4) / 9)
        assert r.rhs == pytest.approx(np.log(25 / 16))
        assert r.holds

    def test_at_one(self):
        r = log_t_inequality(1.0)
        assert r.lhs == 0.0 and r.rhs == 0.0

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=-40.0, max_value=40.0))
    def test_property(self, x):
        assert log_t_inequality(np.exp(x)).holds

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            log_t_inequality(np.array([1.0, 0.0]))


class TestUniversalInference:
    def test_dominance(self):
        Q, null = cauchy(), two_gaussians()
        sol = solve_finite_null(Q, null)
        rep = universal_inference_compare(Q, null, sol)
        assert rep.dominates
        assert rep.log_gain == pytest.approx(0.490, abs=1e-3)

    def test_point_null_equal(self):
        Q, null = normal(1, 1), FiniteMixture([normal(0, 1)])
        sol = solve_finite_null(Q, null)
        rep = universal_inference_compare(Q, null, sol)
        assert np.max(np.abs(rep.log_ratio)) <= 1e-12
        assert rep.log_gain == pytest.approx(0.0, abs=1e-9)


class TestSequences:
    def test_converging_sequence(self):
        Q = normal()
        seq = [normal(2.0 ** -k, 1) for k in range(8)] + [normal(0, 1)]
        d = minimizing_sequence_diagnostic(Q, seq)
        assert d.cauchy_like
        assert np.all(np.diff(d.entropies) < 0)

    def test_alternating_sequence(self):
        Q = cauchy()
        seq = [normal(1 if k % 2 else -1, 1) for k in range(8)]
        assert not minimizing_sequence_diagnostic(Q, seq).cauchy_like


def test_evaluation_grid():
    z = evaluation_grid(normal())
    assert z.size == 1001
    assert z[0] == pytest.approx(-z[-1])
