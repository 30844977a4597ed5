import numpy as np
import pytest

from numeraire.errors import InstanceTooLarge, NoCommonReference, NotAbsolutelyContinuous, UnsupportedNull
from numeraire.finite_solver import (SolverOptions, brute_force_numeraire, first_order_certificate,
                                     solution_from_weights, solve_finite_null)
from numeraire.measures import discrete, normal, relative_entropy, uniform
from numeraire.nullspec import BoundedMean, FiniteMixture


def random_instance(rng, m=3, n=3):
    pts = np.arange(float(m))
    Q = discrete(pts, rng.dirichlet(np.ones(m)))
    null = FiniteMixture([discrete(pts, rng.dirichlet(np.ones(m))) for _ in range(n)])
    return Q, null, pts


class TestDiscrete:
    def test_point_null_is_likelihood_ratio(self):
        Q = discrete([0, 1], [0.2, 0.8])
        null = FiniteMixture([discrete([0, 1], [0.5, 0.5])])
        sol = solve_finite_null(Q, null)
        np.testing.assert_allclose(sol.numeraire([0.0, 1.0]), [0.4, 1.6], rtol=1e-12)

    def test_alternative_in_hull_gives_one(self):
        null = FiniteMixture([discrete([0, 1], [1.0, 0.0]), discrete([0, 1], [0.0, 1.0])])
        sol = solve_finite_null(discrete([0, 1], [0.4, 0.6]), null)
        np.testing.assert_allclose(sol.numeraire([0.0, 1.0]), 1.0, atol=1e-9)
        assert sol.entropy_value == pytest.approx(0.0, abs=1e-12)

    def test_entropy_matches_ripr(self, rng):
        Q, null, _ = random_instance(rng)
        sol = solve_finite_null(Q, null)
        assert sol.entropy_value == pytest.approx(relative_entropy(Q, sol.ripr), abs=1e-12)

    def test_trace_is_monotone(self, rng):
        Q, null, _ = random_instance(rng, 4, 3)
        sol = solve_finite_null(Q, null)
        assert np.all(np.diff(sol.trace) <= 1e-15)

    def test_reciprocal_identity(self, rng):
        Q, null, pts = random_instance(rng)
        sol = solve_finite_null(Q, null)
        np.testing.assert_allclose(sol.numeraire(pts) * sol.ratio(pts), 1.0, rtol=1e-12)

    def test_matches_oracle(self, rng):
        for _ in range(10):
            Q, null, pts = random_instance(rng)
            x = solve_finite_null(Q, null).numeraire(pts)
            xr = brute_force_numeraire(Q, null).numeraire(pts)
            np.testing.assert_allclose(x, xr, atol=1e-4)

    def test_fully_singular(self):
        Q = discrete([5.0], [1.0])
        sol = solve_finite_null(Q, FiniteMixture([discrete([0], [1.0])]))
        assert sol.lambda_star == 0.0
        assert np.isinf(sol.numeraire([5.0])[0])

    def test_options_validation(self):
        with pytest.raises(ValueError):
            SolverOptions(tol_foc=0.0)
        with pytest.raises(ValueError):
            SolverOptions(max_iter=0)


class TestDensity:
    def test_shifted_normal_point_null(self):
        sol = solve_finite_null(normal(1, 1), FiniteMixture([normal(0, 1)]))
        z = np.linspace(-3, 3, 7)
        np.testing.assert_allclose(sol.numeraire.log(z), z - 0.5, atol=1e-12)

    def test_symmetric_pair_weights(self):
        null = FiniteMixture([normal(1, 1), normal(-1, 1)])
        sol = solve_finite_null(normal(0.5, 1), null)
        cert = first_order_certificate(sol, normal(0.5, 1), null)
        assert cert, cert.failures()
        assert sol.mixture_weights[0] > 0.5

    def test_support_mismatch(self):
        with pytest.raises((NoCommonReference, NotAbsolutelyContinuous)):
            solve_finite_null(normal(), FiniteMixture([uniform(0, 1)]))

    def test_mixed_kinds(self):
        with pytest.raises(NoCommonReference):
            solve_finite_null(normal(), FiniteMixture([discrete([0], [1.0])]))


class TestCertificate:
    def test_passes_at_optimum(self, rng):
        Q, null, _ = random_instance(rng)
        sol = solve_finite_null(Q, null)
        assert first_order_certificate(sol, Q, null)

    def test_fails_at_perturbed_weights(self, rng):
        Q, null, _ = random_instance(rng)
        sol = solve_finite_null(Q, null)
        w = sol.mixture_weights + np.array([0.05, -0.05, 0.0])
        if np.any(w < 0):
            w = np.abs(w)
        bad = solution_from_weights(Q, null, w / w.sum())
        assert not first_order_certificate(bad, Q, null)


class TestOracleLimits:
    def test_too_many_atoms(self):
        pts = np.arange(6.0)
        Q = discrete(pts, np.full(6, 1 / 6))
        with pytest.raises(InstanceTooLarge):
            brute_force_numeraire(Q, FiniteMixture([Q]))

    def test_density_rejected(self):
        with pytest.raises(UnsupportedNull):
            brute_force_numeraire(normal(), FiniteMixture([normal()]))

    def test_wrong_null(self):
        with pytest.raises(UnsupportedNull):
            solve_finite_null(discrete([0.1], [1.0]), BoundedMean(0.3))
