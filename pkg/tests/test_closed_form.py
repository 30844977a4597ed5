import numpy as np
import pytest

from numeraire.closed_form import (bernoulli, expfam_numeraire, foc_exponents, gaussian_location,
                                   reflect, symmetric_discrete_null, symmetric_numeraire)
from numeraire.errors import InvalidMeasure, PreconditionViolated
from numeraire.finite_solver import solve_finite_null
from numeraire.measures import cauchy, discrete, exponential, normal
from numeraire.nullspec import ExpFamily, Symmetric, is_evariable


class TestSymmetric:
    def test_normal_alternative(self):
        sol = symmetric_numeraire(normal(1, 1))
        z = np.array([-1.0, 0.0, 1.0])
        np.testing.assert_allclose(sol.numeraire(z), 2 / (1 + np.exp(-2 * z)), rtol=1e-12)
        assert sol.certificate, sol.certificate.failures()

    def test_one_sided_alternative(self):
        sol = symmetric_numeraire(exponential(1.0))
        np.testing.assert_allclose(sol.numeraire(np.array([0.5, 3.0])), 2.0)
        assert sol.numeraire(np.array([-1.0]))[0] == 0.0
        assert sol.ripr.total_mass == pytest.approx(0.5, abs=1e-8)

    def test_already_symmetric(self):
        sol = symmetric_numeraire(cauchy(0, 2))
        np.testing.assert_allclose(sol.numeraire(np.linspace(-5, 5, 11)), 1.0, atol=1e-12)

    def test_reflect(self):
        R = reflect(normal(2, 1))
        assert R.density(np.array([-2.0]))[0] == pytest.approx(normal(2, 1).density(np.array([2.0]))[0])

    def test_discrete_routed_to_finite_solver(self):
        Q = discrete([-1.0, 0.0, 2.0], [0.2, 0.3, 0.5])
        with pytest.raises(InvalidMeasure):
            symmetric_numeraire(Q)
        null = symmetric_discrete_null(Q)
        sol = solve_finite_null(Q, null)
        X = sol.numeraire
        # each symmetric pair of atoms shares its null mass in proportion to q
        assert X(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-9)
        assert X(np.array([2.0]))[0] == pytest.approx(2.0, abs=1e-9)
        assert is_evariable(X, Symmetric())


class TestExpFamily:
    def test_gaussian(self):
        sol = expfam_numeraire(gaussian_location(0.0), -1.0)
        z = np.linspace(-3, 3, 7)
        np.testing.assert_allclose(sol.numeraire.log(z), -z - 0.5, atol=1e-13)
        assert sol.certificate, sol.certificate.failures()
        assert sol.entropy_value == pytest.approx(0.5, abs=1e-10)

    def test_bernoulli(self):
        fam = bernoulli(0.0)
        sol = expfam_numeraire(fam, -1.0)
        p1 = 1 / (1 + np.e)
        want = np.array([(1 - p1) / 0.5, p1 / 0.5])
        np.testing.assert_allclose(sol.numeraire(np.array([0.0, 1.0])), want, rtol=1e-12)
        assert sol.certificate

    def test_quadrature_log_partition(self):
        # exponential family T(z) = z on the half line with reference e^{-z}: rate 1 - theta
        ref = exponential(1.0)
        fam = ExpFamily(lambda z: np.asarray(z), 0.0, ref, theta_max=0.5)
        sol = expfam_numeraire(fam, -1.0)
        # p_{-1} = Exp(2), p_0 = Exp(1): X* = 2 e^{-z}
        z = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(sol.numeraire(z), 2 * np.exp(-z), rtol=1e-8)
        assert sol.certificate, sol.certificate.failures()

    def test_first_order_exponents_nonpositive(self):
        fam = gaussian_location(0.0)
        e = foc_exponents(fam, -1.0, np.linspace(0, 10, 50))
        assert np.all(e <= 1e-15)
        assert e[0] == 0.0

    def test_parameter_order(self):
        with pytest.raises(PreconditionViolated):
            expfam_numeraire(gaussian_location(0.0), 0.0)
        with pytest.raises(PreconditionViolated):
            expfam_numeraire(gaussian_location(0.0), 1.0)

    def test_agrees_with_convex_hull_route(self):
        # two members of the null {theta >= 0}: the hull minimizer sits on p_0
        from numeraire.nullspec import FiniteMixture
        fam = gaussian_location(0.0)
        Q = normal(-1, 1)
        hull = FiniteMixture([normal(0, 1), normal(2, 1)])
        sol = solve_finite_null(Q, hull)
        np.testing.assert_allclose(sol.mixture_weights, [1.0, 0.0], atol=1e-9)
        z = np.linspace(-4, 2, 13)
        np.testing.assert_allclose(sol.numeraire.log(z), expfam_numeraire(fam, -1.0).numeraire.log(z),
                                   atol=1e-8)
