import numpy as np
import pytest

from numeraire.closed_form import gaussian_location
from numeraire.errors import PreconditionViolated, UnsupportedNull
from numeraire.measures import discrete, normal
from numeraire.nullspec import (BoundedMean, CustomGenerated, EVariable, FiniteMixture,
                                SubGaussian, Symmetric, effective_null_membership, is_evariable)


class TestEVariable:
    def test_needs_exactly_one_form(self):
        with pytest.raises(ValueError):
            EVariable()
        with pytest.raises(ValueError):
            EVariable(np.abs, log_fn=np.abs)

    def test_log_and_value_agree(self):
        X = EVariable(log_fn=lambda z: z)
        z = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(X(z), np.exp(z))

    def test_table_default(self):
        X = EVariable.table([2.0, 0.0], [5.0, 3.0], default=0.0)
        np.testing.assert_array_equal(X([0.0, 1.0, 2.0]), [3.0, 0.0, 5.0])

    def test_mix_in_log_space(self):
        a = EVariable(log_fn=lambda z: np.full(np.shape(z), 800.0))
        b = EVariable.constant(1.0)
        m = EVariable.mix([a, b], [0.5, 0.5])
        assert m.log(np.array([0.0]))[0] == pytest.approx(800.0 + np.log(0.5))

    def test_scaled(self):
        X = EVariable.constant(2.0).scaled(0.25)
        assert X(np.array([1.0]))[0] == pytest.approx(0.5)


class TestIsEvariable:
    def test_constant_one_passes_every_null(self):
        one = EVariable.constant(1.0)
        nulls = [FiniteMixture([normal(0, 1)]), BoundedMean(0.3), SubGaussian(1.0), Symmetric(),
                 gaussian_location(0.0)]
        for null in nulls:
            assert is_evariable(one, null, alternative=normal(1, 1))

    def test_constant_two_fails(self):
        cert = is_evariable(EVariable.constant(2.0), FiniteMixture([discrete([0], [1.0])]))
        assert not cert
        assert cert["evariable"].residual == pytest.approx(1.0)

    def test_bounded_mean_generator(self):
        null = BoundedMean(0.3)
        for lam in (0.0, 1.0, 1 / 0.3):
            X = EVariable(lambda z, lam=lam: 1 + lam * (z - 0.3))
            assert is_evariable(X, null)
        bad = EVariable(lambda z: 1 + 0.5 * z)
        assert not is_evariable(bad, null)

    def test_subgaussian_generator(self):
        X = EVariable(log_fn=lambda z: z - 0.5)
        assert is_evariable(X, SubGaussian(1.0), alternative=normal(1, 1))

    def test_symmetric_odd_perturbation(self):
        X = EVariable(lambda z: 1 + np.tanh(z))
        assert is_evariable(X, Symmetric(), alternative=normal(1, 1))
        assert not is_evariable(EVariable(lambda z: 1 + np.abs(np.tanh(z))), Symmetric(),
                                alternative=normal(1, 1))

    def test_custom_without_oracle(self):
        null = CustomGenerated(lambda p, z: np.zeros((1, np.size(z))), [0.0])
        with pytest.raises(UnsupportedNull):
            is_evariable(EVariable.constant(1.0), null)


class TestPreconditions:
    def test_bounded_mean_range(self):
        for mu in (0.0, 0.5, 0.7):
            with pytest.raises(PreconditionViolated):
                BoundedMean(mu)

    def test_sigma_positive(self):
        with pytest.raises(PreconditionViolated):
            SubGaussian(0.0)


class TestMembership:
    def test_inside_hull(self):
        null = FiniteMixture([discrete([0, 1], [1.0, 0.0]), discrete([0, 1], [0.0, 1.0])])
        m = effective_null_membership(discrete([0, 1], [0.3, 0.7]), null)
        assert m
        np.testing.assert_allclose(m.weights, [0.3, 0.7], atol=1e-9)

    def test_dominated_subprobability(self):
        null = FiniteMixture([discrete([0, 1], [0.5, 0.5])])
        assert effective_null_membership(discrete([0, 1], [0.4, 0.1], check_mass=False), null)

    def test_outside(self):
        null = FiniteMixture([discrete([0, 1], [0.5, 0.5])])
        m = effective_null_membership(discrete([0, 1], [0.9, 0.1]), null)
        assert not m
        assert m.separating_point == 0.0

    def test_density_unsupported(self):
        with pytest.raises(UnsupportedNull):
            effective_null_membership(normal(), FiniteMixture([normal()]))
