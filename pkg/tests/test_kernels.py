import numpy as np
import pytest

from numeraire import kernels
from numeraire.kernels import python_backend

compiled = kernels.compiled_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled backend not built")


def instance(rng, n, m):
    return rng.dirichlet(np.ones(m), size=n), rng.dirichlet(np.ones(m))


class TestPythonKernels:
    def test_em_reaches_fixed_point(self, rng):
        P, q = instance(rng, 3, 5)
        lam, done, residual, trace = python_backend.em_steps(P, q, np.full(3, 1 / 3), 100_000, 1e-10)
        assert residual <= 1e-10
        assert np.all(np.diff(trace) <= 1e-15)
        np.testing.assert_allclose(lam.sum(), 1.0)

    def test_grid_search_two_components(self):
        P = np.array([[1.0, 0.0], [0.0, 1.0]])
        q = np.array([0.3, 0.7])
        lam, val = python_backend.simplex_grid_search(P, q, 10)
        np.testing.assert_allclose(lam, [0.3, 0.7])
        assert val == pytest.approx(0.3 * np.log(0.3) + 0.7 * np.log(0.7))

    def test_composition_count(self):
        from math import comb
        assert python_backend._compositions(3, 7).shape == (comb(9, 2), 3)


@needs_compiled
class TestBackendEquivalence:
    @pytest.mark.parametrize("n, m", [(1, 3), (2, 4), (4, 6)])
    def test_em_steps(self, rng, n, m):
        P, q = instance(rng, n, m)
        lam0 = np.full(n, 1 / n)
        a = python_backend.em_steps(P, q, lam0, 500, 1e-12)
        b = compiled.em_steps(P, q, lam0, 500, 1e-12)
        np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=1e-14)
        assert a[1] == b[1]
        np.testing.assert_allclose(a[3], b[3], rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("n, K", [(1, 5), (2, 50), (3, 40), (4, 12)])
    def test_grid_search(self, rng, n, K):
        P, q = instance(rng, n, 5)
        la, va = python_backend.simplex_grid_search(P, q, K)
        lb, vb = compiled.simplex_grid_search(P, q, K)
        assert va == pytest.approx(vb, abs=1e-13)
        np.testing.assert_allclose(la, lb)


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, NUMERAIRE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from numeraire import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
