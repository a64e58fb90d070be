import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from subrk.quadrature import gk21


def test_polynomial_exact():
    res = gk21(lambda x: x**20, [0.0, 1.0])
    assert res.value == pytest.approx(1 / 21, rel=1e-15)
    assert res.converged


def test_oscillatory_against_closed_form():
    # int_0^inf cos(w x) e^{-x^2} dx = sqrt(pi)/2 e^{-w^2/4}
    for w in (0.5, 5.0, 20.0):
        res = gk21(lambda x: np.cos(w * x) * np.exp(-x * x), [0.0, 9.0], rel_tol=1e-12, abs_tol=1e-300)
        assert res.value == pytest.approx(np.sqrt(np.pi) / 2 * np.exp(-w * w / 4), rel=1e-8, abs=1e-14)


def test_vector_integrand_componentwise():
    def f(x):
        return np.stack([np.sin(x), np.exp(x), x * 1j], axis=-1)

    res = gk21(f, [0.0, 0.5, 2.0])
    np.testing.assert_allclose(res.value, [1 - np.cos(2.0), np.exp(2.0) - 1, 2j], rtol=1e-13)


def test_endpoint_singularity_converges():
    res = gk21(lambda x: 1 / np.sqrt(x), [0.0, 1.0], rel_tol=1e-9, abs_tol=1e-300)
    assert res.value == pytest.approx(2.0, rel=1e-7)


def test_panel_cap_reports_nonconvergence():
    res = gk21(lambda x: np.sin(1 / (x + 1e-9)), [0.0, 1.0], rel_tol=1e-14, abs_tol=1e-300, max_panels=8)
    assert not res.converged


def test_rejects_empty_interval():
    with pytest.raises(ValueError):
        gk21(lambda x: x, [1.0, 1.0])


@given(st.floats(0.1, 10.0), st.floats(-3.0, 3.0), st.floats(0.1, 4.0))
def test_matches_scipy(a, b, c):
    f = lambda x: np.exp(-a * x) * np.cos(b * x) + c
    res = gk21(f, [0.0, 3.0], rel_tol=1e-12, abs_tol=1e-300)
    ref = integrate.quad(f, 0.0, 3.0, epsabs=0, epsrel=1e-13)[0]
    assert res.value == pytest.approx(ref, rel=1e-10)
