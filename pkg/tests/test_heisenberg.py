from math import pi

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from subrk.faa_di_bruno import composite_derivs
from subrk.heisenberg import HeisenbergParams, h_derivs, h_derivs_block, h_kernel, lambda_cutoff
from subrk.oracles import mixed_derivative


def _mp_h(d, t, r, z):
    # 30-digit quadrature; the integrand is below e^-60 past 60 / t
    with mpmath.workdps(30):
        t, r, z = mpmath.mpf(t), mpmath.mpf(r), mpmath.mpf(z)

        def f(lam):
            if lam == 0:
                return (1 / t) ** d * mpmath.exp(-r * r / (4 * t))
            u = lam * t
            return mpmath.cos(lam * z / 2) * (lam / mpmath.sinh(u)) ** d * mpmath.exp(-r * r * lam * mpmath.coth(u) / 4)

        val = mpmath.quad(f, mpmath.linspace(0, 60 / t, 61))
        return float(2 * val / (4 * mpmath.pi) ** (d + 1))


def test_origin_value():
    assert h_kernel(HeisenbergParams(1, 1.0), 0.0, 0.0) == pytest.approx(1 / 32, rel=1e-12)


@pytest.mark.parametrize("d,t,r,z", [(1, 1.0, 1.0, 0.5), (2, 0.5, 0.3, -1.2), (3, 2.0, 2.5, 2.0), (1, 0.25, 0.0, 3.0)])
def test_against_mpmath_oracle(d, t, r, z):
    assert h_kernel(HeisenbergParams(d, t), r, z) == pytest.approx(_mp_h(d, t, r, z), rel=1e-9)


@pytest.mark.parametrize("d", [1, 2])
def test_dilation(d):
    t, r, z = 0.25, 1.0, 0.5
    lhs = h_kernel(HeisenbergParams(d, t), r, z)
    rhs = t ** (-(d + 1)) * h_kernel(HeisenbergParams(d, 1.0), r / np.sqrt(t), z / t)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_z_derivative_vanishes_at_zero():
    assert h_derivs(HeisenbergParams(1, 1.0), 0.7, 0.0, 0, 1).value == 0.0


def test_r_derivative_against_fd():
    p = HeisenbergParams(1, 1.0)
    an = h_derivs(p, 1.0, 0.5, 1, 0).value
    fd = mixed_derivative(lambda r, z: h_kernel(p, r, z), 1.0, 0.5, 1, 0, h=0.05, levels=4)
    assert an == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("d", [1, 2])
def test_second_r_derivative_at_origin_isolates_one_term(d):
    t, z = 1.0, 0.4

    def f(lam):
        if lam == 0:
            return (1 / t) ** d * (1 / t)
        u = lam * t
        return np.cos(lam * z / 2) * (lam / np.sinh(u)) ** d * lam / np.tanh(u)

    integral = 2 * integrate.quad(f, 0, 200, epsabs=0, epsrel=1e-13, limit=400)[0]
    expected = -0.5 * integral / (4 * pi) ** (d + 1)
    assert h_derivs(HeisenbergParams(d, t), 0.0, z, 2, 0).value == pytest.approx(expected, rel=1e-9)


def test_order_cap():
    with pytest.raises(ValueError):
        h_derivs(HeisenbergParams(1, 1.0), 1.0, 0.0, 9, 0)


def test_normalization():
    p = HeisenbergParams(1, 1.0)
    rs, wr = np.polynomial.legendre.leggauss(40)
    total = 0.0
    # r in [0, 12], z in [-40, 40]: the kernel decays like e^{-r^2/4} and e^{-pi|z|/2}
    for lo, hi in zip(np.linspace(0, 12, 7)[:-1], np.linspace(0, 12, 7)[1:]):
        r = 0.5 * (hi - lo) * rs + 0.5 * (hi + lo)
        for rr, w in zip(r, 0.5 * (hi - lo) * wr):
            prof = integrate.quad(lambda z: h_kernel(p, rr, z), 0, 40, limit=200, epsrel=1e-10)[0] * 2
            total += 2 * pi * rr * w * prof
    assert total == pytest.approx(1.0, abs=1e-4)


def test_lambda_cutoff_leaves_small_tail():
    p = HeisenbergParams(2, 0.5)
    lam = lambda_cutoff(p, 1.0, 3)
    mag = lam ** (2 + 3) * np.exp(-(2 * 0.5) * lam)
    assert mag < 1e-10
    assert lam > 0


def test_block_matches_single_calls():
    p = HeisenbergParams(2, 0.7)
    vals, errs, imag = h_derivs_block(p, 0.8, -0.6, 3, 2)
    for i in range(4):
        for m in range(3):
            assert vals[i, m] == pytest.approx(h_derivs(p, 0.8, -0.6, i, m).value, rel=1e-12, abs=1e-16)
    assert np.all(imag < 1e-12)


@given(
    st.integers(1, 3),
    st.sampled_from([0.25, 1.0]),
    st.floats(0.0, 3.0),
    st.floats(-3.0, 3.0),
)
def test_positive_and_even(d, t, r, z):
    p = HeisenbergParams(d, t)
    a = h_kernel(p, r, z)
    assert a > 0
    assert h_kernel(p, r, -z) == pytest.approx(a, rel=1e-12)


@given(st.integers(1, 3), st.floats(0.2, 2.0), st.floats(0.1, 2.5), st.floats(-2.0, 2.0))
def test_imaginary_residual_small(d, t, r, z):
    kv = h_derivs(HeisenbergParams(d, t), r, z, 1, 1)
    assert kv.imag_residual < 1e-12
