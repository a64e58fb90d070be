from fractions import Fraction
from math import factorial, pi

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from subrk.special_functions import (
    LEMMA_BOUND_CONSTANTS,
    DerivFamily,
    DomainError,
    RecurrencePolys,
    a_derivs,
    acos_sq_derivs,
    acos_sq_limit,
    acos_sq_series_coeffs,
    acosh_sq_derivs,
    combined_exponent,
    cos_acosh_limit,
    fused_exponent,
    lemma_bound,
    trig_hyp_derivs,
    trig_hyp_derivs_recurrence,
)

mp.mp.dps = 50


def _dfact(n):
    out = 1
    for k in range(n, 0, -2):
        out *= k
    return out


def mp_derivs(f, x, n):
    return [float(mp.diff(f, mp.mpf(x), k)) for k in range(n + 1)]


# -- arccos^2 / arccosh^2 ---------------------------------------------------


def test_acos_sq_examples():
    d = acos_sq_derivs(1.0, 3)
    assert d[0] == 0.0
    assert abs(d[2]) == pytest.approx(2 / 3, rel=1e-14)
    assert abs(d[3]) == pytest.approx(8 / 15, rel=1e-14)
    assert acos_sq_derivs(0.0, 1)[1] == pytest.approx(-pi, rel=1e-15)


@pytest.mark.parametrize("n", range(1, 9))
def test_acos_sq_limit_magnitude(n):
    exact = Fraction(2 * factorial(n - 1) ** 2, _dfact(2 * n - 1))
    assert abs(acos_sq_limit(n)) == exact
    val = acos_sq_derivs(1.0 - 1e-13, n)[n]
    assert abs(val) == pytest.approx(float(exact), rel=1e-8)
    # calculus sign
    assert np.sign(val) == (-1) ** n


@pytest.mark.parametrize("x", [-0.9, -0.3, 0.0, 0.4, 0.8, 0.97, 0.999, 0.99999])
def test_acos_sq_against_mpmath(x):
    ref = mp_derivs(lambda y: mp.acos(y) ** 2, x, 8)
    ours = acos_sq_derivs(x, 8)
    for k in range(9):
        assert ours[k] == pytest.approx(ref[k], rel=1e-10, abs=1e-12 * max(1.0, abs(ref[k])))


@pytest.mark.parametrize("x", [1.00001, 1.001, 1.3, 2.0, 10.0, 1e3])
def test_acosh_sq_against_mpmath(x):
    ref = mp_derivs(lambda y: mp.acosh(y) ** 2, x, 8)
    ours = acosh_sq_derivs(x, 8)
    for k in range(9):
        assert ours[k] == pytest.approx(ref[k], rel=1e-10, abs=1e-300)


def test_acosh_sq_examples():
    d = acosh_sq_derivs(1.0, 1)
    assert d[0] == 0.0
    assert abs(d[1]) == pytest.approx(2.0, rel=1e-15)
    big = acosh_sq_derivs(1e6, 1)[1]
    assert big == pytest.approx(2 * np.arccosh(1e6) / np.sqrt(1e12 - 1), rel=1e-12)
    assert big < 1e-4


def test_domain_errors():
    with pytest.raises(DomainError):
        acos_sq_derivs(1.5, 2)
    with pytest.raises(DomainError):
        acosh_sq_derivs(0.5, 2)
    with pytest.raises((DomainError, ValueError)):
        DerivFamily("cos_K_acosh", -1.0)
    with pytest.raises(DomainError):
        combined_exponent(1.0, 1.0, 0.0)


def test_series_coefficients():
    c = acos_sq_series_coeffs(8)
    assert c[0] == 0
    for n in range(1, 9):
        assert c[n] == Fraction(2 * factorial(n - 1) ** 2, _dfact(2 * n - 1) * factorial(n))


def test_unified_a_is_continuous_across_one():
    lo = a_derivs(None, 6, v=np.array(-1e-10))
    hi = a_derivs(None, 6, v=np.array(1e-10))
    for k in range(7):
        assert float(lo[k]) == pytest.approx(float(hi[k]), rel=1e-8, abs=1e-9)


# -- recurrence polynomials ----------------------------------------------------


@pytest.mark.parametrize("kind", ["acos", "acosh"])
def test_recurrence_identity_exact(kind):
    x = sp.symbols("x")
    polys = RecurrencePolys.build(kind, 12)
    if kind == "acos":
        s, a = sp.sqrt(1 - x**2), sp.acos(x)
    else:
        s, a = sp.sqrt(x**2 - 1), sp.acosh(x)

    def f(n):
        p = sum(sp.Integer(c) * x**i for i, c in enumerate(polys.p[n]))
        q = sum(sp.Integer(c) * x**i for i, c in enumerate(polys.q[n]))
        return (p * s + q * a) / s ** (2 * n - 1)

    pts = (sp.Rational(1, 3), sp.Rational(-2, 5)) if kind == "acos" else (sp.Rational(3, 2), sp.Integer(4))
    # the identity is polynomial in (x, s, a); compare at exact rational points
    checks = [sp.diff(a**2, x) - f(1)] + [sp.diff(f(n), x) - f(n + 1) for n in range(1, 12)]
    for expr in checks:
        for x0 in pts:
            assert abs(sp.N(expr.subs(x, x0), 40)) < 1e-30


def test_recurrence_degrees():
    polys = RecurrencePolys.build("acos", 12)
    for n in range(2, 13):
        assert len([c for c in polys.p[n]]) - 1 <= n - 2 or all(c == 0 for c in polys.p[n][n - 1:])
        assert len(polys.q[n]) - 1 <= n - 1


@pytest.mark.parametrize("kind", ["cosh_K_acos", "cos_K_acosh"])
def test_recurrence_route_matches_main_route(kind):
    fam = DerivFamily(kind, 3.0)
    xs = np.array([0.2, 0.5, 0.8]) if kind == "cosh_K_acos" else np.array([1.2, 2.0, 5.0])
    a = trig_hyp_derivs(fam, xs, 6)
    b = trig_hyp_derivs_recurrence(fam, xs, 6)
    for k in range(7):
        np.testing.assert_allclose(a[k], b[k], rtol=1e-9)


# -- trig / hyperbolic families ----------------------------------------------

MP_FUN = {
    "cosh_K_acos": lambda K: lambda y: mp.cosh(K * mp.acos(y)),
    "cos_K_acosh": lambda K: lambda y: mp.cos(K * mp.acosh(y)),
    "sinhc_K_acos": lambda K: lambda y: mp.sinh(K * mp.acos(y)) / mp.acos(y),
    "sinc_K_acosh": lambda K: lambda y: mp.sin(K * mp.acosh(y)) / mp.acosh(y),
}


@pytest.mark.parametrize("kind", list(MP_FUN))
@pytest.mark.parametrize("K", [1.0, 5.0, 20.0])
def test_trig_hyp_against_mpmath(kind, K):
    xs = [0.05, 0.5, 0.95, 0.9999] if "acos" in kind and "acosh" not in kind else [1.0001, 1.05, 1.5, 2.4]
    for x in xs:
        ref = mp_derivs(MP_FUN[kind](K), x, 6)
        ours = trig_hyp_derivs(DerivFamily(kind, K), x, 6)
        scale = max(abs(r) for r in ref)
        for k in range(7):
            assert float(ours[k]) == pytest.approx(ref[k], rel=1e-9, abs=1e-12 * scale)


def test_trig_hyp_examples():
    assert float(cos_acosh_limit(2, 2.0)) == pytest.approx(20 / 3, rel=1e-15)
    vals = trig_hyp_derivs(DerivFamily("cos_K_acosh", 2.0), 1.0 + 1e-12, 2)
    assert abs(float(vals[2])) == pytest.approx(20 / 3, rel=1e-8)
    assert float(trig_hyp_derivs(DerivFamily("cosh_K_acos", 4.0), 1.0, 0)[0]) == 1.0
    K = 3.0
    v = float(trig_hyp_derivs(DerivFamily("sinhc_K_acos", K), 0.0, 0)[0])
    assert v == pytest.approx(np.sinh(K * pi / 2) / (pi / 2), rel=1e-14)


@pytest.mark.parametrize("K", [1.0, 3.0, 10.0])
@pytest.mark.parametrize("n", range(1, 6))
def test_cos_acosh_limit(K, n):
    prod = 1.0
    for m in range(n):
        prod *= K * K + m * m
    assert abs(cos_acosh_limit(n, K)) == pytest.approx(prod / _dfact(2 * n - 1), rel=1e-14)


def test_frozen_constants_shape():
    for kind, cs in LEMMA_BOUND_CONSTANTS.items():
        assert len(cs) == 7
        assert all(c > 0 for c in cs)


@given(
    st.sampled_from(["cosh_K_acos", "sinhc_K_acos"]),
    st.sampled_from([1.0, 5.0, 20.0]),
    st.floats(0.0, 0.999999),
    st.integers(0, 6),
)
def test_calibrated_bounds_trig_side(kind, K, x, n):
    val = abs(float(trig_hyp_derivs(DerivFamily(kind, K), x, n)[n]))
    assert val <= lemma_bound(kind, n, K)


@given(st.sampled_from([1.0, 5.0, 20.0]), st.floats(1.000001, float(np.cosh(pi / 2))), st.integers(0, 6))
def test_calibrated_bounds_hyp_side(K, x, n):
    val = abs(float(trig_hyp_derivs(DerivFamily("sinc_K_acosh", K), x, n)[n]))
    assert val <= lemma_bound("sinc_K_acosh", n, K)


@given(st.sampled_from([1.0, 3.0, 10.0]), st.floats(1.0, 1e5), st.integers(1, 5))
def test_cos_acosh_bounded_by_limit(K, x, n):
    val = abs(float(trig_hyp_derivs(DerivFamily("cos_K_acosh", K), x, n)[n]))
    assert val <= abs(cos_acosh_limit(n, K)) * (1 + 1e-9)


# -- combined exponent ----------------------------------------------------------


def test_combined_exponent_examples():
    for lam in (0.1, 1.0, 3.0):
        assert combined_exponent(0.5, 0.0, lam) == 0.0
    ref = -(1.0 / np.tanh(1.0)) / 4
    assert combined_exponent(1e-4, 1.0, 1.0) == pytest.approx(ref, abs=1e-3)


def _mp_combined(t, r, lam):
    arg = mp.cos(mp.sqrt(t) * r) * mp.cosh(lam)
    return float((mp.acosh(arg) ** 2 - mp.mpf(lam) ** 2) / (4 * t))


@given(st.floats(1e-4, 1.0), st.floats(0.0, 1.4), st.floats(0.5, 6.0))
def test_combined_exponent_matches_extended_precision(t, r, lam):
    if np.sqrt(t) * r >= np.pi / 2 or np.cos(np.sqrt(t) * r) * np.cosh(lam) < 1 + 1e-6:
        return
    ours = combined_exponent(t, r, lam)
    ref = _mp_combined(t, r, lam)
    assert ours <= 0
    assert ours == pytest.approx(ref, rel=1e-8, abs=1e-14)


@given(st.floats(1e-3, 1.4), st.floats(-8.0, 8.0), st.floats(0.01, 2.0))
def test_fused_exponent_nonpositive_and_accurate(rho, lam, t):
    E, v = fused_exponent(rho, np.array([lam]), t)
    x = mp.cos(rho) * mp.cosh(lam)
    A = mp.acos(x) ** 2 if x <= 1 else -mp.acosh(x) ** 2
    ref = float(-(A + mp.mpf(lam) ** 2) / (4 * t))
    assert float(E[0]) <= 1e-15
    assert float(E[0]) == pytest.approx(ref, rel=1e-9, abs=1e-13)
