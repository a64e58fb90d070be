from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from subrk.errors import DomainError
from subrk.harness import su2_normalization
from subrk.heisenberg import HeisenbergParams, h_derivs, h_kernel
from subrk.oracles import mixed_derivative
from subrk.quadrature import gk21
from subrk.riemannian import q_su2_theta
from subrk.subelliptic import (
    QuadratureConfig,
    SubellipticPoint,
    _make_integrand,
    p_block,
    p_derivs,
    p_profile,
    p_sphere,
    p_su2,
    split_lambda,
)

CFG = QuadratureConfig()


def _gl(n, a, b, panels):
    x, w = np.polynomial.legendre.leggauss(n)
    e = np.linspace(a, b, panels + 1)
    xs = np.concatenate([0.5 * (h - l) * x + 0.5 * (h + l) for l, h in zip(e[:-1], e[1:])])
    ws = np.concatenate([0.5 * (h - l) * w for l, h in zip(e[:-1], e[1:])])
    return xs, ws


def test_point_validation():
    with pytest.raises(DomainError):
        SubellipticPoint(pi / 2, 0.0, 1.0)
    with pytest.raises(DomainError):
        SubellipticPoint(0.5, 4.0, 1.0)
    with pytest.raises(DomainError):
        SubellipticPoint(0.5, 0.0, 0.0)
    with pytest.raises(DomainError):
        SubellipticPoint(0.5, 0.0, 1.0, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(gaussian_substitution_t_switch=0.5)


@given(st.floats(0.0, 1.2), st.floats(-pi, pi), st.sampled_from([0.1, 0.5]))
def test_positive_and_even(r, z, t):
    blk = p_block(SubellipticPoint(r, z, t), CFG)
    a, err = float(blk.values[0, 0]), float(blk.err_estimate[0, 0])
    b = p_su2(SubellipticPoint(r, -z, t), CFG).value
    # positive within the reported error; strictly positive wherever resolved
    assert a > -err
    if blk.resolved():
        assert a > 0
        assert a == pytest.approx(b, rel=1e-9)
    else:
        assert abs(a - b) <= 2 * err


def test_unresolved_region_is_flagged():
    blk = p_block(SubellipticPoint(0.0, 3.0, 0.1), CFG)
    assert not blk.resolved()
    assert p_block(SubellipticPoint(0.3, 1.0, 0.1), CFG).resolved()


@pytest.mark.parametrize("t", [0.1, 0.5])
def test_haar_normalization(t):
    assert su2_normalization(t, CFG) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("t,r,z", [(0.2, 0.5, 0.3), (0.5, 1.0, -1.0), (1.0, 1.3, 2.0)])
def test_split_integral_equals_unsplit_theta_integral(t, r, z):
    def g(lam):
        x = np.cos(r) * np.cosh(lam)
        q = float(q_su2_theta(t, x + 0j if x > 1 else x))
        return np.exp(-lam * lam / (4 * t)) * np.cos(lam * z / (2 * t)) * q

    raw = integrate.quad(g, 0, 40 * sqrt(t) + 5, limit=400, epsabs=0, epsrel=1e-12)[0]
    ref = np.exp(z * z / (4 * t)) / sqrt(4 * pi * t) * 2 * raw
    assert p_su2(SubellipticPoint(r, z, t), CFG).value == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("t", [0.02, 0.005, 0.001])
def test_substitution_and_direct_paths_agree(t):
    for r, z in ((0.5, 0.2), (1.0, 1.0)):
        pt = SubellipticPoint(sqrt(t) * r, t * z, t)
        a = p_block(pt, QuadratureConfig(substitution=True), 2, 2).values
        b = p_block(pt, QuadratureConfig(substitution=False), 2, 2).values
        np.testing.assert_allclose(a, b, rtol=1e-8)


def test_zero_order_limit_su2():
    t, r, z = 1e-3, 1.0, 0.5
    val = t * t * p_su2(SubellipticPoint(sqrt(t) * r, t * z, t), CFG).value
    target = 2 * pi**2 * h_kernel(HeisenbergParams(1, 1.0), r, z)
    assert val / target == pytest.approx(1.0, abs=0.05)


def test_first_r_derivative_limit_su2():
    t, r, z = 1e-3, 1.0, 0.5
    blk = p_block(SubellipticPoint(sqrt(t) * r, t * z, t), CFG, 1, 0)
    val = t * t * sqrt(t) * blk.values[1, 0]
    target = 2 * pi**2 * h_derivs(HeisenbergParams(1, 1.0), r, z, 1, 0).value
    assert val / target == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("t,r,z", [(0.1, 0.2, 0.1), (0.5, 0.8, -1.0), (1.0, 1.3, 2.5), (0.05, 1.0, 0.5)])
def test_sphere_d1_is_su2_over_pi2(t, r, z):
    pt = SubellipticPoint(r, z, t)
    a, b = p_sphere(pt, CFG).value, p_su2(pt, CFG).value / pi**2
    # far out in z the oscillatory integral is conditioned to about 1e-8
    tol = 1e-10 if abs(z) / t < 10 else 1e-7
    assert a == pytest.approx(b, rel=tol)


def test_zero_order_limit_sphere_d2():
    t, r, z, d = 1e-3, 0.8, 0.3, 2
    rs = float(np.arctan(sqrt(t) * r))
    val = t ** (d + 1) * p_sphere(SubellipticPoint(rs, t * z, t, d), CFG).value
    assert val / (2 * h_kernel(HeisenbergParams(d, 1.0), r, z)) == pytest.approx(1.0, abs=0.05)


def test_sphere_mass_constant_in_time():
    rs, wr = _gl(20, 0.0, pi / 2, 4)
    zs, wz = _gl(20, -pi, pi, 16)
    masses = []
    for t in (0.25, 0.5, 1.0):
        tot = 0.0
        for r, w in zip(rs, wr):
            tot += w * np.sin(r) ** 3 * np.cos(r) * float(np.dot(wz, p_profile(float(r), zs, t, CFG, d=2, sphere=True)))
        masses.append(tot)
    assert max(masses) == pytest.approx(min(masses), rel=1e-5)


def test_profile_matches_pointwise():
    zs = np.array([-1.0, 0.0, 0.7])
    prof = p_profile(0.6, zs, 0.4, CFG)
    for z, v in zip(zs, prof):
        assert v == pytest.approx(p_su2(SubellipticPoint(0.6, float(z), 0.4), CFG).value, rel=1e-9)


def test_z_derivative_zero_at_z0():
    kv = p_derivs(SubellipticPoint(0.7, 0.0, 0.3), CFG, 0, 1)
    assert abs(kv.value) < 1e-14


def test_r_derivative_against_fd():
    t, r, z = 0.3, 0.7, 0.4
    tight = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-300)
    an = p_derivs(SubellipticPoint(r, z, t), CFG, 1, 0).value
    fd = mixed_derivative(lambda rr, zz: p_su2(SubellipticPoint(rr, zz, t), tight).value, r, z, 1, 0, h=0.05 * sqrt(t), levels=4)
    assert an == pytest.approx(fd, rel=1e-6)


def test_order_cap():
    with pytest.raises(ValueError):
        p_block(SubellipticPoint(0.5, 0.0, 0.5), CFG, 9, 0)
    with pytest.raises(ValueError):
        p_block(SubellipticPoint(0.5, 0.0, 0.5), CFG, component="bogus")


def test_imaginary_residual_small():
    blk = p_block(SubellipticPoint(0.7, 0.4, 0.3), CFG, 3, 3)
    assert np.all(blk.imag_residual < 1e-10)


# -- remainder and branch shares ---------------------------------------------------


def _remainder_share(t, max_order, points):
    worst = 0.0
    for r, z in points:
        pt = SubellipticPoint(sqrt(t) * r, t * z, t)
        full = p_block(pt, CFG, max_order, max_order)
        rem = p_block(pt, CFG, max_order, max_order, component="remainder")
        for i in range(max_order + 1):
            for m in range(max_order + 1 - i):
                if abs(full.values[i, m]) < 1e-12 * abs(full.values[0, 0]):
                    continue  # parity zero
                worst = max(worst, abs(rem.values[i, m] / full.values[i, m]))
    return worst


POINTS = ((0.5, 0.0), (1.0, 0.5), (0.3, 1.0))


def test_remainder_negligible_first_derivatives_t03():
    assert _remainder_share(0.3, 1, POINTS) < 1e-10


@pytest.mark.parametrize("t", [0.25, 0.1, 0.01])
def test_remainder_negligible_four_derivatives(t):
    assert _remainder_share(t, 4, POINTS) < 1e-10


def test_remainder_share_at_t03_high_order_is_measured_not_assumed():
    # second and higher r-derivatives at t = 0.3 sit a little above 1e-10
    share = _remainder_share(0.3, 4, POINTS)
    assert 1e-10 < share < 1e-8


def _branch_ratio(t, r, z):
    pt = SubellipticPoint(sqrt(t) * r, t * z, t)
    half = _make_integrand(pt, 1, 0, False, "full", 10)

    def f(lam):
        both = half(np.concatenate([lam, -lam]))
        return both[: lam.size] + both[lam.size :]

    ls = split_lambda(pt.r)
    i1 = gk21(f, [0.0, ls], 1e-12, 1e-300).value.real
    i2 = gk21(f, [ls, ls + 20 * sqrt(t) + 2], 1e-12, 1e-300).value.real
    return np.abs(i1) / np.abs(i2)


def test_trig_branch_share_vanishes_like_sqrt_t():
    r, z = 1.0, 0.5
    ratios = [_branch_ratio(t, r, z) for t in (1e-2, 1e-3, 1e-4)]
    for t, rat in zip((1e-2, 1e-3, 1e-4), ratios):
        assert np.all(rat / (sqrt(t) * r) < 1.0)
    # one decade in t is a factor sqrt(10) in the share
    assert np.all(ratios[1] < ratios[0] / 2.5)
    assert np.all(ratios[2] < ratios[1] / 2.5)
