import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from gpbound.elliptic import complete_K, ellip_F, jacobi_am, jacobi_sn_cn_dn
from gpbound.errors import DivergenceError, DomainError


def quad_F(phi, m):
    val, _ = integrate.quad(lambda t: 1.0 / math.sqrt(math.cos(t) ** 2 + (1.0 - m) * (1.0 + m) * math.sin(t) ** 2), 0.0, phi, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


moduli = st.floats(0.0, 0.999, allow_nan=False)


def test_F_examples():
    assert ellip_F(0.0, 0.7) == 0.0
    assert ellip_F(0.5, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert ellip_F(math.pi / 2, 0.6) == pytest.approx(quad_F(math.pi / 2, 0.6), abs=1e-13)


def test_K_examples():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert complete_K(0.5) == pytest.approx(quad_F(math.pi / 2, 0.5), abs=1e-13)
    with pytest.raises(DivergenceError):
        complete_K(1.0 - 1e-15)
    with pytest.raises(DomainError):
        complete_K(1.5)


@pytest.mark.parametrize("m", [0.0, 0.2, 0.6, 0.9, 0.999])
def test_K_agrees_with_F_at_quarter_period(m):
    assert abs(complete_K(m) - ellip_F(math.pi / 2, m)) <= 1e-12


def test_modulus_convention_matches_scipy_parameter():
    # scipy takes the parameter, which is the modulus squared
    phi, m = 1.1, 0.8
    assert ellip_F(phi, m) == pytest.approx(special.ellipkinc(phi, m * m), abs=1e-13)
    u = 0.7
    sn, cn, dn, _ = special.ellipj(u, m * m)
    t = jacobi_sn_cn_dn(u, m)
    assert (t.sn, t.cn, t.dn) == pytest.approx((sn, cn, dn), abs=1e-13)


def test_F_domain_errors():
    with pytest.raises(DomainError):
        ellip_F(0.3, -0.1)
    with pytest.raises(DomainError):
        ellip_F(math.inf, 0.3)
    with pytest.raises(DivergenceError):
        ellip_F(math.pi / 2, 1.0)
    assert ellip_F(0.5, 1.0) == pytest.approx(math.atanh(math.sin(0.5)), abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(phi=st.floats(-1.5, 1.5), m=moduli)
def test_F_against_quadrature(phi, m):
    assert ellip_F(phi, m) == pytest.approx(quad_F(phi, m), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(phi=st.floats(-1.5, 1.5), m=moduli)
def test_F_is_odd(phi, m):
    assert ellip_F(-phi, m) == pytest.approx(-ellip_F(phi, m), abs=1e-15)


def test_F_increasing_and_quasi_periodic():
    phi = np.linspace(-7, 7, 2001)
    F = ellip_F(phi, 0.8)
    assert np.all(np.diff(F) > 0)
    assert ellip_F(1.0 + math.pi, 0.8) == pytest.approx(ellip_F(1.0, 0.8) + 2 * complete_K(0.8), abs=1e-13)


def test_am_examples():
    assert jacobi_am(0.0, 0.4) == 0.0
    assert jacobi_am(1.3, 0.0) == pytest.approx(1.3, abs=1e-15)
    assert jacobi_am(ellip_F(0.9, 0.4), 0.4) == pytest.approx(0.9, abs=1e-14)


@pytest.mark.parametrize("m", [0.0, 1e-9, 0.3, 0.6, 0.9, 1 - 1e-8])
def test_am_round_trip(m):
    phi = np.linspace(-math.pi / 2, math.pi / 2, 2001)
    assert np.max(np.abs(jacobi_am(ellip_F(phi, m), m) - phi)) <= 1e-10


def test_am_period_shift():
    m = 0.7
    K = complete_K(m)
    u = np.linspace(-3, 3, 101)
    assert np.allclose(jacobi_am(u + 2 * K, m), jacobi_am(u, m) + math.pi, atol=1e-13)


@pytest.mark.parametrize("m", [0.0, 0.3, 0.6, 0.9, 1 - 1e-8])
def test_am_derivative_is_dn(m):
    u = np.linspace(-10, 10, 4001)
    h = 1e-5
    d = (jacobi_am(u + h, m) - jacobi_am(u - h, m)) / (2 * h)
    assert np.max(np.abs(d - jacobi_sn_cn_dn(u, m).dn)) <= 1e-8


def test_triple_examples():
    t = jacobi_sn_cn_dn(0.0, 0.3)
    assert (t.sn, t.cn, t.dn) == (0.0, 1.0, 1.0)
    t = jacobi_sn_cn_dn(1.2, 0.0)
    assert (t.sn, t.cn, t.dn) == pytest.approx((math.sin(1.2), math.cos(1.2), 1.0), abs=1e-15)
    t = jacobi_sn_cn_dn(0.8, 1.0)
    assert (t.sn, t.cn, t.dn) == pytest.approx((math.tanh(0.8), 1 / math.cosh(0.8), 1 / math.cosh(0.8)), abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(u=st.floats(-50, 50), m=st.floats(0.0, 1.0))
def test_identities_and_bounds(u, m):
    t = jacobi_sn_cn_dn(u, m)
    assert abs(t.sn**2 + t.cn**2 - 1) <= 1e-12
    assert abs(t.dn**2 + m * m * t.sn**2 - 1) <= 1e-12
    assert all(-1.0 <= v <= 1.0 for v in (t.sn, t.cn, t.dn))


def sn_ode_residual(m, u, h=1e-3):
    # five-point stencil; at h = 1e-4 the rounding floor eps/h^2 already exceeds 1e-8
    sn = lambda x: jacobi_sn_cn_dn(x, m).sn
    y = sn(u)
    d2 = (-sn(u + 2 * h) + 16 * sn(u + h) - 30 * y + 16 * sn(u - h) - sn(u - 2 * h)) / (12 * h * h)
    return np.max(np.abs(d2 - (2 * m * m * y**3 - (1 + m * m) * y)))


@pytest.mark.parametrize("m", [0.0, 0.3, 0.6, 1.0 - 1e-8])
def test_sn_solves_cubic_oscillator(m):
    assert sn_ode_residual(m, np.linspace(-10, 10, 2001)) <= 1e-8


def test_scaled_sn_residual_at_reference_point():
    # y = A sn(k tau - a; m) obeys y'' = -(1 + m^2) k^2 y + 2 m^2 k^2 y^3 / A^2
    A, k, a, m = 1.7, 1.3, 0.4, 0.6
    y = lambda t: A * jacobi_sn_cn_dn(k * t - a, m).sn
    h, t0 = 1e-3, (1.0 + a) / k
    d2 = (-y(t0 + 2 * h) + 16 * y(t0 + h) - 30 * y(t0) + 16 * y(t0 - h) - y(t0 - 2 * h)) / (12 * h * h)
    rhs = -(1 + m * m) * k * k * y(t0) + 2 * m * m * k * k * y(t0) ** 3 / A**2
    assert abs(d2 - rhs) <= 1e-8


@pytest.mark.parametrize("m,limit", [(1e-8, np.sin), (1 - 1e-8, np.tanh)])
def test_degenerate_limits(m, limit):
    u = np.linspace(-3, 3, 601)
    assert np.max(np.abs(jacobi_sn_cn_dn(u, m).sn - limit(u))) <= 1e-6


def test_near_one_F_against_quadrature():
    m = 1 - 1e-8
    assert ellip_F(1.4, m) == pytest.approx(quad_F(1.4, m), abs=1e-11)


def test_vectorised_and_scalar_agree():
    u = np.array([0.1, 2.0, -7.5])
    t = jacobi_sn_cn_dn(u, 0.5)
    for i, x in enumerate(u):
        assert jacobi_sn_cn_dn(float(x), 0.5).sn == t.sn[i]
    assert isinstance(jacobi_am(0.3, 0.2), float)
