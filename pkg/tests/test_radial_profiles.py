import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from handle_forge import radial_profiles as rp
from handle_forge.errors import DomainError, SingularityError

RHOS = (0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001)
rho_st = st.floats(min_value=1e-3, max_value=0.1)


def test_xi_vanishes_at_vertical_tangent():
    assert rp.xi(0.01, 1e-8) == 0.0


def test_xi_matches_integrated_slope():
    # independent route: integrate xi' from rho^4 in the regular variable
    rho, r = 0.01, 0.01
    s_hi = math.sqrt(math.sqrt(r) - rho**2)
    val, _ = quad(lambda s: -rho / s * 4.0 * s * (s * s + rho**2), 0.0, s_hi, epsabs=1e-16)
    assert rp.xi(rho, r) == pytest.approx(val, rel=1e-12)
    assert rp.xi(rho, r) == pytest.approx(-4.222690024143378e-4, rel=1e-12)


def test_a_rho_value_and_consistency():
    assert rp.a_rho(0.01) == pytest.approx(3.988934006216957e-3, rel=1e-12)
    assert rp.xi(0.01, 0.2) == pytest.approx(-rp.a_rho(0.01), rel=1e-14)


def test_a_rho_asymptotics():
    # a_rho = 4/3 rho (2 sqrt(rho))^(3/4) (1 + o(1)): the ratio to rho^(11/8) tends to 4/3 2^(3/4)
    lim = 4.0 / 3.0 * 2.0**0.75
    ratios = [rp.a_rho(rho) / rho**1.375 for rho in (0.1, 0.01, 0.001, 1e-4)]
    gaps = [abs(x - lim) for x in ratios]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-2 * lim
    # a_rho / rho itself goes to 0, not to a positive constant
    assert rp.a_rho(1e-4) / 1e-4 < rp.a_rho(1e-2) / 1e-2


def test_xi_prime_values():
    assert rp.xi_prime(0.01, 0.01) == pytest.approx(-0.03163859985841664, rel=1e-12)
    assert rp.xi_prime(0.01, 4e-8) == pytest.approx(-1.0, rel=1e-12)


def test_xi_prime_singular_at_tangent():
    with pytest.raises(SingularityError):
        rp.xi_prime(0.01, 1e-8)


@pytest.mark.parametrize("rho", RHOS)
def test_ode_identity(rho):
    r = np.geomspace(rho**4, 1.0, 200)[1:]
    d1, d2 = rp.xi_prime(rho, r), rp.xi_second(rho, r)
    resid = np.abs(4.0 * d2 + d1 * (1.0 + d1 * d1) / r) / (1.0 + np.abs(d2))
    assert resid.max() < 1e-10


@pytest.mark.parametrize("rho", RHOS)
def test_inverse_identity(rho):
    r = np.geomspace(rho**4, 1.0, 200)
    back = rp.xi_inverse(rho, rp.xi(rho, r))
    assert np.max(np.abs(back - r) / np.maximum(r, 1.0)) < 1e-10


def test_xi_inverse_at_zero():
    assert rp.xi_inverse(0.01, 0.0) == pytest.approx(1e-8, rel=1e-14)
    assert rp.xi_inverse_d1(0.01, 0.0) == 0.0


@settings(max_examples=50, deadline=None)
@given(rho=rho_st, x=st.floats(min_value=0.0, max_value=1.0))
def test_inverse_derivatives_consistent(rho, x):
    # d r / d t of the inverse equals 1 / xi'(r)
    t = x * rp.xi(rho, 1.0)
    r = rp.xi_inverse(rho, t)
    if r <= rho**4 * (1 + 1e-6):
        return
    assert rp.xi_inverse_d1(rho, t) == pytest.approx(1.0 / rp.xi_prime(rho, r), rel=1e-7)
    # second derivative of the inverse: -xi'' / xi'^3
    expected = -rp.xi_second(rho, r) / rp.xi_prime(rho, r) ** 3
    assert rp.xi_inverse_d2(rho, t) == pytest.approx(expected, rel=1e-7)


@settings(max_examples=50, deadline=None)
@given(rho=rho_st, x=st.floats(min_value=0.0, max_value=1.0))
def test_xi_monotone_decreasing(rho, x):
    r1 = rho**4 + x * (1.0 - rho**4)
    r2 = min(1.0, r1 * 1.01 + 1e-12)
    assert rp.xi(rho, r2) <= rp.xi(rho, r1)


@pytest.mark.parametrize("bad", (0.0, -0.01, 0.2, float("nan")))
def test_rho_domain(bad):
    with pytest.raises(DomainError):
        rp.xi(bad, 0.5)


def test_r_domain():
    with pytest.raises(DomainError):
        rp.xi(0.01, 1e-9)
    with pytest.raises(DomainError):
        rp.xi(0.01, 1.5)


def test_t_domain():
    with pytest.raises(DomainError):
        rp.xi_inverse(0.01, 0.1)


def test_cutoff_bounds():
    b = rp.QUINTIC.check_bounds()
    assert b["ok"]
    assert b["min_d1"] == pytest.approx(-1.875, rel=1e-6)
    assert b["max_abs_d2"] == pytest.approx(10.0 / math.sqrt(3.0), rel=1e-4)


def test_cutoff_integral():
    val, _ = quad(rp.QUINTIC.value, 0.0, 1.0)
    assert rp.QUINTIC.integral(np.array(1.0)) == pytest.approx(val, rel=1e-14)
    assert val == pytest.approx(0.5, rel=1e-14)


def test_f_pieces():
    rho = 0.01
    assert rp.f(rho, 0.05) == pytest.approx(rp.xi(rho, 0.05) + rp.a_rho(rho), rel=1e-14)
    assert rp.f(rho, 0.25) == 0.0
    assert rp.f_prime(rho, 0.25) == 0.0
    assert rp.f_second(rho, 0.25) == 0.0


@pytest.mark.parametrize("rho", RHOS)
def test_blend_bound_chain(rho):
    sr = math.sqrt(rho)
    r = np.linspace(sr, 2.0 * sr, 401)
    assert np.abs(rp.f_prime(rho, r)).max() < 3.0 * math.sqrt(2.0) * rho**0.875
    assert np.abs(rp.f_second(rho, r)).max() < 15.0 * math.sqrt(2.0) * rho**0.375


@pytest.mark.parametrize("rho", (0.1, 0.01, 0.001))
def test_profile_joins_are_c1(rho):
    prof = rp.build_profile(rho)
    for name, jv, js in prof.c1_jumps():
        assert jv < 1e-12, name
        assert js < 1e-12, name


@pytest.mark.parametrize("rho", (0.1, 0.01, 0.001))
def test_segment_derivatives_by_differences(rho):
    prof = rp.build_profile(rho)
    for seg in prof.graph_segments():
        if seg.tag == "flat":
            continue
        # the raw step rule applies away from the vertical tangent; on
        # [rho^4, rho^2] roundoff in the offset a_rho dominates and the
        # oracle works in the variable s instead
        lo = rho * rho if seg.tag == "graph-xi" else seg.lo
        r = np.geomspace(lo, seg.hi, 52)[1:-1]
        h = 1e-5 * r
        d1 = (seg.value(r + h) - seg.value(r - h)) / (2.0 * h)
        npt.assert_allclose(d1, seg.d1(r), rtol=1e-6, atol=1e-9 * np.abs(seg.d1(r)).max())


def test_handle_params_gates():
    rp.HandleParams(0.1, R=rp.R_MAX)
    with pytest.raises(DomainError):
        rp.HandleParams(0.2)
    with pytest.raises(DomainError):
        rp.HandleParams(0.01, k=1)
    with pytest.raises(DomainError):
        rp.HandleParams(0.01, k=4, n=3)
    with pytest.raises(DomainError):
        rp.HandleParams(0.01, alpha=0.5)
    with pytest.raises(DomainError):
        rp.HandleParams(0.05, R=0.3)
    assert rp.HandleParams(0.01, n=5, kappa=0.1).kappa_tilde == pytest.approx(0.03)
