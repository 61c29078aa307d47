import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from handle_forge import monotonicity as mo
from handle_forge import revolution_geometry as rg
from handle_forge.errors import DomainError


@pytest.fixture(scope="module")
def spec():
    return mo.ReparamSpec(0.01)


def test_default_R_admits_rho1():
    for rho1 in mo.RHO1_GRID:
        R = mo.default_R(rho1)
        assert rho1 < R * R / 4.0


def test_identity_at_rho1(spec):
    tau = np.linspace(0.0, spec.d1, 101)
    assert spec.q(0.01) == 0.0
    npt.assert_array_equal(spec.phi(0.01, tau), tau)
    npt.assert_array_equal(spec.dphi(0.01, tau), 1.0)


def test_endpoints_fixed(spec):
    # phi maps [0, d_rho1] onto [0, d_rho]
    assert spec.phi(0.001, 0.0) == 0.0
    assert spec.phi(0.001, spec.d1) == pytest.approx(rg.d_rho(0.001, spec.R), rel=1e-12)


def test_beta_support():
    x = np.linspace(-1.0, 1.0, 2001)
    b = mo.beta(x)
    assert np.all(b[np.abs(x) >= 0.25] == 0.0)
    assert np.all(b[np.abs(x) < 0.25] > 0.0)
    assert mo.beta(0.0) == 1.0


def test_beta_integral():
    val, _ = quad(mo.beta, -0.5, 0.5, points=[-0.25, 0.0, 0.25])
    assert mo.beta_integral() == pytest.approx(val, rel=1e-12)
    assert val == pytest.approx(0.25, rel=1e-12)


@settings(max_examples=40)
@given(tau=st.floats(0.0, 1.2))
def test_beta_cumulative_matches_quadrature(tau):
    val, _ = quad(lambda s: mo.beta(s - 0.5), 0.0, tau, points=[0.25, 0.5, 0.75])
    assert float(mo.beta_cumulative(tau)) == pytest.approx(val, abs=1e-12)


def test_dphi_unit_outside_bump(spec):
    tau = np.concatenate([np.linspace(0.0, 0.25, 50), np.linspace(0.75, spec.d1, 50)])
    npt.assert_array_equal(spec.dphi(0.001, tau), 1.0)


@pytest.mark.parametrize("rho", (0.005, 0.002, 0.001))
def test_dphi_range(spec, rho):
    lo, hi, width = mo.dphi_bounds(spec, rho)
    assert lo == 1.0
    assert 1.0 < hi <= 1.0 + width * (1 + 1e-9)


def test_dphi_range_example(spec):
    _, hi, width = mo.dphi_bounds(spec, 0.001)
    assert hi == pytest.approx(1.01508, abs=1e-5)
    assert width == pytest.approx(0.015085, abs=1e-6)


def test_pullback_shape(spec):
    tau = np.linspace(0.0, spec.d1, 50)
    m = spec.pullback(0.001, tau)
    assert m.warp[0] == pytest.approx(spec.R**2)
    assert m.warp[-1] == pytest.approx(1e-12, rel=1e-6)
    assert np.all(m.dtau2 >= 1.0)


def test_pullback_at_rho1_is_warped_form(spec):
    tau = np.linspace(0.0, spec.d1, 50)
    wp = rg.WarpedProfile(0.01, spec.R)
    npt.assert_allclose(spec.pullback(0.01, tau).warp, wp.radius(tau) ** 2, rtol=1e-14)


def test_domain_errors(spec):
    with pytest.raises(DomainError):
        spec.phi(0.001, -0.1)
    with pytest.raises(DomainError):
        mo.ReparamSpec(0.1, R=0.5)
    with pytest.raises(DomainError):
        mo.check_monotone_euclidean(0.01, rho_grid=(0.02,))


def test_warp_entry_monotone_without_weight():
    assert mo.minimal_exponent(0.01, entry="warp") == 0.0


@pytest.mark.parametrize("rho1", mo.RHO1_GRID)
def test_minimal_exponent_routes_agree(rho1):
    # the FD scan and the bump-centre formula find the same binding value
    fd = mo.minimal_exponent(rho1, entry="dtau2")
    closed = mo.minimal_exponent_closed(rho1, rho1)
    assert fd == pytest.approx(closed, rel=1e-5)


def test_weighted_derivative_at_bump_centre():
    # at rho = rho1, phi' = 1 and beta = 1 at the centre, so the weighted dtau^2
    # derivative there is e^(c rho1) (c + 2 d'(rho1) / int beta)
    rep, rows = mo.check_monotone_euclidean(0.01, rho_grid=(0.01,), n_tau=401)
    spec = mo.ReparamSpec(0.01)
    tau = np.linspace(0.0, spec.d1, 401)
    i = int(np.argmin(np.abs(tau - 0.5)))
    centre = [r for r in rows if r["entry"] == "dtau2" and r["tau"] == tau[i]][0]
    dprime = rg.d_rho_derivative(0.01, spec.R)
    expected = math.exp(0.005) * (0.5 + 2.0 * float(mo.beta(tau[i] - 0.5)) * dprime / 0.25)
    assert centre["margin"] == pytest.approx(expected, rel=1e-4)


def test_unit_weight_is_worse():
    half, _ = mo.check_monotone_euclidean(0.01)
    zero, _ = mo.check_monotone_euclidean(0.01, exponent=0.0)
    assert zero.positive_fraction < half.positive_fraction
    assert zero.min_derivative < half.min_derivative


def test_large_exponent_passes():
    rep, _ = mo.check_monotone_euclidean(0.01, exponent=4.4)
    assert rep.passed


def test_final_path_small_scale():
    rep = mo.final_path_metrics(0.005, 0.005)
    assert rep.passed
    assert rep.lap_gap < 1e-12


def test_final_path_measured_values():
    rep = mo.final_path_metrics(0.01, 0.01)
    # the radial factor stays monotone in s
    assert 0.99 < rep.ds_min < 1.0
    assert rep.lap_gap < 1e-12
    # regression value: worst scalar curvature at s = 0 on the Euclidean blend
    assert rep.scal_location[0] == 0.0
    assert rep.scal_min == pytest.approx(-0.33013, abs=1e-5)
    assert rep.scal_min < rep.scal_bound
