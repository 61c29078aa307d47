import json

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handle_forge import fd_oracle as fo
from handle_forge import handle_builder as hb
from handle_forge import radial_profiles as rp
from handle_forge.errors import StencilError, ToleranceExceeded


def test_constant_has_zero_derivatives():
    d1, d2 = fo.fd_derivatives(lambda x: 3.0 + 0.0 * x, np.linspace(1.0, 2.0, 5))
    assert np.all(d1 == 0.0) and np.all(d2 == 0.0)


def test_quadratic_second_derivative():
    x = np.linspace(0.5, 2.0, 7)
    d1, d2 = fo.fd_derivatives(lambda r: r * r, x, h_rule=lambda r: 1e-3 * r)
    npt.assert_allclose(d1, 2.0 * x, rtol=1e-12)
    npt.assert_allclose(d2, 2.0, rtol=1e-6)


@settings(max_examples=30)
@given(a=st.floats(0.1, 3.0), b=st.floats(-2.0, 2.0))
def test_richardson_exact_on_cubics(a, b):
    x = np.linspace(0.5, 1.5, 5)
    d1, d2 = fo.fd_derivatives(
        lambda r: a * r**3 + b * r, x, h_rule=lambda r: 1e-2 + 0 * r, richardson=True
    )
    npt.assert_allclose(d1, 3 * a * x**2 + b, rtol=1e-9)
    npt.assert_allclose(d2, 6 * a * x, rtol=1e-6)


def test_slope_example():
    seg = rp.build_profile(0.01).segment("graph-xi")
    d1, _ = fo.fd_derivatives(seg.value, np.array([0.01]))
    assert d1[0] == pytest.approx(-0.03163859985841664, rel=1e-6)


def test_stencil_outside_domain():
    with pytest.raises(StencilError):
        fo.fd_derivatives(np.sin, np.array([0.0]), h_rule=lambda x: 0.1 + 0 * x, domain=(0.0, 1.0))


def test_tangent_point_has_no_stencil():
    prof = rp.build_profile(0.01)
    with pytest.raises(StencilError):
        fo.fd_graph_xi(prof, np.array([1e-8]), 3)


def closed_and_fd(rho, tag):
    h = hb.build(rp.HandleParams(rho, R=rp.R_MAX if rho >= 0.1 else 0.5))
    closed = h.sample(tag)
    r = closed.r
    if tag != "graph-xi":
        keep = (r > closed.r.min()) & (r < closed.r.max())
        closed = fo._subset(closed, keep)
    return h.profile, closed, fo.fd_curvatures(h.profile, tag, closed.r, 3)


@pytest.mark.parametrize("rho", (0.1, 0.01, 0.001))
@pytest.mark.parametrize("tag", ("graph-xi", "graph-blend"))
def test_closed_form_agrees(rho, tag):
    _, closed, fd = closed_and_fd(rho, tag)
    for rep in fo.compare(closed, fd, tol=1e-6):
        if np.any(getattr(closed, rep.quantity)):
            assert rep.passed, (rep.quantity, rep.max_rel_error)


def test_corner_blend_agrees():
    h = hb.smooth_corner(hb.build(rp.HandleParams(0.01, R=0.5)))
    b = h.corner
    s = hb.blend_grid(b, 200)[1:-1]
    closed = b.curvatures(s, 3)
    # difference g rather than rho^4 + g: the offset swamps g near s = 0.
    # Only the offset-free quantities are compared
    fd = fo.fd_depth(b.g, s, h.a, 3, h_rule=fo.segment_h(0.0, b.w, 1e-2))
    for rep in fo.compare(closed, fd, tol=1e-6, quantities=("lambda1", "nu_t", "nu_tan")):
        assert rep.passed, (rep.quantity, rep.max_rel_error)


def test_mutation_is_detected():
    _, closed, fd = closed_and_fd(0.01, "graph-xi")
    bad = closed.perturbed("lambda1", 1e-3)
    with pytest.raises(ToleranceExceeded):
        fo.compare(bad, fd, tol=1e-6, raise_on_fail=True)


@pytest.mark.parametrize("tag", ("graph-xi", "graph-blend"))
def test_second_order_convergence(tag):
    prof, closed, _ = closed_and_fd(0.01, tag)
    errs = fo.refinement_errors(closed, prof, tag, 3)
    assert fo.convergence_order(errs) >= 1.8


def test_convergence_order_of_power_law():
    assert fo.convergence_order({1e-1: 1e-2, 1e-2: 1e-4, 1e-3: 1e-6}) == pytest.approx(2.0)


def test_report_json():
    rep = fo.OracleReport("H", "graph-xi", 1e-8, 0.1, "0.9 s", 1e-6)
    d = json.loads(rep.to_json())
    assert d["passed"] is True
    assert d["quantity"] == "H"


def test_relative_error_floor():
    err = fo.relative_errors(np.array([0.0, 1.0]), np.array([1e-6, 1.0]))
    assert err[0] == pytest.approx(1e-3)
