import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handle_forge import quasispherical_flow as qf
from handle_forge.errors import DomainError, FlowBlowUp


def test_ambient_at_start_of_linear_path():
    Hbar, A2, sz, sg = qf.ambient_quantities(qf.linear_path(2), 0.0)
    assert (Hbar, A2, sz, sg) == (2.0, 2.0, 2.0, 0.0)


def test_ambient_gauss_relation():
    # scal_gbar = scal_zeta - Hbar^2 - |Abar|^2 - 2 dHbar/dt for a warped product
    p = qf.quadratic_path(3, 0.0, 0.5)
    t = np.linspace(0.0, 1.0, 11)
    Hbar, A2, sz, sg = qf.ambient_quantities(p, t)
    h = 1e-6
    dH = (qf.ambient_quantities(p, t + h)[0] - qf.ambient_quantities(p, t - h)[0]) / (2 * h)
    npt.assert_allclose(sg, sz - Hbar**2 - A2 - 2.0 * dH, atol=1e-7)


def test_unit_lapse_is_stationary_on_flat_cone():
    # lambda = 1 + t is Euclidean space, scal_gbar = 0 = s
    traj = qf.solve_u(qf.linear_path(2), 1.0)
    npt.assert_allclose(traj.u, 1.0, atol=1e-13)


@pytest.mark.parametrize("u0", (0.2, 0.5, 0.9))
def test_linear_lapse_matches_closed_form(u0):
    # du/dt = (u - u^3) / (2 (1 + t)), solved by separation of variables
    traj = qf.solve_u(qf.linear_path(2), u0)
    t = np.linspace(0.0, 1.0, 21)
    npt.assert_allclose(traj(t), qf.analytic_linear_u(t, u0), rtol=1e-10)


def test_linear_lapse_example():
    traj = qf.solve_u(qf.linear_path(2), 0.5)
    u1 = float(traj.u[-1])
    assert u1 == pytest.approx(math.sqrt(0.4), rel=1e-10)
    tmc = qf.total_mean_curvature(traj.path, traj.u, traj.t)
    assert tmc[-1] / tmc[0] == pytest.approx(math.sqrt(2.5), rel=1e-10)


def test_tmc_of_unit_sphere():
    # n = 2, lambda = 1, lambda' = 1, u = 1: 2 * 4 pi
    assert qf.total_mean_curvature(qf.linear_path(2), 1.0, 0.0) == pytest.approx(8.0 * math.pi)


@settings(max_examples=20, deadline=None)
@given(u0=st.floats(0.3, 1.5), n=st.integers(2, 5))
def test_dlog_tmc_matches_trajectory(u0, n):
    path = qf.exp_path(n, 0.0, 0.5)
    traj = qf.solve_u(path, u0)
    t = np.linspace(0.1, 0.9, 9)
    h = 1e-5
    log_tmc = lambda x: np.log(qf.total_mean_curvature(path, traj(x), x))
    fd = (log_tmc(t + h) - log_tmc(t - h)) / (2 * h)
    npt.assert_allclose(qf.dlog_tmc(path, traj(t), t), fd, rtol=1e-6)


def test_scal_residual_small():
    traj = qf.solve_u(qf.sqrt_path(3, -1.0), 1.0)
    assert qf.scal_residual(traj) < 1e-7


@pytest.mark.parametrize(
    "path",
    (
        qf.linear_path(1),
        qf.linear_path(2, slope=-0.5),
        qf.linear_path(2, s=2.0),
        qf.RoundPath(2, lambda t: t - 0.5, lambda t: 1.0 + 0 * t, lambda t: 0 * t),
    ),
)
def test_membership_rejects(path):
    with pytest.raises(DomainError):
        path.check()


def test_solve_rejects_bad_u0():
    with pytest.raises(DomainError):
        qf.solve_u(qf.linear_path(2), 0.0)


def test_blow_up_detected():
    # from u0 = 0.5 the lapse rises to sqrt(0.4) on the flat cone; a low ceiling catches it
    with pytest.raises(FlowBlowUp):
        qf.solve_u(qf.linear_path(2), 0.5, blow_up=0.6)


@pytest.fixture(scope="module")
def sweep_rows():
    return qf.sweep()


def test_sweep_has_twenty_cases(sweep_rows):
    assert [r["case"] for r in sweep_rows] == list(range(20))


def test_sweep_monotone(sweep_rows):
    for row in sweep_rows:
        assert row["passed"], row
        assert row["min_rel_increase"] > 0.0


def test_sweep_residuals(sweep_rows):
    assert max(r["scal_residual"] for r in sweep_rows) < 1e-7


def test_sweep_first_case(sweep_rows):
    row = sweep_rows[0]
    assert row["path"] == "linear(1.0)"
    assert row["u1"] == pytest.approx(math.sqrt(0.4), rel=1e-10)


def test_sweep_deterministic(sweep_rows):
    assert qf.sweep() == sweep_rows
