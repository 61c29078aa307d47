import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from handle_forge import estimate_suite as es
from handle_forge import radial_profiles as rp
from handle_forge import revolution_geometry as rg
from handle_forge.errors import DomainError


@pytest.mark.parametrize("k,expected", ((2, 468.0), (3, 486.0), (7, 558.0)))
def test_cbar(k, expected):
    assert es.cbar(k) == expected


def test_cbar_domain():
    with pytest.raises(DomainError):
        es.cbar(1)


@given(k=st.integers(2, 40), l1=st.floats(-1e4, -1e-3))
def test_ratio_identities(k, l1):
    # lambda2 = -4 lambda1 fixes H/|A| and scal/|A|^2
    H, A, S = rg.shape_invariants(l1, -4.0 * l1, k)
    assert H / A == pytest.approx(es.ratio_H_A(k), rel=1e-12)
    assert S / A**2 == pytest.approx(es.ratio_scal_A2(k), rel=1e-10)


@pytest.mark.parametrize("k", (3, 4, 7))
def test_ratios_exceed_claimed_bounds(k):
    assert es.ratio_H_A(k) > 0.5
    assert es.ratio_scal_A2(k) > 1.0 / 3.0


@pytest.fixture(scope="module")
def cell_k3():
    return {rep.claim_id: rep for rep in es.check_prop_euclidean(rp.HandleParams(0.01, k=3, n=3))}


def test_single_cell_passes(cell_k3):
    assert set(cell_k3) == {"i", "ii.H", "ii.scal", "ii.ratio", "iii", "iv", "v.A", "v.scal"}
    for claim, rep in cell_k3.items():
        assert rep.applicable and rep.passed, (claim, rep.margin)


def test_single_cell_margins(cell_k3):
    # margins stay clear of the boundary without being degenerate
    assert 0.0 < cell_k3["ii.scal"].margin < 1.0
    assert cell_k3["iii"].margin > 1.0
    assert cell_k3["iii"].location <= 0.01**2


def test_k2_skips_scalar_items():
    reps = {rep.claim_id: rep for rep in es.check_prop_euclidean(rp.HandleParams(0.01, k=2, n=3))}
    for claim in ("ii.scal", "iii"):
        assert not reps[claim].applicable
        assert reps[claim].passed
        assert math.isnan(reps[claim].margin)
    assert reps["ii.H"].passed


def test_unsmoothed_cell():
    reps = es.check_prop_euclidean(rp.HandleParams(0.02, k=4, n=4), smooth=False)
    assert all(rep.passed for rep in reps)


def test_row_shape(cell_k3):
    row = cell_k3["iv"].row()
    assert tuple(row) == es.CSV_COLUMNS
    assert row["pass"] is True


def test_sweep_parallel_matches_serial():
    grid = (0.05, 0.005)
    a = es.sweep_prop(grid, (3,), jobs=1)
    b = es.sweep_prop(grid, (3,), jobs=2)
    assert [r.row() for r in a] == [r.row() for r in b]


@pytest.mark.parametrize("k", (3, 5))
def test_trend_nondecreasing(k):
    tm = es.trend_margins(k)
    for claim, arr in tm.items():
        # columns run over decreasing rho
        assert np.all(np.diff(arr, axis=1) >= -1e-9), claim
        assert np.all(arr > 0.0), claim


def test_length_bounds_hold():
    grid = tuple(r for r in es.RHO_GRID if r < 0.25 * 0.25)
    bounds, _, rows = es.check_length_bounds(grid, 0.5)
    assert bounds.passed
    assert all(1.0 < row.d < 1.5 for row in rows)
    assert all(row.route_gap < 1e-9 for row in rows)


def test_length_rejects_boundary_rho():
    with pytest.raises(DomainError):
        es.length_rows((0.0625,), 0.5)


def test_derivative_threshold_brackets():
    thr = es.derivative_threshold(0.5)
    assert 1e-4 < thr < 2e-4
    assert abs(rg.d_rho_derivative(0.5 * thr, 0.5)) < (0.5 * thr) ** 0.25
    assert abs(rg.d_rho_derivative(2.0 * thr, 0.5)) > (2.0 * thr) ** 0.25
