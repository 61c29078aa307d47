import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from handle_forge import handle_builder as hb
from handle_forge import radial_profiles as rp
from handle_forge.errors import DomainError


def make(rho, R=None):
    R = (rp.R_MAX if rho >= 0.1 else 0.5) if R is None else R
    return hb.build(rp.HandleParams(rho, R=R))


@pytest.fixture(scope="module", params=(0.1, 0.01, 0.001))
def smoothed(request):
    return hb.smooth_corner(make(request.param))


def test_build_at_largest_rho():
    h = make(0.1)
    assert h.segments["graph"][0] == pytest.approx(1e-4)
    assert h.segments["graph"][1] == pytest.approx(2.0 * math.sqrt(0.1))
    assert h.segments["cylinder"] == (pytest.approx(rp.a_rho(0.1)), 1.0)
    # R = 2 sqrt(rho) leaves no flat annulus
    assert h.sample("flat").r.size == 0


def test_build_rejects_large_rho():
    with pytest.raises(DomainError):
        hb.build(rp.HandleParams(0.2))


def test_cylinder_sample():
    h = make(0.01)
    cp = h.sample("cylinder")
    assert np.all(cp.r == 1e-8)
    npt.assert_allclose(cp.lambda2, 1e8)
    assert np.all(cp.lambda1 == 0.0)
    assert cp.t[0] == pytest.approx(h.a) and cp.t[-1] == 1.0
    assert np.all(cp.nu_t == 0.0)


@pytest.mark.parametrize("rho", (0.1, 0.01))
def test_samples_are_finite(rho):
    for tag, cp in make(rho).sample_all().items():
        if cp.r.size == 0:
            continue
        assert np.all(np.isfinite(cp.scal)), tag
        assert np.max(np.abs(cp.gauss_defect())) < 1e-10, tag


def test_inner_graph_mean_convex():
    cp = make(0.01).sample("graph-xi")
    assert np.all(cp.H > 0.0)


def test_tags():
    h = make(0.01)
    assert h.tags == ("graph-xi", "graph-blend", "flat", "cylinder")
    assert "cylinder-smooth" in hb.smooth_corner(h).tags
    with pytest.raises(KeyError):
        h.sample("cylinder-smooth")


def test_corner_matches_graph(smoothed):
    b = smoothed.corner
    assert b.matching_defect() < 1e-12
    s = np.array([0.97, 0.99, 1.0]) * b.w
    npt.assert_allclose(b.g_ss(s), b.h_ss(s), rtol=1e-12)


def test_corner_starts_on_cylinder(smoothed):
    b = smoothed.corner
    zero = np.array([0.0])
    assert b.g(zero)[0] == 0.0
    assert b.g_s(zero)[0] == 0.0
    cp = smoothed.sample("cylinder-smooth")
    assert cp.r.min() == pytest.approx(smoothed.rho**4, rel=1e-14)
    assert cp.t.max() == pytest.approx(smoothed.a, rel=1e-14)


def test_corner_monotone(smoothed):
    b = smoothed.corner
    s = hb.blend_grid(b, 800)
    assert np.all(b.g_s(s) >= 0.0)
    assert np.all(np.diff(b.omega(s)) >= 0.0)


def test_corner_inequalities(smoothed):
    m = hb.corner_margins(smoothed.corner, 3, smoothed.rho)
    for claim in ("ii.H", "ii.scal", "iii"):
        assert m[claim][0] > 0.0, claim


@pytest.mark.parametrize("fac", (0.25, 0.5, 1.5))
def test_corner_halfwidth_choices(fac):
    h = make(0.01)
    sm = hb.smooth_corner(h, fac * hb.default_halfwidth(0.01))
    assert sm.corner.matching_defect() < 1e-12


@pytest.mark.parametrize("fac", (0.0, -1.0, 2.0))
def test_corner_halfwidth_domain(fac):
    with pytest.raises(DomainError):
        hb.smooth_corner(make(0.01), fac * hb.default_halfwidth(0.01))


def test_smooth_step_shape():
    x = np.linspace(-1.0, 2.0, 301)
    y = hb.smooth_step(x)
    assert np.all(y[x <= 0] == 0.0) and np.all(y[x >= 1] == 1.0)
    assert np.all(np.diff(y) >= 0.0)
    assert hb.smooth_step(0.5) == pytest.approx(0.5)


def test_to_dict_serialisable():
    d = hb.smooth_corner(make(0.01)).to_dict()
    json.dumps(d)
    assert d["params"]["rho"] == 0.01
    assert d["corner_halfwidth"] == pytest.approx(hb.default_halfwidth(0.01))
    assert d["a_rho"] == rp.a_rho(0.01)
