"""Finite-difference oracle for the closed-form curvature code.

Only profile *values* are sampled here; the closed-form derivative functions
are never called.  Near the vertical tangent the graph is differentiated in
the variable ``s = sqrt(sqrt(r) - rho^2)``, in which it is a cubic
polynomial, and the curvatures come from the parametric curve
``(r(s), f(r(s)))``.  ``r(s) = (s^2 + rho^2)^2`` is a coordinate map, so its
derivatives are written out directly.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import radial_profiles as rp
from .errors import StencilError, ToleranceExceeded
from .revolution_geometry import CurvaturePoint

QUANTITIES = ("lambda1", "lambda2", "H", "normA", "nu_t", "nu_tan")


def default_h(x):
    return np.maximum(1e-8, 1e-5 * np.abs(x))


def fd_derivatives(
    value_fn: Callable,
    grid,
    h_rule: Callable | None = None,
    richardson: bool = False,
    domain: tuple[float, float] | None = None,
):
    """Central second-order estimates of the first two derivatives.

    With ``richardson=True`` the steps ``h`` and ``h/2`` are combined, which
    raises the order to four.
    """
    x = np.asarray(grid, dtype=float)
    h = np.broadcast_to(np.asarray((h_rule or default_h)(x), dtype=float), x.shape)
    if domain is not None:
        lo, hi = domain
        if np.any(x - h < lo) or np.any(x + h > hi):
            raise StencilError("finite-difference stencil leaves the domain")

    def central(step):
        fp = np.asarray(value_fn(x + step), dtype=float)
        fm = np.asarray(value_fn(x - step), dtype=float)
        f0 = np.asarray(value_fn(x), dtype=float)
        return (fp - fm) / (2.0 * step), (fp - 2.0 * f0 + fm) / (step * step)

    d1, d2 = central(h)
    if richardson:
        e1, e2 = central(0.5 * h)
        d1 = (4.0 * e1 - d1) / 3.0
        d2 = (4.0 * e2 - d2) / 3.0
    return d1, d2


# ---------------------------------------------------------------------------
# curvatures from samples


def _from_parametric(r, t, r_p, t_p, r_pp, t_pp, k, tag):
    speed = np.sqrt(r_p * r_p + t_p * t_p)
    l1 = -(r_p * t_pp - t_p * r_pp) / speed**3
    l2 = -t_p / (r * speed)
    return CurvaturePoint.from_lambdas(r, t, l1, l2, k, np.abs(r_p) / speed, np.abs(t_p) / speed, tag)


def fd_graph_xi(profile: rp.PiecewiseProfile, r_grid, k, step=0.9) -> CurvaturePoint:
    """Curvatures on the inner graph from samples in the variable ``s``.

    The step is ``step * s``, with the two-step Richardson combination.
    """
    rho = profile.rho
    seg = profile.segment("graph-xi")
    p2 = rho * rho
    s = np.sqrt(rp._q(rho, np.asarray(r_grid, dtype=float)))
    if np.any(s <= 0.0):
        raise StencilError("the vertical-tangent point itself has no centred stencil")

    def value(si):
        return seg.value((si * si + p2) ** 2)

    s_max = np.sqrt(1.0 - p2)  # r(s_max) = 1
    f_s, f_ss = fd_derivatives(
        value, s, h_rule=lambda x: np.minimum(step * x, 0.9 * (s_max - x)), richardson=True, domain=(0.0, s_max)
    )
    r = (s * s + p2) ** 2
    r_s = 4.0 * s * (s * s + p2)
    r_ss = 4.0 * (3.0 * s * s + p2)
    return _from_parametric(r, value(s), r_s, f_s, r_ss, f_ss, k, "graph-xi")


def segment_h(lo, hi, rel=1e-3, edge=0.25):
    """Step ``rel * r``, shrunk so the stencil stays inside ``[lo, hi]``."""

    def rule(x):
        x = np.asarray(x, dtype=float)
        return np.minimum(rel * np.abs(x), edge * np.minimum(x - lo, hi - x))

    return rule


def fd_graph(profile: rp.PiecewiseProfile, tag, r_grid, k, h_rule=None, richardson=True) -> CurvaturePoint:
    """Curvatures on a graph segment from samples in ``r``.

    The profile is only C^2 across segment joins, so by default stencils are
    kept inside the segment; grid points must then be interior.
    """
    seg = profile.segment(tag)
    r = np.asarray(r_grid, dtype=float)
    if h_rule is None:
        h_rule = segment_h(seg.lo, seg.hi)
    f_r, f_rr = fd_derivatives(seg.value, r, h_rule=h_rule, richardson=richardson, domain=(seg.lo, seg.hi))
    one = np.ones_like(r)
    return _from_parametric(r, seg.value(r), one, f_r, 0.0 * one, f_rr, k, tag)


def fd_depth(omega_fn, s_grid, a, k, h_rule=None, tag="cylinder-smooth", domain=None) -> CurvaturePoint:
    """Curvatures of ``r = omega(s)``, ``t = a - s`` from samples of ``omega``."""
    s = np.asarray(s_grid, dtype=float)
    w_s, w_ss = fd_derivatives(omega_fn, s, h_rule=h_rule, richardson=True, domain=domain)
    w = np.asarray(omega_fn(s), dtype=float)
    one = np.ones_like(s)
    # orientation with r increasing: parameter s, t_s = -1
    speed = np.sqrt(1.0 + w_s * w_s)
    l1 = -w_ss / speed**3
    l2 = 1.0 / (w * speed)
    return CurvaturePoint.from_lambdas(w, a - s, l1, l2, k, np.abs(w_s) / speed, one / speed, tag)


def fd_curvatures(profile: rp.PiecewiseProfile, tag, grid, k, **kw) -> CurvaturePoint:
    if tag == "graph-xi":
        return fd_graph_xi(profile, grid, k, **kw)
    return fd_graph(profile, tag, grid, k, **kw)


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    grid: str
    max_rel_error: float
    argmax: float
    fd_step: str
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol

    def to_json(self) -> str:
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, sort_keys=True)


def relative_errors(closed, fd, floor=1e-3):
    """``|fd - closed| / max(|closed|, floor * max|closed|)``.

    The floor keeps isolated zero crossings (the radial curvature changes
    sign in the blend) from dominating; it is relative to the segment scale.
    """
    closed = np.asarray(closed, dtype=float)
    fd = np.asarray(fd, dtype=float)
    scale = np.max(np.abs(closed)) if closed.size else 0.0
    denom = np.maximum(np.abs(closed), floor * scale)
    with np.errstate(invalid="ignore", divide="ignore"):
        err = np.where(denom > 0.0, np.abs(fd - closed) / denom, np.abs(fd - closed))
    return err


def compare(
    closed: CurvaturePoint,
    fd: CurvaturePoint,
    tol: float = 1e-6,
    quantities=QUANTITIES,
    grid: str = "",
    fd_step: str = "",
    raise_on_fail: bool = False,
    floor: float = 1e-3,
) -> list[OracleReport]:
    reports = []
    for q in quantities:
        err = relative_errors(getattr(closed, q), getattr(fd, q), floor)
        i = int(np.argmax(err)) if err.size else 0
        reports.append(
            OracleReport(q, grid or closed.tag, float(err[i]) if err.size else 0.0, float(closed.r[i]), fd_step, tol)
        )
    if raise_on_fail:
        bad = [rep for rep in reports if not rep.passed]
        if bad:
            raise ToleranceExceeded(
                "; ".join(f"{b.quantity}: {b.max_rel_error:.3e} > {b.tol:.1e}" for b in bad), bad
            )
    return reports


def convergence_order(errors_by_h: dict[float, float]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    hs = np.array(sorted(errors_by_h))
    es = np.array([errors_by_h[h] for h in hs])
    return float(np.polyfit(np.log(hs), np.log(es), 1)[0])


def refinement_errors(closed: CurvaturePoint, profile: rp.PiecewiseProfile, tag, k, rels=(8e-3, 4e-3, 2e-3)):
    """Max relative error of the plain second-order stencil at several steps.

    For the inner graph the step is ``10 rel * s`` in the variable ``s``, where
    truncation dominates roundoff; for the other graph segments it is
    ``rel * r`` on the points far enough from the segment ends.
    """
    out = {}
    for rel in rels:
        if tag == "graph-xi":
            rho = profile.rho
            p2 = rho * rho
            seg = profile.segment(tag)
            s = np.sqrt(rp._q(rho, closed.r))
            h = 10.0 * rel * s

            def value(si):
                return seg.value((si * si + p2) ** 2)

            f_s, f_ss = fd_derivatives(value, s, h_rule=lambda _x: h)
            r_s, r_ss = 4.0 * s * (s * s + p2), 4.0 * (3.0 * s * s + p2)
            fd = _from_parametric(closed.r, value(s), r_s, f_s, r_ss, f_ss, k, tag)
        else:
            # keep only points whose stencil is unclamped at the largest step,
            # so that every step really scales with rel
            seg = profile.segment(tag)
            r = closed.r
            free = max(rels) * r <= 0.25 * np.minimum(r - seg.lo, seg.hi - r)
            sub = _subset(closed, free)
            fd = fd_graph(profile, tag, sub.r, k, h_rule=segment_h(seg.lo, seg.hi, rel), richardson=False)
            out[rel] = max(r.max_rel_error for r in compare(sub, fd))
            continue
        out[rel] = max(r.max_rel_error for r in compare(closed, fd))
    return out


def _subset(cp: CurvaturePoint, mask) -> CurvaturePoint:
    names = ("r", "t", "lambda1", "lambda2", "H", "normA", "scal", "nu_t", "nu_tan")
    return CurvaturePoint(*(getattr(cp, a)[mask] for a in names), k=cp.k, tag=cp.tag)
