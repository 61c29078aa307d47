"""Assemble the bending handle and sample its curvature along every segment.

The handle is the graph of ``f`` over ``[rho^4, R]`` together with the
cylinder ``{r = rho^4} x [a_rho, 1]``.  At the junction (height ``a_rho``)
the surface is C^1 but not C^2: the radial curvature jumps from
``-rho^-4 / 4`` to ``0``.  :func:`smooth_corner` replaces a thin band below
the junction by a C^infinity blend and re-verifies the curvature inequalities
there.

The corner blend
----------------
Write the inner graph near the junction in the depth coordinate
``s = a_rho - t`` as ``r = rho^4 + h(s)`` with ``h(s) = xi^{-1}(-s) - rho^4``.
The blend is ``r = rho^4 + g(s)`` where

    g''(s) = h''(s) P(s),   g(0) = g'(0) = 0,

and the weight ``P`` is 0 near 0, identically 1 near ``w``, and is built from
a smooth step plus two fixed bumps.  The two bump amplitudes solve the linear
moment conditions that make ``g`` and ``g'`` agree with ``h`` at ``s = w``,
so ``g = h`` to all orders beyond ``w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import radial_profiles as rp
from . import revolution_geometry as rg
from .errors import DomainError, InequalityViolation
from .revolution_geometry import CurvaturePoint


@dataclass(frozen=True)
class GridSpec:
    points_per_segment: int = 200
    cylinder_points: int = 50
    corner_points: int = 200
    curve_points: int = 400


# ---------------------------------------------------------------------------
# C^infinity building blocks


def _psi(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x > 0.0
    out[m] = np.exp(-1.0 / x[m])
    return out


def smooth_step(x):
    """C^infinity step, 0 for x <= 0 and 1 for x >= 1."""
    a, b = _psi(x), _psi(1.0 - np.asarray(x, dtype=float))
    return a / (a + b)


def smooth_bump(x, centre, half_width):
    """C^infinity bump of height 1 supported in ``(centre - hw, centre + hw)``."""
    u = (np.asarray(x, dtype=float) - centre) / half_width
    out = np.zeros_like(u)
    m = np.abs(u) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - u[m] ** 2))
    return out


@dataclass(frozen=True)
class BlendShape:
    """Shape of the weight ``P``.

    The ramp ends at depth ``min(ramp * w, ramp_cyl * rho^4)``: there the
    radius is still close to ``rho^4`` and the blend looks like the unsmoothed
    profile up to a small deficit.  The bumps live in ``sigma = (s/w)^(1/3)``.
    """

    ramp: float = 0.05
    ramp_cyl: float = 0.05
    bump1: tuple[float, float] = (0.3, 0.2)
    bump2: tuple[float, float] = (0.75, 0.2)


class CornerBlend:
    """The blended depth profile ``r = rho^4 + g(s)`` on ``0 <= s <= w``."""

    _PANELS = 600
    _NODES = 16

    def __init__(self, rho, w, shape: BlendShape = BlendShape()):
        self.rho, self.w, self.shape = float(rho), float(w), shape
        self.rho4 = rho**4
        self.s_ramp = min(shape.ramp * w, shape.ramp_cyl * self.rho4)
        x, wts = leggauss(self._NODES)
        self._gl = (x, wts)
        self._edges = np.concatenate([[0.0], np.geomspace(1e-2 * self.s_ramp, w, self._PANELS)])
        nodes, weights = self._rule(self._edges[:-1], self._edges[1:])
        h2 = self.h_ss(nodes)
        ramp = self._ramp(nodes)
        sig = self.sigma(nodes)
        b1 = smooth_bump(sig, *shape.bump1)
        b2 = smooth_bump(sig, *shape.bump2)
        lhs = np.array(
            [
                [np.sum(weights * h2 * b1), np.sum(weights * h2 * b2)],
                [np.sum(weights * nodes * h2 * b1), np.sum(weights * nodes * h2 * b2)],
            ]
        )
        # int h'' P = h'(w) and int s h'' P = w h'(w) - h(w); written against the
        # exact right-hand sides so no quadrature sees h'' where P vanishes
        hw, hw_s = float(self.h(w)), float(self.h_s(w))
        rhs = np.array(
            [hw_s - np.sum(weights * h2 * ramp), w * hw_s - hw - np.sum(weights * nodes * h2 * ramp)]
        )
        self.A, self.B = np.linalg.solve(lhs, rhs)
        g2 = h2 * self.weight(nodes)
        self._cum1 = np.concatenate([[0.0], np.cumsum(np.sum(weights * g2, axis=-1))])
        self._cumm = np.concatenate([[0.0], np.cumsum(np.sum(weights * nodes * g2, axis=-1))])

    def sigma(self, s):
        return np.cbrt(np.clip(np.asarray(s, dtype=float), 0.0, None) / self.w)

    def _ramp(self, s):
        return smooth_step(np.asarray(s, dtype=float) / self.s_ramp)

    def _rule(self, lo, hi):
        # Gauss-Legendre nodes and weights on each [lo, hi]
        x, wts = self._gl
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        half = 0.5 * (hi - lo)
        nodes = (0.5 * (hi + lo))[..., None] + half[..., None] * x
        return nodes, half[..., None] * wts

    # inner-graph depth profile and its closed-form derivatives
    def h(self, s):
        return rp.xi_inverse(self.rho, -np.asarray(s, dtype=float)) - self.rho4

    def h_s(self, s):
        return -rp.xi_inverse_d1(self.rho, -np.asarray(s, dtype=float))

    def h_ss(self, s):
        return rp.xi_inverse_d2(self.rho, -np.asarray(s, dtype=float))

    def weight(self, s):
        """``P(s)``; 0 near s = 0 and 1 for s >= w."""
        s = np.asarray(s, dtype=float)
        sig = self.sigma(s)
        P = self._ramp(s) + self.A * smooth_bump(sig, *self.shape.bump1) + self.B * smooth_bump(sig, *self.shape.bump2)
        return np.where(s >= self.w, 1.0, np.where(s <= 0.0, 0.0, P))

    def _partial(self, s):
        # integrals of g'' and s g'' from 0 up to s
        idx = np.clip(np.searchsorted(self._edges, s, side="right") - 1, 0, self._PANELS - 1)
        nodes, weights = self._rule(self._edges[idx], s)
        g2 = self.h_ss(nodes) * self.weight(nodes)
        i1 = np.sum(weights * g2, axis=-1)
        im = np.sum(weights * nodes * g2, axis=-1)
        return self._cum1[idx] + i1, self._cumm[idx] + im

    def g(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.w)
        i1, im = self._partial(s)
        return s * i1 - im

    def g_s(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.w)
        return self._partial(s)[0]

    def g_ss(self, s):
        s = np.asarray(s, dtype=float)
        return self.h_ss(np.clip(s, 0.0, None)) * self.weight(s)

    def omega(self, s):
        return self.rho4 + self.g(s)

    def matching_defect(self) -> float:
        """Relative mismatch of ``(g, g')`` against ``(h, h')`` at ``s = w``."""
        w = np.array([self.w])
        dv = abs(self.g(w)[0] - self.h(w)[0]) / abs(self.h(w)[0])
        ds = abs(self.g_s(w)[0] - self.h_s(w)[0]) / abs(self.h_s(w)[0])
        return float(max(dv, ds))

    def curvatures(self, s, k) -> CurvaturePoint:
        s = np.asarray(s, dtype=float)
        om, om_s, om_ss = self.omega(s), self.g_s(s), self.g_ss(s)
        l1, l2 = rg.depth_curvatures(om, om_s, om_ss)
        nu_t, nu_tan = rg.depth_normal(om_s)
        return CurvaturePoint.from_lambdas(om, rp.a_rho(self.rho) - s, l1, l2, k, nu_t, nu_tan, "cylinder-smooth")


# ---------------------------------------------------------------------------
# the handle


@dataclass(frozen=True)
class Handle:
    params: rp.HandleParams
    profile: rp.PiecewiseProfile
    curve: rg.RevolutionCurve
    segments: dict
    grid: GridSpec = field(default_factory=GridSpec)
    corner: CornerBlend | None = None

    @property
    def rho(self):
        return self.params.rho

    @property
    def a(self):
        return rp.a_rho(self.params.rho)

    def _graph_xi_grid(self):
        rho = self.rho
        lo = rho**4
        if self.corner is not None:
            lo = float(rp.xi_inverse(rho, -self.corner.w))
            return np.geomspace(lo, math.sqrt(rho), self.grid.points_per_segment)
        return np.geomspace(lo, math.sqrt(rho), self.grid.points_per_segment + 1)[1:]

    def radius_grid(self, tag):
        rho, n = self.rho, self.grid.points_per_segment
        sr = math.sqrt(rho)
        if tag == "graph-xi":
            return self._graph_xi_grid()
        if tag == "graph-blend":
            return np.geomspace(sr, 2.0 * sr, n)
        if tag == "flat":
            if self.params.R <= 2.0 * sr:
                return np.empty(0)
            return np.linspace(2.0 * sr, self.params.R, n)
        raise KeyError(tag)

    def sample(self, tag, r=None) -> CurvaturePoint:
        """Closed-form curvature data on one segment."""
        k = self.params.k
        if tag == "cylinder":
            t = np.linspace(self.a, 1.0, self.grid.cylinder_points)
            one = np.ones_like(t)
            return CurvaturePoint.from_lambdas(
                self.rho**4 * one, t, 0.0 * one, one / self.rho**4, k, 0.0 * one, one, "cylinder"
            )
        if tag == "cylinder-smooth":
            if self.corner is None:
                raise KeyError("handle has no smoothed corner")
            s = blend_grid(self.corner, self.grid.corner_points)
            return self.corner.curvatures(s, k)
        r = self.radius_grid(tag) if r is None else np.asarray(r, dtype=float)
        seg = self.profile.segment(tag)
        l1, l2 = rg.graph_curvatures(seg.d1(r), seg.d2(r), r)
        nu_t, nu_tan = rg.graph_normal(seg.d1(r))
        return CurvaturePoint.from_lambdas(r, seg.value(r), l1, l2, k, nu_t, nu_tan, tag)

    @property
    def tags(self):
        base = ["graph-xi", "graph-blend", "flat", "cylinder"]
        if self.corner is not None:
            base.insert(3, "cylinder-smooth")
        return tuple(base)

    def sample_all(self) -> dict[str, CurvaturePoint]:
        return {tag: self.sample(tag) for tag in self.tags}

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {"rho": p.rho, "k": p.k, "n": p.n, "alpha": p.alpha, "kappa": p.kappa, "R": p.R},
            "a_rho": self.a,
            "segments": {k: list(v) for k, v in self.segments.items()},
            "corner_halfwidth": None if self.corner is None else self.corner.w,
            "curve": self.curve.to_dict(),
        }


def build(params: rp.HandleParams, grid_spec: GridSpec = GridSpec()) -> Handle:
    rho = params.rho
    sr = math.sqrt(rho)
    a = rp.a_rho(rho)
    profile = rp.build_profile(rho)
    curve = rg.warped_form(rho, params.R, grid_spec.curve_points)
    segments = {"graph": (rho**4, 2.0 * sr), "flat": (2.0 * sr, params.R), "cylinder": (a, 1.0)}
    return Handle(params, profile, curve, segments, grid_spec)


def default_halfwidth(rho) -> float:
    return (rp.a_rho(rho) - rp.f(rho, rho * rho)) / 8.0


def blend_grid(blend: CornerBlend, n_points):
    """Depth samples: 0, then geometric from inside the ramp up to ``w``."""
    return np.concatenate([[0.0], np.geomspace(1e-2 * blend.s_ramp, blend.w, n_points - 1)])


def corner_margins(blend: CornerBlend, k, rho, n_points=400) -> dict[str, tuple[float, float]]:
    """Normalised margins of items (ii)-(iii) on the blended zone: ``{claim: (margin, s)}``."""
    s = blend_grid(blend, n_points)
    cp = blend.curvatures(s, k)
    out = {}

    def worst(name, lhs, rhs):
        m = (lhs - rhs) / np.maximum(np.abs(rhs), 1.0)
        i = int(np.argmin(m))
        out[name] = (float(m[i]), float(s[i]))

    worst("ii.H", cp.H, 0.5 * cp.normA)
    if k >= 3:
        worst("ii.scal", cp.scal, cp.normA**2 / 3.0)
        worst("iii", np.minimum(cp.H**2, cp.scal), 0.5 * rho**-3 * np.ones_like(s))
    worst("monotone", blend.g_s(s), np.zeros_like(s))
    return out


def smooth_corner(handle: Handle, blend_halfwidth=None, shape: BlendShape = BlendShape()) -> Handle:
    """Return a copy of ``handle`` with the junction replaced by a C^infinity blend.

    Raises
    ------
    InequalityViolation
        When the blend breaks one of the verified curvature inequalities.
    """
    rho = handle.rho
    limit = (rp.a_rho(rho) - rp.f(rho, rho * rho)) / 4.0
    w = default_halfwidth(rho) if blend_halfwidth is None else float(blend_halfwidth)
    if not 0.0 < w < limit:
        raise DomainError(f"blend half-width must lie in (0, {limit:.6e}), got {w}")
    blend = CornerBlend(rho, w, shape)
    margins = corner_margins(blend, handle.params.k, rho, handle.grid.corner_points * 2)
    mono = margins.pop("monotone")
    name, (m, s) = min(margins.items(), key=lambda kv: kv[1][0])
    if m <= 0.0:
        raise InequalityViolation(f"blend violates {name}", m, {"s": s, "t": rp.a_rho(rho) - s})
    if mono[0] < 0.0:
        raise InequalityViolation("blend radius not monotone", mono[0], {"s": mono[1]})
    seg = rp.Segment("cylinder-smooth", 0.0, w, blend.omega, blend.g_s, blend.g_ss, variable="s")
    return Handle(
        handle.params, handle.profile.with_segment(seg), handle.curve, handle.segments, handle.grid, blend
    )
