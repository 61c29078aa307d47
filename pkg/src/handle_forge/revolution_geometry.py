"""Pointwise geometry of rotationally symmetric hypersurfaces in R^k x R.

A hypersurface of revolution is generated by a curve in the (r, t) half
plane.  Two parametrisations are used:

* graph form ``t = f(r)``, away from vertical tangents;
* depth form ``r = omega(s)`` with ``s = a_rho - t``, which stays regular at
  the vertical tangent where the graph meets the terminal cylinder.

The normal is the upward one of the graph (interior of the handle), so the
spherical principal curvature is positive on the handle and on the cylinder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from . import radial_profiles as rp
from .errors import DomainError, QuadratureError


# ---------------------------------------------------------------------------
# principal curvatures


def graph_curvatures(d1, d2, r):
    """Principal curvatures ``(lambda1, lambda2)`` of the graph ``t = f(r)``."""
    d1, d2, r = (np.asarray(x, dtype=float) for x in (d1, d2, r))
    w = np.sqrt(1.0 + d1 * d1)
    return -d2 / w**3, -d1 / (r * w)


def depth_curvatures(omega, omega_s, omega_ss):
    """Principal curvatures of the curve ``r = omega(s)``, ``t = a - s``."""
    omega, omega_s, omega_ss = (np.asarray(x, dtype=float) for x in (omega, omega_s, omega_ss))
    w = np.sqrt(1.0 + omega_s * omega_s)
    return -omega_ss / w**3, 1.0 / (omega * w)


def principal_curvatures(profile: rp.PiecewiseProfile, r):
    r = np.asarray(r, dtype=float)
    return graph_curvatures(profile.d1(r), profile.d2(r), r)


def graph_normal(d1):
    """``(nu_t, nu_tan)``: vertical and horizontal parts of the unit normal."""
    d1 = np.asarray(d1, dtype=float)
    w = np.sqrt(1.0 + d1 * d1)
    return 1.0 / w, np.abs(d1) / w


def depth_normal(omega_s):
    omega_s = np.asarray(omega_s, dtype=float)
    w = np.sqrt(1.0 + omega_s * omega_s)
    return np.abs(omega_s) / w, 1.0 / w


def normal_components(profile: rp.PiecewiseProfile, r):
    return graph_normal(profile.d1(np.asarray(r, dtype=float)))


def shape_invariants(lambda1, lambda2, k):
    """Mean curvature, ``|A|`` and scalar curvature from the principal curvatures.

    The scalar curvature is the expansion ``2(k-1) l1 l2 + (k-1)(k-2) l2^2``,
    which equals ``H^2 - |A|^2`` without the cancellation of that difference.
    """
    if k < 2:
        raise DomainError("k must be >= 2")
    l1 = np.asarray(lambda1, dtype=float)
    l2 = np.asarray(lambda2, dtype=float)
    m = k - 1
    H = l1 + m * l2
    normA = np.sqrt(l1 * l1 + m * l2 * l2)
    scal = 2.0 * m * l1 * l2 + m * (m - 1) * l2 * l2
    return H, normA, scal


@dataclass
class CurvaturePoint:
    """Curvature data at one or more points of a handle (fields may be arrays)."""

    r: np.ndarray
    t: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    H: np.ndarray
    normA: np.ndarray
    scal: np.ndarray
    nu_t: np.ndarray
    nu_tan: np.ndarray
    k: int
    tag: str = ""

    @classmethod
    def from_lambdas(cls, r, t, lambda1, lambda2, k, nu_t, nu_tan, tag=""):
        H, normA, scal = shape_invariants(lambda1, lambda2, k)
        arr = lambda x: np.atleast_1d(np.asarray(x, dtype=float))
        return cls(
            arr(r), arr(t), arr(lambda1), arr(lambda2), arr(H), arr(normA), arr(scal),
            arr(nu_t), arr(nu_tan), k, tag,
        )

    def __len__(self):
        return len(self.r)

    def gauss_defect(self) -> float:
        """Max relative gap between the two ways of computing scal."""
        gauss = self.H**2 - self.normA**2
        scale = np.maximum(self.normA**2, 1e-300)
        return float(np.max(np.abs(gauss - self.scal) / scale)) if len(self) else 0.0

    def concat(self, other: "CurvaturePoint") -> "CurvaturePoint":
        names = ("r", "t", "lambda1", "lambda2", "H", "normA", "scal", "nu_t", "nu_tan")
        return CurvaturePoint(
            *(np.concatenate([getattr(self, a), getattr(other, a)]) for a in names),
            k=self.k,
            tag=self.tag if self.tag == other.tag else f"{self.tag}+{other.tag}",
        )

    def perturbed(self, quantity: str, rel: float) -> "CurvaturePoint":
        """Copy with one field multiplied by ``1 + rel`` (mutation testing)."""
        fields = dict(self.__dict__)
        fields[quantity] = getattr(self, quantity) * (1.0 + rel)
        return CurvaturePoint(**fields)


# ---------------------------------------------------------------------------
# arc length


def arclength_antiderivative(rho, r):
    """Closed-form antiderivative of ``sqrt(1 + xi'^2)`` vanishing at ``rho**4``."""
    r = np.asarray(r, dtype=float)
    s = np.sqrt(rp._q(rho, r))
    return _G(rho, s)


def _G(rho, s):
    # in the variable s = sqrt(sqrt(r) - rho^2) the element of length is
    # 4 (s^2 + rho^2)^{3/2} ds
    s = np.asarray(s, dtype=float)
    p2 = rho * rho
    return s * np.sqrt(s * s + p2) * (s * s + 2.5 * p2) + 1.5 * p2 * p2 * np.arcsinh(s / rho)


def _inner_integrand(s, rho):
    return 4.0 * (s * s + rho * rho) ** 1.5


def _blend_integrand(r, rho, cutoff):
    d1 = rp.f_prime(rho, r, cutoff)
    return math.sqrt(1.0 + d1 * d1)


@dataclass(frozen=True)
class ArcLength:
    """Length of the generating curve from radius ``R`` to the top of the cylinder."""

    rho: float
    R: float
    d: float
    inner_closed: float
    inner_quad: float
    blend: float
    flat: float
    cylinder: float
    error_estimate: float

    @property
    def route_gap(self) -> float:
        return abs(self.inner_closed - self.inner_quad)


def _check_rho_R(rho, R):
    rp.validate_rho(rho)
    if not 0.0 < R <= rp.R_MAX * (1 + 1e-12):
        raise DomainError(f"R must lie in (0, 2/sqrt(10)], got {R}")
    if rho > R * R / 4.0 * (1 + 1e-10):
        raise DomainError(f"need rho <= R^2/4, got rho={rho}, R={R}")


def arc_length_d(rho, R, quadrature_tol=1e-9, cutoff: rp.CutoffSpec = rp.QUINTIC) -> ArcLength:
    """``d_rho``: integral of ``sqrt(1 + f'^2)`` over ``[rho^4, R]`` plus ``1 - a_rho``.

    The inner piece ``[rho^4, sqrt(rho)]`` is computed twice, by its
    antiderivative and by adaptive quadrature in the regularising variable
    ``s``; the blend piece by adaptive quadrature only.
    """
    _check_rho_R(rho, R)
    sr = math.sqrt(rho)
    s_hi = math.sqrt(rp._q(rho, sr))
    inner_closed = float(_G(rho, s_hi))
    inner_quad, e1 = integrate.quad(
        _inner_integrand, 0.0, s_hi, args=(rho,), epsabs=quadrature_tol * 1e-3, epsrel=1e-13, limit=200
    )
    hi = min(2.0 * sr, R)
    blend, e2 = integrate.quad(
        _blend_integrand, sr, hi, args=(rho, cutoff), epsabs=quadrature_tol * 1e-3, epsrel=1e-13, limit=200
    )
    err = e1 + e2
    if not err < quadrature_tol:
        raise QuadratureError(f"arc length error estimate {err:.3e} >= {quadrature_tol:.3e}")
    flat = max(R - 2.0 * sr, 0.0)
    cyl = 1.0 - rp.a_rho(rho)
    return ArcLength(rho, R, inner_closed + blend + flat + cyl, inner_closed, inner_quad, blend, flat, cyl, err)


def d_rho(rho, R, cutoff: rp.CutoffSpec = rp.QUINTIC) -> float:
    return arc_length_d(rho, R, cutoff=cutoff).d


def d_rho_derivative(rho, R, h=None, cutoff: rp.CutoffSpec = rp.QUINTIC) -> float:
    """Central difference in ``rho`` with step ``max(1e-6, 1e-4 rho)``.

    At the upper end of the admissible range the second-order backward
    stencil is used instead so no evaluation leaves the domain.
    """
    if h is None:
        h = max(1e-6, 1e-4 * rho)
    h = min(h, 0.25 * rho)
    top = min(rp.RHO_MAX, R * R / 4.0)
    if rho + h <= top:
        return (d_rho(rho + h, R, cutoff) - d_rho(rho - h, R, cutoff)) / (2.0 * h)
    d0, d1, d2 = (d_rho(rho - j * h, R, cutoff) for j in range(3))
    return (3.0 * d0 - 4.0 * d1 + d2) / (2.0 * h)


# ---------------------------------------------------------------------------
# arc-length (warped) form


class WarpedProfile:
    """Arc-length parametrisation of the generating curve.

    ``tau = 0`` is the outer radius ``R`` on the flat slice; ``tau`` increases
    inward along the graph and then up the cylinder, ending at height 1 with
    ``tau = d_rho``.  The metric induced on the handle is
    ``dtau^2 + r(tau)^2 g_{S^{k-1}}``.
    """

    _PANELS = 96
    _NODES = 16

    def __init__(self, rho, R, cutoff: rp.CutoffSpec = rp.QUINTIC):
        _check_rho_R(rho, R)
        self.rho, self.R, self.cutoff = float(rho), float(R), cutoff
        sr = math.sqrt(rho)
        self.a = rp.a_rho(rho)
        self.rho4 = rho**4
        self._sr = sr
        self._s_hi = math.sqrt(rp._q(rho, sr))
        self._x, self._w = leggauss(self._NODES)
        # blend panels ordered from the outer edge 2 sqrt(rho) inward
        self._edges = np.linspace(2.0 * sr, sr, self._PANELS + 1)
        lengths = [self._gl(self._edges[i + 1], self._edges[i]) for i in range(self._PANELS)]
        self._cum = np.concatenate([[0.0], np.cumsum(lengths)])
        self.tau_flat = max(R - 2.0 * sr, 0.0)
        self.tau_blend = self.tau_flat + self._cum[-1]
        self._G_hi = float(_G(rho, self._s_hi))
        self.tau_cyl = self.tau_blend + self._G_hi
        self.total_length = self.tau_cyl + 1.0 - self.a

    def _speed(self, r):
        d1 = rp.f_prime(self.rho, r, self.cutoff)
        return np.sqrt(1.0 + d1 * d1)

    def _gl(self, lo, hi):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = mid[..., None] + half[..., None] * self._x
        return half * np.sum(self._w * self._speed(nodes), axis=-1)

    def _blend_length(self, r):
        # length from the radius 2 sqrt(rho) inward to r
        r = np.asarray(r, dtype=float)
        idx = np.clip(
            np.searchsorted(-self._edges, -r, side="right") - 1, 0, self._PANELS - 1
        )
        return self._cum[idx] + self._gl(r, self._edges[idx])

    def _invert_blend(self, L):
        # Newton on the monotone map r -> length, started from the chord guess
        lo, hi = self._sr, 2.0 * self._sr
        r = hi - L * (hi - lo) / self._cum[-1]
        for _ in range(60):
            g = self._blend_length(r) - L
            step = g / self._speed(r)
            r = np.clip(r + step, lo, hi)
            if np.all(np.abs(step) <= 1e-15 * hi):
                break
        return r

    def _invert_inner(self, L):
        # solve G(s_hi) - G(s) = L for s in [0, s_hi]
        target = self._G_hi - L
        s = self._s_hi * np.clip(target / self._G_hi, 0.0, 1.0)
        for _ in range(80):
            g = _G(self.rho, s) - target
            step = -g / _inner_integrand(s, self.rho)
            s = np.clip(s + step, 0.0, self._s_hi)
            if np.all(np.abs(step) <= 1e-16 * self._s_hi + 1e-300):
                break
        return s

    def evaluate(self, tau):
        """Return ``(r, t, dr/dtau, dt/dtau)`` at arc length ``tau``."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if np.any(tau < -1e-14) or np.any(tau > self.total_length * (1 + 1e-14)):
            raise DomainError("tau outside [0, d_rho]")
        r = np.empty_like(tau)
        t = np.empty_like(tau)
        dr = np.empty_like(tau)
        dt = np.empty_like(tau)

        m = tau <= self.tau_flat
        r[m] = self.R - tau[m]
        t[m] = 0.0
        dr[m] = -1.0
        dt[m] = 0.0

        m = (tau > self.tau_flat) & (tau <= self.tau_blend)
        if np.any(m):
            rb = self._invert_blend(tau[m] - self.tau_flat)
            d1 = rp.f_prime(self.rho, rb, self.cutoff)
            w = np.sqrt(1.0 + d1 * d1)
            r[m], t[m], dr[m], dt[m] = rb, rp.f(self.rho, rb, self.cutoff), -1.0 / w, -d1 / w

        m = (tau > self.tau_blend) & (tau < self.tau_cyl)
        if np.any(m):
            s = self._invert_inner(tau[m] - self.tau_blend)
            p2 = self.rho * self.rho
            r[m] = (s * s + p2) ** 2
            t[m] = self.a - (4.0 / 3.0) * self.rho * s**3 - 4.0 * self.rho**3 * s
            # |xi'| = rho / s, so the unit tangent is (-s, rho) / sqrt(s^2 + rho^2)
            w = np.sqrt(s * s + p2)
            dr[m], dt[m] = -s / w, self.rho / w

        m = tau >= self.tau_cyl
        r[m] = self.rho4
        t[m] = self.a + (tau[m] - self.tau_cyl)
        dr[m] = 0.0
        dt[m] = 1.0
        return r, t, dr, dt

    def radius(self, tau):
        return self.evaluate(tau)[0]


@dataclass(frozen=True)
class RevolutionCurve:
    rho: float
    R: float
    tau: np.ndarray
    r: np.ndarray
    t: np.ndarray
    total_length: float
    terminal_radius: float

    def to_dict(self):
        return {
            "rho": self.rho,
            "R": self.R,
            "total_length": self.total_length,
            "terminal_radius": self.terminal_radius,
            "tau": self.tau.tolist(),
            "r": self.r.tolist(),
            "t": self.t.tolist(),
        }


def warped_form(rho, R, grid=400, cutoff: rp.CutoffSpec = rp.QUINTIC) -> RevolutionCurve:
    """Sample the arc-length form on ``grid`` points (an int or an explicit tau array)."""
    wp = WarpedProfile(rho, R, cutoff)
    if np.ndim(grid) == 0:
        tau = np.linspace(0.0, wp.total_length, int(grid))
    else:
        tau = np.asarray(grid, dtype=float)
    r, t, _, _ = wp.evaluate(tau)
    return RevolutionCurve(float(rho), float(R), tau, r, t, wp.total_length, wp.rho4)
