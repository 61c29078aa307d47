"""Conformal bending of the handle and the flat-model mean-curvature theorem.

The ambient metric on ``M x [0, 1]`` is ``u^(4/(n-2)) (g_M + dt^2)`` with

    u(t) = 1 + t kt eta(t / alpha - 1),    kt = (n - 2) kappa / (2 n).

In the flat fibre model ``M`` is Euclidean and the handle is the product of a
flat factor with the revolution hypersurface, so the background curvature
data are exactly those of the Euclidean handle.  ``nu_t`` is the ``dt``
component of the unit normal used for ``H``; on the handle this is the upward
normal, on the boundary slice ``M x {0}`` the exterior normal ``-dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import handle_builder as hb
from . import radial_profiles as rp
from .errors import DomainError
from .estimate_suite import MarginReport, normalized_margin

C1_INNER = 0.125  # lower constant for H on r in [rho^4, rho^2]


@dataclass(frozen=True)
class ConformalData:
    n: int
    kappa: float
    alpha: float = 1.0 / 3.0
    cutoff: rp.CutoffSpec = rp.QUINTIC

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("n must be >= 3")
        if self.kappa < 0.0 or not 0.0 < self.alpha <= 1.0 / 3.0 + 1e-12:
            raise DomainError("need kappa >= 0 and alpha in (0, 1/3]")

    @property
    def kappa_tilde(self) -> float:
        return (self.n - 2) * self.kappa / (2.0 * self.n)

    def u(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 + t * self.kappa_tilde * self.cutoff.value(t / self.alpha - 1.0)

    def du(self, t):
        t = np.asarray(t, dtype=float)
        x = t / self.alpha - 1.0
        kt = self.kappa_tilde
        return kt * self.cutoff.value(x) + t * kt * self.cutoff.d1(x) / self.alpha

    def d2u(self, t):
        t = np.asarray(t, dtype=float)
        x = t / self.alpha - 1.0
        kt = self.kappa_tilde
        return 2.0 * kt * self.cutoff.d1(x) / self.alpha + t * kt * self.cutoff.d2(x) / self.alpha**2

    def check_invariants(self, n_points=4001) -> dict:
        t = np.linspace(0.0, 1.0, n_points)
        u, d2 = self.u(t), self.d2u(t)
        kt = self.kappa_tilde
        lin = t <= self.alpha
        return {
            "u0": float(self.u(0.0)),
            "linear_gap": float(np.max(np.abs(u[lin] - (1.0 + t[lin] * kt)))),
            "u_min": float(u.min()),
            "u_max": float(u.max()),
            "u_bounds": bool(u.min() >= 1.0 and u.max() <= 1.0 + kt + 1e-15 and 1.0 + kt <= 2.0),
            "d2u_max": float(np.abs(d2).max()),
            "d2u_bound": 12.0 * kt / self.alpha**2,
        }


def conformal_H(H_g, nu_t, u, du_dt, n):
    """Mean curvature after the change ``g -> u^(4/(n-2)) g`` of the ambient metric."""
    return u ** (-2.0 / (n - 2)) * (H_g + 2.0 * n / (n - 2) * nu_t * du_dt / u)


def tangential_laplacian(H_g, nu_t, du_dt, d2u_dt2):
    """Laplacian on the hypersurface of a function of ``t`` alone."""
    return (1.0 - nu_t * nu_t) * d2u_dt2 - H_g * nu_t * du_dt


def conformal_scal(scal_g, H_g, nu_t, u, du_dt, d2u_dt2, n):
    """Scalar curvature of the induced metric after the conformal change."""
    c = 4.0 * (n - 1) / (n - 2)
    lap = tangential_laplacian(H_g, nu_t, du_dt, d2u_dt2)
    return u ** (-(n + 2.0) / (n - 2)) * (scal_g * u - c * lap)


def multiply_warped_scal(p, B, Bs, Bss, m=0, C=1.0, Cs=0.0, Css=0.0, one_minus_Bs2=None):
    """Scalar curvature of ``dsigma^2 + B^2 g_{S^p} + C^2 delta_m`` (derivatives in sigma).

    ``one_minus_Bs2`` may be passed when ``1 - Bs^2`` is known without
    cancellation.
    """
    gap = 1.0 - Bs * Bs if one_minus_Bs2 is None else one_minus_Bs2
    out = -2.0 * p * Bss / B + p * (p - 1) * gap / (B * B)
    if m:
        out = out - 2.0 * m * Css / C - m * (m - 1) * Cs * Cs / (C * C) - 2.0 * p * m * Bs * Cs / (B * C)
    return out


def warped_conformal_scal(r, r1, r2, U, U1, U2, k, n, t1=None):
    """Intrinsic route: scal of ``U^(4/(n-2)) (dtau^2 + r^2 g_{S^{k-1}} + delta_{n-k})``.

    ``r1, r2, U1, U2`` are derivatives in the arc length ``tau`` of the
    unscaled profile.  The conformal metric is rewritten as a multiply warped
    product over its own arc length.  Passing ``t1`` with ``r1^2 + t1^2 = 1``
    avoids the cancellation in ``1 - r1^2`` where the profile is nearly flat.
    """
    e = 2.0 / (n - 2)
    W = U**e
    W1 = e * U ** (e - 1) * U1
    W2 = e * ((e - 1) * U ** (e - 2) * U1 * U1 + U ** (e - 1) * U2)
    B, B1, B2 = W * r, W1 * r + W * r1, W2 * r + 2.0 * W1 * r1 + W * r2

    def to_sigma(F1, F2):
        return F1 / W, (F2 * W - F1 * W1) / W**3

    Bs, Bss = to_sigma(B1, B2)
    Cs, Css = to_sigma(W1, W2)
    gap = None
    if t1 is not None:
        q = W1 * r / W  # Bs = r1 + q
        gap = t1 * t1 - 2.0 * r1 * q - q * q
    return multiply_warped_scal(k - 1, B, Bs, Bss, n - k, W, Cs, Css, gap)


# ---------------------------------------------------------------------------
# along the handle


@dataclass(frozen=True)
class ConformalSample:
    r: np.ndarray
    t: np.ndarray
    tag: np.ndarray
    H_g: np.ndarray
    scal_g: np.ndarray
    nu_t: np.ndarray
    H: np.ndarray
    scal: np.ndarray
    scal_warped: np.ndarray


def curve_derivatives(cp):
    """Arc-length derivatives ``(r', r'', t', t'')`` from curvature data.

    Arc length runs from the flat edge to the cylinder, so ``r' = -nu_t`` and
    ``t' = lambda2 r``; the Gauss equation gives ``r'' = -lambda1 lambda2 r``
    and the curve's signed curvature is ``lambda1``, so ``t'' = lambda1 r'``.
    """
    r1 = -cp.nu_t
    t1 = cp.nu_tan
    r2 = -cp.lambda1 * cp.lambda2 * cp.r
    t2 = cp.lambda1 * r1
    return r1, r2, t1, t2


def sample_conformal(handle: hb.Handle, data: ConformalData) -> ConformalSample:
    """Closed-form background data and conformal H, scal at every handle sample."""
    k, n = handle.params.k, data.n
    parts = handle.sample_all()
    cp = parts[handle.tags[0]]
    tags = [np.full(len(cp), handle.tags[0])]
    for tag in handle.tags[1:]:
        cp = cp.concat(parts[tag])
        tags.append(np.full(len(parts[tag]), tag))
    u, du, d2u = data.u(cp.t), data.du(cp.t), data.d2u(cp.t)
    H = conformal_H(cp.H, cp.nu_t, u, du, n)
    S = conformal_scal(cp.scal, cp.H, cp.nu_t, u, du, d2u, n)
    r1, r2, t1, t2 = curve_derivatives(cp)
    U1 = du * t1
    U2 = d2u * t1 * t1 + du * t2
    Sw = warped_conformal_scal(cp.r, r1, r2, u, U1, U2, k, n, t1)
    return ConformalSample(cp.r, cp.t, np.concatenate(tags), cp.H, cp.scal, cp.nu_t, H, S, Sw)


def boundary_slice_H(n, kappa, alpha=1.0 / 3.0) -> float:
    """H of ``M x {0}`` for ``g_kappa`` with the exterior normal ``-dt``."""
    d = ConformalData(n, kappa, alpha)
    return float(conformal_H(0.0, -1.0, d.u(0.0), d.du(0.0), n))


def default_rho1(alpha=1.0 / 3.0, R=rp.R_MAX) -> float:
    """A value inside ``(0, min(R^2/4, alpha/3))``."""
    return 0.5 * min(R * R / 4.0, alpha / 3.0)


def empirical_C6(rho1, k=3, n_rho=5) -> float:
    """``sup (1 - nu_t) / sqrt(rho)`` over ``r >= rho^2`` for rho in ``[1e-4 rho1, rho1]``."""
    best = 0.0
    for rho in np.geomspace(rho1, 1e-4 * rho1, n_rho):
        h = hb.build(rp.HandleParams(float(rho), k=k, n=max(k, 3)))
        for tag in ("graph-xi", "graph-blend"):
            cp = h.sample(tag)
            m = cp.r >= rho * rho
            best = max(best, float(np.max((1.0 - cp.nu_t[m]) / math.sqrt(rho))))
    return best


def rho0(kappa, alpha=1.0 / 3.0, rho1=None, C6=None) -> float:
    rho1 = default_rho1(alpha) if rho1 is None else rho1
    C6 = empirical_C6(rho1) if C6 is None else C6
    cands = [rho1, ((1.0 - alpha) * kappa / 2.0) ** 4]
    if C6 > 0.0:
        cands.append(C6**-4)
    return min(cands)


def theorem_flat_check(
    rho, k=3, n=5, alpha=1.0 / 3.0, kappa=0.05, rho1=None, grid: hb.GridSpec = hb.GridSpec(cylinder_points=400)
) -> list[MarginReport]:
    """Pointwise H and scal bounds along the smoothed handle in the flat model.

    Reports ``H > (1 - alpha) kappa - rho^(1/4)``, ``scal > -rho1^(1/4)``, the
    inner bound ``H > u^(-2/(n-2)) (rho^(-3/2)/8 - 6 n / ((n-2) alpha))`` on
    ``[rho^4, rho^2]`` and the agreement of the extrinsic and intrinsic scal
    routes.
    """
    rho1 = default_rho1(alpha) if rho1 is None else rho1
    if rho > rho1:
        raise DomainError(f"need rho <= rho1 = {rho1}")
    params = rp.HandleParams(rho, k=k, n=n, alpha=alpha, kappa=kappa)
    handle = hb.smooth_corner(hb.build(params, grid))
    data = ConformalData(n, kappa, alpha)
    cs = sample_conformal(handle, data)
    reps = []

    def rep(claim, lhs, rhs, mask=None, note=""):
        mask = np.ones(len(cs.r), bool) if mask is None else mask
        m = normalized_margin(lhs, rhs)[mask]
        i = int(np.argmin(m))
        reps.append(MarginReport(claim, rho, k, rho**4, params.R, float(m[i]), float(cs.r[mask][i]), True, note))

    rep("conf.H", cs.H, (1.0 - alpha) * kappa - rho**0.25)
    rep("conf.scal", cs.scal, -(rho1**0.25))
    inner = cs.r <= rho * rho
    C5 = 6.0 * n / ((n - 2) * alpha)
    bound = data.u(cs.t) ** (-2.0 / (n - 2)) * (C1_INNER * rho**-1.5 - C5)
    rep("conf.H.inner", cs.H, bound, inner)
    gap = np.abs(cs.scal - cs.scal_warped) / np.maximum(np.abs(cs.scal), 1.0)
    i = int(np.argmax(gap))
    reps.append(MarginReport("conf.scal.routes", rho, k, rho**4, params.R, float(1e-8 - gap[i]), float(cs.r[i])))
    return reps
