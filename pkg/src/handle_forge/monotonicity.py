"""Reparametrised handle metrics and their monotonicity in the bending scale.

For ``rho <= rho1`` the arc length ``tau`` on the ``rho1`` handle is mapped to
``phi(tau) = tau - q B(tau)`` on the ``rho`` handle, where
``B(tau) = int_0^tau beta(s - 1/2) ds``, ``beta(x) = eta(4|x|)`` and
``q = (d_rho1 - d_rho) / int beta``.  The pullback metric is

    (phi'(tau))^2 dtau^2 + r_rho(phi(tau))^2 g_{S^{k-1}},

and the monotonicity claim is ``d/drho [exp(c rho) entry] >= 0`` for both
diagonal entries, with exponent ``c`` (1/2 by default).  Differentiating the
first entry gives

    d/drho [e^{c rho} phi'^2] = e^{c rho} phi' (c phi' + 2 beta(tau - 1/2) d'(rho) / int beta),

so the check can only pass when ``c >= 2 beta |d'(rho)| / (phi' int beta)``
at the bump centre; :func:`minimal_exponent` reports that value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import conformal_bending as cb
from . import handle_builder as hb
from . import radial_profiles as rp
from . import revolution_geometry as rg
from .errors import DomainError

RHO1_GRID = (0.01, 0.04)
FD_REL = 1e-3


def default_R(rho1) -> float:
    """Tube radius used for a ``rho1`` family; ``rho1 < R^2/4`` with room for the FD step."""
    return min(2.2 * math.sqrt(rho1), rp.R_MAX)


def default_rho_grid(rho1, lo=1e-3, n=9):
    return tuple(float(x) for x in np.geomspace(rho1, min(lo, rho1), n))


# ---------------------------------------------------------------------------
# bump and reparametrisation


def beta(x, cutoff: rp.CutoffSpec = rp.QUINTIC):
    """``eta(4x) eta(-4x)``, which for a cutoff equal to 1 on (-inf, 0] is ``eta(4|x|)``."""
    x = np.asarray(x, dtype=float)
    return cutoff.value(4.0 * x) * cutoff.value(-4.0 * x)


def beta_integral(cutoff: rp.CutoffSpec = rp.QUINTIC) -> float:
    return 0.5 * float(cutoff.integral(1.0))


def beta_cumulative(tau, cutoff: rp.CutoffSpec = rp.QUINTIC):
    """``int_0^tau beta(s - 1/2) ds`` in closed form."""
    x = np.asarray(tau, dtype=float) - 0.5
    total = float(cutoff.integral(1.0))
    left = 0.25 * (total - cutoff.integral(np.clip(-4.0 * x, 0.0, 1.0)))
    right = 0.25 * (total + cutoff.integral(np.clip(4.0 * x, 0.0, 1.0)))
    out = np.where(x <= 0.0, left, right)
    return np.where(x <= -0.25, 0.0, out)


@lru_cache(maxsize=None)
def _d(rho, R) -> float:
    return rg.d_rho(rho, R)


@lru_cache(maxsize=64)
def _warped(rho, R) -> rg.WarpedProfile:
    return rg.WarpedProfile(rho, R)


@dataclass(frozen=True)
class WarpedMetricAt:
    tau: np.ndarray
    dtau2: np.ndarray
    warp: np.ndarray


@dataclass(frozen=True)
class ReparamSpec:
    rho1: float
    R: float | None = None
    cutoff: rp.CutoffSpec = rp.QUINTIC

    def __post_init__(self):
        if self.R is None:
            object.__setattr__(self, "R", default_R(self.rho1))
        if not 0.0 < self.rho1 <= self.R**2 / 4.0:
            raise DomainError(f"need 0 < rho1 <= R^2/4, got rho1={self.rho1}, R={self.R}")

    @property
    def d1(self) -> float:
        return _d(self.rho1, self.R)

    def _check(self, rho):
        # rho slightly above rho1 is allowed for centred differences
        if not 0.0 < rho < self.R**2 / 4.0:
            raise DomainError(f"need 0 < rho < R^2/4, got {rho}")

    def q(self, rho) -> float:
        self._check(rho)
        return (self.d1 - _d(rho, self.R)) / beta_integral(self.cutoff)

    def _tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0.0) or np.any(tau > self.d1 * (1 + 1e-14)):
            raise DomainError("tau outside [0, d_rho1]")
        return tau

    def phi(self, rho, tau):
        tau = self._tau(tau)
        return tau - self.q(rho) * beta_cumulative(tau, self.cutoff)

    def dphi(self, rho, tau):
        tau = self._tau(tau)
        return 1.0 - self.q(rho) * beta(tau - 0.5, self.cutoff)

    def dphi_drho(self, rho, tau, rel=FD_REL):
        h = rel * rho
        return (self.phi(rho + h, tau) - self.phi(rho - h, tau)) / (2.0 * h)

    def pullback(self, rho, tau) -> WarpedMetricAt:
        tau = self._tau(tau)
        wp = _warped(float(rho), self.R)
        p = np.clip(self.phi(rho, tau), 0.0, wp.total_length)
        r = wp.radius(p)
        return WarpedMetricAt(tau, self.dphi(rho, tau) ** 2, r * r)


def phi(rho1, rho, tau, R=None):
    return ReparamSpec(rho1, R).phi(rho, tau)


def pullback(rho1, rho, tau, R=None) -> WarpedMetricAt:
    return ReparamSpec(rho1, R).pullback(rho, tau)


def dphi_bounds(spec: ReparamSpec, rho, n_tau=2001) -> tuple[float, float, float]:
    """``(min phi', max phi', 4 |d_rho1 - d_rho|)``; the sign of ``q`` puts phi' in [1, 1 + 4|gap|]."""
    tau = np.linspace(0.0, spec.d1, n_tau)
    d = spec.dphi(rho, tau)
    return float(d.min()), float(d.max()), abs(spec.d1 - _d(rho, spec.R)) / beta_integral(spec.cutoff)


# ---------------------------------------------------------------------------
# monotonicity check


@dataclass(frozen=True)
class MonotoneReport:
    rho1: float
    R: float
    exponent: float
    min_derivative: float
    location: tuple
    positive_fraction: float
    n_samples: int
    floor: float = -1e-8
    min_fraction: float = 0.99

    @property
    def passed(self) -> bool:
        return self.min_derivative >= self.floor and self.positive_fraction >= self.min_fraction

    def to_dict(self) -> dict:
        return {
            "rho1": self.rho1,
            "R": self.R,
            "exponent": self.exponent,
            "min_derivative": self.min_derivative,
            "location": list(self.location),
            "positive_fraction": self.positive_fraction,
            "n_samples": self.n_samples,
            "passed": self.passed,
        }


def entry_derivatives(spec: ReparamSpec, rho, tau, rel=FD_REL):
    """Entries and centred rho-derivatives: ``{entry: (value, d/drho value)}``."""
    h = rel * rho
    lo, mid, hi = (spec.pullback(x, tau) for x in (rho - h, rho, rho + h))
    return {
        name: (getattr(mid, name), (getattr(hi, name) - getattr(lo, name)) / (2.0 * h))
        for name in ("dtau2", "warp")
    }


def check_monotone_euclidean(
    rho1, rho_grid=None, n_tau=400, exponent=0.5, R=None, rel=FD_REL
) -> tuple[MonotoneReport, list[dict]]:
    """FD check of ``d/drho [exp(c rho) Phi^* g]`` entrywise at every ``(rho, tau)``.

    Returns the report and plot-ready rows ``(rho, tau, entry, derivative)``.
    """
    spec = ReparamSpec(rho1, R)
    rho_grid = default_rho_grid(rho1) if rho_grid is None else tuple(rho_grid)
    tau = np.linspace(0.0, spec.d1, n_tau)
    worst, where, pos, total, rows = math.inf, (), 0, 0, []
    for rho in rho_grid:
        if rho > rho1:
            raise DomainError("rho grid must lie in (0, rho1]")
        for name, (val, der) in entry_derivatives(spec, rho, tau, rel).items():
            g = math.exp(exponent * rho) * (exponent * val + der)
            i = int(np.argmin(g))
            if g[i] < worst:
                worst, where = float(g[i]), (float(rho), float(tau[i]), name)
            pos += int(np.sum(g > 0.0))
            total += g.size
            rows.extend({"rho": float(rho), "tau": float(x), "entry": name, "margin": float(y)} for x, y in zip(tau, g))
    rep = MonotoneReport(float(rho1), float(spec.R), float(exponent), worst, where, pos / total, total)
    return rep, rows


def minimal_exponent(rho1, rho_grid=None, n_tau=400, R=None, rel=FD_REL, entry=None) -> float:
    """Smallest ``c`` with ``c entry + d/drho entry >= 0`` at every sample."""
    spec = ReparamSpec(rho1, R)
    rho_grid = default_rho_grid(rho1) if rho_grid is None else tuple(rho_grid)
    tau = np.linspace(0.0, spec.d1, n_tau)
    c = 0.0
    for rho in rho_grid:
        for name, (val, der) in entry_derivatives(spec, rho, tau, rel).items():
            if entry is not None and name != entry:
                continue
            m = val > 0.0
            c = max(c, float(np.max(-der[m] / val[m])))
    return c


def minimal_exponent_closed(rho1, rho, R=None) -> float:
    """Bump-centre lower bound ``2 |d'(rho)| / (phi' int beta)`` for the dtau^2 entry."""
    spec = ReparamSpec(rho1, R)
    dprime = rg.d_rho_derivative(rho, spec.R)
    dphi = float(spec.dphi(rho, 0.5))
    return max(0.0, -2.0 * dprime / (dphi * beta_integral(spec.cutoff)))


# ---------------------------------------------------------------------------
# final path of conformal factors


@dataclass(frozen=True)
class FinalPathReport:
    rho1: float
    kappa: float
    scal_min: float
    scal_bound: float
    scal_location: tuple
    ds_min: float
    lap_gap: float

    @property
    def passed(self) -> bool:
        return self.scal_min >= self.scal_bound and self.ds_min > 0.0

    def to_dict(self) -> dict:
        return {
            "rho1": self.rho1,
            "kappa": self.kappa,
            "scal_min": self.scal_min,
            "scal_bound": self.scal_bound,
            "scal_location": list(self.scal_location),
            "ds_min": self.ds_min,
            "lap_gap": self.lap_gap,
            "passed": self.passed,
        }


def final_path_metrics(rho1, kappa, alpha=1.0 / 3.0, n=5, k=3, s_grid=None) -> FinalPathReport:
    """Scalar-curvature bound and monotonicity for ``e^rho1 ((1-s) u + 2 s)^(4/(n-2)) g_rho1``.

    The Laplacian is computed twice, from the hypersurface identity and from
    the warped form ``U'' + (k-1) (r'/r) U'``; ``lap_gap`` is their largest
    normalised difference.
    """
    s_grid = np.linspace(0.0, 1.0, 21) if s_grid is None else np.asarray(s_grid, dtype=float)
    params = rp.HandleParams(rho1, k=k, n=n, alpha=alpha, kappa=kappa)
    handle = hb.smooth_corner(hb.build(params, hb.GridSpec(cylinder_points=400)))
    data = cb.ConformalData(n, kappa, alpha)
    parts = handle.sample_all()
    cp = parts[handle.tags[0]]
    for tag in handle.tags[1:]:
        cp = cp.concat(parts[tag])
    u, du, d2u = data.u(cp.t), data.du(cp.t), data.d2u(cp.t)
    lap = cb.tangential_laplacian(cp.H, cp.nu_t, du, d2u)
    r1, r2, t1, t2 = cb.curve_derivatives(cp)
    U1, U2 = du * t1, d2u * t1 * t1 + du * t2
    lap_w = U2 + (k - 1) * r1 / cp.r * U1
    lap_gap = float(np.max(np.abs(lap - lap_w) / np.maximum(np.abs(lap), 1e-300 + np.abs(lap).max())))

    c = 4.0 * (n - 1) / (n - 2)
    bound = -(rho1**0.25)
    worst, where = math.inf, ()
    for s in s_grid:
        us = (1.0 - s) * u + 2.0 * s
        S = math.exp(-rho1) * us ** (-(n + 2.0) / (n - 2)) * (cp.scal * us - c * (1.0 - s) * lap)
        i = int(np.argmin(S))
        if S[i] < worst:
            worst, where = float(S[i]), (float(s), float(cp.r[i]), float(cp.t[i]))
    # d/ds of the conformal factor is e^rho1 (4/(n-2)) u_s^((6-n)/(n-2)) (2 - u)
    ds = float(np.min(2.0 - u))
    return FinalPathReport(float(rho1), float(kappa), worst, bound, where, ds, lap_gap)
