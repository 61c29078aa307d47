"""Constant stack for the hyperboloidal mass bound and the pimple example.

The pimple configuration consists of ``ell`` round spheres of radius ``r``
joined by thin tubes.  Its total mean curvature grows like ``K`` while volume
and diameter stay below ``1/K``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InvariantViolation
from .estimate_suite import MarginReport

COSH1 = math.cosh(1.0)
SINH1 = math.sinh(1.0)


def unit_sphere_volume(n) -> float:
    """``vol(S^n)`` for the round unit sphere, ``2 pi^((n+1)/2) / Gamma((n+1)/2)``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return float(2.0 * math.exp(0.5 * (n + 1) * math.log(math.pi) - gammaln(0.5 * (n + 1))))


@dataclass(frozen=True)
class MassConstants:
    n: int
    sigma0: float
    sigma1: float
    kappa: float
    c0: float
    c1: float
    c2: float
    sigma2: float
    K: float
    r0: float = 1.0

    def h0(self, H):
        """``|kappa| sinh(1) + max(H, 0) / 3``."""
        return abs(self.kappa) * SINH1 + np.maximum(np.asarray(H, dtype=float), 0.0) / 3.0

    def to_dict(self) -> dict:
        return asdict(self)


def build_constants(n, sigma0, sigma1, kappa, r0=1.0) -> MassConstants:
    if sigma0 > 0.0 or sigma1 > 0.0:
        raise DomainError("need sigma0, sigma1 <= 0")
    if not kappa < 0.0:
        raise DomainError("need kappa < 0")
    if n < 2 or r0 <= 0.0:
        raise DomainError("need n >= 2 and r0 > 0")
    a = n / (n + 1.0)
    c0 = max(4.0 * abs(kappa), math.sqrt(a * abs(sigma0)), math.sqrt(a * abs(sigma1)) / COSH1)
    c1 = c2 = COSH1 * c0
    sigma2 = -c2 * c2 / a
    mc = MassConstants(n, sigma0, sigma1, kappa, c0, c1, c2, sigma2, sigma2 / (n * (n + 1)), r0)
    if not abs(sigma2) > max(abs(sigma0), abs(sigma1)):
        raise InvariantViolation("|sigma2| <= max(|sigma0|, |sigma1|)")
    for c, s in ((c0, sigma0), (c1, sigma1), (c2, sigma2)):
        if c * c / a < -s * (1 - 1e-14):
            raise InvariantViolation("c_i^2 (n+1)/n < -sigma_i")
    return mc


def hyp_sphere_H(n, sigma2, r0) -> float:
    """Mean curvature ``n sqrt(-K) coth(r0 sqrt(-K))`` of a geodesic sphere, ``K = sigma2/(n(n+1))``."""
    if not sigma2 < 0.0 or not r0 > 0.0:
        raise DomainError("need sigma2 < 0 and r0 > 0")
    s = math.sqrt(-sigma2 / (n * (n + 1.0)))
    return n * s / math.tanh(r0 * s)


def dec_jump_lhs(kappa, H0, c0=None):
    c0 = 4.0 * abs(kappa) if c0 is None else c0
    H0 = np.asarray(H0, dtype=float)
    h0 = abs(kappa) * SINH1 + np.maximum(H0, 0.0) / 3.0
    return COSH1 * H0 + SINH1 * c0 - h0


def dec_jump_check(kappa, H0_grid=None, c0=None) -> MarginReport:
    """``cosh(1) H0 + sinh(1) c0 - h0(H0) >= sinh(1) |H0|`` over ``H0 >= kappa``.

    ``c0`` defaults to its smallest admissible value ``4 |kappa|``.
    """
    if not kappa < 0.0:
        raise DomainError("need kappa < 0")
    H0 = np.linspace(kappa, 10.0, 401) if H0_grid is None else np.asarray(H0_grid, dtype=float)
    if np.any(H0 < kappa):
        raise DomainError("H0 grid must satisfy H0 >= kappa")
    lhs = dec_jump_lhs(kappa, H0, c0)
    rhs = SINH1 * np.abs(H0)
    m = (lhs - rhs) / np.maximum(rhs, 1.0)
    i = int(np.argmin(m))
    return MarginReport("dec.jump", float(kappa), 0, float(H0[0]), float(H0[-1]), float(m[i]), float(H0[i]), True)


def lambda_asymptotic(sigma0, kappa, C0) -> float:
    if not C0 > 0.0:
        raise DomainError("need C0 > 0")
    return C0 * (max(math.sqrt(-sigma0), -kappa) + 1.0)


def hyperbolic_rotation(theta, vec2=None):
    """``F_theta = [[cosh, -sinh], [-sinh, cosh]]``, applied to ``vec2`` when given."""
    F = np.array([[math.cosh(theta), -math.sinh(theta)], [-math.sinh(theta), math.cosh(theta)]])
    return F if vec2 is None else F @ np.asarray(vec2, dtype=float)


# ---------------------------------------------------------------------------
# pimple example


@dataclass(frozen=True)
class PimpleConfig:
    """Sphere count ``ell = ceil((2 c_n K)^(2n-1))`` and sphere radius ``r``.

    ``K`` is raised to ``K_eff`` with ``(2 c_n K_eff)^(2n-1) = ell`` exactly, and
    ``r = (2 c_n K_eff)^-2``, so all bounds hold with the integer ``ell``.
    """

    n: int
    K: float
    c_n: float
    ell: int
    K_eff: float
    r: float
    tmc_lb: float
    vol_ub: float
    diam_ub: float

    @property
    def checks(self) -> dict:
        inv = 1.0 / self.K
        return {
            "small_radius": 20.0 * self.r <= inv,
            "tmc": self.tmc_lb >= self.K,
            "vol": self.vol_ub <= inv * (1 + 1e-14),
            "diam": self.diam_ub <= inv,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checks"] = self.checks
        return d


def pimple(n, K) -> PimpleConfig:
    if n < 2:
        raise DomainError("need n >= 2")
    if not K > 0.0:
        raise DomainError("need K > 0")
    c = unit_sphere_volume(n)
    p = 2 * n - 1
    ell = math.ceil((2.0 * c * K) ** p * (1 - 1e-15))
    K_eff = ell ** (1.0 / p) / (2.0 * c)
    r = (2.0 * c * K_eff) ** -2
    if 20.0 * r > 1.0 / K:
        raise DomainError(f"K too small: 20 r = {20 * r:.3e} > 1/K")
    tmc_lb = 0.5 * n * c * ell * r ** (n - 1)
    vol_ub = ell * c * r**n + 0.5 / K
    cfg = PimpleConfig(n, float(K), c, int(ell), K_eff, r, tmc_lb, vol_ub, 12.0 * r)
    bad = [name for name, ok in cfg.checks.items() if not ok]
    if bad:
        raise InvariantViolation(f"pimple bounds fail: {bad}")
    return cfg
