"""Closed-form radial profiles of the bending handle.

The generating curve of the handle is the graph t = f(r) of

    f(r) = eta_rho(r) * (xi(r) + a_rho),

where ``xi`` solves ``4 xi'' = -xi' (1 + xi'^2) / r`` with a vertical tangent
at ``r = rho**4`` and ``eta_rho`` cuts the graph off to zero between ``sqrt(rho)``
and ``2 sqrt(rho)``.  Everything here is exact closed form; finite differences
live only in :mod:`handle_forge.fd_oracle`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, SingularityError

RHO_MAX = 0.1
R_MAX = 2.0 / math.sqrt(10.0)
_REL = 1e-12


def _asarray(x):
    return np.asarray(x, dtype=float)


def _out(x, like):
    """Return a python float for scalar input, an array otherwise."""
    return float(x) if np.ndim(like) == 0 else x


# ---------------------------------------------------------------------------
# cutoff


def _quintic_eta(s):
    s = np.clip(_asarray(s), 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def _quintic_eta_d1(s):
    s = np.clip(_asarray(s), 0.0, 1.0)
    return -30.0 * s**2 * (s - 1.0) ** 2


def _quintic_eta_d2(s):
    s = np.clip(_asarray(s), 0.0, 1.0)
    return -60.0 * s * (2.0 * s - 1.0) * (s - 1.0)


def _quintic_eta_int(s):
    """Antiderivative of eta vanishing at 0, extended linearly below 0."""
    s = _asarray(s)
    c = np.clip(s, 0.0, 1.0)
    inner = c - c**4 * (2.5 - 3.0 * c + c**2)
    return np.where(s < 0.0, s, inner)


@dataclass(frozen=True)
class CutoffSpec:
    """A cutoff ``eta`` equal to 1 on (-inf, 0] and 0 on [1, inf).

    Required bounds: ``-2 <= eta' <= 0`` and ``|eta''| <= 10``.
    """

    name: str
    value: Callable
    d1: Callable
    d2: Callable
    integral: Callable | None = None

    def check_bounds(self, n_points: int = 10_001) -> dict:
        s = np.linspace(-0.5, 1.5, n_points)
        v, d1, d2 = self.value(s), self.d1(s), self.d2(s)
        ok = (
            np.all((v >= 0.0) & (v <= 1.0))
            and np.all(v[s <= 0.0] == 1.0)
            and np.all(v[s >= 1.0] == 0.0)
            and np.all((d1 >= -2.0) & (d1 <= 0.0))
            and np.all(np.abs(d2) <= 10.0)
        )
        return {
            "ok": bool(ok),
            "min_d1": float(d1.min()),
            "max_abs_d2": float(np.abs(d2).max()),
        }


QUINTIC = CutoffSpec(
    "quintic-smoothstep", _quintic_eta, _quintic_eta_d1, _quintic_eta_d2, _quintic_eta_int
)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class HandleParams:
    """Parameter tuple of one bending handle.

    Parameters
    ----------
    rho : float
        Bending scale in (0, 1/10]. The terminal cylinder has radius ``rho**4``.
    k : int
        Codimension of the surgery sphere, ``k >= 2``.
    n : int
        Ambient dimension, ``n >= 3`` and ``k <= n``.
    alpha : float
        Width of the conformal collar, in (0, 1/3].
    kappa : float
        Target mean-curvature lower bound, ``kappa >= 0``.
    R : float
        Radius of the tube containing the handle, in (0, 2/sqrt(10)].
    """

    rho: float
    k: int = 3
    n: int = 5
    alpha: float = 1.0 / 3.0
    kappa: float = 0.0
    R: float = R_MAX

    def __post_init__(self):
        validate_rho(self.rho)
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k}")
        if int(self.n) != self.n or self.n < 3 or self.k > self.n:
            raise DomainError(f"n must be an integer >= max(3, k), got n={self.n}, k={self.k}")
        if not 0.0 < self.alpha <= 1.0 / 3.0 + _REL:
            raise DomainError(f"alpha must lie in (0, 1/3], got {self.alpha}")
        if self.kappa < 0.0:
            raise DomainError(f"kappa must be nonnegative, got {self.kappa}")
        if not 0.0 < self.R <= R_MAX * (1 + _REL):
            raise DomainError(f"R must lie in (0, 2/sqrt(10)], got {self.R}")
        # rho <= R^2/4 and 2 sqrt(rho) <= R are the same condition
        if self.rho > self.R**2 / 4.0 * (1 + 1e-10):
            raise DomainError(f"need rho <= R^2/4, got rho={self.rho}, R={self.R}")
        if not a_rho(self.rho) < 2.0 * self.rho:
            raise DomainError("plateau height a_rho >= 2 rho")

    @property
    def kappa_tilde(self) -> float:
        return (self.n - 2) * self.kappa / (2.0 * self.n)


def validate_rho(rho):
    if not (np.isfinite(rho) and 0.0 < rho <= RHO_MAX * (1 + _REL)):
        raise DomainError(f"rho must lie in (0, 1/10], got {rho}")


# ---------------------------------------------------------------------------
# xi and its inverse


def _check_r(rho, r, lo_open=False):
    validate_rho(rho)
    r = _asarray(r)
    lo = rho**4
    if np.any(r < lo * (1 - _REL)) or np.any(r > 1.0 + _REL) or np.any(~np.isfinite(r)):
        raise DomainError(f"r must lie in [rho^4, 1] = [{lo:.3e}, 1]")
    if lo_open and np.any(r <= lo):
        raise SingularityError("xi has a vertical tangent at r = rho^4")
    return r


def _q(rho, r):
    """sqrt(r) - rho^2 evaluated without cancellation near r = rho^4."""
    rho2 = rho * rho
    return np.maximum((r - rho2 * rho2) / (np.sqrt(r) + rho2), 0.0)


def xi(rho, r):
    r_ = _check_r(rho, r)
    q = _q(rho, r_)
    out = -(4.0 / 3.0) * rho * q**1.5 - 4.0 * rho**3 * np.sqrt(q)
    return _out(out, r)


def xi_prime(rho, r):
    r_ = _check_r(rho, r, lo_open=True)
    out = -rho / np.sqrt(_q(rho, r_))
    return _out(out, r)


def xi_second(rho, r):
    """Second derivative, differentiated directly (the ODE is a separate check)."""
    r_ = _check_r(rho, r, lo_open=True)
    q = _q(rho, r_)
    out = rho / (4.0 * np.sqrt(r_) * q**1.5)
    return _out(out, r)


def _arsinh(u):
    # ln(u + sqrt(u^2 + 1)) with the odd symmetry used for u < 0, written
    # with log1p so small |u| keeps full relative precision
    a = np.abs(u)
    return np.sign(u) * np.log1p(a + a * a / (1.0 + np.sqrt(1.0 + a * a)))


def _xi_inverse_B(rho, t):
    return np.sinh(_arsinh(-3.0 * t / (8.0 * rho**4)) / 3.0)


def _check_t(rho, t):
    validate_rho(rho)
    t = _asarray(t)
    lo = xi(rho, 1.0)
    if np.any(t > 0.0) or np.any(t < lo * (1 + _REL)) or np.any(~np.isfinite(t)):
        raise DomainError(f"t must lie in [xi(rho, 1), 0] = [{lo:.6e}, 0]")
    return t


def xi_inverse(rho, t):
    """Radius at which ``xi`` takes the value ``t``."""
    t_ = _check_t(rho, t)
    B = _xi_inverse_B(rho, t_)
    rho2 = rho * rho
    out = (rho2 * (1.0 + 4.0 * B * B)) ** 2
    return _out(out, t)


def xi_inverse_d1(rho, t):
    B = _xi_inverse_B(rho, _check_t(rho, t))
    return _out(-2.0 * B, t)


def xi_inverse_d2(rho, t):
    B = _xi_inverse_B(rho, _check_t(rho, t))
    return _out(1.0 / (4.0 * rho**4 * (1.0 + 4.0 * B * B)), t)


def a_rho(rho) -> float:
    """Plateau height, the value of ``-xi`` at ``r = 2 sqrt(rho)``."""
    return -xi(rho, 2.0 * math.sqrt(rho))


# ---------------------------------------------------------------------------
# blended profile


def _eta_rho(rho, r, cutoff):
    sr = math.sqrt(rho)
    s = (r - sr) / sr
    return cutoff.value(s), cutoff.d1(s) / sr, cutoff.d2(s) / rho


def _f_all(rho, r, cutoff, order):
    r_ = _check_r(rho, r, lo_open=order > 0)
    sr = math.sqrt(rho)
    out = np.zeros_like(r_)
    inner = r_ <= sr
    blend = (r_ > sr) & (r_ < 2.0 * sr)
    a = a_rho(rho)
    if order == 0:
        out[inner] = xi(rho, r_[inner]) + a
    elif order == 1:
        out[inner] = xi_prime(rho, r_[inner])
    else:
        out[inner] = xi_second(rho, r_[inner])
    if np.any(blend):
        rb = r_[blend]
        e0, e1, e2 = _eta_rho(rho, rb, cutoff)
        x0 = xi(rho, rb) + a
        if order == 0:
            out[blend] = e0 * x0
        else:
            x1 = xi_prime(rho, rb)
            if order == 1:
                out[blend] = e1 * x0 + e0 * x1
            else:
                out[blend] = e2 * x0 + 2.0 * e1 * x1 + e0 * xi_second(rho, rb)
    return _out(out, r)


def f(rho, r, cutoff: CutoffSpec = QUINTIC):
    return _f_all(rho, r, cutoff, 0)


def f_prime(rho, r, cutoff: CutoffSpec = QUINTIC):
    return _f_all(rho, r, cutoff, 1)


def f_second(rho, r, cutoff: CutoffSpec = QUINTIC):
    return _f_all(rho, r, cutoff, 2)


# ---------------------------------------------------------------------------
# piecewise container

SEGMENT_TAGS = ("graph-xi", "graph-blend", "flat", "cylinder-smooth")


@dataclass(frozen=True)
class Segment:
    """One closed-form piece.  ``variable`` is ``"r"`` for graph pieces and
    ``"s"`` (depth below the plateau, ``s = a_rho - t``) for the smoothed corner."""

    tag: str
    lo: float
    hi: float
    value: Callable
    d1: Callable
    d2: Callable
    variable: str = "r"


@dataclass(frozen=True)
class PiecewiseProfile:
    rho: float
    segments: tuple = field(default_factory=tuple)
    cutoff: CutoffSpec = QUINTIC

    def segment(self, tag: str) -> Segment:
        for seg in self.segments:
            if seg.tag == tag:
                return seg
        raise KeyError(tag)

    @property
    def tags(self):
        return tuple(s.tag for s in self.segments)

    def graph_segments(self):
        return [s for s in self.segments if s.variable == "r"]

    def value(self, r):
        return f(self.rho, r, self.cutoff)

    def d1(self, r):
        return f_prime(self.rho, r, self.cutoff)

    def d2(self, r):
        return f_second(self.rho, r, self.cutoff)

    def c1_jumps(self) -> list[tuple[str, float, float]]:
        """Relative jumps of value and slope at interior graph-segment boundaries."""
        out = []
        graph = self.graph_segments()
        for left, right in zip(graph[:-1], graph[1:]):
            x = left.hi
            v0, v1 = left.value(x), right.value(x)
            s0, s1 = left.d1(x), right.d1(x)
            jv = abs(v0 - v1) / max(abs(v0), abs(v1), 1e-300) if v0 or v1 else 0.0
            js = abs(s0 - s1) / max(abs(s0), abs(s1), 1e-300) if s0 or s1 else 0.0
            out.append((f"{left.tag}|{right.tag}", jv, js))
        return out

    def with_segment(self, seg: Segment) -> "PiecewiseProfile":
        return PiecewiseProfile(self.rho, self.segments + (seg,), self.cutoff)


def build_profile(rho, cutoff: CutoffSpec = QUINTIC) -> PiecewiseProfile:
    validate_rho(rho)
    sr = math.sqrt(rho)
    a = a_rho(rho)

    def blend_value(r):
        r = _asarray(r)
        e0 = _eta_rho(rho, r, cutoff)[0]
        return _out(e0 * (xi(rho, r) + a), r)

    def blend_d1(r):
        r = _asarray(r)
        e0, e1, _ = _eta_rho(rho, r, cutoff)
        return _out(e1 * (xi(rho, r) + a) + e0 * xi_prime(rho, r), r)

    def blend_d2(r):
        r = _asarray(r)
        e0, e1, e2 = _eta_rho(rho, r, cutoff)
        out = e2 * (xi(rho, r) + a) + 2.0 * e1 * xi_prime(rho, r) + e0 * xi_second(rho, r)
        return _out(out, r)

    def zero(r):
        return _out(np.zeros_like(_asarray(r)), r)

    segs = (
        Segment(
            "graph-xi",
            rho**4,
            sr,
            lambda r: _out(_asarray(xi(rho, r)) + a, r),
            lambda r: xi_prime(rho, r),
            lambda r: xi_second(rho, r),
        ),
        Segment("graph-blend", sr, 2.0 * sr, blend_value, blend_d1, blend_d2),
        Segment("flat", 2.0 * sr, 1.0, zero, zero, zero),
    )
    return PiecewiseProfile(rho, segs, cutoff)
