"""Quasi-spherical flow along rotationally symmetric round-sphere paths.

The background is ``gbar = dt^2 + lambda(t)^2 g_round`` on ``[0, 1] x S^n``.
For a spatially constant lapse ``u(t)`` the metric ``u^2 dt^2 + lambda^2
g_round`` has scalar curvature ``s`` exactly when

    Hbar du/dt = (s - scal_zeta) u^3 / 2 + (scal_zeta - scal_gbar) u / 2,

and the total mean curvature of the slices is
``TMC(t) = n c_n lambda^(n-1) lambda' / u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, FlowBlowUp
from .estimate_suite import MarginReport
from .mass_bounds import unit_sphere_volume

CSV_COLUMNS = ("t", "u", "H", "TMC")


@dataclass(frozen=True)
class RoundPath:
    n: int
    lam: Callable
    dlam: Callable
    d2lam: Callable
    s: float = 0.0
    name: str = ""

    def check(self, n_points=1001) -> None:
        """Membership test: ``lambda > 0``, ``lambda' > 0`` and ``scal_zeta > s`` on [0, 1]."""
        if self.n < 2:
            raise DomainError("need n >= 2")
        t = np.linspace(0.0, 1.0, n_points)
        lam, dlam = np.asarray(self.lam(t), float), np.asarray(self.dlam(t), float)
        if np.any(lam <= 0.0):
            raise DomainError("warp must be positive")
        if np.any(dlam <= 0.0):
            raise DomainError("warp must be strictly increasing")
        if np.any(self.n * (self.n - 1) / lam**2 <= self.s):
            raise DomainError("need scal_zeta > s along the path")


def linear_path(n=2, s=0.0, slope=1.0) -> RoundPath:
    return RoundPath(
        n, lambda t: 1.0 + slope * np.asarray(t), lambda t: slope + 0.0 * np.asarray(t),
        lambda t: 0.0 * np.asarray(t), s, f"linear({slope})",
    )


def exp_path(n=2, s=0.0, rate=1.0) -> RoundPath:
    return RoundPath(
        n, lambda t: np.exp(rate * np.asarray(t)), lambda t: rate * np.exp(rate * np.asarray(t)),
        lambda t: rate * rate * np.exp(rate * np.asarray(t)), s, f"exp({rate})",
    )


def quadratic_path(n=2, s=0.0, b=1.0) -> RoundPath:
    return RoundPath(
        n, lambda t: 1.0 + np.asarray(t) + b * np.asarray(t) ** 2, lambda t: 1.0 + 2.0 * b * np.asarray(t),
        lambda t: 2.0 * b + 0.0 * np.asarray(t), s, f"quadratic({b})",
    )


def sqrt_path(n=2, s=0.0) -> RoundPath:
    return RoundPath(
        n, lambda t: np.sqrt(1.0 + np.asarray(t)), lambda t: 0.5 / np.sqrt(1.0 + np.asarray(t)),
        lambda t: -0.25 * (1.0 + np.asarray(t)) ** -1.5, s, "sqrt",
    )


def ambient_quantities(path: RoundPath, t):
    """``(Hbar, |Abar|^2, scal_zeta, scal_gbar)`` at time ``t``."""
    n = path.n
    lam, dlam, d2lam = path.lam(t), path.dlam(t), path.d2lam(t)
    Hbar = n * dlam / lam
    A2 = n * (dlam / lam) ** 2
    scal_zeta = n * (n - 1) / lam**2
    scal_gbar = n * (n - 1) * (1.0 - dlam * dlam) / lam**2 - 2.0 * n * d2lam / lam
    return Hbar, A2, scal_zeta, scal_gbar


def flow_rhs(path: RoundPath):
    def rhs(t, y):
        Hbar, _, sz, sg = ambient_quantities(path, t)
        u = y[0]
        return [(0.5 * (path.s - sz) * u**3 + 0.5 * (sz - sg) * u) / Hbar]

    return rhs


@dataclass(frozen=True)
class FlowTrajectory:
    path: RoundPath
    u0: float
    t: np.ndarray
    u: np.ndarray
    sol: object

    def __call__(self, t):
        return self.sol(np.asarray(t, dtype=float))[0]

    def rows(self):
        H = np.array([ambient_quantities(self.path, ti)[0] for ti in self.t]) / self.u
        return [
            {"t": float(a), "u": float(b), "H": float(c), "TMC": float(d)}
            for a, b, c, d in zip(self.t, self.u, H, total_mean_curvature(self.path, self.u, self.t))
        ]


def solve_u(path: RoundPath, u0, tol=1e-12, t_span=(0.0, 1.0), blow_up=1e8) -> FlowTrajectory:
    """Integrate the lapse equation with an adaptive embedded 4(5) pair.

    Raises
    ------
    FlowBlowUp
        When ``u`` reaches 0 or ``blow_up``.
    """
    if not u0 > 0.0:
        raise DomainError("need u0 > 0")
    path.check()

    def hit_zero(t, y):
        return y[0] - 1e-12

    def hit_big(t, y):
        return y[0] - blow_up

    hit_zero.terminal = hit_big.terminal = True
    sol = solve_ivp(
        flow_rhs(path), t_span, [float(u0)], method="RK45", rtol=tol, atol=tol * 1e-2,
        dense_output=True, events=(hit_zero, hit_big),
    )
    if sol.status == 1 or not sol.success:
        raise FlowBlowUp(f"lapse left (0, {blow_up:g}) at t = {sol.t[-1]:.6g}")
    return FlowTrajectory(path, float(u0), sol.t, sol.y[0], sol.sol)


def total_mean_curvature(path: RoundPath, u, t):
    n = path.n
    return n * unit_sphere_volume(n) * path.lam(t) ** (n - 1) * path.dlam(t) / u


def dlog_tmc(path: RoundPath, u, t):
    """Closed form of ``d/dt log TMC``, positive whenever ``s < scal_zeta``."""
    Hbar, _, sz, _ = ambient_quantities(path, t)
    n = path.n
    return 0.5 * (n - 1) * path.dlam(t) / path.lam(t) - 0.5 * (path.s - sz) * u * u / Hbar


def check_monotone(traj: FlowTrajectory) -> MarginReport:
    """Strict increase of TMC between consecutive accepted steps."""
    tmc = total_mean_curvature(traj.path, traj.u, traj.t)
    rel = np.diff(tmc) / tmc[:-1]
    i = int(np.argmin(rel))
    return MarginReport(
        "flow.tmc", float(traj.u0), traj.path.n, float(traj.t[0]), float(traj.t[-1]), float(rel[i]),
        float(traj.t[i + 1]), True, traj.path.name,
    )


def scal_warped(lam, dlam, d2lam, u, du, d2u_unused, n):
    """Scalar curvature of ``u^2 dt^2 + lambda^2 g_round`` (``d2u`` unused, kept for symmetry)."""
    ls = dlam / u
    lss = (d2lam * u - dlam * du) / u**3
    return -2.0 * n * lss / lam + n * (n - 1) * (1.0 - ls * ls) / lam**2


def scal_residual(traj: FlowTrajectory, n_times=20, h=1e-5) -> float:
    """Max of ``|scal(gtilde) - s| / max(|s|, scal_zeta)`` with ``du/dt`` by FD of the dense output."""
    p = traj.path
    t = np.linspace(0.05, 0.95, n_times)
    u = traj(t)
    du = (traj(t + h) - traj(t - h)) / (2.0 * h)
    S = scal_warped(p.lam(t), p.dlam(t), p.d2lam(t), u, du, None, p.n)
    scale = np.maximum(abs(p.s), p.n * (p.n - 1) / p.lam(t) ** 2)
    return float(np.max(np.abs(S - p.s) / scale))


def analytic_linear_u(t, u0):
    """Exact lapse for ``lambda = 1 + t``, ``n = 2``, ``s = 0``: ``u / sqrt(1 - u^2) = C sqrt(1 + t)``."""
    C = u0 / math.sqrt(1.0 - u0 * u0)
    v = C * np.sqrt(1.0 + np.asarray(t, dtype=float))
    return v / np.sqrt(1.0 + v * v)


def sweep_cases():
    """The 20 deterministic sweep cases ``(path, u0)``."""
    cases = []
    makers = (
        lambda n, s: linear_path(n, s),
        lambda n, s: exp_path(n, s, 0.5),
        lambda n, s: quadratic_path(n, s, 0.5),
        lambda n, s: sqrt_path(n, s),
        lambda n, s: linear_path(n, s, 3.0),
    )
    for n, frac, u0 in ((2, 0.0, 0.5), (3, -1.0, 1.0), (4, 0.5, 1.5), (5, 0.9, 0.8)):
        for make in makers:
            probe = make(n, 0.0)
            lam_max = float(probe.lam(1.0))
            s = frac * n * (n - 1) / lam_max**2
            cases.append((make(n, s), u0))
    return cases


def _run_case(i, tol):
    path, u0 = sweep_cases()[i]
    traj = solve_u(path, u0, tol)
    rep = check_monotone(traj)
    return {
        "case": i,
        "path": path.name,
        "n": path.n,
        "s": path.s,
        "u0": u0,
        "u1": float(traj.u[-1]),
        "steps": int(len(traj.t) - 1),
        "min_rel_increase": rep.margin,
        "scal_residual": scal_residual(traj),
        "passed": rep.passed,
    }


def sweep(tol=1e-12, jobs=1) -> list[dict]:
    idx = range(len(sweep_cases()))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run_case, idx, [tol] * len(idx)))
    return [_run_case(i, tol) for i in idx]
