"""Sweep verification of the Euclidean handle estimates.

Each claim is written ``LHS > RHS`` and reported through the normalised
margin ``(LHS - RHS) / max(|RHS|, 1)``, so claims at scale ``rho^-3`` and at
scale ``rho^(3/4)`` can sit in one table.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import handle_builder as hb
from . import radial_profiles as rp
from . import revolution_geometry as rg
from .errors import DomainError

RHO_GRID = (0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001)
K_GRID = (2, 3, 4, 5, 6, 7)
CSV_COLUMNS = ("claim_id", "rho", "k", "r_at_min", "margin", "pass")


def cbar(k) -> float:
    if k < 2:
        raise DomainError("k must be >= 2")
    return 18.0 * k + 432.0


def ratio_H_A(k) -> float:
    """``H / |A|`` on the inner graph, where ``lambda2 = -4 lambda1``."""
    return (4.0 * k - 5.0) / math.sqrt(16.0 * k - 15.0)


def ratio_scal_A2(k) -> float:
    return 8.0 * (k - 1) * (2.0 * k - 5.0) / (16.0 * k - 15.0)


@dataclass(frozen=True)
class MarginReport:
    claim_id: str
    rho: float
    k: int
    r_lo: float
    r_hi: float
    margin: float
    location: float
    applicable: bool = True
    note: str = ""

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.margin > 0.0

    def row(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "rho": self.rho,
            "k": self.k,
            "r_at_min": self.location,
            "margin": self.margin,
            "pass": self.passed,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def normalized_margin(lhs, rhs):
    lhs, rhs = np.broadcast_arrays(np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float))
    return (lhs - rhs) / np.maximum(np.abs(rhs), 1.0)


def _report(claim, rho, k, cp: rg.CurvaturePoint, lhs, rhs, lo, hi, note=""):
    m = normalized_margin(lhs, rhs)
    i = int(np.argmin(m))
    return MarginReport(claim, rho, k, lo, hi, float(m[i]), float(cp.r[i]), True, note)


def _skip(claim, rho, k, lo, hi, note):
    return MarginReport(claim, rho, k, lo, hi, float("nan"), float("nan"), False, note)


def _select(cp: rg.CurvaturePoint, mask) -> rg.CurvaturePoint:
    names = ("r", "t", "lambda1", "lambda2", "H", "normA", "scal", "nu_t", "nu_tan")
    return rg.CurvaturePoint(*(getattr(cp, a)[mask] for a in names), k=cp.k, tag=cp.tag)


def check_prop_euclidean(
    params: rp.HandleParams, grid: hb.GridSpec = hb.GridSpec(), smooth: bool = True
) -> list[MarginReport]:
    """Items (i)-(v) of the Euclidean handle estimate for one ``(rho, k)`` cell.

    With ``smooth=True`` the corner is blended first and the blended band is
    included in the ranges of items (ii) and (iii).
    """
    rho, k = params.rho, params.k
    handle = hb.build(params, grid)
    if smooth:
        handle = hb.smooth_corner(handle)
    samples = handle.sample_all()
    sr = math.sqrt(rho)
    C = cbar(k)
    reports = []

    # (i) flat outside 2 sqrt(rho), cylindrical above 2 rho
    flat = samples["flat"]
    flat_dev = float(np.max(np.abs(flat.t))) if len(flat) else 0.0
    a = handle.a
    m = (2.0 * rho - a) / max(a, 1.0) if flat_dev == 0.0 else -flat_dev
    reports.append(MarginReport("i", rho, k, 2.0 * sr, params.R, m, a, True, "2 rho - a_rho; flat part exactly 0"))

    # inner graph (unsmoothed part), blended band and cylinder
    inner = samples["graph-xi"]
    tube = samples["cylinder"]
    if smooth:
        tube = samples["cylinder-smooth"].concat(tube)
    near = inner.concat(tube)

    reports.append(_report("ii.H", rho, k, near, near.H, 0.5 * near.normA, rho**4, sr))
    if k >= 3:
        reports.append(_report("ii.scal", rho, k, near, near.scal, near.normA**2 / 3.0, rho**4, sr))
    else:
        reports.append(_skip("ii.scal", rho, k, rho**4, sr, "k = 2"))

    # exact ratios on the unsmoothed inner graph
    plain = hb.build(params, grid).sample("graph-xi")
    err_H = np.abs(plain.H / plain.normA - ratio_H_A(k))
    err_s = np.abs(plain.scal / plain.normA**2 - ratio_scal_A2(k))
    err = np.maximum(err_H, err_s)
    i = int(np.argmax(err))
    reports.append(
        MarginReport("ii.ratio", rho, k, rho**4, sr, float(1e-10 - err[i]), float(plain.r[i]), True, "1e-10 - |ratio gap|")
    )

    if k >= 3:
        zone = _select(near, near.r <= rho * rho)
        lhs = np.minimum(zone.H**2, zone.scal)
        reports.append(_report("iii", rho, k, zone, lhs, 0.5 * rho**-3, rho**4, rho * rho))
    else:
        reports.append(_skip("iii", rho, k, rho**4, rho * rho, "k = 2"))

    graph = samples["graph-xi"].concat(samples["graph-blend"]).concat(flat)
    far = _select(graph, graph.r >= rho * rho)
    reports.append(_report("iv", rho, k, far, C * math.sqrt(rho), far.nu_tan, rho * rho, params.R))

    outer = samples["graph-blend"].concat(flat)
    reports.append(_report("v.A", rho, k, outer, C * rho**0.375, outer.normA, sr, params.R))
    reports.append(_report("v.scal", rho, k, outer, outer.scal, -C * rho**0.75, sr, params.R))
    return reports


def sweep_prop(rho_grid=RHO_GRID, k_grid=K_GRID, grid: hb.GridSpec = hb.GridSpec(), smooth=True, jobs=1):
    cells = [(rho, k) for rho in rho_grid for k in k_grid]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_cell, cells, [grid] * len(cells), [smooth] * len(cells)))
    else:
        parts = [_cell(c, grid, smooth) for c in cells]
    return [rep for part in parts for rep in part]


def _cell(cell, grid, smooth):
    rho, k = cell
    return check_prop_euclidean(rp.HandleParams(rho, k=k, n=max(k, 3)), grid, smooth)


def trend_margins(k, rho_grid=RHO_GRID, positions=(1.0, 0.3, 0.1, 0.03)):
    """Normalised (ii)/(iii) margins at fixed ``r / rho^2`` for each ``rho``.

    Returns ``{claim: array[len(positions), len(rho_grid)]}``.
    """
    out = {"ii.H": [], "ii.scal": [], "iii": []}
    for c in positions:
        rows = {key: [] for key in out}
        for rho in rho_grid:
            r = np.array([max(c * rho * rho, rho**4 * 1.0001)])
            seg = rp.build_profile(rho).segment("graph-xi")
            l1, l2 = rg.graph_curvatures(seg.d1(r), seg.d2(r), r)
            H, A, S = rg.shape_invariants(l1, l2, k)
            rows["ii.H"].append(normalized_margin(H, 0.5 * A)[0])
            rows["ii.scal"].append(normalized_margin(S, A**2 / 3.0)[0])
            rows["iii"].append(normalized_margin(np.minimum(H**2, S), 0.5 * rho**-3)[0])
        for key in out:
            out[key].append(rows[key])
    return {key: np.array(v) for key, v in out.items()}


# ---------------------------------------------------------------------------
# length estimates


@dataclass(frozen=True)
class LengthRow:
    rho: float
    R: float
    d: float
    d_rho: float
    bound_margin: float
    deriv_margin: float
    route_gap: float
    error_estimate: float


def length_rows(rho_grid, R) -> list[LengthRow]:
    rows = []
    for rho in rho_grid:
        if not rho < R * R / 4.0:
            raise DomainError(f"need rho < R^2/4, got rho={rho}, R={R}")
        al = rg.arc_length_d(rho, R)
        dd = rg.d_rho_derivative(rho, R)
        bound = min(al.d - 1.0, 1.0 + R - al.d) / (1.0 + R)
        deriv = (rho**0.25 - abs(dd)) / max(abs(dd), 1.0)
        rows.append(LengthRow(rho, R, al.d, dd, bound, deriv, al.route_gap, al.error_estimate))
    return rows


def check_length_bounds(rho_grid, R) -> tuple[MarginReport, MarginReport, list[LengthRow]]:
    """``1 < d_rho < 1 + R`` and ``|d/drho d_rho| < rho^(1/4)`` over ``rho_grid``."""
    rows = length_rows(rho_grid, R)
    b = min(rows, key=lambda x: x.bound_margin)
    d = min(rows, key=lambda x: x.deriv_margin)
    lo, hi = min(rho_grid), max(rho_grid)
    bounds = MarginReport("len.bounds", b.rho, 0, lo, hi, b.bound_margin, b.rho, True, "min(d-1, 1+R-d)/(1+R)")
    deriv = MarginReport("len.deriv", d.rho, 0, lo, hi, d.deriv_margin, d.rho, True, "rho^(1/4) - |d'(rho)|")
    return bounds, deriv, rows


def derivative_threshold(R, lo=1e-7, hi=0.05, iters=60) -> float:
    """Largest ``rho`` below which ``|d/drho d_rho| < rho^(1/4)`` (bisection in log rho)."""
    f = lambda p: p**0.25 - abs(rg.d_rho_derivative(p, R))
    if f(hi) > 0.0:
        return hi
    if f(lo) <= 0.0:
        return float("nan")
    a, b = math.log(lo), math.log(hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        if f(math.exp(m)) > 0.0:
            a = m
        else:
            b = m
    return math.exp(a)
