"""Locate the largest rho with |d/drho d_rho| < rho^(1/4) for several tube radii R.

Usage: python3 scripts/length_threshold.py [R ...]
"""
import argparse
import math

from handle_forge import estimate_suite as es
from handle_forge import revolution_geometry as rg


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("R", type=float, nargs="*", default=[0.5, 0.2, 0.05, 0.02])
    args = ap.parse_args()
    print("R,threshold,dprime_at_threshold,cylinder_estimate,holds_on_whole_domain")
    for R in args.R:
        hi = min(0.05, 0.999 * R * R / 4.0)
        thr = es.derivative_threshold(R, hi=hi)
        dp = rg.d_rho_derivative(thr, R) if math.isfinite(thr) else math.nan
        # leading term -(11/8)(4/3) 2^(3/4) rho^(3/8) from the cylinder piece
        est = ((11.0 / 8.0) * (4.0 / 3.0) * 2.0**0.75) ** -8
        print(f"{R:.6e},{thr:.6e},{dp:.6e},{est:.6e},{thr == hi}")


if __name__ == "__main__":
    main()
