"""Largest rho1 (with kappa = rho1) for which the final conformal path keeps scal >= -rho1^(1/4).

Bisection in log rho1 over [lo, hi].
Usage: python3 scripts/final_path_threshold.py [--lo 1e-3] [--hi 0.05]
"""
import argparse
import math

from handle_forge import monotonicity as mo


def ok(rho1):
    return mo.final_path_metrics(rho1, rho1).passed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=1e-3)
    ap.add_argument("--hi", type=float, default=0.05)
    ap.add_argument("--iters", type=int, default=30)
    args = ap.parse_args()
    if not ok(args.lo):
        print(f"bound fails already at rho1 = {args.lo:g}")
        return
    if ok(args.hi):
        print(f"bound holds up to rho1 = {args.hi:g}")
        return
    a, b = math.log(args.lo), math.log(args.hi)
    for _ in range(args.iters):
        m = 0.5 * (a + b)
        a, b = (m, b) if ok(math.exp(m)) else (a, m)
    rep = mo.final_path_metrics(math.exp(a), math.exp(a))
    print(f"threshold rho1 = {math.exp(a):.6e}  scal_min = {rep.scal_min:.6e}  bound = {rep.scal_bound:.6e}")


if __name__ == "__main__":
    main()
