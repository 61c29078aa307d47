"""Smallest weight exponent c making exp(c rho) Phi^* g monotone, per rho1.

Compares the finite-difference scan with the bump-centre closed form.
Usage: python3 scripts/minimal_exponent_scan.py [rho1 ...]
"""
import argparse

from handle_forge import monotonicity as mo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("rho1", type=float, nargs="*", default=[0.04, 0.01, 0.001, 1e-4])
    args = ap.parse_args()
    print("rho1,R,c_fd_dtau2,c_fd_warp,c_closed,passes_at_half")
    for rho1 in args.rho1:
        spec = mo.ReparamSpec(rho1)
        c_fd = mo.minimal_exponent(rho1, entry="dtau2")
        c_w = mo.minimal_exponent(rho1, entry="warp")
        c_cl = mo.minimal_exponent_closed(rho1, rho1)
        print(f"{rho1:g},{spec.R:.6e},{c_fd:.6e},{c_w:.6e},{c_cl:.6e},{max(c_fd, c_w) <= 0.5}")


if __name__ == "__main__":
    main()
