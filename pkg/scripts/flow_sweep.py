"""Run the 20-case quasi-spherical flow sweep at several tolerances.

Usage: python3 scripts/flow_sweep.py [--jobs N]
"""
import argparse

from handle_forge import quasispherical_flow as qf


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    print("tol,cases,all_increasing,min_rel_increase,max_scal_residual,total_steps")
    for tol in (1e-8, 1e-10, 1e-12):
        rows = qf.sweep(tol, jobs=args.jobs)
        print(
            f"{tol:g},{len(rows)},{all(r['passed'] for r in rows)},"
            f"{min(r['min_rel_increase'] for r in rows):.6e},"
            f"{max(r['scal_residual'] for r in rows):.6e},{sum(r['steps'] for r in rows)}"
        )


if __name__ == "__main__":
    main()
