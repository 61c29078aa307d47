"""Sweep the Euclidean handle estimate over (rho, k) and print the worst margin per claim.

Usage: python3 scripts/prop_sweep.py [--jobs N] [--unsmoothed]
"""
import argparse
from collections import defaultdict

from handle_forge import estimate_suite as es


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--unsmoothed", action="store_true", help="keep the C^1 corner")
    args = ap.parse_args()
    reps = es.sweep_prop(jobs=args.jobs, smooth=not args.unsmoothed)
    worst = defaultdict(lambda: None)
    for rep in reps:
        if not rep.applicable:
            continue
        w = worst[rep.claim_id]
        if w is None or rep.margin < w.margin:
            worst[rep.claim_id] = rep
    print("claim,min_margin,rho,k,r_at_min,all_pass")
    for claim in sorted(worst):
        w = worst[claim]
        ok = all(r.passed for r in reps if r.claim_id == claim)
        print(f"{claim},{w.margin:.6e},{w.rho:g},{w.k},{w.location:.6e},{ok}")
    print(f"# {len(reps)} reports, {sum(not r.passed for r in reps)} failing")


if __name__ == "__main__":
    main()
