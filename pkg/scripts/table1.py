"""Print the phi metric of the RM start and of bit-swap optimized profiles.

Usage: python scripts/table1.py [--n 128] [--k 64] [--g 0o177 0o133]
"""
import argparse
import time

from pacrate.codec import PacCode
from pacrate.rate_profile import bit_swap_optimize, build_search_space, compression_matrix, rm_design


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--k", type=int, default=64)
    ap.add_argument("--g", nargs="+", default=["0o177", "0o133"])
    ap.add_argument("--m", type=int, nargs="+", default=[0, 2, 4])
    args = ap.parse_args()

    start = rm_design(args.n, args.k)
    print(f"{'g':>6} {'M':>2} {'phi':>9} {'evals':>6} {'sec':>6}  swapped")
    for g in args.g:
        Gt = compression_matrix(PacCode(start, g).G)
        for m in args.m:
            t0 = time.perf_counter()
            res = bit_swap_optimize(start, m, Gt)
            dt = time.perf_counter() - t0
            space = build_search_space(start, m)
            froze = sorted(set(res.best_profile.frozen) - set(start.frozen))
            freed = sorted(set(start.frozen) - set(res.best_profile.frozen))
            print(f"{g:>6} {m:>2} {res.best_metric:9.4f} {res.evaluations:>6} {dt:6.3f}  "
                  f"unfreeze {freed} freeze {froze} (Phi {space.phi_set}, Psi {space.psi_set})")


if __name__ == "__main__":
    main()
