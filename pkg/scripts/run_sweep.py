"""Run a sweep config from configs/ and print the FER table.

Example: python scripts/run_sweep.py configs/fig4_bec.json results/fig4.csv
"""
import argparse
from pathlib import Path

from pacrate.sim import load_configs, param_at_fer, run_sweep, write_results_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", type=Path)
    ap.add_argument("csv", type=Path)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--target", type=float, nargs="*", default=[1e-2, 1e-3],
                    help="report the parameter where each curve crosses these FERs")
    args = ap.parse_args()

    configs = load_configs(args.config)
    results = run_sweep(configs, threads=args.threads)
    args.csv.parent.mkdir(parents=True, exist_ok=True)
    write_results_csv(results, args.csv)

    curves = {}
    for r in results:
        c = r.config
        print(f"{c.label or c.profile:>12} param={c.param:<6} frames={r.frames:>8} "
              f"errors={r.frame_errors:>4} fer={r.fer:.3e} ({r.elapsed_seconds:.1f}s)")
        curves.setdefault(c.label or c.profile, []).append((c.param, r.fer))
    for label, pts in curves.items():
        for t in args.target:
            try:
                x = param_at_fer([p for p, _ in pts], [f for _, f in pts], t)
                print(f"{label}: FER {t:g} at param {x:.3f}")
            except ValueError:
                pass


if __name__ == "__main__":
    main()
