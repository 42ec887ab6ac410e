"""Command-line front end: construct, ncf, optimize, simulate."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .codec import PacCode
from .gf2 import parse_octal_polynomial
from .rate_profile import (
    bec_capacity_profile,
    bit_swap_optimize,
    compression_matrix,
    export_profile,
    ga_construction,
    import_profile,
    ncf_spectrum,
    phi_metric,
    rm_design,
    write_spectrum_csv,
)
from .sim import SimConfig, load_configs, run_sweep, write_results_csv


class CliError(Exception):
    pass


def _octal(text: str):
    try:
        return parse_octal_polynomial(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _check_nk(n: int, k: int) -> None:
    if n < 1 or n & (n - 1):
        raise CliError(f"--n must be a power of two, got {n}")
    if not 1 <= k <= n:
        raise CliError(f"--k must lie in [1, {n}], got {k}")


def _phi(profile, g) -> float:
    return phi_metric(profile, compression_matrix(PacCode(profile, g).G))


def cmd_construct(args) -> list[Path]:
    _check_nk(args.n, args.k)
    if args.method == "rm":
        profile = rm_design(args.n, args.k)
    else:
        profile = ga_construction(args.n, args.k, args.snr)
    phi = _phi(profile, args.g)
    export_profile(profile, args.out, generator=args.g.to_octal(), phi=phi, m=0 if args.method == "rm" else None)
    print(f"wrote {args.out}: ({args.n},{args.k}) {args.method} profile, phi = {phi:.4f}")
    return [Path(args.out)]


def cmd_ncf(args) -> list[Path]:
    path = Path(args.profile)
    if not path.exists():
        raise CliError(f"profile file not found: {path}")
    profile = import_profile(path)
    g = args.g or profile.meta.get("generator")
    if g is None:
        raise CliError(f"{path} names no generator; pass --g")
    code = PacCode(profile, g)
    matrix = code.Gc if args.level == "u" else code.G
    spectrum = ncf_spectrum(profile, matrix)
    capacity = None if args.bec_eps is None else bec_capacity_profile(profile.N, args.bec_eps)
    write_spectrum_csv(spectrum, args.out, capacity=capacity, sorted_=args.sorted)
    print(f"wrote {args.out}: {args.level}-level NCF spectrum, energy = {spectrum.energy:.4f}")
    return [Path(args.out)]


def cmd_optimize(args) -> list[Path]:
    _check_nk(args.n, args.k)
    if not 0 <= args.m <= min(args.k, args.n - args.k):
        raise CliError(f"--m must lie in [0, min(K, N-K)] = [0, {min(args.k, args.n - args.k)}]")
    start = rm_design(args.n, args.k)
    Gt = compression_matrix(PacCode(start, args.g).G)
    res = bit_swap_optimize(start, args.m, Gt)
    export_profile(res.best_profile, args.out, generator=args.g.to_octal())
    written = [Path(args.out)]
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "unfrozen", "frozen", "phi"])
            for step, ((A, B), phi) in enumerate(res.trace):
                w.writerow([step, " ".join(map(str, A)), " ".join(map(str, B)), repr(phi)])
        written.append(Path(args.trace))
    space = res.trace[-1][0] if res.trace else ((), ())
    print(f"search space Phi={list(space[0])} Psi={list(space[1])}; {res.evaluations} candidates")
    print(f"best phi = {res.best_metric:.4f} (start {phi_metric(start, Gt):.4f}); wrote {args.out}")
    return written


SIM_FLAGS = ("n", "k", "g", "profile", "m", "design_snr_db", "crc", "channel", "param",
             "rate", "decoder", "list_size", "seed", "min_frame_errors", "max_frames", "label")


def _inline_configs(args) -> list[SimConfig]:
    base = {}
    for name in SIM_FLAGS:
        value = getattr(args, name)
        if value is not None and name != "param":
            base[name] = value
    if "rate" in base and base["rate"] not in ("code", "info"):
        try:
            base["rate"] = float(base["rate"])
        except ValueError:
            raise CliError("--rate must be 'code', 'info' or a number") from None
    params = args.param or [SimConfig.param]
    return [SimConfig(**base, param=p) for p in params]


def cmd_simulate(args) -> list[Path]:
    inline = [f"--{n.replace('_', '-')}" for n in SIM_FLAGS if getattr(args, n) is not None]
    if args.config and inline:
        raise CliError(f"--config cannot be combined with {', '.join(inline)}")
    configs = load_configs(args.config) if args.config else _inline_configs(args)
    results = run_sweep(configs, threads=args.threads)
    write_results_csv(results, args.csv)
    print(f"{'label':<12}{'profile':<10}{'phi':>9}{'param':>8}{'frames':>10}{'errors':>8}{'FER':>12}")
    for r in results:
        c = r.config
        print(f"{c.label or '-':<12}{r.metadata['profile_method']:<10}{r.metadata['phi']:>9.3f}"
              f"{c.param:>8.3g}{r.frames:>10}{r.frame_errors:>8}{r.fer:>12.3e}")
    return [Path(args.csv)]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pacrate", description=__doc__, allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build an RM or GA rate profile", allow_abbrev=False)
    c.add_argument("--n", type=int, required=True, help="block length N (power of two)")
    c.add_argument("--k", type=int, required=True, help="number of non-frozen positions K")
    c.add_argument("--method", choices=("rm", "ga"), default="rm", help="construction rule")
    c.add_argument("--g", type=_octal, default=_octal("0o133"),
                   help="convolution generator in octal, used for the reported phi")
    c.add_argument("--snr", type=float, default=2.5, help="GA design Eb/N0 in dB")
    c.add_argument("--out", required=True, help="profile file to write")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("ncf", help="write the NCF spectrum of a profile as CSV", allow_abbrev=False)
    s.add_argument("--profile", required=True, help="profile file")
    s.add_argument("--level", choices=("u", "x"), default="x",
                   help="u: after the convolution only; x: after convolution and polar transform")
    s.add_argument("--sorted", action="store_true", help="sort gamma (and capacity) ascending, each on its own")
    s.add_argument("--bec-eps", type=float, default=None, help="add a BEC synthetic-channel capacity column")
    s.add_argument("--g", type=_octal, default=None, help="generator override when the profile names none")
    s.add_argument("--out", required=True, help="CSV file to write")
    s.set_defaults(func=cmd_ncf)

    o = sub.add_parser("optimize", help="bit-swapping rate-profile optimization", allow_abbrev=False)
    o.add_argument("--n", type=int, required=True, help="block length N (power of two)")
    o.add_argument("--k", type=int, required=True, help="number of non-frozen positions K")
    o.add_argument("--g", type=_octal, required=True, help="convolution generator in octal")
    o.add_argument("--m", type=int, required=True, help="swap budget M")
    o.add_argument("--out", required=True, help="optimized profile file to write")
    o.add_argument("--trace", default=None, help="CSV of every evaluated swap and its phi")
    o.set_defaults(func=cmd_optimize)

    m = sub.add_parser("simulate", help="Monte Carlo FER simulation", allow_abbrev=False)
    m.add_argument("--config", default=None, help="JSON config file (excludes the inline flags)")
    m.add_argument("--csv", required=True, help="results CSV to write")
    m.add_argument("--threads", type=int, default=None, help="worker threads (default $PACRATE_THREADS or 1)")
    m.add_argument("--n", type=int, help="block length N")
    m.add_argument("--k", type=int, help="non-frozen positions K (CRC bits included)")
    m.add_argument("--g", help="convolution generator in octal")
    m.add_argument("--profile", help="rm, ncf-opt, ga, or a profile file")
    m.add_argument("--m", type=int, help="swap budget for ncf-opt")
    m.add_argument("--design-snr-db", type=float, help="GA design Eb/N0 (default: channel point)")
    m.add_argument("--crc", action="store_const", const=True, help="append the 8-bit CRC (0xA6)")
    m.add_argument("--channel", choices=("bec", "awgn"), help="channel model")
    m.add_argument("--param", type=float, nargs="+", help="erasure probability(ies) or Eb/N0 value(s) in dB")
    m.add_argument("--rate", help="Eb/N0 rate convention: code, info or a number")
    m.add_argument("--decoder", choices=("sc", "scl"), help="decoder")
    m.add_argument("--list-size", type=int, help="SCL list size")
    m.add_argument("--seed", type=int, help="RNG seed")
    m.add_argument("--min-frame-errors", type=int, help="stop after this many frame errors")
    m.add_argument("--max-frames", type=int, help="stop after this many frames")
    m.add_argument("--label", help="free-form label copied into the CSV")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    args = build_parser().parse_args(argv)
    outputs = [Path(getattr(args, k)) for k in ("out", "csv", "trace") if getattr(args, k, None)]
    try:
        args.func(args)
    except (CliError, ValueError, FileNotFoundError, OSError, RuntimeError) as exc:
        for path in outputs:
            path.unlink(missing_ok=True)
        print(f"pacrate {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
