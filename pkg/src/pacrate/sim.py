"""Monte Carlo frame-error-rate estimation.

Frames are processed in fixed-size batches.  Every frame draws its payload
and channel noise from its own ``frame_rng(seed, frame)`` stream, and the
stopping rule is applied in frame-index order, so results do not depend on
the number of worker threads.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .channels import BecChannel, BpskAwgnChannel, frame_rng
from .codec import CRC8_A6, PacCode, decode_batch, encode_v, crc_append, insert_rate_profile
from .gf2 import parse_octal_polynomial
from .rate_profile import (
    bit_swap_optimize,
    compression_matrix,
    ga_construction,
    import_profile,
    rm_design,
)

log = logging.getLogger(__name__)

THREADS_ENV = "PACRATE_THREADS"
BATCH_SIZE = 256

CSV_COLUMNS = [
    "channel_param", "decoder", "list_size", "profile_method", "phi",
    "frames", "frame_errors", "fer", "seed",
    "channel", "generator", "crc", "undetected_errors", "label",
]


@dataclass(frozen=True)
class SimConfig:
    n: int = 128
    k: int = 64
    g: str = "0o177"
    # "rm", "ncf-opt", "ga", or a path to a profile file
    profile: str = "rm"
    m: int = 0
    design_snr_db: float | None = None
    crc: bool = False
    channel: str = "bec"
    param: float = 0.2
    # "code" (K/N), "info" ((K - crc)/N) or an explicit number
    rate: str | float = "code"
    decoder: str = "sc"
    list_size: int = 1
    seed: int = 0
    min_frame_errors: int = 100
    max_frames: int = 10**7
    label: str = ""

    def __post_init__(self):
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.channel not in ("bec", "awgn"):
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.decoder not in ("sc", "scl"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k={self.k} outside [1, n={self.n}]")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        parse_octal_polynomial(self.g)

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def code_rate(self) -> float:
        if self.rate == "code":
            return self.k / self.n
        if self.rate == "info":
            return (self.k - (CRC8_A6.width if self.crc else 0)) / self.n
        return float(self.rate)


@dataclass
class SimResult:
    frames: int
    frame_errors: int
    elapsed_seconds: float
    config: SimConfig
    metadata: dict = field(default_factory=dict)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0


def build_code(config: SimConfig) -> PacCode:
    N, K = config.n, config.k
    g = parse_octal_polynomial(config.g)
    crc = CRC8_A6 if config.crc else None
    if config.profile == "rm":
        profile = rm_design(N, K)
    elif config.profile == "ncf-opt":
        G = PacCode(rm_design(N, K), g).G
        profile = bit_swap_optimize(rm_design(N, K), config.m, compression_matrix(G)).best_profile
    elif config.profile == "ga":
        snr = config.design_snr_db
        if snr is None:
            if config.channel != "awgn":
                raise ValueError("GA construction on a BEC point needs design_snr_db")
            snr = config.param
        profile = ga_construction(N, K, snr, config.code_rate())
    else:
        path = Path(config.profile)
        if not path.exists():
            raise FileNotFoundError(f"profile file not found: {path}")
        profile = import_profile(path)
        if (profile.N, profile.K) != (N, K):
            raise ValueError(f"{path}: profile is ({profile.N},{profile.K}), config wants ({N},{K})")
    return PacCode(profile, g, crc)


def make_channel(config: SimConfig):
    if config.channel == "bec":
        return BecChannel(config.param)
    return BpskAwgnChannel(config.param, config.code_rate())


def _profile_method(config: SimConfig, code: PacCode) -> str:
    if config.profile in ("rm", "ncf-opt", "ga"):
        return config.profile
    return code.profile.meta.get("method") or "file"


def _run_batch(code: PacCode, channel, config: SimConfig, start: int, count: int):
    """Return per-frame (error, crc_pass) flags for frames start..start+count-1."""
    N, P = code.N, code.payload_length
    payloads = np.empty((count, P), dtype=np.uint8)
    noise_rngs = []
    for j in range(count):
        rng = frame_rng(config.seed, start + j)
        payloads[j] = rng.integers(0, 2, P, dtype=np.uint8)
        noise_rngs.append(rng)
    if code.crc is not None:
        info = np.stack([crc_append(p, code.crc) for p in payloads])
    else:
        info = payloads
    x = encode_v(insert_rate_profile(info, code.profile), code)
    llrs = np.empty((count, N))
    for j in range(count):
        llrs[j] = channel.transmit(x[j], noise_rngs[j])
    v_hat, ok = decode_batch(llrs, code, config.decoder, config.list_size)
    decoded = v_hat[:, code.info_mask][:, :P]
    errors = (decoded != payloads).any(axis=1)
    return errors, ok


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer") from None


def run_point(config: SimConfig, threads: int | None = None, batch_size: int = BATCH_SIZE) -> SimResult:
    threads = default_threads() if threads is None else threads
    if threads < 1:
        raise ValueError("threads must be >= 1")
    t0 = time.perf_counter()
    code = build_code(config)
    channel = make_channel(config)

    frames = errors = undetected = 0
    starts = range(0, config.max_frames, batch_size)
    done = False
    with ThreadPoolExecutor(max_workers=threads) as pool:
        it = iter(starts)
        while not done:
            wave = [s for _, s in zip(range(threads), it)]
            if not wave:
                break
            jobs = [pool.submit(_run_batch, code, channel, config, s,
                                min(batch_size, config.max_frames - s)) for s in wave]
            for job in jobs:
                err, ok = job.result()
                if done:
                    continue
                cum = errors + np.cumsum(err)
                hit = np.flatnonzero(cum >= config.min_frame_errors)
                stop = hit[0] + 1 if hit.size else err.size
                frames += int(stop)
                errors += int(err[:stop].sum())
                undetected += int((err[:stop] & ok[:stop]).sum()) if code.crc is not None else 0
                done = bool(hit.size)
    elapsed = time.perf_counter() - t0
    meta = {
        "phi": code.phi,
        "profile_method": _profile_method(config, code),
        "crc_convention": code.crc.describe() if code.crc else None,
        "rate_convention": config.rate,
        "rate": config.code_rate(),
        "undetected_errors": undetected,
        "frozen": list(code.profile.frozen),
    }
    log.info("%s %s=%g: %d/%d frames in error (%.1fs)", config.label or config.profile,
             config.channel, config.param, errors, frames, elapsed)
    return SimResult(frames, errors, elapsed, config, meta)


def run_sweep(configs, threads: int | None = None, batch_size: int = BATCH_SIZE) -> list[SimResult]:
    configs = list(configs)
    if not configs:
        raise ValueError("sweep needs at least one config")
    results = []
    for idx, cfg in enumerate(configs):
        try:
            results.append(run_point(cfg, threads, batch_size))
        except Exception as exc:
            raise RuntimeError(f"sweep point {idx} ({cfg.label or cfg.channel}={cfg.param}): {exc}") from exc
    return results


def load_configs(path) -> list[SimConfig]:
    """Read a JSON config file: one config object, a list of them, or
    ``{"base": {...}, "points": [{...}, ...]}`` where points override base."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed config: {exc}") from None
    if isinstance(doc, dict) and "points" in doc:
        base = doc.get("base", {})
        return [SimConfig.from_dict({**base, **pt}) for pt in doc["points"]]
    if isinstance(doc, list):
        return [SimConfig.from_dict(d) for d in doc]
    return [SimConfig.from_dict(doc)]


def config_to_dict(config: SimConfig) -> dict:
    return asdict(config)


def write_results_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in results:
            c = r.config
            w.writerow([
                repr(float(c.param)), c.decoder, c.list_size, r.metadata["profile_method"],
                repr(float(r.metadata["phi"])), r.frames, r.frame_errors, repr(float(r.fer)), c.seed,
                c.channel, c.g, int(c.crc), r.metadata.get("undetected_errors", 0), c.label,
            ])


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ints = ("list_size", "frames", "frame_errors", "seed", "crc", "undetected_errors")
    floats = ("channel_param", "phi", "fer")
    for row in rows:
        for k in ints:
            row[k] = int(row[k])
        for k in floats:
            row[k] = float(row[k])
    return rows


def with_param(config: SimConfig, **changes) -> SimConfig:
    return replace(config, **changes)


def param_at_fer(params, fers, target: float) -> float:
    """Channel parameter where the FER curve crosses ``target``.

    Linear interpolation of log10(FER) between the two bracketing points of a
    curve sorted by parameter; raises if the curve never crosses the target.
    """
    pts = sorted((float(p), float(f)) for p, f in zip(params, fers) if f > 0)
    if len(pts) < 2:
        raise ValueError("need at least two points with nonzero FER")
    logt = np.log10(target)
    for (p0, f0), (p1, f1) in zip(pts, pts[1:]):
        l0, l1 = np.log10(f0), np.log10(f1)
        if (l0 - logt) * (l1 - logt) <= 0 and l0 != l1:
            return p0 + (logt - l0) * (p1 - p0) / (l1 - l0)
    raise ValueError(f"FER curve does not cross {target:g}")
