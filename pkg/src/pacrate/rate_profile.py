"""Rate-profile construction and the NCF (normalized compression factor) metric.

Indices of the input vector ``v`` are 1-based throughout this module, as in
the profile files.  ``indicator`` is the 0/1 vector marking non-frozen
positions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .gf2 import column_weights, integer_vecmat, MAX_N

PROFILE_METHODS = ("rm", "ncf-opt", "ga")
EXHAUSTIVE_LIMIT = 10**7


def _check_power_of_two(N: int) -> int:
    if N < 1 or N & (N - 1) or N > MAX_N:
        raise ValueError(f"N must be a power of two in [1, {MAX_N}], got {N}")
    return N.bit_length() - 1


@dataclass(frozen=True)
class RateProfile:
    """Frozen set of an (N, K) code.

    ``meta`` carries provenance (generator, method, m, phi) and does not take
    part in equality.
    """

    N: int
    K: int
    frozen: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        frozen = tuple(int(i) for i in self.frozen)
        if len(set(frozen)) != len(frozen):
            raise ValueError("frozen set contains duplicate indices")
        frozen = tuple(sorted(frozen))
        if not 0 <= self.K <= self.N:
            raise ValueError(f"K={self.K} outside [0, N={self.N}]")
        if len(frozen) != self.N - self.K:
            raise ValueError(f"|frozen|={len(frozen)} but N-K={self.N - self.K}")
        if frozen and (frozen[0] < 1 or frozen[-1] > self.N):
            raise ValueError(f"frozen indices must lie in [1, {self.N}]")
        object.__setattr__(self, "frozen", frozen)

    @classmethod
    def from_nonfrozen(cls, N: int, nonfrozen, meta=None) -> RateProfile:
        info = set(int(i) for i in nonfrozen)
        return cls(N, len(info), tuple(i for i in range(1, N + 1) if i not in info), meta or {})

    @classmethod
    def from_indicator(cls, indicator, meta=None) -> RateProfile:
        r = np.asarray(indicator)
        return cls.from_nonfrozen(len(r), (np.flatnonzero(r) + 1).tolist(), meta)

    @property
    def nonfrozen(self) -> tuple[int, ...]:
        f = set(self.frozen)
        return tuple(i for i in range(1, self.N + 1) if i not in f)

    @property
    def indicator(self) -> np.ndarray:
        r = np.ones(self.N, dtype=np.int64)
        if self.frozen:
            r[np.array(self.frozen) - 1] = 0
        return r

    @property
    def info_mask(self) -> np.ndarray:
        return self.indicator.astype(bool)

    def with_meta(self, **meta) -> RateProfile:
        return RateProfile(self.N, self.K, self.frozen, {**self.meta, **meta})

    def swapped(self, unfreeze, freeze) -> RateProfile:
        """Profile with ``unfreeze`` made non-frozen and ``freeze`` frozen."""
        frozen = (set(self.frozen) - set(unfreeze)) | set(freeze)
        return RateProfile(self.N, self.N - len(frozen), tuple(frozen))


def rm_score(i: int) -> int:
    """Hamming weight of ``i - 1``."""
    if i < 1:
        raise ValueError("index must be >= 1")
    return (i - 1).bit_count()


def rm_design(N: int, K: int) -> RateProfile:
    """Freeze the N-K lowest-scoring indices, smaller index first on ties."""
    _check_power_of_two(N)
    if not 0 <= K <= N:
        raise ValueError(f"K must lie in [0, N], got K={K}")
    order = sorted(range(1, N + 1), key=lambda i: (rm_score(i), i))
    return RateProfile(N, K, tuple(order[: N - K]), {"method": "rm"})


def compression_matrix(G) -> np.ndarray:
    """Divide every column of G by its Hamming weight."""
    p = column_weights(G)
    if (p == 0).any():
        raise ValueError(f"G has zero columns at {np.flatnonzero(p == 0) + 1}")
    return np.asarray(G, dtype=np.float64) / p


@dataclass(frozen=True)
class NcfSpectrum:
    counts: np.ndarray
    weights: np.ndarray
    energy: float

    @property
    def gamma(self) -> np.ndarray:
        return self.counts / self.weights

    def gamma_fractions(self) -> list[Fraction]:
        return [Fraction(int(r), int(p)) for r, p in zip(self.counts, self.weights)]

    def exact_energy(self) -> Fraction:
        return sum((g * g for g in self.gamma_fractions()), Fraction(0))


def ncf_spectrum(profile: RateProfile, M) -> NcfSpectrum:
    """NCF spectrum of the outputs of ``M`` (G_c for u-level, G for x-level)."""
    M = np.asarray(M)
    if M.shape != (profile.N, profile.N):
        raise ValueError(f"matrix shape {M.shape} does not match N={profile.N}")
    counts = integer_vecmat(profile.indicator, M)
    weights = column_weights(M)
    if (weights == 0).any():
        raise ValueError("matrix has an all-zero column")
    gamma = counts / weights
    return NcfSpectrum(counts, weights, float(np.dot(gamma, gamma)))


def phi_metric(profile: RateProfile, Gt) -> float:
    """``r G~ G~^T r^T`` evaluated as the squared norm of ``r G~``."""
    Gt = np.asarray(Gt, dtype=np.float64)
    if Gt.shape[0] != profile.N:
        raise ValueError(f"G~ has {Gt.shape[0]} rows, profile has N={profile.N}")
    s = profile.indicator.astype(np.float64) @ Gt
    return float(np.dot(s, s))


@dataclass(frozen=True)
class SearchSpace:
    phi_set: tuple[int, ...]
    psi_set: tuple[int, ...]

    @property
    def M(self) -> int:
        return len(self.phi_set)


@dataclass
class OptimizationResult:
    best_profile: RateProfile
    best_metric: float
    evaluations: int
    # ((unfrozen, frozen), phi) per evaluated candidate, in enumeration order
    trace: list = field(default_factory=list)


def build_search_space(profile: RateProfile, M: int) -> SearchSpace:
    if M < 0 or M > min(profile.K, profile.N - profile.K):
        raise ValueError(f"swap budget M={M} exceeds min(K, N-K)")
    phi = sorted(profile.frozen, key=lambda i: (rm_score(i), i), reverse=True)[:M]
    psi = sorted(profile.nonfrozen, key=lambda i: (rm_score(i), i))[:M]
    return SearchSpace(tuple(sorted(phi)), tuple(sorted(psi)))


def bit_swap_optimize(profile: RateProfile, M: int, Gt) -> OptimizationResult:
    """Best profile over all equal-size exchanges between the search sets.

    Candidates are visited by swap size k = 0..M, then lexicographically over
    (unfrozen, frozen) index tuples; a later candidate replaces the incumbent
    only if strictly better.
    """
    space = build_search_space(profile, M)
    best, best_phi = profile, None
    trace = []
    for k in range(M + 1):
        for A in combinations(space.phi_set, k):
            for B in combinations(space.psi_set, k):
                cand = profile.swapped(A, B)
                value = phi_metric(cand, Gt)
                trace.append(((A, B), value))
                if best_phi is None or value > best_phi:
                    best, best_phi = cand, value
    best = best.with_meta(method="ncf-opt", m=M, phi=best_phi)
    return OptimizationResult(best, best_phi, len(trace), trace)


def exhaustive_optimize(N: int, K: int, Gt, chunk: int = 4096) -> OptimizationResult:
    """Global maximum of phi over all C(N, K) frozen sets."""
    Gt = np.asarray(Gt, dtype=np.float64)
    total = math.comb(N, K)
    if total > EXHAUSTIVE_LIMIT:
        raise ValueError(f"C({N},{K}) = {total} candidates exceeds {EXHAUSTIVE_LIMIT}")
    best_phi, best_info = -1.0, None
    it = combinations(range(N), K)
    while True:
        block = [c for _, c in zip(range(chunk), it)]
        if not block:
            break
        R = np.zeros((len(block), N))
        for row, c in enumerate(block):
            R[row, list(c)] = 1.0
        S = R @ Gt
        values = np.einsum("ij,ij->i", S, S)
        j = int(np.argmax(values))
        if values[j] > best_phi:
            best_phi, best_info = float(values[j]), block[j]
    prof = RateProfile.from_nonfrozen(N, [i + 1 for i in best_info], {"method": "exhaustive"})
    return OptimizationResult(prof, best_phi, total, [])


def bec_capacity_profile(N: int, eps: float) -> np.ndarray:
    """Synthetic-channel capacities of F^{(x)n} on a BEC, natural index order."""
    n = _check_power_of_two(N)
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability {eps} outside [0, 1]")
    cap = np.array([1.0 - eps])
    for _ in range(n):
        nxt = np.empty(2 * cap.size)
        nxt[0::2] = cap * cap
        nxt[1::2] = 2.0 * cap - cap * cap
        cap = nxt
    return cap


# Two-segment approximation of the density-evolution phi-function.
_GA_SPLIT = 10.0


def ga_phi(x: float) -> float:
    if x <= 0.0:
        return 1.0
    if x < _GA_SPLIT:
        return math.exp(-0.4527 * x**0.86 + 0.0218)
    return math.sqrt(math.pi / x) * math.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x))


def ga_phi_inverse(y: float) -> float:
    if y >= 1.0:
        return 0.0
    if y <= 0.0:
        return math.inf
    hi = 1.0
    while ga_phi(hi) > y:
        hi *= 2.0
    return brentq(lambda x: ga_phi(x) - y, 0.0, hi, xtol=1e-12)


def ga_check_node(m: float) -> float:
    """LLR mean of the check-node (upper) combination of two channels of mean m."""
    p = ga_phi(m)
    y = 1.0 - (1.0 - p) ** 2
    if y < 1e-280:
        # phi(m) underflowed; for large m, phi^-1(2 phi(m)) ~= m - 4 ln 2
        return max(m - 4.0 * math.log(2.0), 0.0)
    return ga_phi_inverse(y)


def ga_llr_means(N: int, design_snr_db: float, rate: float) -> np.ndarray:
    """Per-position LLR means under BPSK-AWGN at Eb/N0 = design_snr_db."""
    n = _check_power_of_two(N)
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (design_snr_db / 10.0))
    m = np.array([2.0 / sigma2])
    for _ in range(n):
        nxt = np.empty(2 * m.size)
        nxt[0::2] = [ga_check_node(x) for x in m]
        nxt[1::2] = 2.0 * m
        m = nxt
    return m


def ga_construction(N: int, K: int, design_snr_db: float = 2.5, rate: float | None = None) -> RateProfile:
    """Polar frozen set from Gaussian-approximation density evolution.

    ``rate`` sets the Eb/N0 to noise-variance conversion and defaults to K/N.
    """
    _check_power_of_two(N)
    if not 1 <= K <= N:
        raise ValueError(f"K must lie in [1, N], got K={K}")
    rate = K / N if rate is None else rate
    means = ga_llr_means(N, design_snr_db, rate)
    # stable sort: equal reliabilities freeze the smaller index
    order = np.argsort(means, kind="stable")
    frozen = tuple(int(i) + 1 for i in order[: N - K])
    return RateProfile(N, K, frozen, {"method": "ga", "design_snr_db": design_snr_db})


def export_profile(profile: RateProfile, path, **meta) -> None:
    """Write a JSON profile file; keyword args override ``profile.meta``."""
    info = {**profile.meta, **meta}
    method = info.get("method")
    if method is not None and method not in PROFILE_METHODS:
        raise ValueError(f"unknown method {method!r}")
    generator = info.get("generator")
    doc = {
        "n": profile.N,
        "k": profile.K,
        "frozen": list(profile.frozen),
        "generator": None if generator is None else str(generator),
        "method": method,
        "m": info.get("m"),
        "phi": info.get("phi"),
    }
    extra = {k: v for k, v in info.items() if k not in doc}
    if extra:
        doc["extra"] = extra
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def import_profile(path) -> RateProfile:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed profile file: {exc}") from None
    for key in ("n", "k", "frozen"):
        if key not in doc:
            raise ValueError(f"{path}: missing field {key!r}")
    N, K = doc["n"], doc["k"]
    _check_power_of_two(N)
    if doc.get("method") not in (None, *PROFILE_METHODS):
        raise ValueError(f"{path}: unknown method {doc['method']!r}")
    meta = {k: doc[k] for k in ("generator", "method", "m", "phi") if doc.get(k) is not None}
    meta.update(doc.get("extra", {}))
    return RateProfile(N, K, tuple(doc["frozen"]), meta)


def write_spectrum_csv(spectrum: NcfSpectrum, path, capacity=None, sorted_: bool = False) -> None:
    """CSV of index, count, weight, gamma (and optionally BEC capacity).

    With ``sorted_`` each series (gamma and capacity) is sorted ascending
    independently of the other, and ``index`` becomes the rank.
    """
    gamma = spectrum.gamma
    rows = np.arange(1, gamma.size + 1)
    counts, weights = spectrum.counts, spectrum.weights
    if sorted_:
        order = np.argsort(gamma, kind="stable")
        counts, weights, gamma = counts[order], weights[order], gamma[order]
        if capacity is not None:
            capacity = np.sort(capacity)
    header = ["index", "count", "weight", "gamma"]
    if capacity is not None:
        header.append("capacity")
    lines = [",".join(header)]
    for j in range(gamma.size):
        cells = [str(rows[j]), str(int(counts[j])), str(int(weights[j])), repr(float(gamma[j]))]
        if capacity is not None:
            cells.append(repr(float(capacity[j])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
