"""PAC encoding, CRC handling and SC / CRC-aided SCL decoding.

LLR convention: ``L = ln P(y|0) - ln P(y|1)``; positive favours bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .gf2 import (
    ConvPolynomial,
    as_bits,
    coerce_polynomial,
    gf2_matmul,
    polar_transform_matrix,
    toeplitz_conv_matrix,
)
from .rate_profile import RateProfile, compression_matrix, phi_metric

# |LLR| at or above this is treated as a hard decision (erasure-channel infinity)
LLR_SENTINEL = 300.0


@dataclass(frozen=True)
class CrcSpec:
    """CRC generator; ``generator_bits`` lists coefficients from x^width down to x^0.

    Remainders use MSB-first long division, zero initial register, no
    reflection and no final XOR.
    """

    width: int
    generator_bits: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        bits = tuple(int(b) for b in self.generator_bits)
        if len(bits) != self.width + 1 or bits[0] != 1:
            raise ValueError(f"generator must have degree exactly {self.width}")
        object.__setattr__(self, "generator_bits", bits)

    @classmethod
    def from_koopman(cls, value: int, width: int, name: str = "") -> CrcSpec:
        """Koopman notation: explicit x^width term, implicit +1."""
        full = (value << 1) | 1
        bits = tuple(int(b) for b in format(full, f"0{width + 1}b"))
        return cls(width, bits, name or f"koopman-{value:#x}")

    @property
    def poly_low(self) -> int:
        """Generator without its x^width term, as an integer."""
        return int("".join(map(str, self.generator_bits[1:])), 2) if self.width else 0

    def describe(self) -> str:
        terms = [f"x^{self.width - j}" if self.width - j > 1 else ("x" if self.width - j == 1 else "1")
                 for j, b in enumerate(self.generator_bits) if b]
        return f"{self.name}: " + " + ".join(terms) + " (MSB-first, init 0, no reflect, no xorout)"


CRC8_A6 = CrcSpec.from_koopman(0xA6, 8, "crc8-0xA6")


def crc_remainder(bits, crc: CrcSpec) -> np.ndarray:
    bits = as_bits(bits, 1)
    reg = int(_kernels.crc_remainder(bits, crc.poly_low, crc.width))
    return np.array([(reg >> (crc.width - 1 - j)) & 1 for j in range(crc.width)], dtype=np.uint8)


def crc_append(payload, crc: CrcSpec = CRC8_A6) -> np.ndarray:
    payload = as_bits(payload, 1)
    if payload.size == 0:
        raise ValueError("payload must be nonempty")
    return np.concatenate([payload, crc_remainder(payload, crc)])


def crc_check(bits, crc: CrcSpec = CRC8_A6) -> bool:
    return not crc_remainder(bits, crc).any()


@dataclass
class DecoderOutput:
    info_bits: np.ndarray
    v_hat: np.ndarray
    success: bool
    path_metric: float = 0.0
    metric_history: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class PacCode:
    """(N, K) PAC code: rate profile, convolution ``g`` and an optional CRC.

    With a CRC, K counts payload plus CRC bits, so the payload has K - width
    bits.  ``g = "1"`` gives a plain polar code.
    """

    profile: RateProfile
    g: ConvPolynomial = field(default_factory=lambda: ConvPolynomial((1,)))
    crc: CrcSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "g", coerce_polynomial(self.g))
        if self.profile.N & (self.profile.N - 1):
            raise ValueError("N must be a power of two")
        if self.crc is not None and self.profile.K - self.crc.width < 1:
            raise ValueError(f"K={self.profile.K} leaves no payload bits after a {self.crc.width}-bit CRC")

    @property
    def N(self) -> int:
        return self.profile.N

    @property
    def K(self) -> int:
        return self.profile.K

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def payload_length(self) -> int:
        return self.K - (self.crc.width if self.crc else 0)

    @cached_property
    def Gc(self) -> np.ndarray:
        return toeplitz_conv_matrix(self.g, self.N)

    @cached_property
    def Gp(self) -> np.ndarray:
        return polar_transform_matrix(self.n)

    @cached_property
    def G(self) -> np.ndarray:
        return gf2_matmul(self.Gc, self.Gp)

    @cached_property
    def info_mask(self) -> np.ndarray:
        return self.profile.info_mask

    @cached_property
    def phi(self) -> float:
        return phi_metric(self.profile, compression_matrix(self.G))


def insert_rate_profile(payload, profile: RateProfile) -> np.ndarray:
    """Place payload bits on the non-frozen positions in ascending order.

    Accepts a single payload or a (B, K) batch.
    """
    payload = as_bits(payload)
    if payload.shape[-1] != profile.K:
        raise ValueError(f"payload length {payload.shape[-1]} != K={profile.K}")
    v = np.zeros(payload.shape[:-1] + (profile.N,), dtype=np.uint8)
    v[..., profile.info_mask] = payload
    return v


def extract_payload(v, profile: RateProfile) -> np.ndarray:
    return as_bits(v)[..., profile.info_mask]


class ConvEncoder:
    """Streaming rate-1 convolutional encoder; the register holds v_{i-1}..v_{i-m}."""

    def __init__(self, g):
        self.g = coerce_polynomial(g)
        self.state = [0] * self.g.memory

    def push(self, v_i: int) -> int:
        taps = self.g.coefficients
        u = v_i & taps[0]
        for t, s in enumerate(self.state, start=1):
            u ^= taps[t] & s
        if self.state:
            self.state = [v_i] + self.state[:-1]
        return u


def conv_encode(v, g) -> np.ndarray:
    v = as_bits(v, 1)
    enc = ConvEncoder(g)
    return np.array([enc.push(int(b)) for b in v], dtype=np.uint8)


def polar_encode(u) -> np.ndarray:
    """Butterfly evaluation of ``u F^{(x)n}``; works on a trailing axis of length 2^n."""
    x = as_bits(u).copy()
    N = x.shape[-1]
    if N < 1 or N & (N - 1):
        raise ValueError(f"length {N} is not a power of two")
    half = N // 2
    while half >= 1:
        # in block form [a, b] -> [a ^ b, b]
        blocks = x.reshape(x.shape[:-1] + (N // (2 * half), 2, half))
        blocks[..., 0, :] ^= blocks[..., 1, :]
        half //= 2
    return x


def pac_encode(payload, code: PacCode) -> np.ndarray:
    """Codeword(s) ``x = v G``; CRC bits are appended first when configured."""
    payload = as_bits(payload)
    if payload.shape[-1] != code.payload_length:
        raise ValueError(f"payload length {payload.shape[-1]} != {code.payload_length}")
    if code.crc is not None:
        flat = payload.reshape(-1, payload.shape[-1])
        payload = np.stack([crc_append(p, code.crc) for p in flat]).reshape(
            payload.shape[:-1] + (code.K,))
    v = insert_rate_profile(payload, code.profile)
    return encode_v(v, code)


def encode_v(v, code: PacCode) -> np.ndarray:
    """Convolution then polar transform of (a batch of) full input vectors."""
    v = as_bits(v)
    u = (v.astype(np.int32) @ code.Gc.astype(np.int32)) & 1
    return polar_encode(u.astype(np.uint8))


def _check_llr(llr, code: PacCode) -> np.ndarray:
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    if llr.shape[-1] != code.N:
        raise ValueError(f"LLR length {llr.shape[-1]} != N={code.N}")
    return llr


def _finish(v_hat, code: PacCode, success=None, metric=0.0, history=None) -> DecoderOutput:
    info = extract_payload(v_hat, code.profile)
    if code.crc is not None:
        if success is None:
            success = crc_check(info, code.crc)
        info = info[: code.payload_length]
    elif success is None:
        success = True
    return DecoderOutput(info, v_hat, bool(success), float(metric), history)


def sc_decode(llr, code: PacCode, minsum: bool = False) -> DecoderOutput:
    llr = _check_llr(llr, code)
    g = code.g.as_array()
    v_hat = _kernels.sc_decode_frame(llr, code.info_mask, g, LLR_SENTINEL, minsum)
    return _finish(v_hat, code)


def scl_decode(llr, code: PacCode, list_size: int, minsum: bool = False,
               approx_metric: bool = False) -> DecoderOutput:
    """CRC-aided SCL; ``approx_metric`` swaps ln(1+e^-x) penalties for the hard |L| rule."""
    if list_size < 1:
        raise ValueError("list size must be >= 1")
    llr = _check_llr(llr, code)
    width = code.crc.width if code.crc else 0
    poly = code.crc.poly_low if code.crc else 0
    v_hat, ok, metric, hist = _kernels.scl_decode_frame(
        llr, code.info_mask, code.g.as_array(), list_size, LLR_SENTINEL, minsum,
        approx_metric, poly, width)
    return _finish(v_hat, code, ok, metric, hist)


def decode_batch(llrs, code: PacCode, decoder: str = "sc", list_size: int = 1,
                 minsum: bool = False, approx_metric: bool = False):
    """Decode a (B, N) LLR batch; returns (v_hat, success) arrays."""
    llrs = _check_llr(llrs, code)
    g = code.g.as_array()
    if decoder == "sc":
        v_hat = _kernels.sc_decode_batch(llrs, code.info_mask, g, LLR_SENTINEL, minsum)
        if code.crc is None:
            return v_hat, np.ones(len(v_hat), dtype=bool)
        info = v_hat[:, code.info_mask]
        ok = np.array([crc_check(row, code.crc) for row in info], dtype=bool)
        return v_hat, ok
    if decoder == "scl":
        if list_size < 1:
            raise ValueError("list size must be >= 1")
        width = code.crc.width if code.crc else 0
        poly = code.crc.poly_low if code.crc else 0
        v_hat, ok, _ = _kernels.scl_decode_batch(
            llrs, code.info_mask, g, list_size, LLR_SENTINEL, minsum, approx_metric, poly, width)
        return v_hat, ok
    raise ValueError(f"unknown decoder {decoder!r}")
