"""BEC and BPSK-AWGN channel models producing LLR vectors.

Randomness comes from :func:`frame_rng`, a Philox counter-based generator
keyed by ``(seed, frame index)``; draws within a frame advance the counter,
so a frame's samples do not depend on how frames are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import LLR_SENTINEL
from .gf2 import as_bits

_MASK64 = (1 << 64) - 1


def frame_rng(seed: int, frame: int) -> np.random.Generator:
    if not 0 <= seed <= _MASK64 or not 0 <= frame <= _MASK64:
        raise ValueError("seed and frame index must fit in 64 unsigned bits")
    return np.random.Generator(np.random.Philox(key=(frame << 64) | seed))


@dataclass(frozen=True)
class BecChannel:
    eps: float

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"erasure probability {self.eps} outside [0, 1]")

    @property
    def parameter(self) -> float:
        return self.eps

    def transmit(self, x, rng: np.random.Generator) -> np.ndarray:
        return bec_transmit(x, self.eps, rng)


@dataclass(frozen=True)
class BpskAwgnChannel:
    """BPSK over AWGN at ``ebno_db``; ``rate`` converts Eb/N0 to the noise variance."""

    ebno_db: float
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate {self.rate} outside (0, 1]")
        if not np.isfinite(self.ebno_db):
            raise ValueError("Eb/N0 must be finite")

    @property
    def parameter(self) -> float:
        return self.ebno_db

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0))

    def transmit(self, x, rng: np.random.Generator) -> np.ndarray:
        return awgn_transmit(x, self, rng)


def bec_transmit(x, eps: float, rng: np.random.Generator) -> np.ndarray:
    """LLR +S for 0, -S for 1, and 0 on erased positions."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability {eps} outside [0, 1]")
    x = as_bits(x)
    llr = LLR_SENTINEL * (1.0 - 2.0 * x)
    erased = rng.random(x.shape) < eps
    llr[erased] = 0.0
    return llr


def awgn_transmit(x, model: BpskAwgnChannel, rng: np.random.Generator) -> np.ndarray:
    x = as_bits(x)
    sigma2 = model.sigma2
    y = (1.0 - 2.0 * x) + np.sqrt(sigma2) * rng.standard_normal(x.shape)
    return llr_from_observation(y, sigma2)


def llr_from_observation(y, sigma2: float) -> np.ndarray:
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma2
