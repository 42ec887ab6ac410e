"""Dense GF(2) linear algebra for PAC generator matrices.

Bit vectors and bit matrices are plain ``numpy.uint8`` arrays holding 0/1.
Helpers here validate them, build the convolutional Toeplitz matrix and the
polar Kronecker power, and multiply over GF(2) or over the integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_N = 1 << 15

_POLAR_KERNEL = np.array([[1, 0], [1, 1]], dtype=np.uint8)


def as_bits(a, ndim: int | None = None) -> np.ndarray:
    """Return ``a`` as a uint8 0/1 array, rejecting any other value."""
    arr = np.asarray(a)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected {ndim}-d bit array, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("bit arrays may only contain 0 and 1")
    return arr.astype(np.uint8, copy=False)


def _check_n(N: int) -> None:
    if N < 1:
        raise ValueError(f"length must be >= 1, got {N}")
    if N > MAX_N:
        raise ValueError(f"length {N} exceeds the limit {MAX_N}")


@dataclass(frozen=True)
class ConvPolynomial:
    """Convolutional generator ``[g0, ..., gm]`` with g0 = gm = 1."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(b) for b in self.coefficients)
        if not c or any(b not in (0, 1) for b in c):
            raise ValueError("coefficients must be a nonempty 0/1 sequence")
        if c[0] != 1 or c[-1] != 1:
            raise ValueError(f"first and last taps must be 1, got {c}")
        object.__setattr__(self, "coefficients", c)

    @property
    def memory(self) -> int:
        return len(self.coefficients) - 1

    @property
    def weight(self) -> int:
        return sum(self.coefficients)

    def as_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=np.uint8)

    def to_octal(self) -> str:
        """Octal string in the same MSB-first convention as the parser."""
        value = int("".join(map(str, self.coefficients)), 2)
        return "0o" + format(value, "o")

    def __str__(self):
        return self.to_octal()


def parse_octal_polynomial(text: str) -> ConvPolynomial:
    """Parse an octal generator such as ``"133"`` or ``"0o177"``.

    The most significant bit of the value is g0.
    """
    s = text.strip().lower()
    if s.startswith("0o"):
        s = s[2:]
    if not s or any(ch not in "01234567" for ch in s):
        raise ValueError(f"not an octal polynomial: {text!r}")
    value = int(s, 8)
    if value == 0:
        raise ValueError(f"polynomial {text!r} has no taps")
    bits = [int(b) for b in format(value, "b")]
    return ConvPolynomial(tuple(bits))


def coerce_polynomial(g) -> ConvPolynomial:
    if isinstance(g, ConvPolynomial):
        return g
    if isinstance(g, str):
        return parse_octal_polynomial(g)
    return ConvPolynomial(tuple(g))


def toeplitz_conv_matrix(g, N: int) -> np.ndarray:
    """Upper-triangular Toeplitz matrix with ``G[i, i+t] = g_t``."""
    _check_n(N)
    coeffs = coerce_polynomial(g).coefficients
    G = np.zeros((N, N), dtype=np.uint8)
    rows = np.arange(N)
    for t, c in enumerate(coeffs):
        if c and t < N:
            G[rows[: N - t], rows[: N - t] + t] = 1
    return G


def polar_transform_matrix(n: int, bit_reversal: bool = False) -> np.ndarray:
    """Kronecker power ``F^{(x)n}`` of ``F = [[1,0],[1,1]]``."""
    if n < 0:
        raise ValueError("stage count must be >= 0")
    _check_n(1 << n)
    P = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        P = np.kron(P, _POLAR_KERNEL)
    if bit_reversal:
        P = P[bit_reversal_permutation(n)]
    return P


def bit_reversal_permutation(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    rev = np.zeros_like(idx)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


def gf2_matmul(A, B) -> np.ndarray:
    A = as_bits(A, 2)
    B = as_bits(B, 2)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} x {B.shape}")
    return _mod2_product(A, B)


def gf2_vecmat(v, M) -> np.ndarray:
    """Modulo-2 product ``v M``; ``v`` may also be a stack of row vectors."""
    v = as_bits(v)
    M = as_bits(M, 2)
    if v.shape[-1] != M.shape[0]:
        raise ValueError(f"dimension mismatch: {v.shape} x {M.shape}")
    return _mod2_product(v, M)


def _mod2_product(A, B) -> np.ndarray:
    # float64 BLAS is exact while the inner dimension stays below 2**53
    prod = A.astype(np.float64) @ B.astype(np.float64)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def integer_vecmat(r, M) -> np.ndarray:
    """Integer product ``r x M`` with M's bits read as the integers 0 and 1."""
    r = np.asarray(r)
    M = as_bits(M, 2)
    if r.shape[-1] != M.shape[0]:
        raise ValueError(f"dimension mismatch: {r.shape} x {M.shape}")
    if (r < 0).any():
        raise ValueError("integer vector entries must be >= 0")
    return r.astype(np.int64) @ M.astype(np.int64)


def column_weights(M) -> np.ndarray:
    return as_bits(M, 2).sum(axis=0, dtype=np.int64)


def gf2_rank(M) -> int:
    """Rank over GF(2) by Gaussian elimination."""
    A = as_bits(M, 2).copy()
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivots = np.nonzero(A[rank:, c])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            A[[rank, p]] = A[[p, rank]]
        hits = np.nonzero(A[:, c])[0]
        hits = hits[hits != rank]
        A[hits] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def matrix_to_text(M) -> str:
    """Rows of '0'/'1' characters, one per line."""
    return "\n".join("".join("1" if b else "0" for b in row) for row in as_bits(M, 2))


def matrix_from_text(text: str) -> np.ndarray:
    rows = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not rows:
        return np.zeros((0, 0), dtype=np.uint8)
    if len({len(r) for r in rows}) != 1:
        raise ValueError("ragged matrix text")
    return as_bits([[int(ch) for ch in r] for r in rows], 2)
