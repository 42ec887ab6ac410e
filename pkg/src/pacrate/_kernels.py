"""Compiled SC / SCL inner loops for PAC codes over the natural-order polar transform.

Buffers are flattened by tree depth: depth ``d`` holds ``N >> d`` values
starting at ``N * 2 - (N >> d) * 2``.  ``info`` marks non-frozen leaves, ``g``
is the convolutional generator with ``g[0] == 1``.  LLRs with magnitude at or
above ``S`` are hard (erasure-channel) values and stay in {-S, 0, +S}.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _offset(N, d):
    return 2 * N - 2 * (N >> d)


@njit(cache=True)
def f_node(a, b, S, minsum):
    aa = abs(a)
    ab = abs(b)
    if aa == 0.0 or ab == 0.0:
        return 0.0
    sgn = 1.0 if (a > 0) == (b > 0) else -1.0
    m = min(aa, ab)
    if m >= S:
        return sgn * S
    if minsum:
        return sgn * m
    # exact 2 atanh(tanh(a/2) tanh(b/2)) in a cancellation-free form
    return sgn * m + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))


@njit(cache=True)
def g_node(a, b, bit, S):
    r = b - a if bit else b + a
    if r > S:
        return S
    if r < -S:
        return -S
    return r


@njit(cache=True)
def softplus_neg(x):
    """ln(1 + e^-x), stable for either sign."""
    if x >= 0:
        return math.log1p(math.exp(-x))
    return -x + math.log1p(math.exp(x))


@njit(cache=True)
def _update_llrs(alpha, beta_left, N, n, i, S, minsum):
    """Bring the depth-n (leaf) LLR for leaf i up to date."""
    if i == 0:
        d0 = 1
    else:
        t = 0
        while not (i >> t) & 1:
            t += 1
        d0 = n - t
        s = N >> d0
        po = _offset(N, d0 - 1)
        co = _offset(N, d0)
        for j in range(s):
            alpha[co + j] = g_node(alpha[po + j], alpha[po + j + s], beta_left[co + j], S)
        d0 += 1
    for d in range(d0, n + 1):
        s = N >> d
        po = _offset(N, d - 1)
        co = _offset(N, d)
        for j in range(s):
            alpha[co + j] = f_node(alpha[po + j], alpha[po + j + s], S, minsum)
    return alpha[_offset(N, n)]


@njit(cache=True)
def _update_bits(beta_left, beta, N, n, i, u):
    """Fold the decided leaf bit into the partial sums of its ancestors."""
    beta[_offset(N, n)] = u
    d = n
    idx = i
    while d > 0 and idx & 1:
        s = N >> d
        co = _offset(N, d)
        po = _offset(N, d - 1)
        for j in range(s):
            r = beta[co + j]
            beta[po + j] = beta_left[co + j] ^ r
            beta[po + j + s] = r
        d -= 1
        idx >>= 1
    if d > 0:
        s = N >> d
        co = _offset(N, d)
        for j in range(s):
            beta_left[co + j] = beta[co + j]


@njit(cache=True)
def _conv_feedback(vhat, g, i):
    c = 0
    m = g.shape[0] - 1
    for t in range(1, m + 1):
        if g[t] and i - t >= 0:
            c ^= vhat[i - t]
    return c


@njit(cache=True, nogil=True)
def sc_decode_frame(llr, info, g, S, minsum):
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.zeros(2 * N, np.float64)
    beta_left = np.zeros(2 * N, np.uint8)
    beta = np.zeros(2 * N, np.uint8)
    for j in range(N):
        alpha[j] = llr[j]
    vhat = np.zeros(N, np.uint8)
    for i in range(N):
        lam = _update_llrs(alpha, beta_left, N, n, i, S, minsum)
        c = _conv_feedback(vhat, g, i)
        if info[i]:
            u = 1 if lam < 0 else 0
            if lam == 0:
                u = c
            vhat[i] = u ^ c
        else:
            u = c
        _update_bits(beta_left, beta, N, n, i, u)
    return vhat


@njit(cache=True, nogil=True)
def sc_decode_batch(llrs, info, g, S, minsum):
    B, N = llrs.shape
    out = np.zeros((B, N), np.uint8)
    for b in range(B):
        out[b] = sc_decode_frame(llrs[b], info, g, S, minsum)
    return out


@njit(cache=True)
def crc_remainder(bits, poly_low, width):
    """Remainder of bits(x) * x^0 under MSB-first long division (zero init)."""
    reg = 0
    mask = (1 << width) - 1
    top = width - 1
    for b in bits:
        fb = ((reg >> top) & 1) ^ b
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly_low
    return reg


@njit(cache=True)
def _penalty(lam, u, approx):
    x = lam if u == 0 else -lam
    if approx:
        return 0.0 if x >= 0 else -x
    return softplus_neg(x)


@njit(cache=True, nogil=True)
def scl_decode_frame(llr, info, g, L, S, minsum, approx, crc_poly_low, crc_width):
    """List decoder; returns (vhat, crc_ok, metric, per-leaf metric history)."""
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.zeros((L, 2 * N), np.float64)
    beta_left = np.zeros((L, 2 * N), np.uint8)
    beta = np.zeros(2 * N, np.uint8)
    vhat = np.zeros((L, N), np.uint8)
    hist = np.zeros((L, N), np.float64)
    metric = np.zeros(L, np.float64)
    for j in range(N):
        alpha[0, j] = llr[j]
    P = 1

    lam = np.zeros(L, np.float64)
    cfb = np.zeros(L, np.uint8)
    cand_metric = np.zeros(2 * L, np.float64)
    keep = np.zeros(2 * L, np.bool_)
    nchild = np.zeros(L, np.int64)
    free = np.zeros(L, np.int64)

    for i in range(N):
        for p in range(P):
            lam[p] = _update_llrs(alpha[p], beta_left[p], N, n, i, S, minsum)
            cfb[p] = _conv_feedback(vhat[p], g, i)
        if not info[i]:
            for p in range(P):
                u = cfb[p]
                metric[p] += _penalty(lam[p], u, approx)
                hist[p, i] = metric[p]
                _update_bits(beta_left[p], beta, N, n, i, u)
            continue

        # candidate 2p + v: path p with v_i = v
        for p in range(P):
            for v in range(2):
                u = v ^ cfb[p]
                cand_metric[2 * p + v] = metric[p] + _penalty(lam[p], u, approx)
        nc = 2 * P
        order = np.argsort(cand_metric[:nc], kind="mergesort")
        nkeep = min(nc, L)
        keep[:nc] = False
        for j in range(nkeep):
            keep[order[j]] = True

        nfree = 0
        for p in range(P):
            nchild[p] = keep[2 * p] + keep[2 * p + 1]
            if nchild[p] == 0:
                free[nfree] = p
                nfree += 1
        for p in range(P, L):
            free[nfree] = p
            nfree += 1

        used = 0
        for p in range(P):
            if nchild[p] == 2:
                q = free[used]
                used += 1
                alpha[q, :] = alpha[p, :]
                beta_left[q, :] = beta_left[p, :]
                vhat[q, :] = vhat[p, :]
                hist[q, :] = hist[p, :]
                metric[q] = cand_metric[2 * p + 1]
                vhat[q, i] = 1
                hist[q, i] = metric[q]
                _update_bits(beta_left[q], beta, N, n, i, 1 ^ cfb[p])
        for p in range(P):
            if nchild[p] == 0:
                continue
            v = 0 if keep[2 * p] else 1
            metric[p] = cand_metric[2 * p + v]
            vhat[p, i] = v
            hist[p, i] = metric[p]
            _update_bits(beta_left[p], beta, N, n, i, v ^ cfb[p])

        # compact the surviving slots to the front, in slot order
        alive = np.zeros(L, np.bool_)
        for p in range(P):
            if nchild[p] > 0:
                alive[p] = True
        for j in range(used):
            alive[free[j]] = True
        w = 0
        for p in range(L):
            if alive[p]:
                if w != p:
                    alpha[w, :] = alpha[p, :]
                    beta_left[w, :] = beta_left[p, :]
                    vhat[w, :] = vhat[p, :]
                    hist[w, :] = hist[p, :]
                    metric[w] = metric[p]
                w += 1
        P = w

    order = np.argsort(metric[:P], kind="mergesort")
    best = order[0]
    ok = crc_width == 0
    if crc_width > 0:
        K = 0
        for i in range(N):
            if info[i]:
                K += 1
        bits = np.zeros(K, np.uint8)
        for j in range(P):
            p = order[j]
            k = 0
            for i in range(N):
                if info[i]:
                    bits[k] = vhat[p, i]
                    k += 1
            if crc_remainder(bits, crc_poly_low, crc_width) == 0:
                best = p
                ok = True
                break
    return vhat[best].copy(), ok, metric[best], hist[best].copy()


@njit(cache=True, nogil=True)
def scl_decode_batch(llrs, info, g, L, S, minsum, approx, crc_poly_low, crc_width):
    B, N = llrs.shape
    out = np.zeros((B, N), np.uint8)
    ok = np.zeros(B, np.bool_)
    metric = np.zeros(B, np.float64)
    for b in range(B):
        v, k, m, _ = scl_decode_frame(llrs[b], info, g, L, S, minsum, approx, crc_poly_low, crc_width)
        out[b] = v
        ok[b] = k
        metric[b] = m
    return out, ok, metric
