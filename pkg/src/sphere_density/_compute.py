"""Compiled inner loops.

Every reduction here has a fixed association order that does not depend on
the number of worker threads: sums run over blocks of ``BLOCK`` terms with
an 8-lane tree inside each block, and the greedy argmax reduces fixed-size
chunks of indices with ties resolved towards the lowest index.
"""

from __future__ import annotations

import math
import os
import warnings

import numba
import numpy as np
from numba import njit, prange

from .sphere import surface_measure

# fiber webs call the parallel kernels from several Python threads at once
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "threadsafe"
warnings.filterwarnings("ignore", message="The TBB threading layer requires")

BLOCK = 256
CHUNKS = 64


@njit(inline="always")
def _lane_sum(buf):
    s0 = s1 = s2 = s3 = s4 = s5 = s6 = s7 = 0.0
    for k in range(0, BLOCK, 8):
        s0 += buf[k]
        s1 += buf[k + 1]
        s2 += buf[k + 2]
        s3 += buf[k + 3]
        s4 += buf[k + 4]
        s5 += buf[k + 5]
        s6 += buf[k + 6]
        s7 += buf[k + 7]
    return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))


@njit(parallel=True, cache=True)
def _sums(pts, ctr, w, h):
    # pts: (d, M), ctr: (d, K) -- coordinate-major for contiguous inner loops
    d, m = pts.shape
    k = ctr.shape[1]
    a = 1.0 + h * h
    b = 2.0 * h
    out = np.empty(m)
    for i in prange(m):
        buf = np.zeros(BLOCK)
        p0 = pts[0, i]
        p1 = pts[1, i]
        p2 = pts[2, i] if d == 3 else 0.0
        total = 0.0
        for lo in range(0, k, BLOCK):
            hi = min(k, lo + BLOCK)
            if d == 3:
                for j in range(lo, hi):
                    q = a - b * (p0 * ctr[0, j] + p1 * ctr[1, j] + p2 * ctr[2, j])
                    buf[j - lo] = w[j] / (q * math.sqrt(q))
            else:
                for j in range(lo, hi):
                    q = a - b * (p0 * ctr[0, j] + p1 * ctr[1, j])
                    buf[j - lo] = w[j] / q
            for j in range(hi - lo, BLOCK):
                buf[j] = 0.0
            total += _lane_sum(buf)
        out[i] = total
    return out


def kernel_sums(points: np.ndarray, centers: np.ndarray, weights: np.ndarray, d: int, h: float) -> np.ndarray:
    """``out[i] = sum_k weights[k] * Q_h(centers[k] . points[i])`` with h in [0, 1)."""
    m = len(points)
    if m == 0:
        return np.zeros(0)
    if len(centers) == 0:
        return np.zeros(m)
    pts = np.ascontiguousarray(np.asarray(points, dtype=float).T)
    ctr = np.ascontiguousarray(np.asarray(centers, dtype=float).T)
    w = np.ascontiguousarray(weights, dtype=float)
    raw = _sums(pts, ctr, w, float(h))
    return raw * ((1.0 - h * h) / surface_measure(d))


@njit(parallel=True, cache=True)
def _update_argmax(xt, c, coef, a, b, three, g, e):
    d, n = xt.shape
    c0 = xt[0, c]
    c1 = xt[1, c]
    c2 = xt[2, c] if three else 0.0
    size = (n + CHUNKS - 1) // CHUNKS
    best_val = np.full(CHUNKS, -1.0)
    best_idx = np.full(CHUNKS, -1, dtype=np.int64)
    for ch in prange(CHUNKS):
        lo = ch * size
        hi = min(n, lo + size)
        bv = -1.0
        bi = -1
        for j in range(lo, hi):
            if three:
                q = a - b * (c0 * xt[0, j] + c1 * xt[1, j] + c2 * xt[2, j])
                g[j] += coef / (q * math.sqrt(q))
            else:
                q = a - b * (c0 * xt[0, j] + c1 * xt[1, j])
                g[j] += coef / q
            r = abs(e[j] - g[j])
            if r > bv:
                bv = r
                bi = j
        best_val[ch] = bv
        best_idx[ch] = bi
    bv = -1.0
    bi = -1
    for ch in range(CHUNKS):
        if best_val[ch] > bv:
            bv = best_val[ch]
            bi = best_idx[ch]
    return bi


def update_and_argmax(xt: np.ndarray, center: int, coef: float, d: int, h: float, g: np.ndarray, e: np.ndarray) -> int:
    """Add ``coef * (1 + h^2 - 2h x_center . x_n)^(-d/2)`` to ``g`` in place and
    return the lowest index maximizing ``|e - g|``."""
    return int(_update_argmax(xt, center, coef, 1.0 + h * h, 2.0 * h, d == 3, g, e))


def set_threads(count: int) -> int:
    """Cap numba worker threads; returns the count actually in effect."""
    count = max(1, min(int(count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(count)
    return count
