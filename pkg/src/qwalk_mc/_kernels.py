"""Compiled inner loops for the samplers."""

import numba
import numpy as np


@numba.njit(nogil=True, cache=True)
def invert_poisson(u, cdf):
    """Sequential-search inversion: first ``k`` with ``u <= cdf[k]``."""
    k = 0
    size = cdf.shape[0]
    while k < size and u > cdf[k]:
        k += 1
    return k


@numba.njit(nogil=True, cache=True)
def discrete_histogram(u, cdf, first_index, total, n_batches, hist):
    """
    Tally ``(batch, landing_sum + n, S_n mod 4)`` for each row of jump uniforms.

    ``u`` has one row of ``n`` uniforms per sample; ``first_index`` is the
    global index of row 0, which fixes its batch.
    """
    rows, n = u.shape
    for i in range(rows):
        b = ((first_index + i) * n_batches) // total
        s = 0
        land = 0
        for j in range(n):
            land += 1 - 2 * (s & 1)
            s += invert_poisson(u[i, j], cdf)
        hist[b, land + n, s & 3] += 1


@numba.njit(nogil=True, cache=True)
def continuous_histogram(u, bits, cdf, first_index, total, n_batches, hist):
    """
    Tally ``(batch, displacement + R, N mod 4)`` for the jump-chain walk.

    ``N`` comes from inverting ``u``; the ``N`` unit steps are the low bits of
    the per-sample random words in ``bits`` (one 64-bit word per 64 steps).
    """
    rows = u.shape[0]
    radius = (hist.shape[1] - 1) // 2
    words = bits.shape[1]
    for i in range(rows):
        b = ((first_index + i) * n_batches) // total
        jumps = invert_poisson(u[i], cdf)
        right = 0
        left_over = jumps
        w = 0
        while left_over > 0 and w < words:
            take = min(left_over, 64)
            word = bits[i, w]
            for _ in range(take):
                right += word & np.uint64(1)
                word >>= np.uint64(1)
            left_over -= take
            w += 1
        disp = 2 * np.int64(right) - jumps
        hist[b, disp + radius, jumps & 3] += 1
