"""Compiled inner loops: PRNG, Fisher-Yates and counting Shellsort.

PRNG (all arithmetic mod 2**64):

* ``mix64(z)``: the SplitMix64 finalizer
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB;
  z ^= z >> 31``.
* Trial seed: ``t = mix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15)``.
* Generator: xoshiro256** with state ``s[j] = mix64(t + (j + 1) * 0x9E3779B97F4A7C15)``
  for ``j = 0..3`` (SplitMix64 seeding).
* Bounded draw in ``[0, m)``: ``b = bit_length(m - 1)``, repeat
  ``r = next() >> (64 - b)`` until ``r < m``.
* Shuffle: start from ``0..n-1``; for ``i = n-1`` down to ``1`` swap
  ``a[i]`` with ``a[draw(i + 1)]``.

``gapforge.sortbench`` carries a pure-Python twin used by the tests.
"""

import os

import numpy as np
from numba import config, njit, prange

# kernels are never called concurrently from several Python threads, so the
# always-available workqueue layer suffices; the env var still wins
if "NUMBA_THREADING_LAYER" not in os.environ:
    config.THREADING_LAYER = "workqueue"

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def fill_permutation(master_seed, index, out):
    n = out.shape[0]
    for i in range(n):
        out[i] = i
    t = _mix64(np.uint64(master_seed) + np.uint64(index + 1) * GOLDEN)
    s0 = _mix64(t + GOLDEN)
    s1 = _mix64(t + np.uint64(2) * GOLDEN)
    s2 = _mix64(t + np.uint64(3) * GOLDEN)
    s3 = _mix64(t + np.uint64(4) * GOLDEN)
    for i in range(n - 1, 0, -1):
        m = np.uint64(i + 1)
        bits = 0
        v = i
        while v > 0:
            bits += 1
            v >>= 1
        shift = np.uint64(64 - bits)
        while True:
            r = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
            tt = s1 << np.uint64(17)
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= tt
            s3 = _rotl(s3, 45)
            r >>= shift
            if r < m:
                break
        j = np.int64(r)
        tmp = out[i]
        out[i] = out[j]
        out[j] = tmp


@njit(cache=True)
def shellsort_count(a, gaps_desc):
    """Sort ``a`` in place with the given gaps (largest first); return comparisons."""
    n = a.shape[0]
    count = 0
    for gi in range(gaps_desc.shape[0]):
        g = gaps_desc[gi]
        for i in range(g, n):
            key = a[i]
            j = i
            while j >= g:
                count += 1
                if a[j - g] <= key:
                    break
                a[j] = a[j - g]
                j -= g
            a[j] = key
    return count


@njit(cache=True, parallel=True)
def seeded_counts(master_seed, first, count, n, gaps_flat, offsets):
    """Comparison counts, shape (sequences, trials); -1 marks unsorted output."""
    nseq = offsets.shape[0] - 1
    out = np.empty((nseq, count), dtype=np.int64)
    for t in prange(count):
        perm = np.empty(n, dtype=np.int64)
        work = np.empty(n, dtype=np.int64)
        fill_permutation(master_seed, first + t, perm)
        for s in range(nseq):
            work[:] = perm
            c = shellsort_count(work, gaps_flat[offsets[s]:offsets[s + 1]])
            for i in range(n):
                if work[i] != i:
                    c = -1
                    break
            out[s, t] = c
    return out


@njit(cache=True, parallel=True)
def explicit_counts(perms, gaps_flat, offsets):
    nseq = offsets.shape[0] - 1
    count, n = perms.shape
    out = np.empty((nseq, count), dtype=np.int64)
    for t in prange(count):
        work = np.empty(n, dtype=np.int64)
        for s in range(nseq):
            work[:] = perms[t]
            c = shellsort_count(work, gaps_flat[offsets[s]:offsets[s + 1]])
            for i in range(1, n):
                if work[i - 1] > work[i]:
                    c = -1
                    break
            out[s, t] = c
    return out
