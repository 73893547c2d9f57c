"""Comparison-counting Shellsort benchmarks on reproducible random permutations.

Counting convention: every key-vs-element test in the gapped insertion loop
costs one comparison, including the test that stops a shift chain; running
off the front of the array costs nothing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .errors import DomainError, UnsortedOutputError
from .gapseq import GapSequence, truncate_for_size

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# trials per kernel call; bounds the (sequences x trials) count matrix
_CHUNK = 1000

Gaps = Union[GapSequence, Sequence[int]]


# --- pure-Python PRNG twin ----------------------------------------------------


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_stream(seed: int) -> Iterator[int]:
    state = seed & MASK64
    while True:
        state = (state + GOLDEN) & MASK64
        yield mix64(state)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded from SplitMix64; reference twin of the compiled one."""

    def __init__(self, seed: int):
        stream = splitmix64_stream(seed)
        self.s = [next(stream) for _ in range(4)]

    def next(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` by top-bits rejection."""
        bits = (m - 1).bit_length()
        while True:
            r = self.next() >> (64 - bits)
            if r < m:
                return r


def trial_seed(master_seed: int, index: int) -> int:
    return mix64((master_seed + (index + 1) * GOLDEN) & MASK64)


def reference_permutation(master_seed: int, index: int, n: int) -> list[int]:
    """Pure-Python Fisher-Yates matching the compiled generator exactly."""
    rng = Xoshiro256StarStar(trial_seed(master_seed, index))
    a = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        a[i], a[j] = a[j], a[i]
    return a


# --- trial sets ---------------------------------------------------------------


@dataclass(frozen=True)
class TrialSet:
    """``count`` seeded permutations of ``0..n-1``; permutation i depends only on
    ``(master_seed, i, n)``."""

    master_seed: int
    count: int
    n: int

    def __post_init__(self):
        if self.count < 1 or self.n < 1:
            raise DomainError("trial count and n must be >= 1")
        object.__setattr__(self, "master_seed", int(self.master_seed) & MASK64)

    def permutation(self, index: int) -> np.ndarray:
        if not 0 <= index < self.count:
            raise IndexError(index)
        out = np.empty(self.n, dtype=np.int64)
        _kernels.fill_permutation(np.uint64(self.master_seed), index, out)
        return out

    def __len__(self):
        return self.count

    def __iter__(self):
        return (self.permutation(i) for i in range(self.count))

    @property
    def label(self) -> str:
        return f"seed={self.master_seed}"


@dataclass(frozen=True)
class ExhaustiveTrials:
    """All ``n!`` permutations of ``0..n-1`` in lexicographic order."""

    n: int

    def __post_init__(self):
        if not 1 <= self.n <= 10:
            raise DomainError("exhaustive trials need 1 <= n <= 10")

    @property
    def count(self) -> int:
        return math.factorial(self.n)

    def matrix(self) -> np.ndarray:
        return np.array(list(itertools.permutations(range(self.n))), dtype=np.int64)

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.matrix())

    @property
    def label(self) -> str:
        return "exhaustive"


def generate_trials(master_seed: int, count: int, n: int) -> TrialSet:
    return TrialSet(master_seed, count, n)


# --- sorting ------------------------------------------------------------------


def _check_gaps(gaps: Gaps) -> tuple[int, ...]:
    incs = tuple(int(g) for g in gaps)
    if not incs or incs[0] != 1:
        raise DomainError("gap sequence must start with increment 1")
    if any(b <= a for a, b in zip(incs, incs[1:])):
        raise DomainError("gap sequence must be strictly increasing")
    return incs


def _pass_gaps(gaps: Gaps, n: int, truncate: bool) -> np.ndarray:
    incs = _check_gaps(gaps)
    if truncate:
        incs = truncate_for_size(GapSequence(incs), n).increments
    return np.array(incs[::-1], dtype=np.int64)


def shellsort_count(values, gaps: Gaps, truncate: bool = True):
    """Shellsort a copy of ``values``; return ``(sorted_array, comparisons)``.

    With ``truncate`` the passes start at the largest gap <= n/2.
    """
    a = np.array(values, dtype=np.int64).reshape(-1)
    desc = _pass_gaps(gaps, max(len(a), 1), truncate)
    count = _kernels.shellsort_count(a, desc)
    return a, int(count)


def shellsort_count_reference(values, gaps: Gaps, truncate: bool = True):
    """Plain-Python Shellsort with the same counting convention."""
    a = list(values)
    incs = _check_gaps(gaps)
    if truncate:
        incs = tuple(h for h in incs if h == 1 or 2 * h <= len(a))
    count = 0
    for g in reversed(incs):
        for i in range(g, len(a)):
            key = a[i]
            j = i
            while j >= g:
                count += 1
                if a[j - g] <= key:
                    break
                a[j] = a[j - g]
                j -= g
            a[j] = key
    return a, count


@lru_cache(maxsize=None)
def log2_factorial(n: int) -> float:
    """``log2(n!)``: direct summation up to 10**6, log-gamma above."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n <= 10**6:
        return math.fsum(math.log2(k) for k in range(2, n + 1))
    return math.lgamma(n + 1) / math.log(2)


# --- benchmarks ---------------------------------------------------------------


@dataclass(frozen=True)
class BenchResult:
    sequence_id: str
    n: int
    trials: int
    total_comparisons: int
    mean_comparisons: float
    variance: float
    normalized_mean: float

    @classmethod
    def from_counts(cls, sequence_id: str, n: int, counts: Iterable[int]):
        counts = [int(c) for c in counts]
        m = len(counts)
        total = sum(counts)
        sq = sum(c * c for c in counts)
        mean = total / m
        # exact integer numerator keeps the variance independent of ordering
        variance = (m * sq - total * total) / (m * m)
        norm = mean / log2_factorial(n) if n >= 2 else float("nan")
        return cls(sequence_id, n, m, total, mean, variance, norm)


def set_jobs(jobs: Optional[int]) -> None:
    """Cap the number of worker threads used by the kernels."""
    if jobs is None:
        return
    import numba

    numba.set_num_threads(max(1, min(int(jobs), numba.config.NUMBA_NUM_THREADS)))


def count_matrix(
    sequences: Sequence[Gaps],
    trials: Union[TrialSet, ExhaustiveTrials],
    truncate: bool = True,
) -> np.ndarray:
    """Per-trial comparison counts, shape ``(len(sequences), trials.count)``."""
    n = trials.n
    desc = [_pass_gaps(s, n, truncate) for s in sequences]
    offsets = np.zeros(len(desc) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(d) for d in desc])
    flat = np.concatenate(desc) if desc else np.zeros(0, dtype=np.int64)
    if isinstance(trials, ExhaustiveTrials):
        counts = _kernels.explicit_counts(trials.matrix(), flat, offsets)
    else:
        parts = []
        seed = np.uint64(trials.master_seed)
        for first in range(0, trials.count, _CHUNK):
            size = min(_CHUNK, trials.count - first)
            parts.append(_kernels.seeded_counts(seed, first, size, n, flat, offsets))
        counts = np.concatenate(parts, axis=1)
    bad = np.argwhere(counts < 0)
    if len(bad):
        s, t = bad[0]
        raise UnsortedOutputError(
            f"sequence #{s} left trial {t} unsorted (n={n}); counts are invalid"
        )
    return counts


def _sequence_id(seq: Gaps) -> str:
    if isinstance(seq, GapSequence):
        return seq.label
    return ",".join(str(int(g)) for g in seq)


def run_bench(
    sequences: Sequence[Gaps],
    trials: Union[TrialSet, ExhaustiveTrials],
    truncate: bool = True,
) -> list[BenchResult]:
    """Benchmark every sequence on the same trial set."""
    counts = count_matrix(sequences, trials, truncate=truncate)
    return [
        BenchResult.from_counts(_sequence_id(seq), trials.n, row.tolist())
        for seq, row in zip(sequences, counts)
    ]
