"""Stepwise empirical search for the best gamma.

Each step enumerates every distinct truncated gamma-sequence in the current
interval, benchmarks all of them on one shared trial set, ranks them, takes
the prefix shared by a quorum of the top performers and narrows the interval
to the gammas realizing that prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import SearchError
from .exactroots import (
    DISPLAY_WIDTH,
    BoundaryGamma,
    GammaInterval,
    GammaValue,
    SequenceCell,
    compare_gammas,
    enumerate_cells,
    format_gamma,
    gamma_range_for_prefix,
)
from .gapseq import GapSequence
from .sortbench import BenchResult, TrialSet, run_bench

DEFAULT_SEED = 20211

# full-scale schedule: N = 10**(4+n), 10000 permutations (days on one core)
FULL_STEPS = [(10**5, 10000), (10**6, 10000), (10**7, 10000), (10**8, 10000)]
DESK_STEPS = [(10**4, 1000), (10**5, 1000)]
CIURA_FULL_STEPS = [(4 * 10**4, 10000), (4 * 10**5, 10000), (4 * 10**6, 10000), (4 * 10**7, 10000)]
CIURA_DESK_STEPS = [(4 * 10**4, 1000), (4 * 10**5, 200)]


@dataclass
class SearchConfig:
    initial_interval: GammaInterval
    steps: list[tuple[int, int]]
    top_t: int = 8
    quorum: Fraction = Fraction(5, 8)
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        self.steps = [(int(n), int(t)) for n, t in self.steps]
        self.quorum = Fraction(self.quorum)
        if not self.steps:
            raise ValueError("search needs at least one step")
        for (a, _), (b, _) in zip(self.steps, self.steps[1:]):
            if b <= a:
                raise ValueError("step sizes must be strictly increasing")
        if any(n < 2 or t < 1 for n, t in self.steps):
            raise ValueError("each step needs n >= 2 and at least one trial")
        if self.top_t < 1:
            raise ValueError("top_t must be >= 1")
        if not 0 < self.quorum <= 1:
            raise ValueError("quorum must lie in (0, 1]")


PRESETS = {
    "desk": lambda: SearchConfig(GammaInterval.from_decimals("2.24", "2.26"), DESK_STEPS),
    "full": lambda: SearchConfig(GammaInterval.from_decimals("2.24", "2.26"), FULL_STEPS),
    "ciura-desk": lambda: SearchConfig(
        GammaInterval.from_decimals("2.37", "2.39"), CIURA_DESK_STEPS
    ),
    "ciura-full": lambda: SearchConfig(
        GammaInterval.from_decimals("2.37", "2.39"), CIURA_FULL_STEPS
    ),
}


@dataclass
class RankedCell:
    rank: int
    cell: SequenceCell
    result: BenchResult


@dataclass
class StepReport:
    index: int
    n_elements: int
    trials: TrialSet
    interval_in: GammaInterval
    cells: list[SequenceCell]
    ranking: list[RankedCell]
    quorum_count: int
    prefix: GapSequence
    interval_out: GammaInterval
    notes: list[str] = field(default_factory=list)

    @property
    def best(self) -> RankedCell:
        return self.ranking[0]


@dataclass
class SearchResult:
    gamma: GammaValue
    gamma_decimal: str
    sequence: GapSequence
    final_interval: GammaInterval
    steps: list[StepReport]


def common_prefix(sequences: Sequence[Sequence[int]], quorum_count: int) -> GapSequence:
    """Longest prefix that at least ``quorum_count`` of ``sequences`` start with.

    When several prefixes of that length qualify, the most common wins, then
    the one belonging to the earliest sequence.
    """
    seqs = [tuple(s) for s in sequences]
    if not seqs:
        raise ValueError("need at least one sequence")
    if not 1 <= quorum_count <= len(seqs):
        raise ValueError(f"quorum {quorum_count} outside 1..{len(seqs)}")
    best: tuple[int, ...] = ()
    length = 1
    while True:
        tally: dict[tuple[int, ...], int] = {}
        for s in seqs:
            if len(s) >= length:
                p = s[:length]
                tally[p] = tally.get(p, 0) + 1
        winners = [p for p, c in tally.items() if c >= quorum_count]
        if not winners:
            break
        # dict order follows first appearance, so max() keeps the earliest on ties
        best = max(winners, key=lambda p: tally[p])
        length += 1
    if not best:
        raise SearchError("no increment is shared by the quorum")
    return GapSequence(best)


def run_step(
    interval: GammaInterval,
    n_elements: int,
    trial_count: int,
    top_t: int = 8,
    quorum=Fraction(5, 8),
    master_seed: int = DEFAULT_SEED,
    step_index: int = 1,
    progress: Optional[Callable[[str], None]] = None,
) -> StepReport:
    say = progress or (lambda msg: None)
    cells = enumerate_cells(interval, n_elements // 2)
    if not cells:
        raise SearchError(f"no cells in {interval}")
    say(f"step {step_index}: {len(cells)} cells, N={n_elements}, {trial_count} trials")
    trials = TrialSet(master_seed ^ step_index, trial_count, n_elements)
    results = run_bench([c.sequence for c in cells], trials)

    # cells come in increasing gamma order, so the index breaks ties by gamma
    order = sorted(range(len(cells)), key=lambda i: (results[i].total_comparisons, i))
    ranking = [RankedCell(r + 1, cells[i], results[i]) for r, i in enumerate(order)]

    top = ranking[:top_t]
    quorum_count = max(1, math.ceil(Fraction(quorum) * len(top)))
    prefix = common_prefix([rc.cell.sequence for rc in top], quorum_count)
    out = gamma_range_for_prefix(prefix).intersect(interval)
    if out is None:
        raise SearchError(f"prefix {prefix} does not meet {interval}")

    notes = []
    if not ranking[0].cell.sequence.startswith(prefix):
        notes.append("best cell does not carry the consensus prefix")
    return StepReport(
        step_index, n_elements, trials, interval, cells, ranking, quorum_count, prefix, out, notes
    )


def _clip(label: Optional[BoundaryGamma], interval: GammaInterval) -> GammaValue:
    # the best cell's right end, kept inside the interval it was found in
    if label is None or compare_gammas(label, interval.hi) > 0:
        return interval.hi
    return label


def run_search(
    config: SearchConfig, progress: Optional[Callable[[str], None]] = None
) -> SearchResult:
    """Chain ``run_step`` over the configured steps."""
    interval = config.initial_interval
    reports = []
    for index, (n, trials) in enumerate(config.steps, start=1):
        report = run_step(
            interval,
            n,
            trials,
            top_t=config.top_t,
            quorum=config.quorum,
            master_seed=config.master_seed,
            step_index=index,
            progress=progress,
        )
        if reports and not report.prefix.startswith(reports[-1].prefix):
            report.notes.append("consensus prefix does not extend the previous step's")
        reports.append(report)
        interval = report.interval_out

    last = reports[-1]
    gamma = _clip(last.best.cell.label, last.interval_in)
    if isinstance(gamma, BoundaryGamma):
        gamma.refine(DISPLAY_WIDTH)
    return SearchResult(
        gamma=gamma,
        gamma_decimal=format_gamma(gamma),
        sequence=last.best.cell.sequence,
        final_interval=last.interval_out,
        steps=reports,
    )
