"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 runtime failure.  ``GAPFORGE_SEED``
sets the default master seed.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import DomainError, GapforgeError, UnrealizablePrefixError
from .exactroots import (
    GammaInterval,
    ciura_increment_ranges,
    enumerate_cells,
    format_gamma,
    gamma_range_for_prefix,
    intersect_intervals,
)
from .gapseq import (
    GapSequence,
    as_gamma,
    ciura_sequence,
    gamma_sequence,
    tokuda_sequence,
    truncate_for_size,
)
from .searchpipe import DEFAULT_SEED, PRESETS, SearchConfig, SearchResult, run_search
from .sortbench import ExhaustiveTrials, TrialSet, run_bench, set_jobs

CELLS_HEADER = ["gamma_label_k", "gamma_label_h", "gamma_decimal_18", "sequence"]
BENCH_HEADER = ["sequence_id", "n", "trials", "mean", "variance", "normalized_mean"]
EXCLUSION_HEADER = [
    "n",
    "trials",
    "including_mean",
    "including_normalized",
    "excluding_mean",
    "excluding_normalized",
    "dropped_increments",
]
STEP_HEADER = [
    "rank",
    "gamma_label_k",
    "gamma_label_h",
    "gamma_decimal_18",
    "mean",
    "variance",
    "normalized_mean",
    "has_prefix",
    "sequence",
]
SUMMARY_HEADER = [
    "step",
    "n",
    "trials",
    "trial_seed",
    "cells",
    "interval_in_lo",
    "interval_in_hi",
    "best_gamma_decimal_18",
    "best_normalized_mean",
    "quorum_count",
    "prefix",
    "interval_out_lo",
    "interval_out_hi",
    "notes",
]
CIURA_HEADER = ["position", "increment", "lo_decimal_18", "hi_decimal_18"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- argument helpers ---------------------------------------------------------


def _seq_text(seq) -> str:
    return " ".join(str(h) for h in seq)


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in re.split(r"[,\s]+", text.strip()) if x]
    except ValueError as exc:
        raise UsageError(f"not a list of integers: {text!r}") from exc


def _parse_gamma(text: str) -> Fraction:
    try:
        return as_gamma(text)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def decade_sizes(k_from: int, k_to: int) -> list[int]:
    """``ceil(10**(k/10))`` for k in ``k_from..k_to``, computed exactly."""
    sizes = []
    for k in range(k_from, k_to + 1):
        n = max(1, int(round(10 ** (k / 10))))
        while n**10 < 10**k:
            n += 1
        while n > 1 and (n - 1) ** 10 >= 10**k:
            n -= 1
        sizes.append(n)
    return sizes


def _parse_sizes(text: str) -> list[int]:
    m = re.fullmatch(r"decades:(\d+)-(\d+)", text.strip())
    if m:
        return decade_sizes(int(m.group(1)), int(m.group(2)))
    sizes = _parse_int_list(text)
    if not sizes or any(n < 1 for n in sizes):
        raise UsageError(f"bad size list {text!r}")
    return sizes


def build_sequence(name: str, n: int) -> GapSequence:
    """Sequence named by ``name`` with increments up to ``n``.

    ``tokuda``, ``ciura``, ``ciura-extended``, ``gamma:<decimal>`` or an
    explicit comma list such as ``1,4,10``.
    """
    limit = max(n, 1)
    if name == "tokuda":
        return tokuda_sequence(limit)
    if name == "ciura":
        return ciura_sequence(limit)
    if name == "ciura-extended":
        return ciura_sequence(limit, extended=True)
    if name.startswith("gamma:"):
        return gamma_sequence(_parse_gamma(name[6:]), limit)
    try:
        return GapSequence(tuple(_parse_int_list(name)))
    except ValueError as exc:
        raise UsageError(f"bad sequence {name!r}: {exc}") from exc


def _interval_from(lo: Optional[str], hi: Optional[str], prefix: Optional[str]) -> GammaInterval:
    if prefix:
        try:
            return gamma_range_for_prefix(_parse_int_list(prefix))
        except UnrealizablePrefixError as exc:
            raise UsageError(str(exc)) from exc
    if lo is None or hi is None:
        raise UsageError("give --lo and --hi, or --prefix")
    glo, ghi = _parse_gamma(lo), _parse_gamma(hi)
    if glo >= ghi:
        raise UsageError("--lo must be smaller than --hi")
    return GammaInterval(glo, ghi)


def _default_seed() -> int:
    env = os.environ.get("GAPFORGE_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env, 0)
    except ValueError as exc:
        raise UsageError(f"GAPFORGE_SEED is not an integer: {env!r}") from exc


# --- output -------------------------------------------------------------------


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_manifest(path: Path, argv, config: dict, seed, outputs) -> None:
    manifest = {
        "command_line": list(argv),
        "config": config,
        "master_seed": seed,
        "code_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _emit(text: str, out: Optional[str], argv, config: dict, seed=None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    write_manifest(path.with_name(path.name + ".manifest.json"), argv, config, seed, [path])


def _num(x: float) -> str:
    return repr(float(x))


# --- commands -----------------------------------------------------------------


def cmd_gaps(args, argv) -> None:
    if args.generator == "gamma":
        if args.value is None:
            raise UsageError("gaps gamma needs a gamma value")
        gamma = _parse_gamma(args.value)
    elif args.value is not None:
        raise UsageError(f"{args.generator} takes no value")
    limit = args.limit if args.limit is not None else args.n
    if limit < 1:
        raise UsageError("limit must be >= 1")
    if args.generator == "gamma":
        seq = gamma_sequence(gamma, limit)
    elif args.generator == "tokuda":
        seq = tokuda_sequence(limit)
    else:
        seq = ciura_sequence(limit, extended=args.extended)
    if args.n is not None:
        seq = truncate_for_size(seq, args.n)
    sys.stdout.write("".join(f"{h}\n" for h in seq))


def cells_csv(cells) -> str:
    rows = []
    for c in cells:
        if c.label is None:
            rows.append(["", "", "inf", _seq_text(c.sequence)])
        else:
            rows.append([c.label.k, c.label.h, format_gamma(c.label), _seq_text(c.sequence)])
    return _csv_text(CELLS_HEADER, rows)


def cmd_cells(args, argv) -> None:
    interval = _interval_from(args.lo, args.hi, args.prefix)
    if args.limit < 1:
        raise UsageError("--limit must be >= 1")
    cells = enumerate_cells(interval, args.limit)
    config = {"lo": args.lo, "hi": args.hi, "prefix": args.prefix, "limit": args.limit}
    _emit(cells_csv(cells), args.out, argv, config)


def _trials_for(text: str, n: int, seed: int):
    m = re.fullmatch(r"exhaustive(?:-(\d+))?", text)
    if m:
        if m.group(1) is not None and int(m.group(1)) != n:
            raise UsageError(f"{text} does not match n={n}")
        if n > 10:
            raise UsageError("exhaustive trials need n <= 10")
        return ExhaustiveTrials(n)
    try:
        count = int(text)
    except ValueError as exc:
        raise UsageError(f"bad --trials {text!r}") from exc
    if count < 1:
        raise UsageError("--trials must be >= 1")
    return TrialSet(seed, count, n)


def bench_rows(results) -> list[list]:
    return [
        [r.sequence_id, r.n, r.trials, _num(r.mean_comparisons), _num(r.variance), _num(r.normalized_mean)]
        for r in results
    ]


def cmd_bench(args, argv) -> None:
    seed = args.seed if args.seed is not None else _default_seed()
    sizes = []
    for text in args.n or []:
        sizes.extend(_parse_sizes(text))
    if not sizes:
        raise UsageError("give at least one --n")
    if any(n < 2 for n in sizes):
        raise UsageError("normalized output needs n >= 2")
    rows = []
    for n in sizes:
        seqs = [build_sequence(s, n) for s in args.seq]
        rows.extend(bench_rows(run_bench(seqs, _trials_for(args.trials, n, seed))))
    config = {"seq": args.seq, "n": sizes, "trials": args.trials}
    _emit(_csv_text(BENCH_HEADER, rows), args.out, argv, config, seed)


def cmd_exclusion(args, argv) -> None:
    seed = args.seed if args.seed is not None else _default_seed()
    sizes = _parse_sizes(args.n_grid)
    if any(n < 2 for n in sizes):
        raise UsageError("sizes must be >= 2")
    rows = []
    for n in sizes:
        seq = build_sequence(args.seq, max(n - 1, 1))
        trials = _trials_for(args.trials, n, seed)
        inc = run_bench([seq], trials, truncate=False)[0]
        exc = run_bench([seq], trials, truncate=True)[0]
        dropped = [h for h in seq if h != 1 and 2 * h > n]
        rows.append(
            [
                n,
                inc.trials,
                _num(inc.mean_comparisons),
                _num(inc.normalized_mean),
                _num(exc.mean_comparisons),
                _num(exc.normalized_mean),
                _seq_text(dropped),
            ]
        )
    config = {"seq": args.seq, "n_grid": sizes, "trials": args.trials}
    _emit(_csv_text(EXCLUSION_HEADER, rows), args.out, argv, config, seed)


def parse_config(text: str, base: Optional[SearchConfig] = None) -> SearchConfig:
    """Read a flat ``key = value`` search config.

    Keys: ``lo``, ``hi`` (or ``prefix``), ``steps`` (``N:trials, ...``),
    ``top_t``, ``quorum`` (fraction), ``seed``.  Missing keys fall back to
    ``base`` or the defaults.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    known = {"lo", "hi", "prefix", "steps", "top_t", "quorum", "seed", "preset"}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "preset" in values:
        if values["preset"] not in PRESETS:
            raise UsageError(f"unknown preset {values['preset']!r}")
        base = PRESETS[values["preset"]]()
    if "lo" in values or "hi" in values or "prefix" in values:
        interval = _interval_from(values.get("lo"), values.get("hi"), values.get("prefix"))
    elif base is not None:
        interval = base.initial_interval
    else:
        raise UsageError("config needs lo and hi (or prefix)")
    if "steps" in values:
        steps = []
        for part in values["steps"].split(","):
            m = re.fullmatch(r"\s*(\d+)\s*:\s*(\d+)\s*", part)
            if not m:
                raise UsageError(f"bad step {part!r}; expected N:trials")
            steps.append((int(m.group(1)), int(m.group(2))))
    elif base is not None:
        steps = base.steps
    else:
        raise UsageError("config needs steps")
    try:
        return SearchConfig(
            initial_interval=interval,
            steps=steps,
            top_t=int(values.get("top_t", base.top_t if base else 8)),
            quorum=Fraction(values.get("quorum", base.quorum if base else Fraction(5, 8))),
            master_seed=int(values["seed"], 0) if "seed" in values else (
                base.master_seed if base else _default_seed()
            ),
        )
    except ValueError as exc:
        raise UsageError(f"bad config: {exc}") from exc


def config_text(config: SearchConfig) -> str:
    iv = config.initial_interval
    lines = [
        f"lo = {format_gamma(iv.lo, 30)}",
        f"hi = {format_gamma(iv.hi, 30)}",
        "steps = " + ", ".join(f"{n}:{t}" for n, t in config.steps),
        f"top_t = {config.top_t}",
        f"quorum = {config.quorum}",
        f"seed = {config.master_seed}",
    ]
    return "\n".join(lines) + "\n"


def step_csv(report) -> str:
    rows = []
    for rc in report.ranking:
        label = rc.cell.label
        r = rc.result
        rows.append(
            [
                rc.rank,
                label.k if label is not None else "",
                label.h if label is not None else "",
                format_gamma(label),
                _num(r.mean_comparisons),
                _num(r.variance),
                _num(r.normalized_mean),
                int(rc.cell.sequence.startswith(report.prefix)),
                _seq_text(rc.cell.sequence),
            ]
        )
    return _csv_text(STEP_HEADER, rows)


def summary_csv(result: SearchResult) -> str:
    rows = []
    for rep in result.steps:
        rows.append(
            [
                rep.index,
                rep.n_elements,
                rep.trials.count,
                rep.trials.master_seed,
                len(rep.cells),
                format_gamma(rep.interval_in.lo),
                format_gamma(rep.interval_in.hi),
                format_gamma(rep.best.cell.label),
                _num(rep.best.result.normalized_mean),
                rep.quorum_count,
                _seq_text(rep.prefix),
                format_gamma(rep.interval_out.lo),
                format_gamma(rep.interval_out.hi),
                "; ".join(rep.notes),
            ]
        )
    last = result.final_interval
    rows.append(
        [
            "final",
            "",
            "",
            "",
            "",
            "",
            "",
            result.gamma_decimal,
            "",
            "",
            _seq_text(result.sequence),
            format_gamma(last.lo),
            format_gamma(last.hi),
            "",
        ]
    )
    return _csv_text(SUMMARY_HEADER, rows)


def write_search_outputs(result: SearchResult, outdir: Path) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for rep in result.steps:
        p = outdir / f"step_{rep.index}.csv"
        p.write_text(step_csv(rep))
        paths.append(p)
    p = outdir / "summary.csv"
    p.write_text(summary_csv(result))
    paths.append(p)
    return paths


def cmd_search(args, argv) -> None:
    source = f"preset = {args.preset}\n" if args.preset else ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        base = PRESETS[args.preset]() if args.preset else None
        config = parse_config(text, base)
        source += text
    elif args.preset:
        config = PRESETS[args.preset]()
    else:
        raise UsageError("give --config or --preset")
    if args.seed is not None:
        config.master_seed = args.seed
    source += f"seed = {config.master_seed}\n"

    def progress(msg):
        if not args.quiet:
            print(msg, file=sys.stderr, flush=True)

    result = run_search(config, progress=progress)
    outdir = Path(args.outdir)
    paths = write_search_outputs(result, outdir)
    # replaying config.txt reproduces the run; the summary below is informational
    (outdir / "config.txt").write_text(source)
    write_manifest(
        outdir / "manifest.json",
        argv,
        {"config_text": source, "resolved": config_text(config)},
        config.master_seed,
        paths + [outdir / "config.txt"],
    )
    print(f"gamma = {result.gamma_decimal}...")
    print(f"sequence = {', '.join(map(str, result.sequence))}")
    print(f"final interval = {result.final_interval}")


def ciura_csv() -> str:
    ranges = ciura_increment_ranges()
    rows = [
        [j, h, format_gamma(iv.lo), format_gamma(iv.hi)]
        for j, (h, iv) in enumerate(ranges, start=1)
    ]
    common = intersect_intervals(iv for _, iv in ranges)
    if common is None:
        rows.append(["intersection", "", "empty", "empty"])
    else:
        rows.append(["intersection", "", format_gamma(common.lo), format_gamma(common.hi)])
    return _csv_text(CIURA_HEADER, rows)


def cmd_ciura_ranges(args, argv) -> None:
    _emit(ciura_csv(), args.out, argv, {})


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gapforge", description="Shellsort gamma-sequence research tools")
    p.add_argument("--version", action="version", version=f"gapforge {__version__}")
    p.add_argument("--jobs", type=int, default=None, help="cap worker threads")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gaps", help="print a gap sequence, one increment per line")
    g.add_argument("generator", choices=["gamma", "tokuda", "ciura"])
    g.add_argument("value", nargs="?", help="gamma as an exact decimal or p/q")
    g.add_argument("--extended", action="store_true", help="extend Ciura by floor(2.25 h)")
    lim = g.add_mutually_exclusive_group(required=True)
    lim.add_argument("--limit", type=int, help="largest allowed increment")
    lim.add_argument("--n", type=int, help="number of elements; keeps increments <= n/2")
    g.set_defaults(func=cmd_gaps)

    c = sub.add_parser("cells", help="enumerate distinct truncated gamma-sequences")
    c.add_argument("--lo")
    c.add_argument("--hi")
    c.add_argument("--prefix", help="use the gamma range of this increment prefix")
    c.add_argument("--limit", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_cells)

    b = sub.add_parser("bench", help="average comparison counts")
    b.add_argument("--seq", action="append", required=True,
                   help="tokuda | ciura | ciura-extended | gamma:<g> | 1,4,10,...")
    b.add_argument("--n", action="append", help="sizes: 1000,2000 or decades:K1-K2")
    b.add_argument("--trials", default="1000", help="count, or 'exhaustive' for all n!")
    b.add_argument("--seed", type=lambda s: int(s, 0))
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("exclusion", help="including vs excluding increments > N/2")
    e.add_argument("--n-grid", required=True, help="sizes: 1000,10000 or decades:K1-K2")
    e.add_argument("--seq", default="tokuda")
    e.add_argument("--trials", default="500")
    e.add_argument("--seed", type=lambda s: int(s, 0))
    e.add_argument("--out")
    e.set_defaults(func=cmd_exclusion)

    s = sub.add_parser("search", help="stepwise search for the best gamma")
    s.add_argument("--config", help="flat key = value config file")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--seed", type=lambda s: int(s, 0))
    s.add_argument("--outdir", default="search_out")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_search)

    r = sub.add_parser("ciura-ranges", help="gamma range of each Ciura increment")
    r.add_argument("--out")
    r.set_defaults(func=cmd_ciura_ranges)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_jobs(args.jobs)
        args.func(args, ["gapforge"] + argv)
    except UsageError as exc:
        print(f"gapforge: error: {exc}", file=sys.stderr)
        return 1
    except (GapforgeError, OSError) as exc:
        print(f"gapforge: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - anything else is a runtime failure
        print(f"gapforge: internal error: {exc!r}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
