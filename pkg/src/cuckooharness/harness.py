"""Monte Carlo estimation of the failure probability of cuckoo placement, compared
against the closed form bounds, with CSV output.

Every trial is keyed by (master seed, n, m, d, trial index), so a cell gives the same
numbers whether it runs alone or inside a sweep, and whatever the worker count.
"""
import csv
import logging
import multiprocessing
import os
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from itertools import product
from math import sqrt
from pathlib import Path
from typing import TextIO

from scipy.stats import norm  # type: ignore[import-untyped]

from src.cuckooharness.presets import resolve_preset
from src.cuckooinference import descriptors
from src.cuckooinference.bounds import BoundParams, capacity, failure_bound
from src.cuckooinference.constants import CONFIDENCE
from src.cuckooinference.core_model import Instance, Seed, sample_instance
from src.cuckooinference.inference_graph import (
    NodeId,
    bad_nodes,
    build_graph,
    find_basic_bad_path,
    has_bad_item,
    place_all,
)

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "n",
    "m",
    "d",
    "epsilon",
    "trials",
    "failures",
    "rate",
    "ci_lo",
    "ci_hi",
    "bound",
    "max_path_len",
    "mean_path_len",
)


class ExperimentConfig:
    """Parameters of a sweep.

    n_grid, epsilon_grid, d_grid: non-empty tuples. Every combination is one cell.

    trials: positive int. Trials per cell.

    seed: unsigned 64-bit int. Master seed.

    capacity_rule: "classic" for m = ceil((1+eps)n), "dsq" for m = ceil((1+eps)d^2 n).

    workers: non-negative int. Processes per cell, 0 for one per CPU. Only affects speed.
    """

    n_grid = descriptors.positive_grid()
    epsilon_grid = descriptors.positive_grid()
    d_grid = descriptors.positive_grid()
    trials = descriptors.positive_int()
    seed = descriptors.seed_desc()
    capacity_rule = descriptors.capacity_rule_desc()
    workers = descriptors.non_negative_int()

    def __init__(
        self,
        n_grid: Sequence[int],
        epsilon_grid: Sequence[float],
        d_grid: Sequence[int] = (1,),
        trials: int = 1000,
        seed: int = 0,
        capacity_rule: str = "classic",
        workers: int = 1,
    ) -> None:
        self.n_grid = tuple(n_grid)
        self.epsilon_grid = tuple(epsilon_grid)
        self.d_grid = tuple(d_grid)
        self.trials = trials
        self.seed = seed
        self.capacity_rule = capacity_rule
        self.workers = workers

    @classmethod
    def from_preset(cls, name: str, **overrides: object) -> "ExperimentConfig":
        """Config from a named preset. Overrides set to None are ignored."""
        values = resolve_preset(name)
        keys = {"n": "n_grid", "eps": "epsilon_grid", "d": "d_grid"}
        kwargs = {keys.get(key, key): value for key, value in values.items()}
        kwargs |= {key: value for key, value in overrides.items() if value is not None}

        return cls(**kwargs)  # type: ignore[arg-type]

    def cells(self) -> Iterator[tuple[int, float, int]]:
        """(n, epsilon, d) in grid order: n slowest, d fastest."""
        return product(self.n_grid, self.epsilon_grid, self.d_grid)

    @property
    def effective_workers(self) -> int:
        return self.workers or os.cpu_count() or 1


@dataclass(frozen=True)
class TrialOutcome:
    failed: bool
    has_bad_item: bool
    path_lengths: tuple[int, ...] = ()


@dataclass(frozen=True)
class TrialSummary:
    n: int
    m: int
    d: int
    epsilon: float
    trials: int
    failures: int
    bad_item_events: int
    rate: float
    ci_lo: float
    ci_hi: float
    bound: float
    path_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def max_path_len(self) -> int:
        return max(self.path_histogram, default=0)

    @property
    def mean_path_len(self) -> float:
        count = sum(self.path_histogram.values())
        if not count:
            return 0.0

        return sum(k * c for k, c in self.path_histogram.items()) / count

    @property
    def within_bound(self) -> bool:
        """Upper confidence limit at or below the bound. Vacuous when the bound is 1."""
        return self.bound >= 1 or self.ci_hi <= self.bound

    def csv_row(self) -> list[str]:
        return [
            str(self.n),
            str(self.m),
            str(self.d),
            f"{self.epsilon:.6g}",
            str(self.trials),
            str(self.failures),
            f"{self.rate:.6g}",
            f"{self.ci_lo:.6g}",
            f"{self.ci_hi:.6g}",
            f"{self.bound:.6g}",
            str(self.max_path_len),
            f"{self.mean_path_len:.6g}",
        ]


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        msg = f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
        raise ValueError(msg)

    z = float(norm.ppf(1 - (1 - confidence) / 2))
    p = successes / trials
    z2_n = z * z / trials

    center = (p + z2_n / 2) / (1 + z2_n)
    half_width = z / (1 + z2_n) * sqrt(p * (1 - p) / trials + z2_n / (4 * trials))

    return max(0.0, center - half_width), min(1.0, center + half_width)


def census_of(inst: Instance) -> Counter[int]:
    """Lengths of the distinct basic bad paths found from the bad nodes of inst. Origins
    that lead into the same path through a lead-in count it once."""
    g = build_graph(inst)
    lengths: Counter[int] = Counter()
    seen: set[tuple[NodeId, tuple[NodeId, ...]]] = set()
    for v in bad_nodes(g):
        report = find_basic_bad_path(g, v)
        if report is None or (report.root, report.nodes) in seen:
            continue

        seen.add((report.root, report.nodes))
        lengths[report.length] += 1

    return lengths


def run_trial(n: int, m: int, d: int, cell_seed: int, trial: int) -> TrialOutcome:
    inst = sample_instance(n, m, d, Seed(cell_seed), trial)
    g = build_graph(inst)
    failed = place_all(inst, graph=g) is None
    bad = has_bad_item(g)

    if not failed:
        return TrialOutcome(failed=False, has_bad_item=bad)

    lengths = census_of(inst)

    return TrialOutcome(failed=True, has_bad_item=bad, path_lengths=tuple(sorted(lengths.elements())))


def _run_trials(n: int, m: int, d: int, cell_seed: Seed, trials: int, workers: int) -> list[TrialOutcome]:
    trial = partial(run_trial, n, m, d, cell_seed.master)
    workers = workers or os.cpu_count() or 1
    if workers == 1:
        return [trial(t) for t in range(trials)]

    chunksize = max(1, trials // (8 * workers))
    # forked children of a process that already ran a prange kernel abort under OpenMP
    context = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
        return list(pool.map(trial, range(trials), chunksize=chunksize))


def run_cell(
    n: int,
    epsilon: float,
    d: int,
    trials: int,
    seed: Seed,
    *,
    capacity_rule: str = "classic",
    workers: int = 1,
) -> TrialSummary:
    """Samples `trials` instances at m = capacity(n, epsilon, d, capacity_rule), places each,
    and tallies failures against failure_bound."""
    m = capacity(n, epsilon, d, capacity_rule)
    params = BoundParams(n, m, epsilon, d, capacity_rule)
    cell_seed = seed.derive(n, m, d)

    outcomes = _run_trials(n, m, d, cell_seed, trials, workers)

    failures = sum(o.failed for o in outcomes)
    bad_item_events = sum(o.has_bad_item for o in outcomes)
    if failures != bad_item_events:
        msg = f"cell n={n} m={m} d={d}: {failures} failures but {bad_item_events} trials with a bad item"
        raise RuntimeError(msg)

    histogram: Counter[int] = Counter()
    for outcome in outcomes:
        histogram.update(outcome.path_lengths)

    ci_lo, ci_hi = wilson_interval(failures, trials)

    summary = TrialSummary(
        n=n,
        m=m,
        d=d,
        epsilon=epsilon,
        trials=trials,
        failures=failures,
        bad_item_events=bad_item_events,
        rate=failures / trials,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        bound=failure_bound(params),
        path_histogram=dict(sorted(histogram.items())),
    )

    logger.info(
        "n=%d m=%d d=%d eps=%g: %d/%d failures, rate %.3g [%.3g, %.3g], bound %.3g",
        n,
        m,
        d,
        epsilon,
        failures,
        trials,
        summary.rate,
        ci_lo,
        ci_hi,
        summary.bound,
    )

    return summary


def write_csv(summaries: Sequence[TrialSummary], file: TextIO) -> None:
    writer = csv.writer(file, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(s.csv_row() for s in summaries)


def run_sweep(config: ExperimentConfig, out: Path | TextIO | None = None) -> list[TrialSummary]:
    """Runs every cell in grid order, writing one CSV row per finished cell.
    An output path is opened before any trial runs, so an unwritable path fails fast."""
    if isinstance(out, Path):
        with out.open("w", newline="", encoding="utf-8") as file:
            return _sweep(config, file)

    return _sweep(config, out)


def _sweep(config: ExperimentConfig, file: TextIO | None) -> list[TrialSummary]:
    writer = csv.writer(file, lineterminator="\n") if file is not None else None
    if writer is not None:
        writer.writerow(CSV_HEADER)

    summaries = []
    for n, epsilon, d in config.cells():
        summary = run_cell(
            n,
            epsilon,
            d,
            config.trials,
            Seed(config.seed),
            capacity_rule=config.capacity_rule,
            workers=config.effective_workers,
        )
        summaries.append(summary)
        if writer is not None:
            writer.writerow(summary.csv_row())

    return summaries


def path_length_census(config: ExperimentConfig) -> dict[tuple[int, int, int, float], dict[int, int]]:
    """Histogram of basic bad path lengths over the failing trials of each cell,
    keyed by (n, m, d, epsilon)."""
    return {(s.n, s.m, s.d, s.epsilon): s.path_histogram for s in run_sweep(config)}


def successive_ratios(histogram: dict[int, int]) -> dict[int, float]:
    """h[k+2] / h[k] for each k with h[k] > 0. Every edge switches tables, so bad paths have
    odd length and k+2 is the next bucket; the counting argument predicts decay like (n/m)^2."""
    return {k: histogram.get(k + 2, 0) / count for k, count in sorted(histogram.items()) if count}
