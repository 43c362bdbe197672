"""
Monte Carlo repetitions and parameter sweeps.

Each repetition or grid point gets its own seeds, derived from the
configured ones and its index, so results do not depend on how many threads
run them or in what order they finish. Results always come back in index
order.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, TypeVar

from .bounds import RateReport, capacity_spcu
from .config import ExperimentConfig
from .pipeline import run_end_to_end
from .scheduler import lambda_of
from .states import StateDistribution

__all__ = ['SweepRow', 'aggregate', 'run_repetitions', 'run_sweep']

log = logging.getLogger(__name__)

T = TypeVar('T')


def _run_indexed(count: int, fn: Callable[[int], T], threads: Optional[int]) -> list[T]:
    if count == 1 or threads == 1:
        return [fn(i) for i in range(count)]

    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, range(count)))


def run_repetitions(cfg: ExperimentConfig, threads: Optional[int] = None) -> list[RateReport]:
    """cfg.reps independent runs of cfg. A single repetition uses the seeds
    as configured; with more, repetition i uses seeds derived from index i."""
    def one(i: int) -> RateReport:
        seeds = cfg.seeds if cfg.reps == 1 else cfg.seeds.derived(i)
        log.debug('Repetition %d with seeds %s', i, seeds)
        return run_end_to_end(cfg.dist, cfg.n, cfg.spec, seeds, cfg.mode, cfg.scheme)

    return _run_indexed(cfg.reps, one, threads)


def aggregate(reports: Sequence[RateReport]) -> RateReport:
    """Pools repetitions into one report: counts are summed, rates are
    totals over totals, and verdicts and checks must hold in every run."""
    if not reports:
        raise ValueError('Nothing to aggregate')

    if len(reports) == 1:
        return reports[0]

    first = reports[0]
    n = sum(r.n for r in reports)
    symbols = sum(r.symbols for r in reports)
    blocks = sum(r.blocks for r in reports)

    split = tuple((sum(r.state_split[s][0] for r in reports),
                   sum(r.state_split[s][1] for r in reports))
                  for s in range(len(first.state_split)))

    return RateReport(n=n,
                      p=first.p,
                      blocks=blocks,
                      fallback=sum(r.fallback for r in reports),
                      symbols=symbols,
                      decoded=sum(r.decoded for r in reports),
                      achieved_spcu=Fraction(symbols, n) if n else Fraction(0),
                      capacity_spcu=first.capacity_spcu,
                      # Pooled blocks per use never exceed the best run's.
                      trace_capacity_spcu=max(r.trace_capacity_spcu for r in reports),
                      bounds=first.bounds,
                      verdicts=tuple(all(r.verdicts[j] for r in reports)
                                     for j in range(len(first.verdicts))),
                      foreign_ok=tuple(all(r.foreign_ok[j] for r in reports)
                                       for j in range(len(first.foreign_ok))),
                      state_split=split,
                      proportional=all(r.proportional for r in reports))


@dataclass(frozen=True)
class SweepRow:
    point: int
    value: Fraction
    dist: StateDistribution
    report: RateReport

    @property
    def lam(self) -> Fraction:
        return lambda_of(self.dist)

    @property
    def capacity_spcu(self) -> Fraction:
        return capacity_spcu(self.dist)

    @property
    def ok(self) -> bool:
        return self.report.ok


def run_sweep(cfg: ExperimentConfig, threads: Optional[int] = None) -> list[SweepRow]:
    """Varies cfg.vary over cfg.grid(), rescaling the other six
    probabilities to keep the total at 1, and runs cfg at every point. As
    with repetitions, seeds are derived from the point index unless there is
    only one point."""
    grid = cfg.grid()

    def one(i: int) -> SweepRow:
        dist = cfg.dist.with_component(cfg.vary, grid[i])
        seeds = cfg.seeds if len(grid) == 1 else cfg.seeds.derived(i)
        log.debug('Sweep point %d: %s = %s, dist %s', i, cfg.vary, grid[i], dist)
        report = run_end_to_end(dist, cfg.n, cfg.spec, seeds, cfg.mode, cfg.scheme)
        return SweepRow(i, grid[i], dist, report)

    return _run_indexed(len(grid), one, threads)
