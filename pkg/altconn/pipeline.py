import enum
import logging
from fractions import Fraction

from gfp import FieldSpec

from .bounds import BASELINE_SPCU, RateReport, bound_values, capacity_spcu, trace_lambda
from .channel import Seeds, proportional_trace, sample_channel, sample_trace
from .codec import decode, encode, symbol_demand, transmit
from .messages import MessageSource
from .scheduler import build_schedule, count_symbols, separate_schedule
from .states import StateDistribution, StateId, StateTrace

__all__ = ['DecodeFailure', 'Mode', 'Scheme', 'require_success', 'run_end_to_end', 'run_trace']

log = logging.getLogger(__name__)


class DecodeFailure(RuntimeError):
    """Raised when a run did not recover every symbol or failed one of its
    consistency checks. A subclass of RuntimeError."""
    pass


@enum.unique
class Mode(enum.Enum):
    """How the state trace of a run is produced."""
    MONTE_CARLO = 'monte-carlo'
    PROPORTIONAL = 'proportional'

    def __str__(self) -> str:
        return self.value


@enum.unique
class Scheme(enum.Enum):
    """JEMS packs joint-encoding blocks; SEPARATE codes every use on its
    own."""
    JEMS = 'jems'
    SEPARATE = 'separate'

    def __str__(self) -> str:
        return self.value


def run_trace(trace: StateTrace,
              dist: StateDistribution,
              spec: FieldSpec,
              seeds: Seeds = Seeds(),
              scheme: Scheme = Scheme.JEMS,
              counter_messages: bool = False,
              proportional: bool = False) -> RateReport:
    """Schedules, encodes, sends, decodes and checks one given trace.

    dist is only used for the capacity and bound figures of the report.
    proportional marks a trace laid out by proportional_trace(), which adds
    the achieved <= capacity check.
    Raises SingularSystem if some receiver's block system is singular.
    """
    schedule = build_schedule(trace) if scheme is Scheme.JEMS else separate_schedule(trace)
    channel = sample_channel(trace, spec, seeds.channel)

    demand = symbol_demand(schedule)
    if counter_messages:
        src = MessageSource.counter(spec, demand)
    else:
        src = MessageSource.uniform(spec, seeds.message, demand)

    assignments = encode(schedule, src)
    observations = transmit(schedule, assignments, channel)
    result = decode(schedule, assignments, observations)

    n = len(trace)
    symbols = count_symbols(schedule)
    counts = trace.counts()
    trace_capacity = BASELINE_SPCU + trace_lambda([counts[s] for s in StateId])
    split = schedule.state_split()

    log.debug('%s over %d uses: %d blocks, %d fallback, %d of %d symbols recovered', scheme, n,
              schedule.num_blocks, schedule.num_fallback, result.decoded_count, symbols)

    return RateReport(n=n,
                      p=spec.p,
                      blocks=schedule.num_blocks,
                      fallback=schedule.num_fallback,
                      symbols=symbols,
                      decoded=result.decoded_count,
                      achieved_spcu=Fraction(symbols, n) if n else Fraction(0),
                      capacity_spcu=capacity_spcu(dist),
                      trace_capacity_spcu=trace_capacity,
                      bounds=tuple(bound_values(dist, spec)),
                      verdicts=result.verdicts,
                      foreign_ok=result.foreign_ok,
                      state_split=tuple(split[s] for s in StateId),
                      proportional=proportional)


def run_end_to_end(dist: StateDistribution,
                   n: int,
                   spec: FieldSpec,
                   seeds: Seeds = Seeds(),
                   mode: Mode = Mode.MONTE_CARLO,
                   scheme: Scheme = Scheme.JEMS,
                   counter_messages: bool = False) -> RateReport:
    """The whole achievability pipeline: draw a trace of n uses from dist
    (or lay one out proportionally), then run_trace() it."""
    if n < 0:
        raise ValueError(f'Number of channel uses must be non-negative, got {n}')

    if mode is Mode.PROPORTIONAL:
        trace = proportional_trace(dist, n)
    else:
        trace = sample_trace(dist, n, seeds.trace)

    return run_trace(trace, dist, spec, seeds, scheme, counter_messages,
                     proportional=mode is Mode.PROPORTIONAL)


def require_success(report: RateReport) -> None:
    failed = [name for name, ok in report.checks().items() if not ok]
    if failed:
        raise DecodeFailure(f'Run over {report.n} uses failed: {", ".join(failed)}')
