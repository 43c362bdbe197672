"""
Sum-capacity, the genie-aided upper bounds that meet it, and the separate
coding baseline.

Everything is computed in exact symbols per channel use (spcu) and converted
to bits per channel use by multiplying with log2(p), so comparisons never
see float noise. The bound for the remaining states (genie_bound_rest) is
stated without proof in the literature; it is evaluated here as a formula
only.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from gfp import FieldSpec

from .scheduler import BLOCK_DEMAND, FALLBACK_SYMBOLS, lambda_of
from .states import StateDistribution, StateId

__all__ = ['BASELINE_SPCU', 'BoundValue', 'RateReport', 'baseline_separate', 'bound_values',
           'capacity_spcu', 'combined_bound', 'combined_bound_spcu', 'genie_bound_B',
           'genie_bound_B_spcu', 'genie_bound_rest', 'genie_bound_rest_spcu', 'sum_capacity',
           'trace_lambda']

BASELINE_SPCU = Fraction(FALLBACK_SYMBOLS)


def capacity_spcu(dist: StateDistribution) -> Fraction:
    """2 + λ, exactly."""
    return BASELINE_SPCU + lambda_of(dist)


def sum_capacity(dist: StateDistribution, spec: FieldSpec) -> float:
    """(2 + λ)·log2 p bits per channel use."""
    return float(capacity_spcu(dist)) * spec.rate_unit


def genie_bound_B_spcu(dist: StateDistribution) -> Fraction:
    return BASELINE_SPCU + dist[StateId.B] / 2


def genie_bound_B(dist: StateDistribution, spec: FieldSpec) -> float:
    """The bound from giving receivers the B-state side information:
    (2 + λ_B/2)·log2 p."""
    return float(genie_bound_B_spcu(dist)) * spec.rate_unit


def genie_bound_rest_spcu(dist: StateDistribution) -> Fraction:
    others = [dist[StateId.A] / 2] + [dist[s] for s in StateId if s not in (StateId.A, StateId.B)]
    return BASELINE_SPCU + min(others)


def genie_bound_rest(dist: StateDistribution, spec: FieldSpec) -> float:
    """(2 + min{λ_A/2, λ_C, λ_D, λ_E, λ_F, λ_G})·log2 p."""
    return float(genie_bound_rest_spcu(dist)) * spec.rate_unit


def combined_bound_spcu(dist: StateDistribution) -> Fraction:
    return min(genie_bound_B_spcu(dist), genie_bound_rest_spcu(dist))


def combined_bound(dist: StateDistribution, spec: FieldSpec) -> float:
    """The tighter of the two genie bounds. Always equal to sum_capacity."""
    return float(combined_bound_spcu(dist)) * spec.rate_unit


def baseline_separate(spec: FieldSpec) -> float:
    """What coding every state on its own achieves: 2 symbols per use."""
    return float(BASELINE_SPCU) * spec.rate_unit


@dataclass(frozen=True)
class BoundValue:
    name: str
    spcu: Fraction
    bits: float


def bound_values(dist: StateDistribution, spec: FieldSpec) -> list[BoundValue]:
    res: list[BoundValue] = []
    for name, spcu in (('genie-B', genie_bound_B_spcu(dist)),
                       ('genie-rest', genie_bound_rest_spcu(dist)),
                       ('combined', combined_bound_spcu(dist)),
                       ('separate-baseline', BASELINE_SPCU)):
        res.append(BoundValue(name, spcu, float(spcu) * spec.rate_unit))

    return res


@dataclass(frozen=True)
class RateReport:
    """The outcome of one end-to-end run.

    capacity_spcu is 2 + λ for the configured distribution.
    trace_capacity_spcu is the same formula evaluated on the state
    frequencies of the trace that was actually run. The achieved rate can
    only fall short of the latter (blocks are whole), but a random trace can
    land on either side of the former. A proportional trace (proportional
    set) is laid out to stay at or below the former too.

    state_split holds, per state in StateId order, how many uses went into
    blocks and how many were coded on their own.
    """
    n: int
    p: int
    blocks: int
    fallback: int
    symbols: int
    decoded: int
    achieved_spcu: Fraction
    capacity_spcu: Fraction
    trace_capacity_spcu: Fraction
    bounds: tuple[BoundValue, ...]
    verdicts: tuple[bool, ...]
    foreign_ok: tuple[bool, ...] = field(default=(True, True, True))
    state_split: tuple[tuple[int, int], ...] = ()
    baseline_spcu: Fraction = BASELINE_SPCU
    proportional: bool = False

    @property
    def spec(self) -> FieldSpec:
        return FieldSpec(self.p)

    @property
    def achieved_bits(self) -> float:
        return float(self.achieved_spcu) * self.spec.rate_unit

    @property
    def capacity_bits(self) -> float:
        return float(self.capacity_spcu) * self.spec.rate_unit

    @property
    def verdict(self) -> bool:
        return all(self.verdicts) and all(self.foreign_ok)

    def bound(self, name: str) -> Optional[BoundValue]:
        return next((b for b in self.bounds if b.name == name), None)

    @property
    def genie_bounds(self) -> list[BoundValue]:
        return [b for b in self.bounds if b.name.startswith('genie-')]

    def checks(self) -> dict[str, bool]:
        """Every consistency check a run must pass, by name."""
        res = {
            'decoded': self.verdict,
            'symbols_accounted': self.decoded == self.symbols,
            'achieved_le_trace_capacity': self.achieved_spcu <= self.trace_capacity_spcu,
        }
        if self.proportional:
            res['achieved_le_capacity'] = self.achieved_spcu <= self.capacity_spcu

        for b in self.genie_bounds:
            res[f'capacity_le_{b.name.replace("-", "_")}'] = self.capacity_spcu <= b.spcu

        combined = self.bound('combined')
        if combined is not None:
            res['combined_eq_capacity'] = combined.spcu == self.capacity_spcu

        return res

    @property
    def ok(self) -> bool:
        return all(self.checks().values())


def trace_lambda(counts: Sequence[int]) -> Fraction:
    """λ evaluated on raw per-state counts (in StateId order), as a share of
    their total."""
    n = sum(counts)
    if n == 0:
        return Fraction(0)

    return min(Fraction(counts[s], BLOCK_DEMAND[s]) for s in StateId) / n
