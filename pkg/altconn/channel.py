from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import numpy.typing as npt

from gfp import FieldElement, FieldSpec, IntArray, Matrix

from .scheduler import BLOCK_DEMAND, lambda_of
from .states import (NUM_USERS, InvalidDistribution, StateDistribution, StateId, StateTrace,
                     link_mask, make_proportional_trace)

__all__ = ['ChannelRealization', 'Seeds', 'apply_channel', 'derive_seed', 'proportional_counts',
           'proportional_trace', 'receive', 'sample_channel', 'sample_trace']


@dataclass(frozen=True)
class Seeds:
    """Independent seeds for the three random streams of an experiment, so
    that one factor can be varied while the others stay fixed."""
    trace: int = 1
    channel: int = 2
    message: int = 3

    def derived(self, index: int) -> 'Seeds':
        """Seeds for the index'th repetition or sweep point."""
        return Seeds(derive_seed(self.trace, index),
                     derive_seed(self.channel, index),
                     derive_seed(self.message, index))


def derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def sample_trace(dist: StateDistribution, n: int, seed: int) -> StateTrace:
    """Draws n i.i.d. states from dist."""
    if not isinstance(dist, StateDistribution):
        raise InvalidDistribution(f'Expected a StateDistribution, got {type(dist).__name__}')

    if n < 0:
        raise ValueError(f'Trace length must be non-negative, got {n}')

    rng = np.random.default_rng(seed)
    return StateTrace(rng.choice(len(dist.probs), size=n, p=dist.as_floats()))


def proportional_counts(dist: StateDistribution, n: int) -> dict[StateId, int]:
    """Per-state counts for a deterministic trace of length n that follows
    dist as closely as integers allow.

    Each state gets floor(n·λ_s) uses and the leftover uses go to the states
    with the largest fractional parts (ties broken by state order), skipping
    any use that would let the trace pack more than floor(n·λ) blocks. When
    every n·λ_s is an integer this is exact.
    """
    if n < 0:
        raise ValueError(f'Trace length must be non-negative, got {n}')

    exact = [Fraction(n) * dist[s] for s in StateId]
    counts = [int(v) for v in exact]  # floors; everything is non-negative
    leftover = n - sum(counts)
    by_remainder = sorted(StateId, key=lambda s: (-(exact[s] - counts[s]), s))
    cap = int(Fraction(n) * lambda_of(dist))

    def packed() -> int:
        return min(counts[s] // BLOCK_DEMAND[s] for s in StateId)

    while leftover > 0:
        placed = 0
        for s in by_remainder:
            if leftover == 0:
                break
            counts[s] += 1
            if packed() > cap:
                counts[s] -= 1
                continue
            leftover -= 1
            placed += 1

        if not placed:
            # Only reachable when the probabilities do not sum to exactly 1.
            counts[by_remainder[0]] += leftover
            leftover = 0

    return {s: counts[s] for s in StateId}


def proportional_trace(dist: StateDistribution, n: int) -> StateTrace:
    return make_proportional_trace(proportional_counts(dist, n))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Channel coefficients for every use of a trace.

    coeffs[k, j, i] is h_{j+1,i+1}(k), the gain from Tx i+1 to Rx j+1 in
    channel use k. It is nonzero exactly on the links present in the state
    of that use.
    """
    trace: StateTrace
    coeffs: IntArray
    spec: FieldSpec

    def __post_init__(self) -> None:
        if self.coeffs.shape != (len(self.trace), NUM_USERS, NUM_USERS):
            raise ValueError(f'Coefficient array of shape {self.coeffs.shape} does not fit a '
                             f'trace of length {len(self.trace)}')

    def __len__(self) -> int:
        return len(self.trace)

    def matrix(self, k: int) -> Matrix:
        return Matrix(self.coeffs[k], self.spec)

    def matches_topology(self) -> bool:
        """Whether the coefficients are nonzero exactly on the present
        links."""
        return bool(np.array_equal(self.coeffs != 0, link_mask()[self.trace.codes]))


def sample_channel(trace: StateTrace, spec: FieldSpec, seed: int) -> ChannelRealization:
    """Draws each present link's coefficient independently and uniformly from
    the p-1 nonzero field elements; absent links get zero."""
    rng = np.random.default_rng(seed)
    draws = rng.integers(1, spec.p, size=(len(trace), NUM_USERS, NUM_USERS), dtype=np.int64)
    coeffs = np.where(link_mask()[trace.codes], draws, 0).astype(np.int64)
    return ChannelRealization(trace, coeffs, spec)


def apply_channel(h_k: Matrix, x: Sequence[FieldElement]) -> list[FieldElement]:
    """The received symbols Y_j = Σ_i h[j][i]·x_i for one channel use."""
    if h_k.rows != NUM_USERS or h_k.cols != NUM_USERS:
        raise ValueError(f'Expected a {NUM_USERS}x{NUM_USERS} coefficient matrix')

    return h_k.apply(x)


def receive(coeffs: IntArray, x: npt.ArrayLike, spec: FieldSpec) -> IntArray:
    """Vectorised apply_channel over many uses: coeffs is (n, 3, 3), x is
    (n, 3) with silent transmitters as zero. Returns (n, 3)."""
    p = spec.p
    xx = np.asarray(x, dtype=np.int64) % p
    y = np.zeros(coeffs.shape[:2], dtype=np.int64)
    for i in range(NUM_USERS):
        y = (y + coeffs[:, :, i] % p * xx[:, None, i] % p) % p

    return y
