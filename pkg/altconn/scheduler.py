import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np
import numpy.typing as npt

from gfp import IntArray

from .states import NUM_STATES, StateDistribution, StateId, StateTrace

__all__ = ['BLOCK_DEMAND', 'FALLBACK_SYMBOLS', 'ROLE_STATES', 'S1_SYMBOLS', 'SILENCED',
           'FallbackUse', 'Role', 'S1Block', 'Schedule', 'build_schedule', 'count_symbols',
           'lambda_of', 'proportional_symbols', 'separate_schedule']

log = logging.getLogger(__name__)

S1_SYMBOLS = 19
FALLBACK_SYMBOLS = 2


@enum.unique
class Role(enum.IntEnum):
    """The nine slots of a joint-encoding block, in the order they are
    listed (and stored)."""
    A1 = 0
    B1 = 1
    C = 2
    D = 3
    E = 4
    F = 5
    G = 6
    A2 = 7
    B2 = 8

    def __str__(self) -> str:
        return self.name


ROLE_STATES: dict[Role, StateId] = {
    Role.A1: StateId.A,
    Role.B1: StateId.B,
    Role.C: StateId.C,
    Role.D: StateId.D,
    Role.E: StateId.E,
    Role.F: StateId.F,
    Role.G: StateId.G,
    Role.A2: StateId.A,
    Role.B2: StateId.B,
}

# How many uses of each state one block consumes.
BLOCK_DEMAND = {s: sum(1 for r in Role if ROLE_STATES[r] == s) for s in StateId}

# Transmitter kept silent when a use of each state is coded on its own. With
# it silent, the two remaining direct links see no interference. The A and B
# entries only matter for uses left over after block packing.
SILENCED: dict[StateId, int] = {
    StateId.A: 1,
    StateId.B: 3,
    StateId.C: 2,
    StateId.D: 1,
    StateId.E: 2,
    StateId.F: 3,
    StateId.G: 1,
}


def lambda_of(dist: StateDistribution) -> Fraction:
    """min{λ_A/2, λ_B/2, λ_C, λ_D, λ_E, λ_F, λ_G}: the share of channel uses
    that can be grouped into joint-encoding blocks, per block."""
    return min(dist[s] / BLOCK_DEMAND[s] for s in StateId)


@dataclass(frozen=True)
class S1Block:
    """The channel-use index filling each of the nine roles of a block."""
    slots: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.slots) != len(Role):
            raise ValueError(f'A block has {len(Role)} slots, got {len(self.slots)}')

        if len(set(self.slots)) != len(self.slots):
            raise ValueError(f'Block slots must be distinct channel uses: {self.slots}')

    def __getitem__(self, role: Role) -> int:
        return self.slots[role]

    def items(self) -> Iterator[tuple[Role, int]]:
        return zip(Role, self.slots)


@dataclass(frozen=True)
class FallbackUse:
    """A channel use coded on its own, with one transmitter silent."""
    index: int
    state: StateId
    silenced: int


class Schedule:
    """A partition of a trace's channel uses into joint-encoding blocks and
    fallback uses.

    The partition is held as arrays (block_slots is (B, 9), indexed by Role)
    for the vectorised codec; `blocks` and `fallback` give the same content as
    value objects.
    """
    n: int
    block_slots: IntArray
    fallback_index: IntArray
    fallback_state: npt.NDArray[np.int8]

    def __init__(self,
                 n: int,
                 block_slots: npt.ArrayLike,
                 fallback_index: npt.ArrayLike,
                 fallback_state: npt.ArrayLike) -> None:
        self.n = n
        self.block_slots = np.asarray(block_slots, dtype=np.int64).reshape(-1, len(Role))
        self.fallback_index = np.asarray(fallback_index, dtype=np.int64).reshape(-1)
        self.fallback_state = np.asarray(fallback_state, dtype=np.int8).reshape(-1)

        if self.fallback_index.shape != self.fallback_state.shape:
            raise ValueError('Fallback indices and states differ in length')

    @property
    def num_blocks(self) -> int:
        return int(self.block_slots.shape[0])

    @property
    def num_fallback(self) -> int:
        return int(self.fallback_index.size)

    @property
    def blocks(self) -> list[S1Block]:
        return [S1Block(tuple(int(i) for i in row)) for row in self.block_slots]

    @property
    def fallback(self) -> list[FallbackUse]:
        res: list[FallbackUse] = []
        for idx, code in zip(self.fallback_index, self.fallback_state):
            state = StateId(int(code))
            res.append(FallbackUse(int(idx), state, SILENCED[state]))

        return res

    def is_partition(self) -> bool:
        """Whether every channel use 0..n-1 appears exactly once."""
        used = np.concatenate([self.block_slots.reshape(-1), self.fallback_index])
        return used.size == self.n and np.array_equal(np.sort(used), np.arange(self.n))

    def state_split(self) -> dict[StateId, tuple[int, int]]:
        """For each state, how many of its uses went into blocks and how many
        were coded on their own."""
        in_blocks = {s: self.num_blocks * BLOCK_DEMAND[s] for s in StateId}
        in_fallback = np.bincount(self.fallback_state, minlength=NUM_STATES)
        return {s: (in_blocks[s], int(in_fallback[s])) for s in StateId}


def build_schedule(trace: StateTrace) -> Schedule:
    """Packs as many joint-encoding blocks as the trace allows, taking each
    state's uses in order of occurrence. Whatever is left over becomes a
    fallback use."""
    counts = trace.counts()
    num_blocks = min(counts[s] // BLOCK_DEMAND[s] for s in StateId)

    per_state = {s: trace.indices_of(s) for s in StateId}
    slots = np.empty((num_blocks, len(Role)), dtype=np.int64)
    taken = {s: 0 for s in StateId}
    for role in Role:
        s = ROLE_STATES[role]
        if BLOCK_DEMAND[s] == 1:
            slots[:, role] = per_state[s][:num_blocks]
        else:
            # Interleave so block b takes the (2b)th and (2b+1)th uses.
            first = 0 if taken[s] == 0 else 1
            slots[:, role] = per_state[s][first:2 * num_blocks:2]

        taken[s] += 1

    leftovers = [per_state[s][BLOCK_DEMAND[s] * num_blocks:] for s in StateId]
    fallback_index = np.sort(np.concatenate(leftovers))
    fallback_state = trace.codes[fallback_index]

    log.debug('Scheduled %d blocks and %d fallback uses over %d channel uses',
              num_blocks, fallback_index.size, len(trace))

    return Schedule(len(trace), slots, fallback_index, fallback_state)


def separate_schedule(trace: StateTrace) -> Schedule:
    """The baseline that codes every channel use on its own."""
    return Schedule(len(trace),
                    np.empty((0, len(Role)), dtype=np.int64),
                    np.arange(len(trace), dtype=np.int64),
                    trace.codes)


def count_symbols(schedule: Schedule) -> int:
    """Fresh symbols carried by a schedule: 19 per block, 2 per fallback
    use."""
    return S1_SYMBOLS * schedule.num_blocks + FALLBACK_SYMBOLS * schedule.num_fallback


def proportional_symbols(dist: StateDistribution, n: int) -> Fraction:
    """The symbol count 19nλ + 2n·Σ_s(λ_s - k_s·λ) for n channel uses, where
    k_s is the number of uses of state s in one block. Equal to n(2 + λ)."""
    lam = lambda_of(dist)
    leftover = sum((dist[s] - BLOCK_DEMAND[s] * lam for s in StateId), Fraction(0))
    return S1_SYMBOLS * n * lam + FALLBACK_SYMBOLS * n * leftover
