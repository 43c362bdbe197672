import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union, overload

import numpy as np
import numpy.typing as npt

__all__ = ['DIRECT_LINKS', 'NUM_STATES', 'NUM_USERS', 'InvalidDistribution', 'Link', 'LinkSet',
           'ProbabilityLike', 'StateDistribution', 'StateId', 'StateTrace', 'link_mask',
           'make_proportional_trace', 'state_links']

NUM_USERS = 3
NUM_STATES = 7

ProbabilityLike = Union[Fraction, int, float, str]

"""
The letters A-G are local names. The published drawing of these seven
states labels them with typeset symbols that don't survive as plain text, so
each letter here is pinned by its set of cross links instead:

    A: 1→3             E: 2→3, 2→1, 3→2
    B: 3→1             F: 1→3, 3→1, 3→2
    C: 2→3             G: 1→3, 3→1, 1→2
    D: 1→3, 2→1, 1→2

The direct links 1→1, 2→2 and 3→3 are present in every state.
"""


class InvalidDistribution(ValueError):
    """Raised for a malformed state distribution. A subclass of
    ValueError."""
    pass


@enum.unique
class StateId(enum.IntEnum):
    A = 0
    B = 1
    C = 2
    D = 3
    E = 4
    F = 5
    G = 6

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Link:
    """A link from transmitter tx to receiver rx (both 1-based)."""
    tx: int
    rx: int

    def __str__(self) -> str:
        return f'{self.tx}→{self.rx}'


LinkSet = frozenset[Link]

DIRECT_LINKS: LinkSet = frozenset(Link(i, i) for i in range(1, NUM_USERS + 1))

_CROSS_LINKS: dict[StateId, tuple[tuple[int, int], ...]] = {
    StateId.A: ((1, 3),),
    StateId.B: ((3, 1),),
    StateId.C: ((2, 3),),
    StateId.D: ((1, 3), (2, 1), (1, 2)),
    StateId.E: ((2, 3), (2, 1), (3, 2)),
    StateId.F: ((1, 3), (3, 1), (3, 2)),
    StateId.G: ((1, 3), (3, 1), (1, 2)),
}


def state_links(s: StateId) -> LinkSet:
    """The links present in state s: the three direct links plus the state's
    cross links."""
    return DIRECT_LINKS | frozenset(Link(tx, rx) for tx, rx in _CROSS_LINKS[s])


def _build_link_mask() -> npt.NDArray[np.bool_]:
    mask = np.zeros((NUM_STATES, NUM_USERS, NUM_USERS), dtype=np.bool_)
    for s in StateId:
        for link in state_links(s):
            mask[s, link.rx - 1, link.tx - 1] = True

    mask.setflags(write=False)
    return mask


_LINK_MASK = _build_link_mask()


def link_mask() -> npt.NDArray[np.bool_]:
    """A read-only (state, rx, tx) boolean array: mask[s, j, i] is True iff
    the link from Tx i+1 to Rx j+1 is present in state s."""
    return _LINK_MASK


def _to_fraction(v: ProbabilityLike) -> Fraction:
    try:
        return Fraction(v.strip()) if isinstance(v, str) else Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidDistribution(f'Cannot read {v!r} as a probability: {exc}')


@dataclass(frozen=True)
class StateDistribution:
    """Probabilities of the seven states, in StateId order.

    Probabilities are kept as exact fractions. Values read from floats are
    converted exactly, so they may have large denominators.
    """
    probs: tuple[Fraction, ...]

    SUM_TOLERANCE = Fraction(1, 10**9)

    def __post_init__(self) -> None:
        if len(self.probs) != NUM_STATES:
            raise InvalidDistribution(f'Expected {NUM_STATES} probabilities, got '
                                      f'{len(self.probs)}')

        for s, v in zip(StateId, self.probs):
            if not 0 <= v <= 1:
                raise InvalidDistribution(f'Probability of state {s} is {v}, outside [0, 1]')

        total = sum(self.probs, Fraction(0))
        if abs(total - 1) > self.SUM_TOLERANCE:
            raise InvalidDistribution(f'Probabilities sum to {float(total)!r}, not 1')

    @classmethod
    def from_values(cls, values: Iterable[ProbabilityLike]) -> 'StateDistribution':
        return cls(tuple(_to_fraction(v) for v in values))

    @classmethod
    def parse(cls, s: str) -> 'StateDistribution':
        """Parses a comma-separated list like '2/9,2/9,1/9,1/9,1/9,1/9,1/9'.
        Decimals are accepted as well."""
        return cls.from_values(part for part in s.split(','))

    @classmethod
    def uniform(cls) -> 'StateDistribution':
        return cls((Fraction(1, NUM_STATES),) * NUM_STATES)

    @classmethod
    def point_mass(cls, state: StateId) -> 'StateDistribution':
        return cls(tuple(Fraction(int(s == state)) for s in StateId))

    def __getitem__(self, s: StateId) -> Fraction:
        return self.probs[s]

    def as_floats(self) -> npt.NDArray[np.float64]:
        """The probabilities as floats, renormalized to sum to exactly 1 for
        numpy's samplers."""
        arr = np.array([float(v) for v in self.probs], dtype=np.float64)
        return arr / arr.sum()

    def with_component(self, state: StateId, value: ProbabilityLike) -> 'StateDistribution':
        """Returns a distribution with the given state's probability set to
        value and the other six scaled proportionally to fill the rest.

        If the other six are all zero, the remainder is split evenly among
        them.
        """
        v = _to_fraction(value)
        if not 0 <= v <= 1:
            raise InvalidDistribution(f'Probability of state {state} is {v}, outside [0, 1]')

        rest = sum((p for s, p in zip(StateId, self.probs) if s != state), Fraction(0))
        probs: list[Fraction] = []
        for s, p in zip(StateId, self.probs):
            if s == state:
                probs.append(v)
            elif rest == 0:
                probs.append((1 - v) / (NUM_STATES - 1))
            else:
                probs.append(p * (1 - v) / rest)

        return StateDistribution(tuple(probs))

    def to_strings(self) -> list[str]:
        return [str(v) for v in self.probs]

    def __str__(self) -> str:
        return ','.join(self.to_strings())


class StateTrace(Sequence[StateId]):
    """The connectivity state of each channel use, in order.

    This class is a sequence of StateId, and is thus iterable and indexable.
    Its values are backed by an int8 numpy array, exposed read-only as
    `codes` for vectorised consumers.
    """
    _codes: npt.NDArray[np.int8]

    def __init__(self, codes: npt.ArrayLike) -> None:
        arr = np.array(codes, dtype=np.int8).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() >= NUM_STATES):
            raise ValueError('State codes must be in the range 0-6')

        arr.setflags(write=False)
        self._codes = arr

    @classmethod
    def from_states(cls, states: Iterable[StateId]) -> 'StateTrace':
        return cls([int(s) for s in states])

    @property
    def codes(self) -> npt.NDArray[np.int8]:
        return self._codes

    def __iter__(self) -> Iterator[StateId]:
        return (StateId(int(c)) for c in self._codes)

    def __len__(self) -> int:
        return int(self._codes.size)

    @overload
    def __getitem__(self, idx: int) -> StateId:
        ...

    @overload
    def __getitem__(self, idx: slice) -> 'StateTrace':
        ...

    def __getitem__(self, idx: Union[int, slice]) -> Union[StateId, 'StateTrace']:
        if isinstance(idx, slice):
            return StateTrace(self._codes[idx])

        return StateId(int(self._codes[idx]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateTrace):
            return NotImplemented

        return np.array_equal(self._codes, other._codes)

    def __hash__(self) -> int:
        return hash(self._codes.tobytes())

    def __repr__(self) -> str:
        shown = ''.join(str(s) for s in self[:32])
        more = '...' if len(self) > 32 else ''
        return f'StateTrace({shown}{more}, n={len(self)})'

    def counts(self) -> dict[StateId, int]:
        """The number of channel uses in each state."""
        tally = np.bincount(self._codes, minlength=NUM_STATES)
        return {s: int(tally[s]) for s in StateId}

    def indices_of(self, state: StateId) -> npt.NDArray[np.int64]:
        """The channel-use indices in the given state, in increasing order."""
        return np.flatnonzero(self._codes == state)

    def permuted(self, seed: int) -> 'StateTrace':
        rng = np.random.default_rng(seed)
        return StateTrace(rng.permutation(self._codes.copy()))


def make_proportional_trace(counts: Mapping[StateId, int]) -> StateTrace:
    """Builds a trace with exactly counts[s] uses of each state s, ordered by
    state and then by repetition (AA..BB..CC..)."""
    for s, c in counts.items():
        if c < 0:
            raise ValueError(f'Negative count {c} for state {s}')

    return StateTrace(np.repeat(np.arange(NUM_STATES, dtype=np.int8),
                                [counts.get(s, 0) for s in StateId]))
