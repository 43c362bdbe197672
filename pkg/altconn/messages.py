from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from gfp import FieldElement, FieldSpec, IntArray

from .states import NUM_USERS

__all__ = ['MessageSource', 'SourceExhausted', 'SymbolId']


class SourceExhausted(IndexError):
    """Raised when a transmitter's message stream has run out of fresh
    symbols. A subclass of IndexError."""
    pass


@dataclass(frozen=True, order=True)
class SymbolId:
    """A fresh symbol: the seq'th symbol of Tx tx's message stream (tx is
    1-based, seq 0-based)."""
    tx: int
    seq: int

    def __str__(self) -> str:
        return f'x{self.tx}[{self.seq}]'


class MessageSource:
    """The serialized messages W_1..W_3: one ordered stream of field symbols
    per transmitter.

    Symbols are handed out in order by take(). Everything that reads values
    (encoders, round-trip checks) does so by SymbolId, so the order of
    consumption fixes which symbol goes where.
    """
    spec: FieldSpec
    _streams: list[IntArray]
    _cursors: list[int]

    def __init__(self, spec: FieldSpec, streams: Sequence[npt.ArrayLike]) -> None:
        if len(streams) != NUM_USERS:
            raise ValueError(f'Expected {NUM_USERS} message streams, got {len(streams)}')

        self.spec = spec
        self._streams = []
        for s in streams:
            arr = np.array(s, dtype=np.int64).reshape(-1)
            if arr.size and (arr.min() < 0 or arr.max() >= spec.p):
                raise ValueError(f'Message symbols must be reduced mod {spec.p}')
            arr.setflags(write=False)
            self._streams.append(arr)

        self._cursors = [0] * NUM_USERS

    @classmethod
    def uniform(cls, spec: FieldSpec, seed: int, lengths: Sequence[int]) -> 'MessageSource':
        """Streams of i.i.d. uniform field symbols."""
        rng = np.random.default_rng(seed)
        return cls(spec, [rng.integers(0, spec.p, size=n, dtype=np.int64) for n in lengths])

    @classmethod
    def counter(cls, spec: FieldSpec, lengths: Sequence[int]) -> 'MessageSource':
        """Deterministic streams: symbol seq of Tx tx is (seq + tx) mod p."""
        return cls(spec, [(np.arange(n, dtype=np.int64) + tx) % spec.p
                          for tx, n in enumerate(lengths, start=1)])

    def _check_tx(self, tx: int) -> None:
        if not 1 <= tx <= NUM_USERS:
            raise ValueError(f'No transmitter {tx}')

    def length(self, tx: int) -> int:
        self._check_tx(tx)
        return int(self._streams[tx - 1].size)

    def remaining(self, tx: int) -> int:
        return self.length(tx) - self._cursors[tx - 1]

    def consumed(self, tx: int) -> int:
        self._check_tx(tx)
        return self._cursors[tx - 1]

    def take(self, tx: int, count: int = 1) -> list[SymbolId]:
        """Hands out the next count fresh symbols of Tx tx."""
        if count > self.remaining(tx):
            raise SourceExhausted(f'Tx {tx} needs {count} fresh symbols but only '
                                  f'{self.remaining(tx)} remain')

        start = self._cursors[tx - 1]
        self._cursors[tx - 1] += count
        return [SymbolId(tx, seq) for seq in range(start, start + count)]

    def take_range(self, tx: int, count: int) -> int:
        """Like take(), but returns only the sequence number of the first
        symbol handed out. For callers that work on arrays of symbols."""
        if count > self.remaining(tx):
            raise SourceExhausted(f'Tx {tx} needs {count} fresh symbols but only '
                                  f'{self.remaining(tx)} remain')

        start = self._cursors[tx - 1]
        self._cursors[tx - 1] += count
        return start

    def value(self, sym: SymbolId) -> FieldElement:
        self._check_tx(sym.tx)
        return FieldElement(int(self._streams[sym.tx - 1][sym.seq]), self.spec)

    def values(self, tx: int) -> IntArray:
        """Tx tx's whole stream (read-only)."""
        self._check_tx(tx)
        return self._streams[tx - 1]
