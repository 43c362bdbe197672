import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from gfp import (FieldElement, FieldSpec, IntArray, SingularMatrix, inverse_array,
                 invertible_batch, solve_batch)

from .channel import ChannelRealization, receive
from .messages import MessageSource, SourceExhausted, SymbolId
from .scheduler import ROLE_STATES, SILENCED, FallbackUse, Role, S1Block, Schedule
from .states import NUM_STATES, NUM_USERS, StateId, link_mask

__all__ = ['CLEAN_RECEIVERS', 'S1_FRESH', 'S1_TABLE', 'S1_UNKNOWNS', 'SUCCESSIVE_ORDER',
           'Assignments', 'DecodeResult', 'FallbackAssignment', 'Observation', 'S1Assignment',
           'SingularSystem', 'decode', 'encode', 'exhaustive_decodability', 'fallback_decode',
           'fallback_encode', 'random_decodability', 's1_decode', 's1_encode',
           's1_participating_links', 's1_system', 'successive_decode_order', 'symbol_demand',
           'transmit']

log = logging.getLogger(__name__)


class SingularSystem(SingularMatrix):
    """Raised when a receiver's block system cannot be solved. A subclass of
    SingularMatrix."""
    pass


"""
The joint-encoding block. Symbols are named the way the scheme is usually
drawn: the letter is the role where a symbol is first sent and the digit is
1, 2 or 3 for Tx 1, 2 or 3 (4, 5, 6 for a second symbol of the same letter).
Every transmitter only ever repeats its own symbols.

        Tx1  Tx2  Tx3
    A1  a1   a2   a3
    B1  b1   b2   b3
    C   c1   c2   c3
    D   a4   c2   d3
    E   e1   c2   b3
    F   a1   f2   b3
    G   a4   g2   b6
    A2  a4   a5   a6
    B2  b4   b5   b6
"""

S1_TABLE: dict[Role, tuple[str, str, str]] = {
    Role.A1: ('a1', 'a2', 'a3'),
    Role.B1: ('b1', 'b2', 'b3'),
    Role.C: ('c1', 'c2', 'c3'),
    Role.D: ('a4', 'c2', 'd3'),
    Role.E: ('e1', 'c2', 'b3'),
    Role.F: ('a1', 'f2', 'b3'),
    Role.G: ('a4', 'g2', 'b6'),
    Role.A2: ('a4', 'a5', 'a6'),
    Role.B2: ('b4', 'b5', 'b6'),
}

# Fresh symbols of each transmitter, in the order they are drawn from its
# message stream.
S1_FRESH: dict[int, tuple[str, ...]] = {
    1: ('a1', 'b1', 'c1', 'a4', 'e1', 'b4'),
    2: ('a2', 'b2', 'c2', 'f2', 'g2', 'a5', 'b5'),
    3: ('a3', 'b3', 'c3', 'd3', 'a6', 'b6'),
}

# The nine unknowns of each receiver's block system: its own transmitter's
# symbols first, then the interfering symbols it resolves along the way.
S1_UNKNOWNS: dict[int, tuple[str, ...]] = {
    1: S1_FRESH[1] + ('b3', 'c2', 'b6'),
    2: S1_FRESH[2] + ('a4', 'b3'),
    3: S1_FRESH[3] + ('a1', 'c2', 'a4'),
}

# Each receiver can also peel its system one equation at a time, in this
# order: (symbol, role of the equation that yields it).
SUCCESSIVE_ORDER: dict[int, tuple[tuple[str, Role], ...]] = {
    1: (('a1', Role.A1), ('a4', Role.A2), ('b3', Role.F), ('b1', Role.B1), ('c2', Role.D),
        ('e1', Role.E), ('b6', Role.G), ('b4', Role.B2), ('c1', Role.C)),
    2: (('c2', Role.C), ('a4', Role.D), ('b3', Role.E), ('a2', Role.A1), ('b2', Role.B1),
        ('f2', Role.F), ('g2', Role.G), ('a5', Role.A2), ('b5', Role.B2)),
    3: (('b3', Role.B1), ('b6', Role.B2), ('c2', Role.E), ('a1', Role.F), ('a4', Role.G),
        ('a3', Role.A1), ('c3', Role.C), ('d3', Role.D), ('a6', Role.A2)),
}


def _label_owner(label: str) -> int:
    return (int(label[1:]) - 1) % NUM_USERS + 1


def _first_role(label: str) -> Role:
    tx = _label_owner(label)
    return next(r for r in Role if S1_TABLE[r][tx - 1] == label)


def _build_system_entries() -> dict[int, tuple[tuple[Role, int, int], ...]]:
    """For each receiver, (role, tx, column) for every link into it that is
    present in the role's state: the coefficient h[j][tx](role) multiplies
    unknown `column` in equation `role`."""
    mask = link_mask()
    res: dict[int, tuple[tuple[Role, int, int], ...]] = {}
    for j in range(1, NUM_USERS + 1):
        unknowns = S1_UNKNOWNS[j]
        entries: list[tuple[Role, int, int]] = []
        for role in Role:
            for tx in range(1, NUM_USERS + 1):
                if not mask[ROLE_STATES[role], j - 1, tx - 1]:
                    continue

                label = S1_TABLE[role][tx - 1]
                if label not in unknowns:
                    raise AssertionError(f'Rx {j} hears {label} in role {role} but does not '
                                         'solve for it')
                entries.append((role, tx, unknowns.index(label)))

        res[j] = tuple(entries)

    return res


def _check_tables() -> None:
    for tx, fresh in S1_FRESH.items():
        sent = {S1_TABLE[r][tx - 1] for r in Role}
        if sent != set(fresh) or any(_label_owner(label) != tx for label in fresh):
            raise AssertionError(f'Block table and fresh symbols disagree for Tx {tx}')

    for j, unknowns in S1_UNKNOWNS.items():
        if len(set(unknowns)) != len(Role):
            raise AssertionError(f'Rx {j} needs exactly {len(Role)} distinct unknowns')


_check_tables()
_SYSTEM_ENTRIES = _build_system_entries()

_SILENCED_BY_CODE = np.array([SILENCED[s] for s in StateId], dtype=np.int64)


def _build_clean_receivers() -> npt.NDArray[np.bool_]:
    """clean[s, j] is True iff, in a fallback use of state s, receiver j+1's
    own transmitter is active and every transmitter it hears besides that
    one is the silenced one."""
    mask = link_mask()
    clean = np.zeros((NUM_STATES, NUM_USERS), dtype=np.bool_)
    for s in StateId:
        silent = SILENCED[s]
        for j in range(1, NUM_USERS + 1):
            if j == silent:
                continue
            interferers = [i for i in range(1, NUM_USERS + 1)
                           if i != j and mask[s, j - 1, i - 1] and i != silent]
            clean[s, j - 1] = not interferers

    clean.setflags(write=False)
    return clean


CLEAN_RECEIVERS = _build_clean_receivers()


@dataclass(frozen=True)
class S1Assignment:
    """What each transmitter sends in each role of one block."""
    block: S1Block
    fresh: dict[str, SymbolId]

    def symbol(self, role: Role, tx: int) -> SymbolId:
        return self.fresh[S1_TABLE[role][tx - 1]]

    def rows(self) -> Iterator[tuple[Role, int, tuple[SymbolId, ...]]]:
        """(role, channel-use index, per-Tx symbols) for each role."""
        for role, idx in self.block.items():
            yield role, idx, tuple(self.symbol(role, tx) for tx in range(1, NUM_USERS + 1))


@dataclass(frozen=True)
class FallbackAssignment:
    """What each transmitter sends in a fallback use (None when silent)."""
    use: FallbackUse
    symbols: tuple[Optional[SymbolId], ...]


def _require(src: MessageSource, needed: Sequence[int]) -> None:
    for tx, count in enumerate(needed, start=1):
        if count > src.remaining(tx):
            raise SourceExhausted(f'Tx {tx} needs {count} fresh symbols but only '
                                  f'{src.remaining(tx)} remain')


def s1_encode(block: S1Block, src: MessageSource) -> S1Assignment:
    """Draws the block's 19 fresh symbols (6, 7 and 6 for Tx 1, 2 and 3) and
    lays them out over the nine roles."""
    _require(src, [len(S1_FRESH[tx]) for tx in range(1, NUM_USERS + 1)])

    fresh: dict[str, SymbolId] = {}
    for tx in range(1, NUM_USERS + 1):
        labels = S1_FRESH[tx]
        fresh.update(zip(labels, src.take(tx, len(labels))))

    return S1Assignment(block, fresh)


def fallback_encode(use: FallbackUse, src: MessageSource) -> FallbackAssignment:
    """One fresh symbol from each of the two transmitters left active."""
    active = [tx for tx in range(1, NUM_USERS + 1) if tx != use.silenced]
    _require(src, [int(tx in active) for tx in range(1, NUM_USERS + 1)])

    symbols: list[Optional[SymbolId]] = []
    for tx in range(1, NUM_USERS + 1):
        symbols.append(src.take(tx)[0] if tx in active else None)

    return FallbackAssignment(use, tuple(symbols))


def symbol_demand(schedule: Schedule) -> tuple[int, ...]:
    """Fresh symbols each transmitter needs for the whole schedule."""
    silenced = _SILENCED_BY_CODE[schedule.fallback_state]
    return tuple(len(S1_FRESH[tx]) * schedule.num_blocks + int(np.sum(silenced != tx))
                 for tx in range(1, NUM_USERS + 1))


class Assignments:
    """The symbol sent by every transmitter in every channel use of a
    schedule: seq[k, i] is the message-stream position of Tx i+1's symbol in
    use k, or -1 if it is silent."""
    seq: IntArray
    src: MessageSource

    def __init__(self, seq: IntArray, src: MessageSource) -> None:
        self.seq = seq
        self.src = src

    @classmethod
    def from_parts(cls,
                   n: int,
                   src: MessageSource,
                   s1: Sequence[S1Assignment],
                   fallback: Sequence[FallbackAssignment]) -> 'Assignments':
        seq = np.full((n, NUM_USERS), -1, dtype=np.int64)
        for a in s1:
            for _, idx, symbols in a.rows():
                seq[idx] = [sym.seq for sym in symbols]

        for f in fallback:
            seq[f.use.index] = [-1 if sym is None else sym.seq for sym in f.symbols]

        return cls(seq, src)

    def symbol(self, k: int, tx: int) -> Optional[SymbolId]:
        seq = int(self.seq[k, tx - 1])
        return None if seq < 0 else SymbolId(tx, seq)

    def values(self) -> IntArray:
        """The transmitted field values, (n, 3), zero where silent."""
        x = np.zeros(self.seq.shape, dtype=np.int64)
        for tx in range(1, NUM_USERS + 1):
            seq = self.seq[:, tx - 1]
            sent = seq >= 0
            x[sent, tx - 1] = self.src.values(tx)[seq[sent]]

        return x


def encode(schedule: Schedule, src: MessageSource) -> Assignments:
    """Encodes a whole schedule. Equivalent to s1_encode on every block in
    order followed by fallback_encode on every fallback use in order, but
    done on arrays."""
    _require(src, symbol_demand(schedule))

    seq = np.full((schedule.n, NUM_USERS), -1, dtype=np.int64)
    num_blocks = schedule.num_blocks
    for tx in range(1, NUM_USERS + 1):
        fresh = S1_FRESH[tx]
        start = src.take_range(tx, len(fresh) * num_blocks)
        base = start + len(fresh) * np.arange(num_blocks, dtype=np.int64)
        for role in Role:
            local = fresh.index(S1_TABLE[role][tx - 1])
            seq[schedule.block_slots[:, role], tx - 1] = base + local

    silenced = _SILENCED_BY_CODE[schedule.fallback_state]
    for tx in range(1, NUM_USERS + 1):
        active = silenced != tx
        count = int(np.sum(active))
        start = src.take_range(tx, count)
        seq[schedule.fallback_index[active], tx - 1] = start + np.arange(count, dtype=np.int64)

    return Assignments(seq, src)


@dataclass(frozen=True, eq=False)
class Observation:
    """Everything receiver rx sees: y[k] is its received symbol in use k and
    h[k] its row of channel coefficients (which it knows)."""
    rx: int
    y: IntArray
    h: IntArray
    spec: FieldSpec

    def __len__(self) -> int:
        return int(self.y.size)


def transmit(schedule: Schedule,
             assignments: Assignments,
             channel: ChannelRealization) -> tuple[Observation, ...]:
    """Sends every use through the channel and collects what each receiver
    observes."""
    if assignments.seq.shape != (schedule.n, NUM_USERS) or len(channel) != schedule.n:
        raise ValueError('Schedule, assignments and channel cover different numbers of uses')

    block_uses = schedule.block_slots.reshape(-1)
    if np.any(assignments.seq[block_uses] < 0):
        raise ValueError('A joint-encoding block has an unassigned transmitter')

    silenced = _SILENCED_BY_CODE[schedule.fallback_state]
    for tx in range(1, NUM_USERS + 1):
        active = schedule.fallback_index[silenced != tx]
        if np.any(assignments.seq[active, tx - 1] < 0):
            raise ValueError(f'A fallback use has no symbol for active Tx {tx}')

    y = receive(channel.coeffs, assignments.values(), channel.spec)
    return tuple(Observation(j, y[:, j - 1].copy(), channel.coeffs[:, j - 1, :].copy(),
                             channel.spec)
                 for j in range(1, NUM_USERS + 1))


def s1_participating_links(j: int) -> list[tuple[Role, int]]:
    """The (role, tx) coefficients that enter receiver j's block system."""
    return [(role, tx) for role, tx, _ in _SYSTEM_ENTRIES[j]]


def successive_decode_order(j: int) -> tuple[tuple[str, Role], ...]:
    """The order in which receiver j can peel its block system one equation at
    a time: (symbol, role whose equation yields it once the earlier symbols
    are known)."""
    return SUCCESSIVE_ORDER[j]


def s1_system(j: int, h_rows: npt.ArrayLike) -> IntArray:
    """Receiver j's block system matrix.

    h_rows[..., role, i] is h[j][i+1] in the block's use for that role; the
    result is the (..., 9, 9) matrix over S1_UNKNOWNS[j] whose rows are the
    nine received equations.
    """
    hh = np.asarray(h_rows, dtype=np.int64)
    if hh.shape[-2:] != (len(Role), NUM_USERS):
        raise ValueError(f'Expected (..., {len(Role)}, {NUM_USERS}) coefficients, got {hh.shape}')

    a = np.zeros(hh.shape[:-2] + (len(Role), len(Role)), dtype=np.int64)
    for role, tx, col in _SYSTEM_ENTRIES[j]:
        a[..., role, col] += hh[..., role, tx - 1]

    return a


def s1_decode(j: int,
              y: Sequence[Union[int, FieldElement]],
              h_rows: npt.ArrayLike,
              spec: FieldSpec) -> dict[str, FieldElement]:
    """Solves receiver j's nine block equations for its nine unknowns.

    y[role] is what receiver j got in the use filling that role and
    h_rows[role] its coefficient row there. Returns the recovered value of
    each unknown, keyed by symbol name. Raises SingularSystem if the system
    cannot be solved, which never happens for nonzero coefficients on the
    present links.
    """
    yy = np.array([int(v) for v in y], dtype=np.int64)
    try:
        x = solve_batch(s1_system(j, h_rows), yy, spec)
    except SingularMatrix as exc:
        raise SingularSystem(f'Rx {j} block system is singular: {exc}') from exc

    return {label: FieldElement(int(v), spec) for label, v in zip(S1_UNKNOWNS[j], x)}


def fallback_decode(j: int,
                    use: FallbackUse,
                    y: Union[int, FieldElement],
                    h_row: Sequence[Union[int, FieldElement]],
                    spec: FieldSpec) -> Optional[FieldElement]:
    """Receiver j's symbol from a fallback use, or None if j is idle there
    (its transmitter is silent, or it still hears interference)."""
    if not CLEAN_RECEIVERS[use.state, j - 1]:
        return None

    return FieldElement(int(y) % spec.p, spec) / FieldElement(int(h_row[j - 1]) % spec.p, spec)


def _all_nonzero_assignments(k: int, p: int) -> IntArray:
    return np.array(list(itertools.product(range(1, p), repeat=k)), dtype=np.int64).reshape(-1, k)


def _coefficients_for(j: int, values: IntArray) -> IntArray:
    """Block coefficient rows for receiver j, with values[:, m] on the m'th
    participating link and zero elsewhere."""
    h = np.zeros((values.shape[0], len(Role), NUM_USERS), dtype=np.int64)
    for m, (role, tx) in enumerate(s1_participating_links(j)):
        h[:, role, tx - 1] = values[:, m]

    return h


def exhaustive_decodability(j: int, spec: FieldSpec, limit: int = 2**20) -> int:
    """Tries receiver j's block system under every assignment of nonzero
    values to its participating coefficients, and returns how many of them
    were singular.

    Raises ValueError if there are more than limit assignments.
    """
    k = len(s1_participating_links(j))
    total = (spec.p - 1) ** k
    if total > limit:
        raise ValueError(f'{total} coefficient assignments for Rx {j} exceed the limit of '
                         f'{limit}')

    values = _all_nonzero_assignments(k, spec.p)
    ok = invertible_batch(s1_system(j, _coefficients_for(j, values)), spec)
    log.debug('Rx %d: %d of %d assignments invertible', j, int(ok.sum()), total)
    return int(np.sum(~ok))


def random_decodability(j: int, spec: FieldSpec, draws: int, seed: int) -> int:
    """Like exhaustive_decodability, but over draws random nonzero
    assignments."""
    rng = np.random.default_rng(seed)
    k = len(s1_participating_links(j))
    values = rng.integers(1, spec.p, size=(draws, k), dtype=np.int64)
    ok = invertible_batch(s1_system(j, _coefficients_for(j, values)), spec)
    return int(np.sum(~ok))


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """What each receiver recovered of its own transmitter's stream.

    recovered[j-1][seq] is Rx j's estimate of Tx j's symbol seq, or -1 if it
    never recovered it. verdicts[j-1] is True iff Rx j recovered its whole
    stream correctly, and foreign_ok[j-1] iff every interfering symbol it
    resolved along the way matched what was sent.
    """
    recovered: tuple[IntArray, ...]
    verdicts: tuple[bool, ...]
    foreign_ok: tuple[bool, ...]
    spec: FieldSpec

    @property
    def success(self) -> bool:
        return all(self.verdicts) and all(self.foreign_ok)

    @property
    def decoded_count(self) -> int:
        return sum(int(np.sum(r >= 0)) for r in self.recovered)

    def symbols(self, j: int) -> dict[SymbolId, FieldElement]:
        rec = self.recovered[j - 1]
        return {SymbolId(j, int(seq)): FieldElement(int(rec[seq]), self.spec)
                for seq in np.flatnonzero(rec >= 0)}


def decode(schedule: Schedule,
           assignments: Assignments,
           observations: Sequence[Observation]) -> DecodeResult:
    """Runs every receiver's decoder over the whole schedule and checks the
    result against what was sent.

    The assignments tell each receiver which stream position each equation
    refers to (this is fixed by the schedule, which receivers know); their
    values are only read for the final comparison.
    """
    src = assignments.src
    spec = src.spec
    slots = schedule.block_slots
    silenced = _SILENCED_BY_CODE[schedule.fallback_state]

    recovered: list[IntArray] = []
    verdicts: list[bool] = []
    foreign_ok: list[bool] = []
    for obs in observations:
        j = obs.rx
        rec = np.full(src.consumed(j), -1, dtype=np.int64)

        foreign_matches = True
        if schedule.num_blocks:
            try:
                x = solve_batch(s1_system(j, obs.h[slots]), obs.y[slots], spec)
            except SingularMatrix as exc:
                raise SingularSystem(f'Rx {j} block system is singular: {exc}') from exc

            for col, label in enumerate(S1_UNKNOWNS[j]):
                owner = _label_owner(label)
                seq = assignments.seq[slots[:, _first_role(label)], owner - 1]
                if owner == j:
                    rec[seq] = x[:, col]
                elif not np.array_equal(x[:, col], src.values(owner)[seq]):
                    foreign_matches = False

        clean = CLEAN_RECEIVERS[schedule.fallback_state, j - 1] & (silenced != j)
        uses = schedule.fallback_index[clean]
        if uses.size:
            seq = assignments.seq[uses, j - 1]
            rec[seq] = obs.y[uses] * inverse_array(obs.h[uses, j - 1], spec.p) % spec.p

        ok = bool(np.all(rec >= 0) and np.array_equal(rec, src.values(j)[:rec.size]))
        log.debug('Rx %d: recovered %d of %d symbols, %s', j, int(np.sum(rec >= 0)), rec.size,
                  'ok' if ok else 'MISMATCH')

        recovered.append(rec)
        verdicts.append(ok)
        foreign_ok.append(foreign_matches)

    return DecodeResult(tuple(recovered), tuple(verdicts), tuple(foreign_ok), spec)
