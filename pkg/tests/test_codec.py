import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altconn.channel import ChannelRealization, sample_channel, sample_trace
from altconn.codec import (CLEAN_RECEIVERS, S1_FRESH, S1_TABLE, S1_UNKNOWNS, Assignments,
                           Observation, S1Assignment, SingularSystem, decode, encode,
                           exhaustive_decodability, fallback_decode, fallback_encode,
                           random_decodability, s1_decode, s1_encode, s1_participating_links,
                           s1_system, successive_decode_order, symbol_demand, transmit)
from altconn.messages import MessageSource, SourceExhausted, SymbolId
from altconn.scheduler import (ROLE_STATES, SILENCED, FallbackUse, Role, S1Block, Schedule,
                               build_schedule, count_symbols)
from altconn.states import (StateDistribution, StateId, StateTrace, link_mask,
                            make_proportional_trace)
from gfp import FieldSpec, IntArray

from .oracles import successive_decode

ONE_BLOCK = {StateId.A: 2, StateId.B: 2, StateId.C: 1, StateId.D: 1, StateId.E: 1, StateId.F: 1,
             StateId.G: 1}


def unit_channel(trace: StateTrace, spec: FieldSpec) -> ChannelRealization:
    return ChannelRealization(trace, link_mask()[trace.codes].astype(np.int64), spec)


def one_block(spec: FieldSpec, seed: int) -> tuple[S1Assignment, MessageSource,
                                                   tuple[Observation, ...]]:
    trace = make_proportional_trace(ONE_BLOCK)
    schedule = build_schedule(trace)
    src = MessageSource.uniform(spec, seed, symbol_demand(schedule))
    assignment = s1_encode(schedule.blocks[0], src)
    assignments = Assignments.from_parts(len(trace), src, [assignment], [])
    channel = sample_channel(trace, spec, seed + 1)
    return assignment, src, transmit(schedule, assignments, channel)


def block_inputs(obs: Observation,
                 block: S1Block) -> tuple[dict[Role, int], dict[Role, list[int]]]:
    y = {role: int(obs.y[idx]) for role, idx in block.items()}
    h = {role: [int(v) for v in obs.h[idx]] for role, idx in block.items()}
    return y, h


def test_table_is_consistent() -> None:
    assert sum(len(v) for v in S1_FRESH.values()) == 19
    assert [len(S1_FRESH[tx]) for tx in (1, 2, 3)] == [6, 7, 6]
    for tx in (1, 2, 3):
        assert {S1_TABLE[r][tx - 1] for r in Role} == set(S1_FRESH[tx])


def test_s1_encode_draws_in_canonical_order() -> None:
    spec = FieldSpec.checked(5)
    src = MessageSource.counter(spec, [12, 14, 12])
    a = s1_encode(S1Block(tuple(range(9))), src)

    assert [a.fresh[label] for label in ('a1', 'b1', 'c1', 'a4', 'e1', 'b4')] == \
        [SymbolId(1, seq) for seq in range(6)]
    assert [a.fresh[label] for label in ('a2', 'b2', 'c2', 'f2', 'g2', 'a5', 'b5')] == \
        [SymbolId(2, seq) for seq in range(7)]
    assert [a.fresh[label] for label in ('a3', 'b3', 'c3', 'd3', 'a6', 'b6')] == \
        [SymbolId(3, seq) for seq in range(6)]


def test_s1_encode_repeats_and_freshness() -> None:
    spec = FieldSpec.checked(5)
    src = MessageSource.counter(spec, [12, 14, 12])
    first = s1_encode(S1Block(tuple(range(9))), src)
    second = s1_encode(S1Block(tuple(range(9, 18))), src)

    ids = {first.symbol(role, tx) for role in Role for tx in (1, 2, 3)}
    assert len(ids) == 19
    assert [sum(1 for s in ids if s.tx == tx) for tx in (1, 2, 3)] == [6, 7, 6]

    # Slot F repeats a1 from A1 and b3 from B1.
    assert first.symbol(Role.F, 1) == first.symbol(Role.A1, 1)
    assert first.symbol(Role.F, 3) == first.symbol(Role.B1, 3)
    assert first.symbol(Role.D, 2) == first.symbol(Role.E, 2) == first.symbol(Role.C, 2)
    assert first.symbol(Role.G, 1) == first.symbol(Role.A2, 1) == first.symbol(Role.D, 1)

    second_ids = {second.symbol(role, tx) for role in Role for tx in (1, 2, 3)}
    assert not ids & second_ids

    with pytest.raises(SourceExhausted):
        s1_encode(S1Block(tuple(range(18, 27))), src)


def test_s1_encode_takes_nothing_when_short() -> None:
    src = MessageSource.counter(FieldSpec.checked(5), [6, 6, 6])
    with pytest.raises(SourceExhausted):
        s1_encode(S1Block(tuple(range(9))), src)

    assert [src.consumed(tx) for tx in (1, 2, 3)] == [0, 0, 0]


@pytest.mark.parametrize('state, active', [
    (StateId.C, (1, 3)),
    (StateId.F, (1, 2)),
    (StateId.A, (2, 3)),
    (StateId.B, (1, 2)),
    (StateId.D, (2, 3)),
    (StateId.E, (1, 3)),
    (StateId.G, (2, 3)),
])
def test_fallback_encode(state: StateId, active: tuple[int, int]) -> None:
    src = MessageSource.counter(FieldSpec.checked(5), [1, 1, 1])
    f = fallback_encode(FallbackUse(0, state, SILENCED[state]), src)
    assert tuple(tx for tx, sym in enumerate(f.symbols, start=1) if sym is not None) == active
    assert all(f.symbols[tx - 1] == SymbolId(tx, 0) for tx in active)


def test_fallback_encode_exhausted() -> None:
    src = MessageSource.counter(FieldSpec.checked(5), [1, 0, 1])
    with pytest.raises(SourceExhausted):
        fallback_encode(FallbackUse(0, StateId.A, 1), src)


def test_clean_receivers_are_the_active_ones() -> None:
    for s in StateId:
        assert [bool(CLEAN_RECEIVERS[s, j - 1]) for j in (1, 2, 3)] == \
            [j != SILENCED[s] for j in (1, 2, 3)]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 400), st.integers(0, 2**32 - 1))
def test_encode_matches_per_block_encoding(n: int, seed: int) -> None:
    spec = FieldSpec.checked(5)
    schedule = build_schedule(sample_trace(StateDistribution.uniform(), n, seed))
    demand = symbol_demand(schedule)

    fast = encode(schedule, MessageSource.counter(spec, demand))

    src = MessageSource.counter(spec, demand)
    blocks = [s1_encode(b, src) for b in schedule.blocks]
    fallback = [fallback_encode(u, src) for u in schedule.fallback]
    slow = Assignments.from_parts(n, src, blocks, fallback)

    assert np.array_equal(fast.seq, slow.seq)
    assert [src.remaining(tx) for tx in (1, 2, 3)] == [0, 0, 0]


def test_transmit_fallback_state_c() -> None:
    spec = FieldSpec.checked(5)
    trace = StateTrace.from_states([StateId.C])
    schedule = build_schedule(trace)
    assignments = encode(schedule, MessageSource(spec, [[2], [], [3]]))
    obs = transmit(schedule, assignments, unit_channel(trace, spec))
    assert [int(o.y[0]) for o in obs] == [2, 0, 3]


def test_transmit_slot_f_unit_coefficients() -> None:
    spec = FieldSpec.checked(5)
    trace = make_proportional_trace(ONE_BLOCK)
    schedule = build_schedule(trace)
    src = MessageSource(spec, [np.ones(n, dtype=np.int64) for n in symbol_demand(schedule)])
    obs = transmit(schedule, encode(schedule, src), unit_channel(trace, spec))
    slot = int(schedule.block_slots[0, Role.F])
    assert [int(o.y[slot]) for o in obs] == [2, 2, 2]


def test_transmit_checks_coverage() -> None:
    spec = FieldSpec.checked(5)
    trace = make_proportional_trace(ONE_BLOCK)
    schedule = build_schedule(trace)
    src = MessageSource.counter(spec, symbol_demand(schedule))
    partial = Assignments(np.full((9, 3), -1, dtype=np.int64), src)
    with pytest.raises(ValueError):
        transmit(schedule, partial, unit_channel(trace, spec))

    with pytest.raises(ValueError):
        transmit(schedule, encode(schedule, src), unit_channel(trace[:5], spec))


def test_receiver_unknowns() -> None:
    assert set(S1_UNKNOWNS[1]) == {'a1', 'b1', 'b3', 'c1', 'a4', 'c2', 'e1', 'b6', 'b4'}
    assert set(S1_UNKNOWNS[2]) == {'a2', 'b2', 'c2', 'f2', 'g2', 'a5', 'b5', 'a4', 'b3'}
    assert set(S1_UNKNOWNS[3]) == {'a3', 'b3', 'c3', 'd3', 'a6', 'b6', 'a1', 'c2', 'a4'}
    for j in (1, 2, 3):
        assert {label for label, _ in successive_decode_order(j)} == set(S1_UNKNOWNS[j])


@pytest.mark.parametrize('seed', range(20))
@pytest.mark.parametrize('p', [3, 5, 7])
def test_s1_decode_round_trip(p: int, seed: int) -> None:
    spec = FieldSpec.checked(p)
    assignment, src, obs = one_block(spec, seed)

    for j in (1, 2, 3):
        y, h = block_inputs(obs[j - 1], assignment.block)
        got = s1_decode(j, [y[r] for r in Role], [h[r] for r in Role], spec)
        sent = {label: int(src.value(assignment.fresh[label])) for label in S1_UNKNOWNS[j]}
        assert {label: int(v) for label, v in got.items()} == sent
        assert successive_decode(j, y, h, p) == sent


def test_s1_decode_singular() -> None:
    spec = FieldSpec.checked(5)
    h = np.ones((9, 3), dtype=np.int64)
    h[Role.A1] = 0
    with pytest.raises(SingularSystem):
        s1_decode(1, [0] * 9, h, spec)


def test_participating_links() -> None:
    assert [len(s1_participating_links(j)) for j in (1, 2, 3)] == [15, 13, 16]
    mask = link_mask()
    for j in (1, 2, 3):
        for role, tx in s1_participating_links(j):
            assert mask[ROLE_STATES[role], j - 1, tx - 1]


def test_s1_system_shape() -> None:
    a = s1_system(1, np.ones((4, 9, 3), dtype=np.int64))
    assert a.shape == (4, 9, 9)
    assert int(a[0].sum()) == 15

    with pytest.raises(ValueError):
        s1_system(1, np.ones((9, 2), dtype=np.int64))


@pytest.mark.parametrize('j', [1, 2, 3])
def test_exhaustive_decodability_gf3(j: int) -> None:
    assert exhaustive_decodability(j, FieldSpec.checked(3)) == 0


def test_exhaustive_decodability_limit() -> None:
    with pytest.raises(ValueError):
        exhaustive_decodability(1, FieldSpec.checked(5))


@pytest.mark.parametrize('p', [5, 7, 11])
@pytest.mark.parametrize('j', [1, 2, 3])
def test_random_decodability(j: int, p: int) -> None:
    assert random_decodability(j, FieldSpec.checked(p), draws=10**4, seed=j * p) == 0


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(0, 500), st.integers(0, 2**32 - 1))
def test_exact_recovery(p: int, n: int, seed: int) -> None:
    spec = FieldSpec(p)
    dist = StateDistribution.parse('2/9,2/9,1/9,1/9,1/9,1/9,1/9')
    trace = sample_trace(dist, n, seed)
    schedule = build_schedule(trace)
    src = MessageSource.uniform(spec, seed + 1, symbol_demand(schedule))
    assignments = encode(schedule, src)
    obs = transmit(schedule, assignments, sample_channel(trace, spec, seed + 2))
    result = decode(schedule, assignments, obs)

    assert result.success
    assert result.foreign_ok == (True, True, True)
    assert result.decoded_count == count_symbols(schedule)
    for j in (1, 2, 3):
        assert np.array_equal(result.recovered[j - 1], src.values(j))
        assert {s: int(v) for s, v in result.symbols(j).items()} == \
            {SymbolId(j, i): int(v) for i, v in enumerate(src.values(j))}


def test_decode_detects_singular_blocks() -> None:
    spec = FieldSpec.checked(5)
    trace = make_proportional_trace(ONE_BLOCK)
    schedule = build_schedule(trace)
    assignments = encode(schedule, MessageSource.counter(spec, symbol_demand(schedule)))

    coeffs = link_mask()[trace.codes].astype(np.int64)
    coeffs[int(schedule.block_slots[0, Role.A1]), 0, 0] = 0
    obs = transmit(schedule, assignments, ChannelRealization(trace, coeffs, spec))
    with pytest.raises(SingularSystem):
        decode(schedule, assignments, obs)


def test_decode_flags_wrong_values() -> None:
    spec = FieldSpec.checked(5)
    trace = make_proportional_trace(ONE_BLOCK)
    schedule = build_schedule(trace)
    assignments = encode(schedule, MessageSource.counter(spec, symbol_demand(schedule)))
    rx1, rx2, rx3 = transmit(schedule, assignments, unit_channel(trace, spec))

    y = rx1.y.copy()
    y[0] = (y[0] + 1) % 5
    result = decode(schedule, assignments, (Observation(1, y, rx1.h, spec), rx2, rx3))
    assert not result.success
    assert result.verdicts[1:] == (True, True)


@pytest.mark.parametrize('j, use, y, h_row, expected', [
    (1, FallbackUse(0, StateId.D, 1), 3, [1, 1, 0], None),
    (3, FallbackUse(0, StateId.C, 2), 4, [0, 0, 2], 2),
    (2, FallbackUse(0, StateId.G, 1), 2, [0, 4, 0], 3),
])
def test_fallback_decode(j: int, use: FallbackUse, y: int, h_row: list[int],
                         expected: object) -> None:
    got = fallback_decode(j, use, y, h_row, FieldSpec.checked(5))
    assert (None if got is None else int(got)) == expected


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(0, 2**32 - 1))
def test_decoding_is_linear(p: int, seed: int) -> None:
    spec = FieldSpec(p)
    trace = sample_trace(StateDistribution.uniform(), 120, seed)
    schedule = build_schedule(trace)
    channel = sample_channel(trace, spec, seed + 1)
    demand = symbol_demand(schedule)

    def run(src: MessageSource) -> tuple[IntArray, ...]:
        assignments = encode(schedule, src)
        return decode(schedule, assignments, transmit(schedule, assignments, channel)).recovered

    u = MessageSource.uniform(spec, seed + 2, demand)
    v = MessageSource.uniform(spec, seed + 3, demand)
    w = MessageSource(spec, [(u.values(tx) + v.values(tx)) % p for tx in (1, 2, 3)])

    for ru, rv, rw in zip(run(u), run(v), run(w)):
        assert np.array_equal((ru + rv) % p, rw)


def test_empty_schedule() -> None:
    spec = FieldSpec.checked(5)
    schedule = Schedule(0, [], [], [])
    trace = StateTrace([])
    assignments = encode(schedule, MessageSource.counter(spec, [0, 0, 0]))
    result = decode(schedule, assignments, transmit(schedule, assignments,
                                                    unit_channel(trace, spec)))
    assert result.success
    assert result.decoded_count == 0
