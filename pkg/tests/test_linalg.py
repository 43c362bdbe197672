from typing import Iterable

import numpy as np
import numpy.typing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfp import (FieldElement, FieldSpec, Matrix, SingularMatrix, invertible_batch, rank,
                 row_reduce, solve_batch, solve_linear_system, solve_partial)

from .oracles import all_vectors, brute_ranks, brute_solutions


def ints(xs: Iterable[FieldElement]) -> list[int]:
    return [int(x) for x in xs]


@pytest.mark.parametrize('p, rows, b, expected', [
    (3, [[1, 0], [0, 1]], [1, 2], [1, 2]),
    (5, [[2, 0], [0, 3]], [4, 1], [2, 2]),
    (3, [[1, 1], [1, 2]], [0, 1], [2, 1]),
])
def test_solve_examples(p: int, rows: list[list[int]], b: list[int], expected: list[int]) -> None:
    spec = FieldSpec.checked(p)
    x = solve_linear_system(Matrix.from_rows(spec, rows), b)
    assert ints(x) == expected
    assert brute_solutions(rows, b, p) == [tuple(expected)]


def test_apply_at_largest_field() -> None:
    p = 2**31 - 1
    spec = FieldSpec.checked(p)
    a = Matrix.from_rows(spec, [[p - 1] * 3] * 3)
    # (-1)·(-1) summed three times.
    assert ints(a.apply([p - 1] * 3)) == [3, 3, 3]
    assert ints(a.apply([1, 2, p - 3])) == [0, 0, 0]


def test_rank_examples() -> None:
    gf3 = FieldSpec.checked(3)
    gf5 = FieldSpec.checked(5)
    assert rank(Matrix.zeros(gf3, 3, 3)) == 0
    assert rank(Matrix.identity(gf3, 9)) == 9
    assert rank(Matrix.from_rows(gf5, [[1, 2], [2, 4]])) == 1


def test_singular_systems_raise() -> None:
    spec = FieldSpec.checked(5)
    with pytest.raises(SingularMatrix):
        solve_linear_system(Matrix.from_rows(spec, [[1, 2], [2, 4]]), [1, 2])

    with pytest.raises(ValueError):
        solve_linear_system(Matrix.from_rows(spec, [[1, 2, 3]]), [1])


def test_matrix_validation() -> None:
    spec = FieldSpec.checked(5)
    with pytest.raises(ValueError):
        Matrix(np.array([[5]], dtype=np.int64), spec)

    with pytest.raises(ValueError):
        Matrix(np.zeros((0, 3), dtype=np.int64), spec)

    with pytest.raises(ValueError):
        Matrix.from_rows(spec, [[1, 2], [3]])

    m = Matrix.from_array(spec, [[6, -1], [0, 10]])
    assert m.entries.tolist() == [[1, 4], [0, 0]]
    assert m == Matrix.from_rows(spec, [[1, 4], [0, 0]])
    assert ints(m.apply([1, 1])) == [0, 0]


def all_3x3_over_gf3() -> npt.NDArray[np.int64]:
    return all_vectors(9, 3).reshape(-1, 3, 3)


def test_rank_exhaustive_3x3_gf3() -> None:
    spec = FieldSpec.checked(3)
    mats = all_3x3_over_gf3()
    expected = brute_ranks(mats, 3)
    got = [rank(Matrix(m.copy(), spec)) for m in mats]
    assert got == expected.tolist()


def test_solve_exhaustive_3x3_gf3() -> None:
    spec = FieldSpec.checked(3)
    mats = all_3x3_over_gf3()
    xs = all_vectors(3, 3)

    # A is invertible iff it maps the 27 vectors to 27 distinct images.
    images = np.einsum('mij,xj->mxi', mats, xs) % 3
    codes = images @ np.array([1, 3, 9])
    codes.sort(axis=1)
    invertible = np.all(np.diff(codes, axis=1) != 0, axis=1)

    assert np.array_equal(invertible_batch(mats, spec), invertible)

    rng = np.random.default_rng(7)
    inv = mats[invertible]
    x_true = rng.integers(0, 3, size=(inv.shape[0], 3))
    b = np.einsum('mij,mj->mi', inv, x_true) % 3
    assert np.array_equal(solve_batch(inv, b, spec), x_true)

    for m in mats[~invertible][:200]:
        with pytest.raises(SingularMatrix):
            solve_linear_system(Matrix(m.copy(), spec), [0, 1, 2])


def test_solve_random_9x9_gf5() -> None:
    spec = FieldSpec.checked(5)
    rng = np.random.default_rng(11)
    found = 0
    while found < 1000:
        a = rng.integers(0, 5, size=(9, 9))
        m = Matrix(a, spec)
        if rank(m) < 9:
            continue

        found += 1
        x = rng.integers(0, 5, size=9)
        b = a @ x % 5
        got = np.array(ints(solve_linear_system(m, b.tolist())))
        assert np.array_equal(got, x)
        assert np.array_equal(a @ got % 5, b)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_solve_recovers_x(p: int, n: int, seed: int) -> None:
    spec = FieldSpec(p)
    rng = np.random.default_rng(seed)
    while True:
        a = rng.integers(0, p, size=(n, n))
        if rank(Matrix(a, spec)) == n:
            break

    xs = rng.integers(0, p, size=(5, n))
    bs = xs @ a.T % p
    for x, b in zip(xs, bs):
        assert ints(solve_linear_system(Matrix(a, spec), b.tolist())) == x.tolist()

    assert np.array_equal(solve_batch(np.broadcast_to(a, (5, n, n)), bs, spec), xs)


def test_solve_batch_reports_singular_index() -> None:
    spec = FieldSpec.checked(5)
    stack = np.array([np.eye(2, dtype=np.int64), [[1, 1], [1, 1]]])
    with pytest.raises(SingularMatrix, match='System 1 of 2'):
        solve_batch(stack, np.ones((2, 2), dtype=np.int64), spec)

    assert invertible_batch(stack, spec).tolist() == [True, False]


def test_row_reduce() -> None:
    spec = FieldSpec.checked(5)
    rr = row_reduce(Matrix.from_rows(spec, [[0, 2, 4], [1, 1, 1], [1, 3, 1]]), [2, 3, 4])
    assert rr.pivots == (0, 1, 2)
    assert rr.rank == 3
    assert rr.matrix == Matrix.identity(spec, 3)
    assert rr.rhs is not None
    assert brute_solutions([[0, 2, 4], [1, 1, 1], [1, 3, 1]], [2, 3, 4], 5) == [tuple(rr.rhs)]


def test_solve_partial() -> None:
    spec = FieldSpec.checked(5)

    # x0 = 2 is pinned; x1 + x2 = 3 is not enough for either.
    a = Matrix.from_rows(spec, [[1, 0, 0], [0, 1, 1]])
    assert {k: int(v) for k, v in solve_partial(a, [2, 3]).items()} == {0: 2}

    a = Matrix.from_rows(spec, [[1, 1, 0], [0, 1, 0], [0, 0, 0]])
    assert {k: int(v) for k, v in solve_partial(a, [4, 1, 0]).items()} == {0: 3, 1: 1}

    with pytest.raises(ValueError):
        solve_partial(Matrix.from_rows(spec, [[1, 1], [1, 1]]), [0, 1])


@settings(deadline=None)
@given(st.sampled_from([3, 5]), st.integers(0, 2**32 - 1))
def test_solve_partial_matches_brute_force(p: int, seed: int) -> None:
    spec = FieldSpec(p)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, p, size=(3, 4)) * (rng.random((3, 4)) < 0.6)
    x = rng.integers(0, p, size=4)
    b = a @ x % p

    solutions = brute_solutions(a.tolist(), b.tolist(), p)
    pinned = {col for col in range(4) if len({s[col] for s in solutions}) == 1}

    got = solve_partial(Matrix(a.astype(np.int64), spec), b.tolist())
    assert set(got) == pinned
    for col, v in got.items():
        assert int(v) == x[col]
