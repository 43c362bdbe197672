from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from .field import FieldElement, FieldSpec

__all__ = ['IntArray', 'Matrix', 'RowReduction', 'SingularMatrix', 'inverse_array',
           'invertible_batch', 'rank', 'row_reduce', 'solve_batch', 'solve_linear_system',
           'solve_partial']

IntArray = npt.NDArray[np.int64]

Scalar = Union[FieldElement, int]


class SingularMatrix(ValueError):
    """Raised when a linear system has no unique solution. A subclass of
    ValueError."""
    pass


def _reduce(values: Iterable[Scalar], spec: FieldSpec) -> IntArray:
    res: list[int] = []
    for v in values:
        if isinstance(v, FieldElement):
            if v.spec != spec:
                raise TypeError(f'Element of GF({v.spec.p}) used with GF({spec.p})')
            res.append(v.value)
        else:
            res.append(v % spec.p)

    return np.array(res, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Matrix:
    """A dense matrix over GF(p), backed by an int64 array of reduced
    entries."""
    entries: IntArray
    spec: FieldSpec

    def __post_init__(self) -> None:
        if self.entries.ndim != 2 or 0 in self.entries.shape:
            raise ValueError(f'Matrix needs two positive dimensions, got shape '
                             f'{self.entries.shape}')

        if self.entries.min() < 0 or self.entries.max() >= self.spec.p:
            raise ValueError(f'Matrix entries are not reduced mod {self.spec.p}')

    @classmethod
    def from_rows(cls, spec: FieldSpec, rows: Sequence[Sequence[Scalar]]) -> 'Matrix':
        reduced = [_reduce(row, spec) for row in rows]
        if len({len(r) for r in reduced}) > 1:
            raise ValueError('Matrix rows have differing lengths')

        return cls(np.array(reduced, dtype=np.int64).reshape(len(reduced), -1), spec)

    @classmethod
    def from_array(cls, spec: FieldSpec, arr: npt.ArrayLike) -> 'Matrix':
        return cls(np.asarray(arr, dtype=np.int64) % spec.p, spec)

    @classmethod
    def identity(cls, spec: FieldSpec, n: int) -> 'Matrix':
        return cls(np.eye(n, dtype=np.int64), spec)

    @classmethod
    def zeros(cls, spec: FieldSpec, rows: int, cols: int) -> 'Matrix':
        return cls(np.zeros((rows, cols), dtype=np.int64), spec)

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, idx: tuple[int, int]) -> FieldElement:
        return FieldElement(int(self.entries[idx]), self.spec)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented

        return self.spec == other.spec and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.spec, self.entries.tobytes(), self.entries.shape))

    def apply(self, x: Sequence[Scalar]) -> list[FieldElement]:
        """Returns A·x."""
        vec = _reduce(x, self.spec)
        if vec.shape != (self.cols,):
            raise ValueError(f'Vector of length {len(vec)} does not match {self.cols} columns')

        p = self.spec.p
        acc = np.zeros(self.rows, dtype=np.int64)
        for c in range(self.cols):
            acc = (acc + self.entries[:, c] * vec[c] % p) % p

        return [FieldElement(int(v), self.spec) for v in acc]

    def __repr__(self) -> str:
        return f'Matrix(GF({self.spec.p}), {self.entries.tolist()})'


def inverse_array(a: IntArray, p: int) -> IntArray:
    """Elementwise inverse of a reduced array over GF(p), by Fermat's little
    theorem. Zero maps to zero; callers must not rely on that value."""
    res = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            res = res * base % p
        base = base * base % p
        e >>= 1

    return res


def _gauss_jordan(aa: IntArray, bb: IntArray, p: int,
                  strict: bool) -> tuple[IntArray, npt.NDArray[np.bool_]]:
    """Eliminates the (m, n, n) stack aa, carrying the (m, n) right-hand
    sides bb along. Returns the solutions and a boolean mask of which systems
    were invertible.

    With strict set, the first singular system raises SingularMatrix.
    Otherwise singular systems are flagged and their solutions are garbage.
    """
    n = aa.shape[-1]
    rows = np.arange(aa.shape[0])
    ok = np.ones(aa.shape[0], dtype=np.bool_)

    for col in range(n):
        nonzero = aa[:, col:, col] != 0
        has_pivot = nonzero.any(axis=1)
        if not has_pivot.all():
            if strict:
                bad = int(np.flatnonzero(~has_pivot)[0])
                raise SingularMatrix(f'System {bad} of {aa.shape[0]} is singular (no pivot in '
                                     f'column {col})')
            ok &= has_pivot

        # argmax lands on col itself when there is no pivot; the zero "pivot"
        # then zeroes its row and the elimination step is a no-op.
        piv = col + nonzero.argmax(axis=1)

        pivot_rows = aa[rows, piv].copy()
        aa[rows, piv] = aa[rows, col]
        aa[rows, col] = pivot_rows
        pivot_rhs = bb[rows, piv].copy()
        bb[rows, piv] = bb[rows, col]
        bb[rows, col] = pivot_rhs

        inv = inverse_array(aa[:, col, col], p)
        aa[:, col, :] = aa[:, col, :] * inv[:, None] % p
        bb[:, col] = bb[:, col] * inv % p

        factors = aa[:, :, col].copy()
        factors[:, col] = 0
        aa = (aa - factors[:, :, None] * aa[:, col, :][:, None, :]) % p
        bb = (bb - factors * bb[:, col][:, None]) % p

    return bb, ok


def _as_stack(a: npt.ArrayLike, b: Optional[npt.ArrayLike], p: int) -> tuple[IntArray, IntArray]:
    aa = np.array(a, dtype=np.int64) % p
    if aa.ndim < 2 or aa.shape[-1] != aa.shape[-2]:
        raise ValueError(f'Expected a stack of square matrices, got shape {aa.shape}')

    if b is None:
        bb = np.zeros(aa.shape[:-1], dtype=np.int64)
    else:
        bb = np.array(b, dtype=np.int64) % p
        if bb.shape != aa.shape[:-1]:
            raise ValueError(f'Right-hand side shape {bb.shape} does not match {aa.shape}')

    return aa, bb


def solve_batch(a: npt.ArrayLike, b: npt.ArrayLike, spec: FieldSpec) -> IntArray:
    """Solves a stack of square systems a[..., n, n] · x = b[..., n] over
    GF(p) by Gauss-Jordan elimination with first-nonzero pivoting.

    Every system in the stack must be invertible; otherwise SingularMatrix is
    raised naming the first offending system (in flattened order).
    """
    aa, bb = _as_stack(a, b, spec.p)
    n = aa.shape[-1]
    batch_shape = aa.shape[:-2]
    x, _ = _gauss_jordan(aa.reshape(-1, n, n), bb.reshape(-1, n), spec.p, strict=True)
    return x.reshape(batch_shape + (n,))


def invertible_batch(a: npt.ArrayLike, spec: FieldSpec) -> npt.NDArray[np.bool_]:
    """For a stack a[..., n, n], whether each matrix is invertible over
    GF(p)."""
    aa, bb = _as_stack(a, None, spec.p)
    n = aa.shape[-1]
    batch_shape = aa.shape[:-2]
    _, ok = _gauss_jordan(aa.reshape(-1, n, n), bb.reshape(-1, n), spec.p, strict=False)
    return ok.reshape(batch_shape)


def solve_linear_system(a: Matrix, b: Sequence[Scalar]) -> list[FieldElement]:
    """Returns the unique x with A·x = b.

    Raises SingularMatrix if A is not invertible.
    """
    if not a.is_square:
        raise ValueError(f'Expected a square matrix, got {a.rows}x{a.cols}')

    vec = _reduce(b, a.spec)
    if vec.shape != (a.rows,):
        raise ValueError(f'Right-hand side of length {len(vec)} does not match {a.rows} rows')

    x = solve_batch(a.entries[None], vec[None], a.spec)[0]
    return [FieldElement(int(v), a.spec) for v in x]


@dataclass(frozen=True, eq=False)
class RowReduction:
    """The reduced row echelon form of a matrix, the right-hand side carried
    along with it (if one was given), and the pivot column of each nonzero
    row."""
    matrix: Matrix
    rhs: Optional[IntArray]
    pivots: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def row_reduce(a: Matrix, b: Optional[Sequence[Scalar]] = None) -> RowReduction:
    p = a.spec.p
    m = a.entries.copy()
    rhs = None if b is None else _reduce(b, a.spec)
    if rhs is not None and rhs.shape != (a.rows,):
        raise ValueError(f'Right-hand side of length {len(rhs)} does not match {a.rows} rows')

    pivots: list[int] = []
    row = 0
    for col in range(a.cols):
        if row == a.rows:
            break

        candidates = np.flatnonzero(m[row:, col])
        if candidates.size == 0:
            continue

        piv = row + int(candidates[0])
        m[[row, piv]] = m[[piv, row]]
        if rhs is not None:
            rhs[[row, piv]] = rhs[[piv, row]]

        inv = pow(int(m[row, col]), -1, p)
        m[row] = m[row] * inv % p
        factors = m[:, col].copy()
        factors[row] = 0
        m = (m - np.outer(factors, m[row])) % p

        if rhs is not None:
            rhs[row] = rhs[row] * inv % p
            rhs = (rhs - factors * rhs[row]) % p

        pivots.append(col)
        row += 1

    return RowReduction(Matrix(m, a.spec), rhs, tuple(pivots))


def rank(a: Matrix) -> int:
    """Row rank of A over GF(p)."""
    return row_reduce(a).rank


def solve_partial(a: Matrix, b: Sequence[Scalar]) -> dict[int, FieldElement]:
    """Recovers every unknown that A·x = b pins down, even when the system as
    a whole is underdetermined.

    An unknown is determined exactly when its unit vector is in the row space
    of A, which in reduced row echelon form shows up as a row with a single
    nonzero entry. Returns a mapping from column index to value. Raises
    ValueError if the system is inconsistent.
    """
    rr = row_reduce(a, b)
    assert rr.rhs is not None  # for type-checking

    if np.any(rr.rhs[rr.rank:] != 0):
        raise ValueError('Linear system is inconsistent')

    res: dict[int, FieldElement] = {}
    for i, col in enumerate(rr.pivots):
        if np.count_nonzero(rr.matrix.entries[i]) == 1:
            res[col] = FieldElement(int(rr.rhs[i]), a.spec)

    return res
