# pyright: reportUnusedImport=none

from .field import (DEFAULT_P, FieldElement, FieldSpec, FieldTooSmall, NonPrimeField, ZeroInverse,
                    field_inv, is_prime)
from .linalg import (IntArray, Matrix, RowReduction, SingularMatrix, inverse_array,
                     invertible_batch, rank, row_reduce, solve_batch, solve_linear_system,
                     solve_partial)
