import math
from dataclasses import dataclass
from typing import Union

__all__ = ['DEFAULT_P', 'MAX_P', 'FieldSpec', 'FieldElement', 'FieldTooSmall', 'NonPrimeField',
           'ZeroInverse', 'field_inv', 'is_prime']

DEFAULT_P = 5

# Products of two reduced elements have to fit in an int64 for the numpy
# code paths, so those reduce after every product.
MAX_P = 2**31 - 1


class ZeroInverse(ZeroDivisionError):
    """Raised when inverting the zero element. A subclass of
    ZeroDivisionError."""
    pass


class NonPrimeField(ValueError):
    """Raised for a field modulus that is not prime. A subclass of
    ValueError."""
    pass


class FieldTooSmall(ValueError):
    """Raised for a field with fewer than 3 elements. A subclass of
    ValueError."""
    pass


def is_prime(n: int) -> bool:
    """Deterministic trial division. Fine for the moduli we allow."""
    if n < 2:
        return False

    if n % 2 == 0:
        return n == 2

    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False

    return True


@dataclass(frozen=True)
class FieldSpec:
    """The prime field GF(p).

    Instances should be made with FieldSpec.checked(), which validates the
    modulus. Plain construction skips validation so that hot paths can pass
    specs around cheaply.
    """
    p: int

    @classmethod
    def checked(cls, p: int) -> 'FieldSpec':
        if p < 3:
            raise FieldTooSmall(f'Field size must be at least 3, got {p}')

        if p > MAX_P:
            raise NonPrimeField(f'Field size {p} exceeds the supported maximum {MAX_P}')

        if not is_prime(p):
            raise NonPrimeField(f'Field size {p} is not prime')

        return cls(p)

    @property
    def rate_unit(self) -> float:
        """Bits carried by one field symbol, log2(p)."""
        return math.log2(self.p)

    def element(self, value: int) -> 'FieldElement':
        return FieldElement(value % self.p, self)

    def zero(self) -> 'FieldElement':
        return FieldElement(0, self)

    def one(self) -> 'FieldElement':
        return FieldElement(1, self)

    def elements(self) -> list['FieldElement']:
        return [FieldElement(v, self) for v in range(self.p)]

    def nonzero_elements(self) -> list['FieldElement']:
        return [FieldElement(v, self) for v in range(1, self.p)]


_Operand = Union['FieldElement', int]


@dataclass(frozen=True)
class FieldElement:
    value: int
    spec: FieldSpec

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.spec.p:
            raise ValueError(f'{self.value} is not a reduced element of GF({self.spec.p})')

    def _coerce(self, other: _Operand) -> int:
        if isinstance(other, int):
            return other % self.spec.p

        if other.spec != self.spec:
            raise TypeError(f'Cannot combine elements of GF({self.spec.p}) and '
                            f'GF({other.spec.p})')

        return other.value

    def __add__(self, other: _Operand) -> 'FieldElement':
        return self.spec.element(self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other: _Operand) -> 'FieldElement':
        return self.spec.element(self.value - self._coerce(other))

    def __rsub__(self, other: _Operand) -> 'FieldElement':
        return self.spec.element(self._coerce(other) - self.value)

    def __mul__(self, other: _Operand) -> 'FieldElement':
        return self.spec.element(self.value * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other: _Operand) -> 'FieldElement':
        return self * field_inv(self.spec.element(self._coerce(other)), self.spec)

    def __neg__(self) -> 'FieldElement':
        return self.spec.element(-self.value)

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def inverse(self) -> 'FieldElement':
        return field_inv(self, self.spec)

    def __repr__(self) -> str:
        return f'{self.value} (mod {self.spec.p})'


def field_inv(x: FieldElement, spec: FieldSpec) -> FieldElement:
    """Returns the multiplicative inverse of x in GF(p), via the extended
    Euclidean algorithm that backs pow(x, -1, p).

    Raises ZeroInverse if x is zero.
    """
    if x.spec != spec:
        raise TypeError(f'Element of GF({x.spec.p}) used with GF({spec.p})')

    if x.value == 0:
        raise ZeroInverse(f'Zero has no inverse in GF({spec.p})')

    return FieldElement(pow(x.value, -1, spec.p), spec)
