"""Arithmetic over prime fields F_q and the choice of q from the input length."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union


class FieldMismatchError(ValueError):
    """Operands belong to different prime fields."""


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k < 4:
        return True
    if k % 2 == 0:
        return False
    d = 3
    while d * d <= k:
        if k % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"field order {self.q} is not prime")

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.q, self)

    def __iter__(self) -> Iterator["FieldElement"]:
        return (FieldElement(v, self) for v in range(self.q))

    def __len__(self) -> int:
        return self.q

    def nonzero(self) -> Iterator["FieldElement"]:
        return (FieldElement(v, self) for v in range(1, self.q))

    def inv(self, a: int) -> int:
        """Inverse of the integer ``a`` modulo q."""
        a %= self.q
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        return pow(a, -1, self.q)

    def vector(self, coords: Iterable[int]) -> "FieldVector":
        return FieldVector(tuple(self(c) for c in coords))

    def zero_vector(self, n: int) -> "FieldVector":
        return FieldVector(tuple(FieldElement(0, self) for _ in range(n)))


def select_prime(n: int) -> PrimeField:
    """Smallest prime q with q >= n + 2. Bertrand's postulate keeps q <= 2n + 1."""
    if n < 1:
        raise ValueError("input length must be at least 1")
    q = n + 2
    while not is_prime(q):
        q += 1
    assert q <= 2 * n + 1
    return PrimeField(q)


Operand = Union["FieldElement", int]


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ValueError(f"{self.value} is not a canonical element of F_{self.field.q}")

    def _coerce(self, other: Operand) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatchError(f"F_{self.field.q} vs F_{other.field.q}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def _wrap(self, v: int) -> "FieldElement":
        return FieldElement(v % self.field.q, self.field)

    def __add__(self, other: Operand) -> "FieldElement":
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.value + b)

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "FieldElement":
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.value - b)

    def __rsub__(self, other: Operand) -> "FieldElement":
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(b - self.value)

    def __mul__(self, other: Operand) -> "FieldElement":
        b = self._coerce(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.value * b)

    __rmul__ = __mul__

    def __neg__(self) -> "FieldElement":
        return self._wrap(-self.value)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def __truediv__(self, other: Operand) -> "FieldElement":
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self._wrap(self.value * self.field.inv(b))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.q})"


def invert(a: FieldElement) -> FieldElement:
    return a.inverse()


@dataclass(frozen=True)
class FieldVector:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        fields = {c.field for c in self.coords}
        if len(fields) > 1:
            raise FieldMismatchError("vector coordinates span several fields")

    @property
    def field(self) -> PrimeField:
        return self.coords[0].field

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[FieldElement]:
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def values(self) -> tuple:
        return tuple(c.value for c in self.coords)

    def _check(self, other: "FieldVector") -> None:
        if len(other) != len(self):
            raise ValueError(f"dimension mismatch: {len(self)} vs {len(other)}")
        if len(self) and other.field != self.field:
            raise FieldMismatchError("vectors over different fields")

    def __add__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def scale(self, alpha: Operand) -> "FieldVector":
        return FieldVector(tuple(alpha * c for c in self.coords))

    def is_zero(self) -> bool:
        return all(c.value == 0 for c in self.coords)


def as_values(v: Union[FieldVector, Sequence[int]], field: PrimeField) -> tuple:
    """Canonical integer coordinates of ``v`` in ``field``.

    Plain integer sequences are reduced mod q; a FieldVector must live in ``field``.
    """
    if isinstance(v, FieldVector):
        if len(v) and v.field != field:
            raise FieldMismatchError(f"vector over F_{v.field.q}, expected F_{field.q}")
        return v.values()
    return tuple(int(c) % field.q for c in v)
