"""Multilinear extensions, ray canonicalization and interpolation at zero.

Together these form the locally decodable code behind the advice state:
the truth table of ``f`` is encoded as the evaluation table of its multilinear
extension ``g`` over F_q^n, and ``f(x)`` is read back from ``g`` restricted to a
line through ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .field import (FieldElement, FieldMismatchError, FieldVector, PrimeField, as_values,
                    select_prime)

VectorLike = Union[FieldVector, Sequence[int]]

NAMED_FUNCTIONS = ("and", "xor", "const0", "const1")


def index_to_bits(index: int, n: int) -> tuple:
    """Binary expansion of ``index``, most significant bit first."""
    return tuple((index >> (n - 1 - k)) & 1 for k in range(n))


def bits_to_index(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (int(b) & 1)
    return out


@dataclass(frozen=True)
class BooleanFunction:
    """Truth table of f: {0,1}^n -> {0,1}.

    ``table[i]`` is f(w) where w is the n-bit binary expansion of i, most
    significant bit first (so w_1 is the high bit).
    """

    n: int
    table: tuple

    def __post_init__(self):
        table = tuple(int(b) for b in self.table)
        if self.n < 0:
            raise ValueError("arity must be non-negative")
        if len(table) != 1 << self.n:
            raise ValueError(f"truth table has {len(table)} entries, expected {1 << self.n}")
        if any(b not in (0, 1) for b in table):
            raise ValueError("truth table entries must be bits")
        object.__setattr__(self, "table", table)

    def __call__(self, bits: Sequence[int]) -> int:
        if len(bits) != self.n:
            raise ValueError(f"expected {self.n} input bits, got {len(bits)}")
        return self.table[bits_to_index(bits)]

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[tuple], int]) -> "BooleanFunction":
        return cls(n, tuple(int(fn(index_to_bits(i, n))) & 1 for i in range(1 << n)))

    @classmethod
    def named(cls, name: str, n: int) -> "BooleanFunction":
        name = name.lower()
        if name == "and":
            return cls.from_callable(n, lambda w: int(all(w)))
        if name == "xor":
            return cls.from_callable(n, lambda w: sum(w) % 2)
        if name == "const0":
            return cls(n, (0,) * (1 << n))
        if name == "const1":
            return cls(n, (1,) * (1 << n))
        raise ValueError(f"unknown function name {name!r}; choose from {NAMED_FUNCTIONS}")

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BooleanFunction":
        return cls(n, tuple(int(b) for b in rng.integers(0, 2, size=1 << n)))

    @classmethod
    def from_hex(cls, text: str, n: int) -> "BooleanFunction":
        """Parse the hex encoding produced by :meth:`to_hex`.

        The bit string f(0..0) f(0..01) ... f(1..1) is read left to right from
        the most significant bit of the first digit; trailing pad bits must be 0.
        """
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        size = 1 << n
        digits = -(-size // 4)
        if len(text) != digits:
            raise ValueError(f"n={n} needs {digits} hex digits, got {len(text)}")
        try:
            bits = bin(int(text, 16))[2:].zfill(4 * digits)
        except ValueError:
            raise ValueError(f"not a hex string: {text!r}") from None
        if set(bits[size:]) - {"0"}:
            raise ValueError("nonzero padding bits after the truth table")
        return cls(n, tuple(int(b) for b in bits[:size]))

    def to_hex(self) -> str:
        size = 1 << self.n
        digits = -(-size // 4)
        bits = "".join(map(str, self.table)).ljust(4 * digits, "0")
        return format(int(bits, 2), "x").zfill(digits)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)


def _coerce_vector(z: VectorLike, field: PrimeField, n: int) -> tuple:
    vals = as_values(z, field)
    if len(vals) != n:
        raise ValueError(f"expected a vector of length {n}, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class MultilinearExtension:
    """The multilinear extension g of ``f`` over ``field``, evaluated on demand."""

    f: BooleanFunction
    field: PrimeField = dc_field(default=None)

    def __post_init__(self):
        if self.field is None:
            object.__setattr__(self, "field", select_prime(max(self.f.n, 1)))

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def q(self) -> int:
        return self.field.q

    def __call__(self, z: VectorLike) -> FieldElement:
        return mle_eval(self, z)

    def evaluate_rows(self, points: np.ndarray) -> np.ndarray:
        """g at each row of an integer array of shape (P, n), folding one variable at a time."""
        q = self.q
        points = np.asarray(points, dtype=np.int64) % q
        if points.ndim != 2 or points.shape[1] != self.n:
            raise ValueError(f"expected points of shape (P, {self.n})")
        t = np.broadcast_to(self.f.array, (points.shape[0], 1 << self.n))
        for i in range(self.n):
            t = t.reshape(points.shape[0], 2, -1)
            zi = points[:, i, None]
            t = ((1 - zi) * t[:, 0, :] + zi * t[:, 1, :]) % q
        return t.reshape(points.shape[0])

    def grid(self) -> np.ndarray:
        """Full evaluation table of g, shape (q,)*n, index order z_1..z_n."""
        q = self.q
        s = np.arange(q, dtype=np.int64)
        basis = np.stack([(1 - s) % q, s], axis=1)  # (q, 2): weights of g(..0..), g(..1..)
        t = self.f.array.reshape((2,) * self.n)
        for axis in range(self.n):
            t = np.tensordot(basis, t, axes=([1], [axis])) % q
            t = np.moveaxis(t, 0, axis)
        return t


def mle_eval(g: MultilinearExtension, z: VectorLike) -> FieldElement:
    vals = _coerce_vector(z, g.field, g.n)
    value = g.evaluate_rows(np.asarray([vals], dtype=np.int64).reshape(1, g.n))[0]
    return g.field(int(value))


def ray_canonical(v: VectorLike, field: Optional[PrimeField] = None) -> FieldVector:
    """Canonical representative of the ray through ``v``: leading nonzero entry scaled to 1."""
    if field is None:
        if not isinstance(v, FieldVector):
            raise TypeError("a field is required for plain integer vectors")
        field = v.field
    vals = as_values(v, field)
    for c in vals:
        if c:
            alpha = field.inv(c)
            return field.vector(alpha * u for u in vals)
    return field.vector(vals)


def ray_canonical_rows(rows: np.ndarray, q: int) -> np.ndarray:
    """Vectorized ray map over the rows of an integer array. All-zero rows stay zero."""
    rows = np.asarray(rows, dtype=np.int64) % q
    if rows.shape[1] == 0:
        return rows
    inverses = np.zeros(q, dtype=np.int64)
    inverses[1:] = [pow(a, -1, q) for a in range(1, q)]
    lead_pos = np.argmax(rows != 0, axis=1)
    lead = rows[np.arange(rows.shape[0]), lead_pos]
    return (rows * inverses[lead][:, None]) % q


def line_eval(g: MultilinearExtension, x: VectorLike, y: VectorLike, j) -> FieldElement:
    """p(j) = g(x + j*y), the restriction of g to the line through x in direction y."""
    xv = _coerce_vector(x, g.field, g.n)
    yv = _coerce_vector(y, g.field, g.n)
    if isinstance(j, FieldElement):
        if j.field != g.field:
            raise FieldMismatchError("j lives in a different field")
        jv = j.value
    else:
        jv = int(j) % g.q
    return mle_eval(g, [a + jv * b for a, b in zip(xv, yv)])


@dataclass(frozen=True)
class LineSamplePoint:
    j: FieldElement
    value: FieldElement

    def __post_init__(self):
        if self.j.value == 0:
            raise ValueError("sample points must have nonzero j")
        if self.j.field != self.value.field:
            raise ValueError("j and value live in different fields")


PointLike = Union[LineSamplePoint, tuple]


def _normalize_points(points: Iterable[PointLike], field: Optional[PrimeField]):
    pairs = []
    for p in points:
        if isinstance(p, LineSamplePoint):
            if field is None:
                field = p.j.field
            elif p.j.field != field:
                raise ValueError("points span several fields")
            pairs.append((p.j.value, p.value.value))
        else:
            j, v = p
            pairs.append((int(j), int(v)))
    if field is None:
        raise TypeError("a field is required for plain (j, value) pairs")
    q = field.q
    pairs = [(j % q, v % q) for j, v in pairs]
    js = [j for j, _ in pairs]
    if any(j == 0 for j in js):
        raise ValueError("sample points must have nonzero j")
    if len(set(js)) != len(js):
        raise ValueError("duplicate j values among sample points")
    return sorted(pairs), field


def _lagrange_at(pairs, t: int, q: int) -> int:
    total = 0
    for j, v in pairs:
        num, den = 1, 1
        for k, _ in pairs:
            if k != j:
                num = num * (t - k) % q
                den = den * (j - k) % q
        total += v * num * pow(den, -1, q)
    return total % q


def interpolate_at_zero(points: Iterable[PointLike], degree_bound: int,
                        field: Optional[PrimeField] = None) -> FieldElement:
    """p(0) for the unique p of degree <= ``degree_bound`` through the points.

    Only the ``degree_bound + 1`` points with smallest j are used; extra points are
    not checked for consistency (see :func:`fits_interpolant`).
    """
    pairs, field = _normalize_points(points, field)
    if degree_bound < 0:
        raise ValueError("degree bound must be non-negative")
    if degree_bound > field.q - 2:
        raise ValueError(f"degree bound {degree_bound} exceeds q-2 = {field.q - 2}")
    if len(pairs) < degree_bound + 1:
        raise ValueError(f"need {degree_bound + 1} points, got {len(pairs)}")
    return field(_lagrange_at(pairs[: degree_bound + 1], 0, field.q))


def fits_interpolant(points: Iterable[PointLike], degree_bound: int,
                     field: Optional[PrimeField] = None) -> bool:
    """True iff every point agrees with the interpolant through the first degree_bound+1."""
    pairs, field = _normalize_points(points, field)
    base = pairs[: degree_bound + 1]
    return all(_lagrange_at(base, j, field.q) == v for j, v in pairs[degree_bound + 1:])
