import itertools

import pytest

from oracles import inverse_by_scan, trial_division_primes_from
from pdqpoly.field import (FieldElement, FieldMismatchError, PrimeField, invert, is_prime,
                           select_prime)


@pytest.mark.parametrize("n, q", [(3, 5), (1, 3), (10, 13)])
def test_select_prime_examples(n, q):
    assert select_prime(n).q == q


@pytest.mark.parametrize("n", range(1, 65))
def test_select_prime_in_bertrand_window(n):
    q = select_prime(n).q
    assert is_prime(q) and n + 2 <= q <= 2 * n + 1
    assert q == trial_division_primes_from(n + 2)


def test_select_prime_rejects_zero():
    with pytest.raises(ValueError):
        select_prime(0)


def test_non_prime_order_rejected():
    with pytest.raises(ValueError):
        PrimeField(9)


def test_field_ops_examples():
    F5, F3 = PrimeField(5), PrimeField(3)
    assert (F5(3) + F5(4)).value == 2
    assert (F5(2) * F5(4)).value == 3
    assert (F3(0) - F3(1)).value == 2


@pytest.mark.parametrize("q, a, expected", [(5, 2, 3), (5, 1, 1), (13, 5, 8)])
def test_invert_examples(q, a, expected):
    assert invert(PrimeField(q)(a)).value == expected


def test_invert_zero_is_domain_error():
    with pytest.raises(ZeroDivisionError):
        invert(PrimeField(7)(0))


@pytest.mark.parametrize("q", [p for p in range(3, 32) if is_prime(p)])
def test_inverse_exhaustive(q):
    F = PrimeField(q)
    for a in F.nonzero():
        assert (a * invert(a)).value == 1
        assert invert(a).value == inverse_by_scan(a.value, q)


@pytest.mark.parametrize("q", [3, 5, 7])
def test_field_axioms_exhaustive(q):
    F = PrimeField(q)
    for a, b, c in itertools.product(F, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + b == b + a and a * b == b * a


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatchError):
        PrimeField(5)(1) + PrimeField(7)(1)


def test_element_must_be_canonical():
    with pytest.raises(ValueError):
        FieldElement(5, PrimeField(5))
    assert PrimeField(5)(-1).value == 4


def test_vector_arithmetic():
    F = PrimeField(5)
    x, y = F.vector([1, 0]), F.vector([0, 1])
    assert (x + y.scale(2)).values() == (1, 2)
    assert (x - x).is_zero()
    with pytest.raises(ValueError):
        x + F.vector([1, 2, 3])
