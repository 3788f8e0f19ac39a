import itertools
import math

import numpy as np
import pytest

from oracles import grover_dense
from pdqpoly import simulator as sim
from pdqpoly.demos import (IndexInstance, NotFound, SampleTimeout, TwoToOneFunction,
                           collision_state, find_collision, grover_closed_form,
                           grover_iterations, grover_noncollapsing, grover_samples,
                           index_message_bound, index_message_qubits, index_protocol,
                           prepare_grover)
from pdqpoly.polynomials import BooleanFunction
from pdqpoly.protocol import CouponTimeout


def one_hot(N, marked):
    return BooleanFunction(N.bit_length() - 1, tuple(int(i == marked) for i in range(N)))


def test_two_to_one_validation(rng):
    with pytest.raises(ValueError):
        TwoToOneFunction(4, (0, 0, 0, 1))
    with pytest.raises(ValueError):
        TwoToOneFunction(3, (0, 0, 1))
    f = TwoToOneFunction.random_pairing(64, rng)
    assert len(set(f.table)) == 32


def test_collision_constant_n2(rng):
    f = TwoToOneFunction(2, (1, 1))
    r = find_collision(f, rng)
    assert r.post_support == (0, 1) and {r.a, r.b} == {0, 1}


def test_collision_halving(rng):
    f = TwoToOneFunction.halving(1024)
    state = collision_state(f)
    for _ in range(300):
        r = find_collision(f, rng, state=state)
        assert r.a != r.b and f(r.a) == f(r.b)
        assert len(r.post_support) == 2


def test_collision_random_pairing(rng):
    f = TwoToOneFunction.random_pairing(256, rng)
    for _ in range(100):
        r = find_collision(f, rng)
        assert r.a != r.b and f(r.a) == f(r.b)


def test_collision_timeout(rng):
    f = TwoToOneFunction.halving(8)
    with pytest.raises(SampleTimeout):
        for _ in range(200):
            find_collision(f, rng, sample_cap=1)


def test_collision_state_untouched_by_runs(rng):
    f = TwoToOneFunction.halving(16)
    state = collision_state(f)
    before = state.serialize()
    for _ in range(20):
        find_collision(f, rng, state=state)
    assert state.serialize() == before


@pytest.mark.parametrize("N, T", [(1, 1), (2, 2), (4, 2), (8, 2), (9, 3), (64, 4), (65, 5),
                                  (4096, 16), (4097, 17)])
def test_grover_iterations(N, T):
    assert grover_iterations(N) == T


def test_grover_n4_example():
    prep = prepare_grover(one_hot(4, 2))
    assert prep.iterations == 2
    assert abs(prep.probability - grover_closed_form(4, 2)) <= 1e-9
    assert grover_closed_form(4, 2) == pytest.approx(math.sin(math.radians(150)) ** 2)


@pytest.mark.parametrize("N", [4, 16, 64, 256, 4096])
def test_grover_amplitude_matches_closed_form(N):
    marked = (N * 5) // 7
    prep = prepare_grover(one_hot(N, marked))
    assert abs(prep.probability - grover_closed_form(N, prep.iterations)) <= 1e-9


@pytest.mark.parametrize("N", [4, 16, 64, 256])
def test_grover_matches_dense_oracle(N):
    marked = N // 3
    prep = prepare_grover(one_hot(N, marked))
    assert abs(prep.probability - grover_dense(N, marked, prep.iterations)) <= 1e-9


def test_grover_trivial_n1(rng):
    r = grover_noncollapsing(BooleanFunction(0, (1,)), rng)
    assert r.index == 0 and r.iterations == 0 and r.samples_used == 0


def test_grover_returns_marked(rng):
    oracle = one_hot(64, 17)
    prep = prepare_grover(oracle)
    for _ in range(100):
        r = grover_noncollapsing(oracle, rng, prep=prep)
        assert r.index == 17 and r.samples_used <= grover_samples(64) == 12


def test_grover_not_found(rng):
    oracle = one_hot(4, 1)
    prep = prepare_grover(oracle)
    with pytest.raises(NotFound):
        for _ in range(500):
            grover_noncollapsing(oracle, rng, c=0.5, prep=prep)


def test_grover_requires_one_marked():
    with pytest.raises(ValueError):
        prepare_grover(BooleanFunction(2, (1, 1, 0, 0)))


def test_grover_state_norm():
    prep = prepare_grover(one_hot(256, 3))
    assert abs(prep.state.norm - 1) <= 1e-9
    assert sum(sim.distribution(prep.state, range(8)).values()) == pytest.approx(1, abs=1e-9)


def test_index_example(rng):
    assert index_protocol(IndexInstance((0, 1, 1, 0), 2), rng).bit == 1


def test_index_exhaustive_n2(rng):
    for x in itertools.product((0, 1), repeat=2):
        for i in (1, 2):
            for _ in range(5):
                assert index_protocol(IndexInstance(x, i), rng, 500).bit == x[i - 1]


def test_index_message_size():
    assert index_message_qubits(1024) == 44
    for n in range(1, 40):
        assert index_message_qubits(1 << n) <= index_message_bound(1 << n)


def test_index_random_n256(rng):
    for _ in range(60):
        x = tuple(int(b) for b in rng.integers(0, 2, 256))
        i = int(rng.integers(1, 257))
        try:
            assert index_protocol(IndexInstance(x, i), rng).bit == x[i - 1]
        except CouponTimeout:
            pass


def test_index_instance_validation():
    with pytest.raises(ValueError):
        IndexInstance((0, 1, 1), 1)
    with pytest.raises(ValueError):
        IndexInstance((0, 1), 3)
