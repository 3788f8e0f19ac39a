"""Three smaller uses of non-collapsing measurements: collision finding, Grover
search in about N^(1/3) steps, and a short-message protocol for Index."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import simulator as sim
from .polynomials import BooleanFunction, index_to_bits
from .protocol import AdviceState, ProtocolTranscript, advice_qubits, build_advice, run_protocol


class SampleTimeout(RuntimeError):
    pass


class NotFound(RuntimeError):
    pass


# Collision finding

@dataclass(frozen=True)
class TwoToOneFunction:
    N: int
    table: tuple

    def __post_init__(self):
        table = tuple(int(v) for v in self.table)
        if self.N < 2 or self.N % 2:
            raise ValueError("domain size must be even and at least 2")
        if len(table) != self.N or any(not 0 <= v < self.N for v in table):
            raise ValueError("table must map [N] into [N]")
        counts = np.bincount(table, minlength=self.N)
        if set(counts[counts > 0].tolist()) != {2}:
            raise ValueError("every image must have exactly two preimages")
        object.__setattr__(self, "table", table)

    def __call__(self, a: int) -> int:
        return self.table[a]

    @classmethod
    def halving(cls, N: int) -> "TwoToOneFunction":
        """f(x) = floor(x / 2)."""
        return cls(N, tuple(a // 2 for a in range(N)))

    @classmethod
    def random_pairing(cls, N: int, rng: np.random.Generator) -> "TwoToOneFunction":
        order = rng.permutation(N)
        images = rng.choice(N, size=N // 2, replace=False)
        table = np.empty(N, dtype=np.int64)
        table[order[0::2]] = images
        table[order[1::2]] = images
        return cls(N, tuple(table.tolist()))


@dataclass(frozen=True)
class CollisionResult:
    a: int
    b: int
    samples_used: int
    post_support: tuple


def collision_state(f: TwoToOneFunction) -> sim.SparseState:
    """(1/sqrt(N)) sum_x |x>|f(x)>."""
    labels = np.stack([np.arange(f.N), np.asarray(f.table)], axis=1)
    return sim.prepare_arrays([f.N, f.N], labels, np.ones(f.N))


def find_collision(f: TwoToOneFunction, rng: np.random.Generator, sample_cap: int = 64,
                   state: Optional[sim.SparseState] = None) -> CollisionResult:
    """Collapse the image register, then sample the preimage register until both preimages show.

    ``state`` may be a prepared :func:`collision_state` reused across runs.
    """
    state = collision_state(f) if state is None else state
    _, post, _ = sim.measure_collapsing(state, 1, rng)
    support = tuple(int(v) for v in post.labels[:, 0])
    seen = []
    for used in range(1, sample_cap + 1):
        (a,), _ = sim.sample_noncollapsing(post, 0, rng)
        if a not in seen:
            seen.append(a)
        if len(seen) == 2:
            return CollisionResult(seen[0], seen[1], used, support)
    raise SampleTimeout(f"only saw {seen} in {sample_cap} samples")


# Grover search with non-collapsing samples

def grover_iterations(N: int) -> int:
    """ceil(N^(1/3)), computed exactly."""
    t = max(0, round(N ** (1 / 3)) - 1)
    while t ** 3 < N:
        t += 1
    return t


def grover_samples(N: int, c: float = 3) -> int:
    return math.ceil(c * grover_iterations(N))


def grover_closed_form(N: int, T: int) -> float:
    """sin^2((2T+1) arcsin(1/sqrt N)): marked-item probability after T iterations."""
    return math.sin((2 * T + 1) * math.asin(1 / math.sqrt(N))) ** 2


_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


def _hadamard_all(state: sim.SparseState) -> sim.SparseState:
    for r in range(state.num_registers):
        state = sim.apply_unitary(state, r, _HADAMARD)
    return state


def _bits_to_ints(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    return bits @ (1 << np.arange(n - 1, -1, -1, dtype=np.int64))


def marked_item(oracle: BooleanFunction) -> int:
    marked = [i for i, b in enumerate(oracle.table) if b]
    if len(marked) != 1:
        raise ValueError(f"oracle must mark exactly one item, marks {len(marked)}")
    return marked[0]


@dataclass(frozen=True)
class GroverPrep:
    N: int
    marked: int
    iterations: int
    state: Optional[sim.SparseState]
    probability: float  # marked-item probability read off the simulated state


def prepare_grover(oracle: BooleanFunction) -> GroverPrep:
    """Run ceil(N^(1/3)) exact Grover iterations on n qubits.

    Each iteration is the oracle phase flip followed by H^n, a sign flip on every
    nonzero basis state, and H^n again.
    """
    N, n = 1 << oracle.n, oracle.n
    marked = marked_item(oracle)
    if N == 1:
        return GroverPrep(1, 0, 0, None, 1.0)
    T = grover_iterations(N)
    table = oracle.array
    state = _hadamard_all(sim.prepare([2] * n, [((0,) * n, 1)]))
    for _ in range(T):
        state = sim.apply_phase(state, range(n), lambda b: 1 - 2 * table[_bits_to_ints(b)])
        state = _hadamard_all(state)
        state = sim.apply_phase(state, range(n), lambda b: np.where(b.any(axis=1), -1, 1))
        state = _hadamard_all(state)
    probability = sim.distribution(state, range(n)).get(index_to_bits(marked, n), 0.0)
    return GroverPrep(N, marked, T, state, probability)


@dataclass(frozen=True)
class GroverResult:
    N: int
    iterations: int
    samples_allowed: int
    samples_used: int
    index: int
    probability: float
    closed_form: float


def grover_noncollapsing(oracle: BooleanFunction, rng: np.random.Generator, c: float = 3,
                         prep: Optional[GroverPrep] = None) -> GroverResult:
    """Amplify for ceil(N^(1/3)) iterations, then sample without collapsing until a marked item appears.

    Raises NotFound if none of the K = ceil(c * T) samples is marked.
    """
    prep = prepare_grover(oracle) if prep is None else prep
    N, T = prep.N, prep.iterations
    closed = grover_closed_form(N, T)
    if N == 1:
        return GroverResult(1, 0, 0, 0, 0, 1.0, closed)
    K = grover_samples(N, c)
    regs = tuple(range(oracle.n))
    for used in range(1, K + 1):
        bits, _ = sim.sample_noncollapsing(prep.state, regs, rng)
        idx = int(_bits_to_ints(np.asarray([bits]))[0])
        if oracle.table[idx]:
            return GroverResult(N, T, K, used, idx, prep.probability, closed)
    raise NotFound(f"no marked item among {K} samples")


# Index communication

@dataclass(frozen=True)
class IndexInstance:
    x: tuple
    i: int  # 1-based

    def __post_init__(self):
        x = tuple(int(b) for b in self.x)
        N = len(x)
        if N < 2 or N & (N - 1):
            raise ValueError("N must be a power of two, at least 2")
        if any(b not in (0, 1) for b in x):
            raise ValueError("x must be a bit string")
        if not 1 <= self.i <= N:
            raise ValueError(f"index {self.i} outside [1, {N}]")
        object.__setattr__(self, "x", x)

    @property
    def N(self) -> int:
        return len(self.x)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1


INDEX_MESSAGE_CONSTANT = 2


def index_message_qubits(N: int) -> int:
    return advice_qubits(N.bit_length() - 1)


def index_message_bound(N: int) -> float:
    """c (log N + 1) log2(2 log N + 2) with c = 2, an O(log N log log N) ceiling."""
    n = N.bit_length() - 1
    return INDEX_MESSAGE_CONSTANT * (n + 1) * math.log2(2 * n + 2)


@dataclass(frozen=True)
class IndexResult:
    bit: int
    message_qubits: int
    transcript: ProtocolTranscript


@lru_cache(maxsize=16)
def _alice_message(x: tuple) -> AdviceState:
    return build_advice(BooleanFunction(len(x).bit_length() - 1, x))


def index_protocol(instance: IndexInstance, rng: np.random.Generator,
                   sample_cap: Optional[int] = None) -> IndexResult:
    """Alice's x becomes the truth table behind the advice; Bob decodes input i-1."""
    message = _alice_message(instance.x)
    qubits = message.qubits
    assert qubits <= index_message_bound(instance.N), (qubits, instance.N)
    transcript = run_protocol(message, index_to_bits(instance.i - 1, instance.n), rng, sample_cap)
    return IndexResult(transcript.answer, qubits, transcript)
