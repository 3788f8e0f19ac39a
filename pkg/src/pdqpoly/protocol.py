"""Evaluating an arbitrary Boolean function from a multilinear-extension advice state.

Given the advice (1/sqrt(q^n)) sum_z |z>|g(z)> and an input x, the decoder writes
the ray R(z - x) into an ancilla, measures it (collapsing), and is left with a
uniform superposition over the punctured line {x + j*y : j != 0}. Non-collapsing
samples of that state reveal p(j) = g(x + j*y) for every j, and interpolation at
j = 0 gives f(x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import simulator as sim
from .field import PrimeField, select_prime
from .polynomials import (BooleanFunction, MultilinearExtension, interpolate_at_zero,
                          ray_canonical_rows)

DESK_BOUND = 6  # largest n whose full advice state (q^n terms) is materialized by default

ZERO_RAY = "zero-ray"
GENERIC = "generic"


class ProtocolError(RuntimeError):
    pass


class CouponTimeout(ProtocolError):
    """The sample cap ran out before every p(j) was seen."""

    def __init__(self, transcript: "ProtocolTranscript"):
        super().__init__(f"collected {len(transcript.coupons)} of {transcript.q - 1} coupons "
                         f"in {transcript.samples_used} samples")
        self.transcript = transcript


class InconsistentSampleError(ProtocolError):
    """A sampled label is not on the measured line; the simulated state is corrupt."""


class TryTimeout(ProtocolError):
    def __init__(self, tries: int):
        super().__init__(f"no hit after {tries} preparations")
        self.tries = tries


def ceil_log2(k: int) -> int:
    return (k - 1).bit_length()


def advice_qubits(n: int) -> int:
    """Qubits needed to hold the advice state: n+1 registers of ceil(log2 q) qubits."""
    return (n + 1) * ceil_log2(select_prime(n).q)


def advice_qubit_bound(n: int) -> float:
    """2 (n+1) log2(2n+2): a concrete O(n log n) ceiling for :func:`advice_qubits`."""
    return 2 * (n + 1) * math.log2(2 * n + 2)


def default_sample_cap(q: int) -> int:
    """ceil((q-1)(ln(q-1) + ln 100)); the union bound puts timeouts below 1%."""
    return math.ceil((q - 1) * (math.log(q - 1) + math.log(100)))


def expected_coupon_samples(q: int) -> float:
    """(q-1) * H_{q-1}, the mean number of uniform draws to see all q-1 coupons."""
    if q < 3:
        raise ValueError("coupon collection needs q >= 3")
    return float((q - 1) * sum(Fraction(1, k) for k in range(1, q)))


@dataclass(frozen=True)
class AdviceState:
    """Advice for one Boolean function.

    ``state`` is the materialized sparse state over registers z_1..z_n, value; it
    is None for deferred advice, where the decoder draws the ray outcome from its
    exact marginal and prepares only the post-measurement line state. ``f`` is
    kept for verification by the caller; the decoder never reads it.
    """

    f: BooleanFunction
    field: PrimeField
    g: MultilinearExtension
    state: Optional[sim.SparseState] = None

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def materialized(self) -> bool:
        return self.state is not None

    @property
    def qubits(self) -> int:
        return (self.n + 1) * ceil_log2(self.q)


def build_advice(f: BooleanFunction, *, materialize: Optional[bool] = None) -> AdviceState:
    if f.n < 1:
        raise ValueError("advice needs n >= 1")
    if materialize is None:
        materialize = f.n <= DESK_BOUND
    field = select_prime(f.n)
    g = MultilinearExtension(f, field)
    if not materialize:
        return AdviceState(f, field, g)
    if f.n > DESK_BOUND:
        raise ValueError(f"n={f.n} exceeds the desk-scale bound {DESK_BOUND} for a full state")
    labels = advice_support(g)
    amps = np.full(labels.shape[0], 1.0 / math.sqrt(labels.shape[0]), dtype=np.complex128)
    return AdviceState(f, field, g, sim.prepare_arrays([field.q] * (f.n + 1), labels, amps))


def advice_support(g: MultilinearExtension) -> np.ndarray:
    """Rows (z_1, ..., z_n, g(z)) for every z in F^n, in lexicographic order."""
    z = np.indices((g.q,) * g.n).reshape(g.n, -1).T
    return np.hstack([z, g.grid().reshape(-1, 1)])


@dataclass
class ProtocolTranscript:
    mode: str
    n: int
    q: int
    x: tuple
    ray_outcome: tuple
    branch: str
    samples: list = dc_field(default_factory=list)
    coupons: dict = dc_field(default_factory=dict)
    answer: Optional[int] = None
    samples_used: int = 0
    timed_out: bool = False
    reduced_state: Any = dc_field(default=None, repr=False, compare=False)

    @property
    def completed(self) -> bool:
        return self.answer is not None

    def as_record(self, **extra) -> dict:
        record = dict(extra)
        record.update({
            "mode": self.mode, "n": self.n, "q": self.q, "x": list(self.x),
            "branch": self.branch, "ray": list(self.ray_outcome),
            "samples_used": self.samples_used, "answer": self.answer,
            "timeout": self.timed_out,
        })
        return record


class Backend(NamedTuple):
    """The state operations a run needs; quantum and classical runs plug in different ones."""

    mode: str
    append: Callable
    classical_map: Callable
    collapse: Callable  # (state, regs, rng) -> (outcome, state, record)
    sample: Callable    # (state, regs, rng) -> (outcome, record)
    prepare: Callable   # (layout, labels, weights) -> state


QUANTUM = Backend("quantum", sim.append_registers, sim.apply_classical_map,
                  sim.measure_collapsing, sim.sample_noncollapsing, sim.prepare_arrays)


def _check_input(x: Sequence[int], n: int) -> tuple:
    x = tuple(int(b) for b in x)
    if len(x) != n or any(b not in (0, 1) for b in x):
        raise ValueError(f"input must be {n} bits, got {x}")
    return x


def _line_state(backend: Backend, advice: AdviceState, x: tuple, ray: tuple):
    """Post-measurement state for ray outcome ``ray``, prepared directly."""
    n, q = advice.n, advice.q
    xs, ys = np.asarray(x, dtype=np.int64), np.asarray(ray, dtype=np.int64)
    js = np.arange(1, q, dtype=np.int64) if ys.any() else np.zeros(1, dtype=np.int64)
    points = (xs + js[:, None] * ys) % q
    values = advice.g.evaluate_rows(points)
    labels = np.hstack([points, values[:, None], np.broadcast_to(ys, points.shape)])
    return backend.prepare([q] * (2 * n + 1), labels, np.ones(points.shape[0]))


def _coupon_index(label: tuple, x: tuple, ray: tuple, lead: int, lead_inv: int, q: int) -> int:
    j = (label[lead] - x[lead]) * lead_inv % q
    if j == 0 or any((xi + j * yi) % q != w for xi, yi, w in zip(x, ray, label)):
        raise InconsistentSampleError(f"sample {label} is not on the line through {x} along {ray}")
    return j


def execute(backend: Backend, advice: AdviceState, x: Sequence[int], rng: np.random.Generator,
            sample_cap: Optional[int] = None,
            on_step: Optional[Callable[[str, Any], None]] = None) -> ProtocolTranscript:
    """One decoding run over ``backend``; shared by the quantum and classical protocols."""
    n, q, field = advice.n, advice.q, advice.field
    x = _check_input(x, n)
    cap = default_sample_cap(q) if sample_cap is None else int(sample_cap)
    value_reg, z_regs = n, tuple(range(n))
    ray_regs = tuple(range(n + 1, 2 * n + 1))
    notify = on_step or (lambda name, state: None)
    records = []

    if advice.materialized:
        state = backend.append(advice.state, [q] * n)
        notify("ancilla", state)
        xs = np.asarray(x, dtype=np.int64)
        state = backend.classical_map(state, z_regs, ray_regs,
                                      lambda z: ray_canonical_rows(z - xs, q), vectorized=True)
        notify("ray", state)
        ray, state, rec = backend.collapse(state, ray_regs, rng)
    else:
        # the ray register's marginal is the law of R(z - x) for uniform z
        z = rng.integers(0, q, size=n)
        ray = tuple(int(v) for v in ray_canonical_rows((z - np.asarray(x))[None, :], q)[0])
        state = _line_state(backend, advice, x, ray)
        rec = sim.MeasurementRecord(sim.COLLAPSING, ray_regs, ray, state.step)
    records.append(rec)
    notify("collapse", state)

    if not any(ray):
        (value,), state, rec = backend.collapse(state, value_reg, rng)
        records.append(rec)
        notify("value", state)
        return ProtocolTranscript(backend.mode, n, q, x, ray, ZERO_RAY, records, {},
                                  answer=value, reduced_state=state)

    lead = next(i for i, v in enumerate(ray) if v)
    lead_inv = field.inv(ray[lead])
    line_regs = z_regs + (value_reg,)
    coupons, samples = {}, []
    while len(coupons) < q - 1 and len(samples) < cap:
        label, rec = backend.sample(state, line_regs, rng)
        j = _coupon_index(label[:n], x, ray, lead, lead_inv, q)
        if coupons.setdefault(j, label[n]) != label[n]:
            raise InconsistentSampleError(f"two values seen for p({j})")
        samples.append(rec)
    transcript = ProtocolTranscript(backend.mode, n, q, x, ray, GENERIC, records + samples,
                                    coupons, samples_used=len(samples), reduced_state=state)
    if len(coupons) < q - 1:
        transcript.timed_out = True
        raise CouponTimeout(transcript)
    answer = interpolate_at_zero(coupons.items(), n, field).value
    if answer not in (0, 1):
        raise InconsistentSampleError(f"interpolated p(0) = {answer} is not a bit")
    transcript.answer = answer
    return transcript


def run_protocol(advice: AdviceState, x: Sequence[int], rng: np.random.Generator,
                 sample_cap: Optional[int] = None,
                 on_step: Optional[Callable[[str, Any], None]] = None) -> ProtocolTranscript:
    """Compute f(x) from quantum advice with one collapsing and O(q log q) non-collapsing measurements.

    Raises CouponTimeout (carrying the partial transcript) when ``sample_cap``
    non-collapsing samples do not cover every nonzero j.
    """
    return execute(QUANTUM, advice, x, rng, sample_cap, on_step)


# Warm-ups on the (z, f(z)) superposition over Boolean z.

class WarmupResult(NamedTuple):
    answer: int
    tries: int


def star_advice(f: BooleanFunction) -> sim.SparseState:
    """(1/sqrt(2^n)) sum_{z in {0,1}^n} |z>|f(z)> on n+1 qubits."""
    z = np.indices((2,) * f.n).reshape(f.n, -1).T
    labels = np.hstack([z, f.array[:, None]])
    return sim.prepare_arrays([2] * (f.n + 1), labels, np.ones(labels.shape[0]))


def _star_arity(star: sim.SparseState, x: Sequence[int]) -> tuple:
    n = star.num_registers - 1
    return _check_input(x, n), n


def pdqexp_eval(star: sim.SparseState, x: Sequence[int], rng: np.random.Generator,
                try_cap: int) -> WarmupResult:
    """Measure fresh copies of the advice in full until the z part reads x."""
    x, n = _star_arity(star, x)
    everything = tuple(range(n + 1))
    for tries in range(1, try_cap + 1):
        outcome, _, _ = sim.measure_collapsing(star, everything, rng)
        if outcome[:n] == x:
            return WarmupResult(outcome[n], tries)
    raise TryTimeout(try_cap)


def postselect_eval(star: sim.SparseState, x: Sequence[int], rng: np.random.Generator,
                    try_cap: int) -> WarmupResult:
    """Measure z, keep the copy only if z = x, then read the value register."""
    x, n = _star_arity(star, x)
    for tries in range(1, try_cap + 1):
        z, post, _ = sim.measure_collapsing(star, tuple(range(n)), rng)
        if z == x:
            (value,), _, _ = sim.measure_collapsing(post, n, rng)
            return WarmupResult(value, tries)
    raise TryTimeout(try_cap)
