"""The same decoder run on an explicit probability distribution instead of amplitudes.

Nothing in the protocol relies on interference, so replacing the advice state by
the uniform distribution over (z, g(z)), collapsing measurement by conditioning
and non-collapsing measurement by sampling gives an identical algorithm.
"""
from __future__ import annotations

from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import simulator as sim
from .polynomials import BooleanFunction
from .protocol import (DESK_BOUND, AdviceState, Backend, ProtocolTranscript, advice_support,
                       build_advice, execute)
from .simulator import MeasurementRecord, RegisterLayout, _as_registers, _draw, _group_rows

MASS_TOLERANCE = 1e-9


class DiscreteDistribution:
    """Probability mass function over label tuples, stored by its support."""

    __slots__ = ("layout", "labels", "masses", "step", "_marginals")

    def __init__(self, layout: RegisterLayout, labels: np.ndarray, masses: np.ndarray,
                 step: int = 0):
        labels = np.ascontiguousarray(labels, dtype=np.int64)
        masses = np.ascontiguousarray(masses, dtype=np.float64)
        if np.any(masses < 0):
            raise ValueError("negative probability mass")
        if abs(float(masses.sum()) - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"masses sum to {masses.sum()!r}")
        if labels.shape[0] > 1:
            order = np.lexsort(labels.T[::-1])
            labels, masses = labels[order], masses[order]
        labels.flags.writeable = False
        masses.flags.writeable = False
        self.layout = layout
        self.labels = labels
        self.masses = masses
        self.step = step
        self._marginals = {}

    @property
    def dims(self) -> tuple:
        return self.layout.dims

    @property
    def num_registers(self) -> int:
        return len(self.layout)

    @property
    def support_size(self) -> int:
        return self.labels.shape[0]

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in row): float(m) for row, m in zip(self.labels, self.masses)}

    def serialize(self) -> tuple:
        return tuple((tuple(int(v) for v in row), float(m))
                     for row, m in zip(self.labels, self.masses))

    def marginal(self, registers):
        regs = _as_registers(registers, self.num_registers)
        hit = self._marginals.get(regs)
        if hit is None:
            outcomes, inverse = _group_rows(self.labels[:, regs], [self.dims[r] for r in regs])
            probs = np.bincount(inverse, weights=self.masses, minlength=outcomes.shape[0])
            hit = (outcomes, probs, np.cumsum(probs), inverse)
            self._marginals[regs] = hit
        return hit

    def __repr__(self) -> str:
        return f"DiscreteDistribution(dims={self.dims}, support={self.support_size})"


def from_weights(layout, labels: np.ndarray, weights: np.ndarray) -> DiscreteDistribution:
    layout = layout if isinstance(layout, RegisterLayout) else RegisterLayout(tuple(layout))
    labels = np.asarray(labels, dtype=np.int64).reshape(-1, len(layout))
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if np.any(labels < 0) or np.any(labels >= np.asarray(layout.dims)):
        raise ValueError("label out of range for register layout")
    if _group_rows(labels, layout.dims)[0].shape[0] != labels.shape[0]:
        raise ValueError("duplicate labels in support")
    return DiscreteDistribution(layout, labels, weights / weights.sum())


def build_rand_advice(f: BooleanFunction, *, materialize: Optional[bool] = None) -> AdviceState:
    """Uniform distribution over {(z, g(z)) : z in F^n}, wrapped like quantum advice."""
    advice = build_advice(f, materialize=False)
    if materialize is None:
        materialize = f.n <= DESK_BOUND
    if not materialize:
        return advice
    if f.n > DESK_BOUND:
        raise ValueError(f"n={f.n} exceeds the desk-scale bound {DESK_BOUND} for full advice")
    labels = advice_support(advice.g)
    dist = from_weights([advice.q] * (f.n + 1), labels, np.ones(labels.shape[0]))
    return AdviceState(advice.f, advice.field, advice.g, dist)


def distribution(dist: DiscreteDistribution, registers) -> dict:
    outcomes, probs, _, _ = dist.marginal(registers)
    return {tuple(int(v) for v in row): float(p) for row, p in zip(outcomes, probs)}


def append_registers(dist: DiscreteDistribution, dims: Sequence[int]) -> DiscreteDistribution:
    layout = dist.layout + RegisterLayout(tuple(dims))
    pad = np.zeros((dist.support_size, len(dims)), dtype=np.int64)
    return DiscreteDistribution(layout, np.hstack([dist.labels, pad]), dist.masses, dist.step + 1)


def apply_map(dist: DiscreteDistribution, inputs, target, h: Callable, *,
              vectorized: bool = False) -> DiscreteDistribution:
    """Push forward u -> (u, h(u)) into blank target registers."""
    ins = _as_registers(inputs, dist.num_registers)
    tgts = _as_registers(target, dist.num_registers)
    if np.any(dist.labels[:, tgts] != 0):
        raise ValueError("target register is not blank on the support")
    if vectorized:
        out = np.asarray(h(dist.labels[:, ins]), dtype=np.int64)
    else:
        out = np.asarray([h(tuple(int(v) for v in row)) for row in dist.labels[:, ins]],
                         dtype=np.int64)
    out = out.reshape(dist.support_size, len(tgts))
    if np.any(out < 0) or np.any(out >= np.asarray([dist.dims[t] for t in tgts])):
        raise ValueError("map produced a label outside the target register")
    labels = dist.labels.copy()
    labels[:, tgts] = out
    return DiscreteDistribution(dist.layout, labels, dist.masses, dist.step + 1)


def condition(dist: DiscreteDistribution, registers, rng: np.random.Generator):
    """Collapsing analogue: draw an outcome and renormalize onto its fiber."""
    outcome, post, _ = _condition(dist, registers, rng)
    return outcome, post


def sample(dist: DiscreteDistribution, registers, rng: np.random.Generator) -> tuple:
    """Non-collapsing analogue: an independent draw; ``dist`` is left as it was."""
    return _sample(dist, registers, rng)[0]


def _condition(dist, registers, rng):
    regs = _as_registers(registers, dist.num_registers)
    outcomes, probs, cumulative, inverse = dist.marginal(regs)
    k = _draw(cumulative, rng)
    keep = inverse == k
    post = DiscreteDistribution(dist.layout, dist.labels[keep], dist.masses[keep] / probs[k],
                                dist.step + 1)
    outcome = tuple(int(v) for v in outcomes[k])
    return outcome, post, MeasurementRecord(sim.COLLAPSING, regs, outcome, post.step)


def _sample(dist, registers, rng):
    regs = _as_registers(registers, dist.num_registers)
    outcomes, _, cumulative, _ = dist.marginal(regs)
    outcome = tuple(int(v) for v in outcomes[_draw(cumulative, rng)])
    return outcome, MeasurementRecord(sim.NON_COLLAPSING, regs, outcome, dist.step)


CLASSICAL = Backend("classical", append_registers, apply_map, _condition, _sample, from_weights)


def run_pdpp(advice: AdviceState, x: Sequence[int], rng: np.random.Generator,
             sample_cap: Optional[int] = None,
             on_step: Optional[Callable[[str, Any], None]] = None) -> ProtocolTranscript:
    """The decoder of :func:`pdqpoly.protocol.run_protocol` with conditioning and sampling."""
    if advice.materialized and not isinstance(advice.state, DiscreteDistribution):
        raise TypeError("run_pdpp needs randomized advice from build_rand_advice")
    return execute(CLASSICAL, advice, x, rng, sample_cap, on_step)
