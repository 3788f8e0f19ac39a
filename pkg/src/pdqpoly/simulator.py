"""Sparse state-vector simulation with collapsing and non-collapsing measurements.

A state lives on a tuple of registers of arbitrary dimension (q-ary for the
advice protocol, binary for the demo circuits) and stores only its support:
an integer label matrix of shape (S, R) plus S complex amplitudes, kept in
lexicographic label order. Every operation returns a new state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

PRUNE_THRESHOLD = 1e-12
NORM_TOLERANCE = 1e-9
UNITARY_TOLERANCE = 1e-9

COLLAPSING = "collapsing"
NON_COLLAPSING = "non-collapsing"

Registers = Union[int, Sequence[int]]


class NormalizationError(RuntimeError):
    """A state drifted away from unit norm."""


@dataclass(frozen=True)
class RegisterLayout:
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise ValueError(f"register dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __add__(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.dims + tuple(other.dims))

    @property
    def size(self) -> int:
        return math.prod(self.dims)


@dataclass(frozen=True)
class MeasurementRecord:
    kind: str
    registers: tuple
    outcome: tuple
    step: int

    def as_dict(self) -> dict:
        return {"kind": self.kind, "registers": list(self.registers),
                "outcome": list(self.outcome), "step": self.step}


def _as_layout(layout) -> RegisterLayout:
    return layout if isinstance(layout, RegisterLayout) else RegisterLayout(tuple(layout))


def _as_registers(registers: Registers, count: int) -> tuple:
    regs = (registers,) if isinstance(registers, (int, np.integer)) else tuple(registers)
    regs = tuple(int(r) for r in regs)
    if len(set(regs)) != len(regs):
        raise ValueError(f"repeated register index in {regs}")
    for r in regs:
        if not 0 <= r < count:
            raise IndexError(f"register {r} out of range for {count} registers")
    return regs


def _radix_weights(dims: Sequence[int]) -> Optional[np.ndarray]:
    """Mixed-radix place values (last register fastest), or None if keys overflow int64."""
    if math.prod(dims) >= 2 ** 62:
        return None
    weights = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        weights[k] = weights[k + 1] * dims[k + 1]
    return weights


def _group_rows(rows: np.ndarray, dims: Sequence[int]):
    """Distinct rows in lexicographic order and the inverse index of each input row."""
    if rows.shape[1] == 0:
        return np.zeros((1, 0), dtype=np.int64), np.zeros(rows.shape[0], dtype=np.int64)
    weights = _radix_weights(dims)
    if weights is not None:
        _, first, inverse = np.unique(rows @ weights, return_index=True, return_inverse=True)
        return rows[first], inverse.reshape(-1)
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    return uniq, inverse.reshape(-1)


class SparseState:
    """A pure state stored by its support. Treat instances as immutable values."""

    __slots__ = ("layout", "labels", "amplitudes", "step", "_marginals")

    def __init__(self, layout: RegisterLayout, labels: np.ndarray, amplitudes: np.ndarray,
                 step: int = 0):
        self.layout = layout
        self.labels = labels
        self.amplitudes = amplitudes
        self.step = step
        self._marginals = {}
        labels.flags.writeable = False
        amplitudes.flags.writeable = False

    @property
    def dims(self) -> tuple:
        return self.layout.dims

    @property
    def num_registers(self) -> int:
        return len(self.layout)

    @property
    def support_size(self) -> int:
        return self.labels.shape[0]

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def support(self) -> list:
        return [tuple(int(v) for v in row) for row in self.labels]

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in row): complex(a)
                for row, a in zip(self.labels, self.amplitudes)}

    def amplitude(self, label: Sequence[int]) -> complex:
        hit = np.all(self.labels == np.asarray(label, dtype=np.int64), axis=1)
        idx = np.flatnonzero(hit)
        return complex(self.amplitudes[idx[0]]) if idx.size else 0j

    def serialize(self) -> tuple:
        """Sorted (label, re, im) triples; equal states serialize identically."""
        return tuple((tuple(int(v) for v in row), float(a.real), float(a.imag))
                     for row, a in zip(self.labels, self.amplitudes))

    def marginal(self, registers: Registers):
        """(outcomes, probabilities, cumulative, inverse) for a register subset, cached."""
        regs = _as_registers(registers, self.num_registers)
        hit = self._marginals.get(regs)
        if hit is None:
            outcomes, inverse = _group_rows(self.labels[:, regs],
                                            [self.dims[r] for r in regs])
            probs = np.bincount(inverse, weights=np.abs(self.amplitudes) ** 2,
                                minlength=outcomes.shape[0])
            hit = (outcomes, probs, np.cumsum(probs), inverse)
            self._marginals[regs] = hit
        return hit

    def __repr__(self) -> str:
        return f"SparseState(dims={self.dims}, support={self.support_size}, step={self.step})"


def _finalize(layout: RegisterLayout, labels: np.ndarray, amps: np.ndarray, step: int,
              *, merge: bool = False) -> SparseState:
    if merge:
        labels, inverse = _group_rows(labels, layout.dims)
        amps = np.bincount(inverse, weights=amps.real, minlength=labels.shape[0]) \
            + 1j * np.bincount(inverse, weights=amps.imag, minlength=labels.shape[0])
    keep = np.abs(amps) >= PRUNE_THRESHOLD
    labels, amps = labels[keep], amps[keep]
    if not merge and labels.shape[0] > 1:
        order = np.lexsort(labels.T[::-1])
        labels, amps = labels[order], amps[order]
    norm2 = float(np.sum(np.abs(amps) ** 2))
    if abs(norm2 - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"squared norm {norm2!r} after step {step}")
    return SparseState(layout, np.ascontiguousarray(labels, dtype=np.int64),
                       np.ascontiguousarray(amps, dtype=np.complex128), step)


def prepare(layout, support: Iterable) -> SparseState:
    """Normalized state with exactly the given support.

    ``support`` is an iterable of (label, amplitude) pairs or a mapping from
    labels to amplitudes; amplitudes are rescaled to unit norm.
    """
    layout = _as_layout(layout)
    items = list(support.items()) if isinstance(support, dict) else list(support)
    if not items:
        raise ValueError("cannot prepare a state with empty support")
    labels = np.asarray([(lab,) if isinstance(lab, (int, np.integer)) else tuple(lab)
                         for lab, _ in items], dtype=np.int64)
    labels = labels.reshape(len(items), len(layout))
    amps = np.asarray([complex(a) for _, a in items], dtype=np.complex128)
    _check_labels(labels, layout)
    if len({tuple(row) for row in labels.tolist()}) != len(items):
        raise ValueError("duplicate labels in support")
    if np.any(np.abs(amps) < PRUNE_THRESHOLD):
        raise ValueError("support amplitudes must be nonzero")
    amps = amps / np.sqrt(np.sum(np.abs(amps) ** 2))
    return _finalize(layout, labels, amps, 0)


def prepare_arrays(layout, labels: np.ndarray, amplitudes: np.ndarray) -> SparseState:
    """Bulk form of :func:`prepare` for callers that already hold label arrays."""
    layout = _as_layout(layout)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1, len(layout))
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if labels.shape[0] == 0 or labels.shape[0] != amps.shape[0]:
        raise ValueError("labels and amplitudes must be nonempty and of equal length")
    _check_labels(labels, layout)
    if _group_rows(labels, layout.dims)[0].shape[0] != labels.shape[0]:
        raise ValueError("duplicate labels in support")
    amps = amps / np.sqrt(np.sum(np.abs(amps) ** 2))
    return _finalize(layout, labels, amps, 0)


def _check_labels(labels: np.ndarray, layout: RegisterLayout) -> None:
    dims = np.asarray(layout.dims, dtype=np.int64)
    if np.any(labels < 0) or np.any(labels >= dims):
        raise ValueError("label out of range for register layout")


def append_registers(state: SparseState, dims: Sequence[int]) -> SparseState:
    """Tensor on fresh registers initialised to |0>."""
    layout = state.layout + RegisterLayout(tuple(dims))
    pad = np.zeros((state.support_size, len(dims)), dtype=np.int64)
    return _finalize(layout, np.hstack([state.labels, pad]), state.amplitudes.copy(),
                     state.step + 1)


def apply_classical_map(state: SparseState, inputs: Registers, target: Registers,
                        h: Callable, *, vectorized: bool = False) -> SparseState:
    """|u>|0> -> |u>|h(u)> on blank target register(s).

    ``h`` receives the input registers' labels as a tuple and returns an int (one
    target) or a tuple. With ``vectorized=True`` it receives the (S, k) label
    array and returns an (S,) or (S, t) array.
    """
    ins = _as_registers(inputs, state.num_registers)
    tgts = _as_registers(target, state.num_registers)
    if set(ins) & set(tgts):
        raise ValueError("input and target registers overlap")
    if np.any(state.labels[:, tgts] != 0):
        raise ValueError("target register is not blank on the support")
    if vectorized:
        out = np.asarray(h(state.labels[:, ins]), dtype=np.int64)
    else:
        out = np.asarray([h(tuple(int(v) for v in row)) for row in state.labels[:, ins]],
                         dtype=np.int64)
    out = out.reshape(state.support_size, len(tgts))
    tdims = np.asarray([state.dims[t] for t in tgts], dtype=np.int64)
    if np.any(out < 0) or np.any(out >= tdims):
        raise ValueError("classical map produced a label outside the target register")
    labels = state.labels.copy()
    labels[:, tgts] = out
    return _finalize(state.layout, labels, state.amplitudes.copy(), state.step + 1)


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOLERANCE) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)


def apply_unitary(state: SparseState, targets: Registers, U: np.ndarray) -> SparseState:
    """Apply a dense unitary on the joint label space of ``targets`` (first target slowest)."""
    tgts = _as_registers(targets, state.num_registers)
    if not tgts:
        raise ValueError("apply_unitary needs at least one target register")
    tdims = [state.dims[t] for t in tgts]
    D = math.prod(tdims)
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (D, D):
        raise ValueError(f"unitary of shape {U.shape} does not match target dimension {D}")
    if not is_unitary(U):
        raise ValueError("matrix is not unitary")
    weights = _radix_weights(tdims)
    col = state.labels[:, tgts] @ weights
    # every output row o receives U[o, col] * amp; zero matrix entries are skipped
    coeff = U[:, col]                                    # (D, S)
    o_idx, s_idx = np.nonzero(np.abs(coeff) > 0)
    labels = state.labels[s_idx].copy()
    labels[:, tgts] = np.stack(np.unravel_index(o_idx, tdims), axis=1)
    amps = coeff[o_idx, s_idx] * state.amplitudes[s_idx]
    return _finalize(state.layout, labels, amps, state.step + 1, merge=True)


def apply_phase(state: SparseState, registers: Registers, phase: Callable) -> SparseState:
    """Diagonal unitary: multiply each term by ``phase(labels)`` (vectorized, unit modulus)."""
    regs = _as_registers(registers, state.num_registers)
    factors = np.asarray(phase(state.labels[:, regs]), dtype=np.complex128).reshape(-1)
    if factors.shape[0] != state.support_size:
        raise ValueError("phase function returned the wrong number of factors")
    if np.any(np.abs(np.abs(factors) - 1.0) > UNITARY_TOLERANCE):
        raise ValueError("phase factors must have unit modulus")
    return _finalize(state.layout, state.labels.copy(), state.amplitudes * factors,
                     state.step + 1)


def distribution(state: SparseState, registers: Registers) -> dict:
    """Exact Born-rule marginal over the given registers."""
    outcomes, probs, _, _ = state.marginal(registers)
    return {tuple(int(v) for v in row): float(p) for row, p in zip(outcomes, probs)}


def _draw(cumulative: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random() * cumulative[-1]
    return min(int(np.searchsorted(cumulative, u, side="right")), cumulative.shape[0] - 1)


def measure_collapsing(state: SparseState, registers: Registers, rng: np.random.Generator):
    """Projective measurement; returns (outcome, post-measurement state, record)."""
    regs = _as_registers(registers, state.num_registers)
    outcomes, probs, cumulative, inverse = state.marginal(regs)
    k = _draw(cumulative, rng)
    keep = inverse == k
    amps = state.amplitudes[keep] / math.sqrt(probs[k])
    post = _finalize(state.layout, state.labels[keep], amps, state.step + 1)
    outcome = tuple(int(v) for v in outcomes[k])
    return outcome, post, MeasurementRecord(COLLAPSING, regs, outcome, post.step)


def sample_noncollapsing(state: SparseState, registers: Registers, rng: np.random.Generator):
    """Independent Born-rule sample that leaves ``state`` untouched; returns (outcome, record)."""
    regs = _as_registers(registers, state.num_registers)
    outcomes, _, cumulative, _ = state.marginal(regs)
    outcome = tuple(int(v) for v in outcomes[_draw(cumulative, rng)])
    return outcome, MeasurementRecord(NON_COLLAPSING, regs, outcome, state.step)
