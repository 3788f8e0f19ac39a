"""Simulation of non-collapsing measurements with quantum advice.

Modules: ``field`` (F_q arithmetic), ``polynomials`` (multilinear extension, rays,
interpolation), ``simulator`` (sparse states and measurements), ``protocol``
(decoding f(x) from advice), ``classical`` (the same decoder over distributions),
``demos`` (collision finding, Grover, Index) and ``harness`` (the CLI).
"""
from .classical import DiscreteDistribution, build_rand_advice, run_pdpp
from .field import FieldElement, FieldVector, PrimeField, invert, select_prime
from .polynomials import (BooleanFunction, LineSamplePoint, MultilinearExtension,
                          interpolate_at_zero, line_eval, mle_eval, ray_canonical)
from .protocol import (AdviceState, CouponTimeout, ProtocolTranscript, build_advice,
                       expected_coupon_samples, pdqexp_eval, postselect_eval, run_protocol)
from .simulator import (MeasurementRecord, RegisterLayout, SparseState, apply_classical_map,
                        apply_unitary, distribution, measure_collapsing, prepare,
                        sample_noncollapsing)

__version__ = "0.1.0"
