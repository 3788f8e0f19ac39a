"""Brute-force reference computations, independent of the package's own code paths."""
import itertools
import math

import numpy as np


def trial_division_primes_from(start):
    k = start
    while True:
        if k >= 2 and all(k % d for d in range(2, k)):
            return k
        k += 1


def inverse_by_scan(a, q):
    return next(b for b in range(1, q) if a * b % q == 1)


def mle_by_sum(table, z, q):
    """sum_w f(w) prod_i [z_i w_i + (1 - z_i)(1 - w_i)] mod q; w_1 is the high bit."""
    n = len(z)
    total = 0
    for idx, w in enumerate(itertools.product((0, 1), repeat=n)):
        term = table[idx]
        for zi, wi in zip(z, w):
            term *= zi * wi + (1 - zi) * (1 - wi)
        total += term
    return total % q


def ray_by_scan(v, q):
    """The unique nonzero multiple of v whose leading nonzero entry is 1."""
    if not any(v):
        return tuple(v)
    hits = [tuple(a * c % q for c in v) for a in range(1, q)]
    hits = [h for h in hits if next(c for c in h if c) == 1]
    assert len(hits) == 1
    return hits[0]


def poly_at_zero_by_scan(points, degree, q):
    """p(0) for the polynomial of degree <= degree (over all q^(degree+1)) fitting every point."""
    found = set()
    for coeffs in itertools.product(range(q), repeat=degree + 1):
        if all(sum(c * j ** k for k, c in enumerate(coeffs)) % q == v for j, v in points):
            found.add(coeffs[0])
    assert len(found) == 1, found
    return found.pop()


def grover_dense(N, marked, T):
    """Marked-item probability after T Grover iterations, as dense matrix-vector products."""
    psi = np.full(N, 1 / math.sqrt(N), dtype=complex)
    oracle = np.eye(N)
    oracle[marked, marked] = -1
    s = np.full(N, 1 / math.sqrt(N))
    diffusion = 2 * np.outer(s, s) - np.eye(N)
    for _ in range(T):
        psi = diffusion @ (oracle @ psi)
    return abs(psi[marked]) ** 2


def coupon_mean_exact(k):
    """Expected draws to see all k equiprobable coupons, from the tail-sum formula."""
    # E[T] = sum_{t>=0} P(T > t), P(T > t) by inclusion-exclusion; truncated far in the tail
    total = 0.0
    for t in range(0, 2000):
        p_all = sum((-1) ** i * math.comb(k, i) * ((k - i) / k) ** t for i in range(k + 1))
        total += 1 - p_all
    return total
