"""Random measure generators used by the test-suite and the CLI demos."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .lattice import bit_table, check_dim
from .measure import PositiveMeasure


def random_fkg_measure(n: int, rng: np.random.Generator, exact: bool = True,
                       coupling_density: float = 0.5) -> PositiveMeasure:
    """A measure satisfying the FKG lattice condition by construction.

    Weights are prod a_i^w(i) * prod_{i<j} b_ij^(w(i) w(j)) with b_ij >= 1,
    optionally with one three-body factor c^(w(i)w(j)w(k)), c >= 1. The log of
    such a weight is supermodular, which is the lattice condition.
    In exact mode all factors are small positive integers.
    """
    check_dim(n)
    bits = [bit_table(n, i) for i in range(n)]
    if exact:
        w = np.ones(1 << n, dtype=object)
        for i in range(n):
            a = int(rng.integers(1, 4))
            if rng.random() < 0.5:
                # closed-favouring field, still integer
                w = w * np.where(bits[i], 1, a)
            else:
                w = w * np.where(bits[i], a, 1)
        for i, j in combinations(range(n), 2):
            if rng.random() < coupling_density:
                b = int(rng.integers(2, 4))
                w = w * np.where(bits[i] & bits[j], b, 1)
        if n >= 3 and rng.random() < 0.5:
            i, j, k = rng.choice(n, size=3, replace=False)
            w = w * np.where(bits[i] & bits[j] & bits[k], int(rng.integers(2, 4)), 1)
        return PositiveMeasure(n, list(w))
    logw = np.zeros(1 << n)
    for i in range(n):
        logw += np.where(bits[i], rng.normal(0, 1), 0.0)
    for i, j in combinations(range(n), 2):
        if rng.random() < coupling_density:
            logw += np.where(bits[i] & bits[j], rng.exponential(0.7), 0.0)
    return PositiveMeasure.from_log_weights(n, logw)


def perturb(mu: PositiveMeasure, rng: np.random.Generator, count: int = 1) -> PositiveMeasure:
    """Multiply ``count`` random weights by a random factor; may or may not break FKG."""
    if mu.exact:
        w = [int(m) for m in mu.mass]
        for idx in rng.choice(len(w), size=count, replace=False):
            w[idx] *= int(rng.integers(2, 6))
        return PositiveMeasure(mu.n, w)
    w = mu.mass.copy()
    for idx in rng.choice(len(w), size=count, replace=False):
        w[idx] *= float(np.exp(rng.normal(0, 1.5)))
    return PositiveMeasure(mu.n, w)


def random_positive_measure(n: int, rng: np.random.Generator, exact: bool = True) -> PositiveMeasure:
    """Unstructured positive measure; FKG fails with high probability for n >= 2."""
    if exact:
        return PositiveMeasure(n, [int(v) for v in rng.integers(1, 20, size=1 << n)])
    return PositiveMeasure.from_log_weights(n, rng.normal(0, 1, size=1 << n))
