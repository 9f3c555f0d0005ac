"""Positive probability measures on {0,1}^n.

A :class:`PositiveMeasure` runs in one of two numeric modes. In exact mode
(all weights given as ints, Fractions or rational strings) the weights are
scaled to a common integer denominator and every check compares integers.
In float mode weights are normalized float64 and comparisons are done with
small tolerances.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations
from numbers import Rational
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .lattice import (Event, all_upsets, bit_table, check_dim, index_to_string, is_increasing,
                      popcounts, string_to_index)

LOG_TOL = 1e-12
MONOTONE_TOL = 1e-12
FLOAT_RTOL = 1e-9
_INT64_SAFE = 1 << 31


def _as_rational(x):
    if isinstance(x, bool):
        raise TypeError("boolean weight")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return None


def _int_array(values) -> np.ndarray:
    values = [int(v) for v in values]
    total = sum(values)
    dtype = np.int64 if total < _INT64_SAFE else object
    return np.array(values, dtype=dtype)


def ratio(num, den, exact: bool):
    if exact:
        return Fraction(int(num), int(den))
    return float(num) / float(den)


class PositiveMeasure:
    """Strictly positive probability measure on {0,1}^n, indexed by bit pattern.

    Parameters
    ----------
    n : int
        Number of coordinates.
    weights : sequence
        2^n positive weights; they need not be normalized. Ints, Fractions and
        rational strings select exact mode, anything else float mode.
    """

    def __init__(self, n: int, weights: Sequence, exact: bool | None = None):
        check_dim(n)
        weights = list(weights) if not isinstance(weights, np.ndarray) else weights
        if len(weights) != 1 << n:
            raise ValueError(f"expected {1 << n} weights, got {len(weights)}")
        self.n = n
        rationals = None
        if exact is not False and not (isinstance(weights, np.ndarray) and weights.dtype.kind == "f"):
            try:
                rationals = [_as_rational(w) for w in weights]
            except (TypeError, ValueError):
                rationals = None
            if rationals is not None and any(r is None for r in rationals):
                rationals = None
        if exact and rationals is None:
            raise ValueError("exact mode needs rational weights")
        if rationals is not None:
            if any(r <= 0 for r in rationals):
                raise ValueError("measure must be strictly positive")
            den = reduce(math.lcm, (r.denominator for r in rationals), 1)
            ints = [r.numerator * (den // r.denominator) for r in rationals]
            g = reduce(math.gcd, ints)
            self.exact = True
            self._mass = _int_array(i // g for i in ints)
            self._total = int(sum(int(v) for v in self._mass))
        else:
            arr = np.asarray(weights, dtype=float)
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError("measure must be strictly positive and finite")
            self.exact = False
            self._mass = arr / arr.sum()
            self._total = 1.0
        self._mass.setflags(write=False)

    @classmethod
    def from_log_weights(cls, n: int, logw) -> "PositiveMeasure":
        logw = np.asarray(logw, dtype=float)
        return cls(n, np.exp(logw - logw.max()))

    @property
    def mass(self) -> np.ndarray:
        """Unnormalized weights (integers in exact mode)."""
        return self._mass

    @property
    def total(self):
        return self._total

    @property
    def weights(self) -> np.ndarray:
        """Normalized weights: Fractions in exact mode, floats otherwise."""
        if self.exact:
            return np.array([Fraction(int(m), self._total) for m in self._mass], dtype=object)
        return self._mass

    def log_mass(self) -> np.ndarray:
        if self.exact:
            return np.array([math.log(int(m)) for m in self._mass])
        return np.log(self._mass)

    def __call__(self, omega):
        idx = omega if isinstance(omega, (int, np.integer)) else omega.bits
        return ratio(self._mass[idx], self._total, self.exact)

    def mass_of(self, mask: np.ndarray):
        m = self._mass[np.asarray(mask, dtype=bool)]
        return int(sum(int(v) for v in m)) if self.exact else float(m.sum())

    def probability(self, A) -> Fraction | float:
        mask = A.mask if isinstance(A, Event) else A
        return ratio(self.mass_of(mask), self._total, self.exact)

    def marginal(self, i: int):
        return self.probability(bit_table(self.n, i))

    def to_float(self) -> "PositiveMeasure":
        if not self.exact:
            return self
        return PositiveMeasure(self.n, np.array([int(m) / self._total for m in self._mass]))

    def equals(self, other: "PositiveMeasure", rtol: float = FLOAT_RTOL) -> bool:
        if self.n != other.n:
            return False
        if self.exact and other.exact:
            a = [int(m) * other._total for m in self._mass]
            b = [int(m) * self._total for m in other._mass]
            return a == b
        a = self.to_float().mass
        b = other.to_float().mass
        return bool(np.allclose(a, b, rtol=rtol, atol=0))

    def __repr__(self) -> str:
        return f"PositiveMeasure(n={self.n}, exact={self.exact})"

    def to_dict(self) -> dict:
        if self.exact:
            w = {index_to_string(i, self.n): str(Fraction(int(m), self._total))
                 for i, m in enumerate(self._mass)}
        else:
            w = {index_to_string(i, self.n): float(m) for i, m in enumerate(self._mass)}
        return {"n": self.n, "weights": w}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PositiveMeasure":
        n = int(data["n"])
        table = data["weights"]
        if len(table) != 1 << n:
            raise ValueError(f"expected {1 << n} weights, got {len(table)}")
        weights = [None] * (1 << n)
        for key, w in table.items():
            if len(key) != n:
                raise ValueError(f"bad configuration key {key!r}")
            weights[string_to_index(key)] = w
        exact = all(isinstance(w, (str, int)) for w in weights)
        return cls(n, weights if exact else [float(w) for w in weights], exact=exact or None)

    @classmethod
    def from_json(cls, text: str) -> "PositiveMeasure":
        return cls.from_dict(json.loads(text))


def product_measure(ps: Sequence) -> PositiveMeasure:
    """Product of Bernoulli(p_i) laws; exact when every p_i is rational."""
    n = len(ps)
    check_dim(n)
    rat = [_as_rational(p) if not isinstance(p, float) else None for p in ps]
    if all(r is not None for r in rat):
        w = [Fraction(1)] * (1 << n)
        for i, p in enumerate(rat):
            if not 0 < p < 1:
                raise ValueError("densities must lie in (0,1)")
            w = [wi * (p if (idx >> i) & 1 else 1 - p) for idx, wi in enumerate(w)]
        return PositiveMeasure(n, w)
    logw = np.zeros(1 << n)
    for i, p in enumerate(ps):
        p = float(p)
        if not 0 < p < 1:
            raise ValueError("densities must lie in (0,1)")
        bit = bit_table(n, i)
        logw += np.where(bit, math.log(p), math.log1p(-p))
    return PositiveMeasure.from_log_weights(n, logw)


def uniform_measure(n: int) -> PositiveMeasure:
    return PositiveMeasure(n, [1] * (1 << n))


# ---------------------------------------------------------------- conditioning

class ConditionalMeasure(PositiveMeasure):
    """The law of the free coordinates given the fixed ones.

    Free coordinates keep their relative order: free coordinate ``free[t]`` of
    the base measure becomes coordinate ``t`` here.
    """

    def __init__(self, base: PositiveMeasure, fixed: Mapping[int, int]):
        fixed = {int(k): int(v) for k, v in fixed.items()}
        for k, v in fixed.items():
            if not 0 <= k < base.n or v not in (0, 1):
                raise ValueError(f"bad assignment {k}->{v}")
        free = [c for c in range(base.n) if c not in fixed]
        if not free:
            raise ValueError("conditioning on every coordinate leaves nothing free")
        idx = subcube_indices(base.n, free, fixed)
        m = base.mass[idx]
        super().__init__(len(free), list(m) if base.exact else m, exact=base.exact)
        self.base = base
        self.fixed = fixed
        self.free = tuple(free)


def subcube_indices(n: int, free: Sequence[int], fixed: Mapping[int, int]) -> np.ndarray:
    """Base indices of the sub-cube with ``fixed`` coordinates pinned, ordered by free pattern."""
    k = len(free)
    local = np.arange(1 << k, dtype=np.int64)
    idx = np.full(1 << k, sum(1 << c for c, v in fixed.items() if v), dtype=np.int64)
    for t, c in enumerate(free):
        idx += ((local >> t) & 1) << c
    return idx


def conditional(mu: PositiveMeasure, fixed: Mapping[int, int]) -> ConditionalMeasure:
    return ConditionalMeasure(mu, fixed)


# ------------------------------------------------------------------- FKG checks

def _pair_view(arr: np.ndarray, n: int, i: int, j: int):
    """Split ``arr`` on coordinates i < j; returns (w00, w10, w01, w11) in (bit i, bit j) order."""
    v = arr.reshape(1 << (n - j - 1), 2, 1 << (j - i - 1), 2, 1 << i)
    return v[:, 0, :, 0, :], v[:, 0, :, 1, :], v[:, 1, :, 0, :], v[:, 1, :, 1, :]


def check_fkg_lattice(mu: PositiveMeasure) -> bool:
    """FKG lattice condition via the two-coordinate local inequalities.

    For positive measures it suffices to check mu(w+i+j) mu(w) >= mu(w+i) mu(w+j)
    for every pair of coordinates i, j and every w with w(i) = w(j) = 0.
    """
    n = mu.n
    arr = mu.mass if mu.exact else mu.log_mass()
    for i, j in combinations(range(n), 2):
        w00, w10, w01, w11 = _pair_view(arr, n, i, j)
        if mu.exact:
            if np.any(w11 * w00 < w10 * w01):
                return False
        elif np.any(w11 + w00 < w10 + w01 - LOG_TOL):
            return False
    return True


def check_fkg_all_pairs(mu: PositiveMeasure) -> bool:
    """The FKG lattice condition over every pair of configurations (n <= 10)."""
    check_dim(mu.n, 10)
    size = 1 << mu.n
    a = np.arange(size)[:, None]
    b = np.arange(size)[None, :]
    hi, lo = a | b, a & b
    if mu.exact:
        m = mu.mass
        return bool(np.all(m[hi] * m[lo] >= m[a] * m[b]))
    lw = mu.log_mass()
    return bool(np.all(lw[hi] + lw[lo] >= lw[a] + lw[b] - LOG_TOL))


def one_point_conditionals(mu: PositiveMeasure, j: int):
    """Weights (w0, w1) of coordinate ``j`` closed/open, indexed by the other n-1 coordinates."""
    v = mu.mass.reshape(-1, 2, 1 << j)
    return v[:, 0, :].reshape(-1), v[:, 1, :].reshape(-1)


def check_monotonic(mu: PositiveMeasure) -> bool:
    """1-monotonicity: mu(X_j = 1 | rest = xi) is non-decreasing in xi, for every j.

    Checked on every xi and every single upward flip of xi.
    """
    n = mu.n
    for j in range(n):
        w0, w1 = one_point_conditionals(mu, j)
        if n == 1:
            continue
        if mu.exact:
            s = w0 + w1
        else:
            cond = w1 / (w0 + w1)
        for i in range(n - 1):
            if mu.exact:
                lo1 = w1.reshape(-1, 2, 1 << i)[:, 0, :]
                hi1 = w1.reshape(-1, 2, 1 << i)[:, 1, :]
                lo_s = s.reshape(-1, 2, 1 << i)[:, 0, :]
                hi_s = s.reshape(-1, 2, 1 << i)[:, 1, :]
                # lo1/lo_s <= hi1/hi_s
                if np.any(lo1 * hi_s > hi1 * lo_s):
                    return False
            else:
                c = cond.reshape(-1, 2, 1 << i)
                if np.any(c[:, 1, :] - c[:, 0, :] < -MONOTONE_TOL):
                    return False
    return True


def is_positively_associated(mu: PositiveMeasure, upsets: np.ndarray | None = None) -> bool:
    """mu(A and B) >= mu(A) mu(B) over all pairs of increasing events (n <= 5)."""
    if upsets is None:
        upsets = all_upsets(mu.n)
    return _pa_check(mu.mass, mu.total, mu.exact, upsets)


def _pa_check(mass: np.ndarray, total, exact: bool, upsets: np.ndarray) -> bool:
    if exact:
        dtype = np.int64 if mass.dtype != object and int(total) < _INT64_SAFE else object
        U = upsets.astype(dtype)
        w = mass.astype(dtype)
        m = U @ w
        joint = (U * w) @ U.T
        return bool(np.all(joint * total >= np.outer(m, m)))
    U = upsets.astype(float)
    m = U @ mass
    joint = (U * mass) @ U.T
    return bool(np.all(joint * total >= np.outer(m, m) - FLOAT_RTOL))


def check_strong_positive_association(mu: PositiveMeasure, max_free: int = 4) -> bool:
    """Brute force: every conditional law with at most ``max_free`` free coordinates is PA."""
    n = mu.n
    upset_cache = {}
    for k in range(1, min(n, max_free) + 1):
        ups = upset_cache.setdefault(k, all_upsets(k))
        for free in combinations(range(n), k):
            others = [c for c in range(n) if c not in free]
            for xi in range(1 << len(others)):
                fixed = {c: (xi >> t) & 1 for t, c in enumerate(others)}
                idx = subcube_indices(n, free, fixed)
                sub = mu.mass[idx]
                sub_total = int(sum(int(v) for v in sub)) if mu.exact else float(sub.sum())
                if not _pa_check(sub, sub_total, mu.exact, ups):
                    return False
    return True


# --------------------------------------------------------- stochastic ordering

def stochastically_dominates(mu1: PositiveMeasure, mu2: PositiveMeasure) -> bool:
    """True iff mu1 <=st mu2, decided by a monotone-coupling max-flow test.

    Network: source -> w with capacity mu1(w), w -> w+i along every upward
    cover relation with unbounded capacity, w -> sink with capacity mu2(w).
    A flow saturating the source arcs is exactly a coupling (X, Y) with
    X <= Y, which exists iff mu1 is dominated by mu2.
    """
    if mu1.n != mu2.n:
        raise ValueError("dimension mismatch")
    n = mu1.n
    check_dim(n, 14)
    exact = mu1.exact and mu2.exact
    if exact:
        cap1 = [int(m) * mu2.total for m in mu1.mass]
        cap2 = [int(m) * mu1.total for m in mu2.mass]
        target = mu1.total * mu2.total
    else:
        cap1 = mu1.to_float().mass.tolist()
        cap2 = mu2.to_float().mass.tolist()
        target = 1.0
    G = nx.DiGraph()
    for w in range(1 << n):
        G.add_edge("s", w, capacity=cap1[w])
        G.add_edge(w, "t", capacity=cap2[w])
        for i in range(n):
            if not (w >> i) & 1:
                G.add_edge(w, w | (1 << i))
    value = nx.maximum_flow_value(G, "s", "t")
    if exact:
        return value == target
    return value >= target - FLOAT_RTOL


def dominates_bruteforce(mu1: PositiveMeasure, mu2: PositiveMeasure) -> bool:
    """mu1(A) <= mu2(A) for every increasing A, by enumerating up-sets (n <= 5)."""
    ups = all_upsets(mu1.n)
    if mu1.exact and mu2.exact:
        a = [mu1.probability(u) for u in ups]
        b = [mu2.probability(u) for u in ups]
        return all(x <= y for x, y in zip(a, b))
    a = ups.astype(float) @ mu1.to_float().mass
    b = ups.astype(float) @ mu2.to_float().mass
    return bool(np.all(a <= b + FLOAT_RTOL))


# ---------------------------------------------------------------- tilted family

def _parse_p(p):
    if isinstance(p, float):
        return p
    r = _as_rational(p)
    if r is None:
        return float(p)
    return r


def tilt(base: PositiveMeasure, p) -> PositiveMeasure:
    """Reweight by prod p^w(i) (1-p)^(1-w(i)) and renormalize.

    Exact when ``base`` is exact and ``p`` is rational. ``tilt(base, 1/2)``
    returns ``base`` itself.
    """
    p = _parse_p(p)
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0,1), got {p}")
    if p == Fraction(1, 2):
        return base
    n = base.n
    k = popcounts(n)
    if base.exact and isinstance(p, Fraction):
        a, b = p.numerator, p.denominator - p.numerator
        w = [int(m) * a ** int(c) * b ** (n - int(c)) for m, c in zip(base.mass, k)]
        return PositiveMeasure(n, w)
    p = float(p)
    logw = base.log_mass() + k * math.log(p) + (n - k) * math.log1p(-p)
    return PositiveMeasure.from_log_weights(n, logw)


@dataclass(frozen=True)
class TiltedFamily:
    """The one-parameter family p -> tilt(base, p); member(1/2) is the base."""

    base: PositiveMeasure

    def member(self, p) -> PositiveMeasure:
        return tilt(self.base, p)

    def probability(self, A, p):
        return self.member(p).probability(A)


# --------------------------------------------------------------- covariances

def covariance(mu: PositiveMeasure, i: int, A) -> Fraction | float:
    """cov(X_i, 1_A) under ``mu``, summed exactly over the table."""
    mask = A.mask if isinstance(A, Event) else np.asarray(A, dtype=bool)
    xi = bit_table(mu.n, i)
    return mu.probability(xi & mask) - mu.probability(xi) * mu.probability(mask)


def russo_derivative(family: TiltedFamily, A: Event, p) -> Fraction | float:
    """d/dp mu_p(A) as (1/(p(1-p))) * sum_i cov_p(X_i, 1_A).

    Only increasing events are accepted.
    """
    if not is_increasing(A):
        raise ValueError("russo_derivative is exposed for increasing events only")
    mu = family.member(p)
    p = _parse_p(p)
    if mu.exact:
        p = Fraction(p)
    total = sum(covariance(mu, i, A) for i in range(mu.n))
    return total / (p * (1 - p))
