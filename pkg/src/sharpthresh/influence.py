"""Conditional and absolute influences, symmetry groups and threshold bounds."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .lattice import Event, bit_table, check_dim, popcounts
from .measure import PositiveMeasure, TiltedFamily, _parse_p, russo_derivative


def _mask(A) -> np.ndarray:
    return A.mask if isinstance(A, Event) else np.asarray(A, dtype=bool)


def conditional_influence(mu: PositiveMeasure, A, i: int):
    """mu(A | X_i = 1) - mu(A | X_i = 0)."""
    m = _mask(A)
    xi = bit_table(mu.n, i)
    on, off = mu.mass_of(xi), mu.mass_of(~xi)
    a_on, a_off = mu.mass_of(m & xi), mu.mass_of(m & ~xi)
    if mu.exact:
        return Fraction(a_on, on) - Fraction(a_off, off)
    return a_on / on - a_off / off


def pivotal_mask(A, n: int, i: int) -> np.ndarray:
    """Configurations w with w^i in A and w_i not in A (both values of w(i))."""
    m = _mask(A).reshape(-1, 2, 1 << i)
    piv = m[:, 1, :] & ~m[:, 0, :]
    return np.stack([piv, piv], axis=1).reshape(-1)


def absolute_influence(mu: PositiveMeasure, A, i: int):
    """mu(w^i in A, w_i not in A), the probability that coordinate i is pivotal."""
    return mu.probability(pivotal_mask(A, mu.n, i))


@dataclass
class InfluenceReport:
    conditional: list
    absolute: list
    probability: float
    ratio: float | None

    @property
    def n(self) -> int:
        return len(self.conditional)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conditional"] = [float(v) for v in self.conditional]
        d["absolute"] = [float(v) for v in self.absolute]
        d["probability"] = float(self.probability)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["coordinate", "conditional_influence", "absolute_influence"])
        for i, (c, a) in enumerate(zip(self.conditional, self.absolute)):
            w.writerow([i + 1, float(c), float(a)])
        return buf.getvalue()


def influence_ratio(max_influence, prob, n: int) -> float | None:
    """max_i I_A(i) * N / (min(mu(A), 1 - mu(A)) * log N); None when undefined."""
    spread = min(prob, 1 - prob)
    if n < 2 or spread == 0:
        return None
    return float(max_influence) * n / (float(spread) * math.log(n))


def influence_report(mu: PositiveMeasure, A) -> InfluenceReport:
    cond = [conditional_influence(mu, A, i) for i in range(mu.n)]
    absl = [absolute_influence(mu, A, i) for i in range(mu.n)]
    prob = mu.probability(_mask(A))
    return InfluenceReport(cond, absl, prob, influence_ratio(max(cond), prob, mu.n))


# ------------------------------------------------------------------- symmetry

class SymmetryGroup:
    """Permutation group on coordinates, given by generators.

    A permutation ``pi`` acts on configurations by (pi w)(i) = w(pi[i]).
    """

    def __init__(self, n: int, generators: Sequence[Sequence[int]]):
        self.n = n
        gens = []
        for g in generators:
            g = tuple(int(x) for x in g)
            if sorted(g) != list(range(n)):
                raise ValueError(f"generator is not a permutation of {n} coordinates")
            gens.append(g)
        self.generators = tuple(gens)

    @classmethod
    def symmetric(cls, n: int) -> "SymmetryGroup":
        if n == 1:
            return cls(1, [(0,)])
        swap = (1, 0) + tuple(range(2, n))
        cycle = tuple(range(1, n)) + (0,)
        return cls(n, [swap, cycle])

    @classmethod
    def cyclic(cls, n: int) -> "SymmetryGroup":
        return cls(n, [tuple((i + 1) % n for i in range(n))])

    def orbit(self, i: int) -> set[int]:
        seen = {i}
        queue = deque([i])
        while queue:
            j = queue.popleft()
            for g in self.generators:
                for k in (g[j], g.index(j)):
                    if k not in seen:
                        seen.add(k)
                        queue.append(k)
        return seen

    def is_transitive(self) -> bool:
        return len(self.orbit(0)) == self.n

    def closure(self, limit: int = 100_000) -> list[tuple[int, ...]]:
        ident = tuple(range(self.n))
        seen = {ident}
        queue = deque([ident])
        while queue:
            h = queue.popleft()
            for g in self.generators:
                c = tuple(h[g[i]] for i in range(self.n))
                if c not in seen:
                    if len(seen) >= limit:
                        raise ValueError("group larger than closure limit")
                    seen.add(c)
                    queue.append(c)
        return sorted(seen)

    def index_map(self, g: Sequence[int]) -> np.ndarray:
        """Array sending each configuration index w to the index of g w."""
        check_dim(self.n)
        idx = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros_like(idx)
        for i in range(self.n):
            out |= ((idx >> g[i]) & 1) << i
        return out

    def act(self, g: Sequence[int], bits: int) -> int:
        return sum(((bits >> g[i]) & 1) << i for i in range(self.n))


def check_invariance(mu: PositiveMeasure | None, A: Event | None, G: SymmetryGroup) -> bool:
    """mu(w) = mu(g w) and A = gA for every generator g."""
    for g in G.generators:
        perm = G.index_map(g)
        if mu is not None:
            if mu.exact:
                if not np.array_equal(mu.mass[perm], mu.mass):
                    return False
            elif not np.allclose(mu.mass[perm], mu.mass, rtol=1e-12, atol=0):
                return False
        if A is not None and not np.array_equal(A.mask[perm], A.mask):
            return False
    return True


def check_event_invariance_sampled(predicate, G: SymmetryGroup, rng: np.random.Generator,
                                   samples: int = 1000, density: float = 0.5) -> bool:
    """Invariance of an intensional event on random configurations (any n)."""
    for _ in range(samples):
        bits = rng.random(G.n) < density
        w = int(sum(1 << i for i in np.flatnonzero(bits)))
        base = bool(predicate(w))
        for g in G.generators:
            if bool(predicate(G.act(g, w))) != base:
                return False
    return True


def influence_equalization(family: TiltedFamily, A: Event, G: SymmetryGroup, p) -> list:
    """The vector of I_{p,A}(i); all entries coincide under a transitive invariance group."""
    if not G.is_transitive():
        raise ValueError("symmetry group is not transitive")
    if not check_invariance(family.base, A, G):
        raise ValueError("measure or event is not invariant under the group")
    mu = family.member(p)
    return [conditional_influence(mu, A, i) for i in range(mu.n)]


def sharp_threshold_bound(family: TiltedFamily, A: Event, p, c: float):
    """(d/dp mu_p(A), c xi_p / (p(1-p)) * min(mu_p(A), 1-mu_p(A)) * log N).

    ``c`` is a probe: no value of the universal constant is known.
    """
    mu = family.member(p)
    lhs = float(russo_derivative(family, A, p))
    pf = float(_parse_p(p))
    marg = [float(mu.marginal(i)) for i in range(mu.n)]
    xi_p = min(m * (1 - m) for m in marg)
    prob = float(mu.probability(A))
    rhs = c * xi_p / (pf * (1 - pf)) * min(prob, 1 - prob) * math.log(mu.n)
    return lhs, rhs


def integrate_threshold(p1: float, p2: float, N: int, q: float, c: float) -> float:
    """Lower bound 1 - N^(-c (p2 - p1) / q) / 2 from integrating the steepness inequality."""
    if not 0 < p1 <= p2 < 1:
        raise ValueError("need 0 < p1 <= p2 < 1")
    if N < 2 or q < 1 or c <= 0:
        raise ValueError("need N >= 2, q >= 1, c > 0")
    return 1 - 0.5 * N ** (-c * (p2 - p1) / q)


# ------------------------------------------------------- Bernoulli mixture

def mixture_measure(n: int) -> PositiveMeasure:
    """Half Bernoulli(1/3)^n plus half Bernoulli(2/3)^n, as an exact table."""
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be a positive odd integer")
    check_dim(n)
    k = popcounts(n)
    # (1/3)^k (2/3)^(n-k) + (2/3)^k (1/3)^(n-k) = (2^(n-k) + 2^k) / 3^n
    return PositiveMeasure(n, [2 ** (n - int(c)) + 2 ** int(c) for c in k])


def majority_event(n: int) -> Event:
    return Event(n, mask=popcounts(n) * 2 > n, label="majority")


def _binom_tail(m: int, s0: int, success: int, failure: int) -> int:
    """sum_{s >= s0} C(m, s) success^s failure^(m-s) (unnormalized, exact)."""
    return sum(math.comb(m, s) * success ** s * failure ** (m - s) for s in range(max(s0, 0), m + 1))


def mixture_influences(N: int) -> tuple[Fraction, Fraction]:
    """Exact (conditional, absolute) influence of coordinate 1 on {S_N > N/2}.

    Uses binomial sums over the other N-1 coordinates; each Bernoulli(1/3)
    term carries weight 1^s 2^(m-s) / 3^m and each Bernoulli(2/3) term
    2^s 1^(m-s) / 3^m.
    """
    if N < 1 or N % 2 == 0:
        raise ValueError("N must be a positive odd integer")
    m = N - 1
    half = (N + 1) // 2  # A = {S >= half}
    den = 3 ** m
    lo_on = Fraction(_binom_tail(m, half - 1, 1, 2), den)   # P_{1/3}(S' >= half-1)
    hi_on = Fraction(_binom_tail(m, half - 1, 2, 1), den)
    lo_off = Fraction(_binom_tail(m, half, 1, 2), den)
    hi_off = Fraction(_binom_tail(m, half, 2, 1), den)
    # P(X1 = 1) = P(X1 = 0) = 1/2
    a_on = (Fraction(1, 3) * lo_on + Fraction(2, 3) * hi_on) / 2
    a_off = (Fraction(2, 3) * lo_off + Fraction(1, 3) * hi_off) / 2
    cond = a_on / Fraction(1, 2) - a_off / Fraction(1, 2)
    # coordinate 1 pivotal iff S' = half - 1
    s = half - 1
    piv = Fraction(math.comb(m, s) * (2 ** (m - s) + 2 ** s), 2 * den)
    return cond, piv
