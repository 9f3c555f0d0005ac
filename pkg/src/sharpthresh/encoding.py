"""Monotone encoding of a monotonic measure by Lebesgue measure on [0,1]^n.

Coordinates are decided one at a time in a fixed order. With ``a`` the
conditional probability that the next coordinate is open given the bits
already decided, the coordinate is set to 1 iff its uniform input exceeds
``1 - a``. The pushforward of Lebesgue measure under this map is the
measure itself, and monotonicity of the measure makes the map
non-decreasing.

Internally the decided bits form a binary recursion tree. Depth ``d`` holds
the 2^d prefixes of the order; a prefix is an integer whose most
significant bit is the first coordinate of the order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .lattice import Configuration, Event, check_dim, index_to_string
from .measure import PositiveMeasure, check_monotonic


@dataclass(frozen=True)
class EncodingCell:
    """The product of intervals on which the encoder equals ``pattern``.

    ``thresholds[k]`` is the open-probability a_k used for coordinate k;
    the k-th interval is (1 - a_k, 1] when pattern(k) = 1 and [0, 1 - a_k]
    otherwise.
    """

    pattern: Configuration
    thresholds: tuple
    volume: Fraction | float

    @property
    def lengths(self) -> tuple:
        return tuple(a if self.pattern[k] else 1 - a for k, a in enumerate(self.thresholds))

    @property
    def intervals(self) -> tuple:
        return tuple((1 - a, 1) if self.pattern[k] else (0, 1 - a)
                     for k, a in enumerate(self.thresholds))

    def upper_corner(self) -> tuple:
        return tuple(hi for _, hi in self.intervals)

    def to_dict(self) -> dict:
        fmt = str if isinstance(self.volume, Fraction) else float
        return {"pattern": str(self.pattern),
                "thresholds": [fmt(a) for a in self.thresholds],
                "volume": fmt(self.volume)}


class MonotoneEncoder:
    """The threshold map [0,1]^n -> {0,1}^n for a monotonic measure.

    Parameters
    ----------
    mu : PositiveMeasure
        Must be monotonic; construction fails otherwise.
    order : sequence of int, optional
        Evaluation order of the coordinates (0-based). Identity by default.
    """

    def __init__(self, mu: PositiveMeasure, order: Sequence[int] | None = None):
        check_dim(mu.n)
        if not check_monotonic(mu):
            raise ValueError("encoder requires a monotonic measure")
        n = mu.n
        order = tuple(range(n)) if order is None else tuple(int(c) for c in order)
        if sorted(order) != list(range(n)):
            raise ValueError("order must be a permutation of the coordinates")
        self.mu = mu
        self.n = n
        self.order = order
        self.exact = mu.exact
        self._build_tree()
        self._cells = None
        self._slices = {}

    def _build_tree(self):
        n, mu = self.n, self.mu
        idx = np.arange(1 << n, dtype=np.int64)
        o = np.zeros_like(idx)
        for t, c in enumerate(self.order):
            o |= ((idx >> c) & 1) << (n - 1 - t)
        P = np.empty(1 << n, dtype=mu.mass.dtype)
        P[o] = mu.mass
        self._order_index = o
        # cylinder masses per depth
        cyl = [None] * (n + 1)
        cyl[n] = P
        for d in range(n - 1, -1, -1):
            cyl[d] = cyl[d + 1].reshape(-1, 2).sum(axis=1)
        self._cyl = cyl
        self._a = []
        self._a_float = []
        for d in range(n):
            num = cyl[d + 1].reshape(-1, 2)[:, 1]
            den = cyl[d]
            if self.exact:
                a = [Fraction(int(x), int(y)) for x, y in zip(num, den)]
                self._a.append(a)
                self._a_float.append(np.array([float(v) for v in a]))
            else:
                a = num / den
                self._a.append(a)
                self._a_float.append(a)

    def threshold(self, depth: int, prefix: int):
        """Open-probability a for the coordinate ``order[depth]`` after ``prefix``."""
        return self._a[depth][prefix]

    # ------------------------------------------------------------ evaluation
    def encode_point(self, x: Sequence) -> Configuration:
        if len(x) != self.n:
            raise ValueError("point has wrong dimension")
        v = 0
        bits = 0
        for d, c in enumerate(self.order):
            a = self._a[d][v]
            xc = x[c]
            if not 0 <= xc <= 1:
                raise ValueError("point outside the unit cube")
            b = 1 if xc > 1 - a else 0
            v = 2 * v + b
            bits |= b << c
        return Configuration(bits, self.n)

    def encode_many(self, X: np.ndarray) -> np.ndarray:
        """Vectorized encoding of the rows of ``X``; returns configuration indices."""
        X = np.asarray(X, dtype=float)
        v = np.zeros(len(X), dtype=np.int64)
        bits = np.zeros(len(X), dtype=np.int64)
        for d, c in enumerate(self.order):
            a = self._a_float[d][v]
            b = (X[:, c] > 1.0 - a).astype(np.int64)
            v = 2 * v + b
            bits |= b << c
        return bits

    # ----------------------------------------------------------------- cells
    def iter_cells(self) -> Iterator[EncodingCell]:
        """Cells in depth-first order of the recursion tree."""
        n = self.n
        one = Fraction(1) if self.exact else 1.0

        def walk(d, v, bits, thr, vol):
            if d == n:
                yield EncodingCell(Configuration(bits, n), tuple(thr), vol)
                return
            c = self.order[d]
            a = self._a[d][v]
            thr[c] = a
            yield from walk(d + 1, 2 * v, bits, thr, vol * (1 - a))
            thr[c] = a
            yield from walk(d + 1, 2 * v + 1, bits | (1 << c), thr, vol * a)
            thr[c] = None

        yield from walk(0, 0, 0, [None] * n, one)

    def cell_decomposition(self) -> list[EncodingCell]:
        if self._cells is None:
            self._cells = list(self.iter_cells())
        return self._cells

    def cells_by_pattern(self) -> dict[int, EncodingCell]:
        return {c.pattern.bits: c for c in self.cell_decomposition()}

    def cells_to_json(self) -> str:
        return json.dumps([c.to_dict() for c in self.cell_decomposition()], indent=1)

    # ------------------------------------------------------------ influences
    def slice_volumes(self, i: int) -> dict[int, Fraction | float]:
        """(n-1)-volume of each cell's slice at U_i = u, where u = pattern(i).

        A cell meets the hyperplane U_i = 1 iff pattern(i) = 1 (and U_i = 0
        iff pattern(i) = 0); the slice volume is the cell volume divided by
        the length of the i-th interval.
        """
        if i not in self._slices:
            self._slices[i] = {cell.pattern.bits: cell.volume / cell.lengths[i]
                               for cell in self.cell_decomposition()}
        return dict(self._slices[i])

    def continuous_influence(self, A, i: int):
        """lambda(B | U_i = 1) - lambda(B | U_i = 0) for B the preimage of A."""
        mask = A.mask if isinstance(A, Event) else np.asarray(A, dtype=bool)
        zero = Fraction(0) if self.exact else 0.0
        on, off = zero, zero
        self.slice_volumes(i)
        for bits, s in self._slices[i].items():
            if mask[bits]:
                if (bits >> i) & 1:
                    on += s
                else:
                    off += s
        return on - off

    def reorder(self, j: int) -> "MonotoneEncoder":
        """Encoder with coordinate ``j`` moved to the front of the order."""
        if not 0 <= j < self.n:
            raise IndexError(j)
        order = (j,) + tuple(c for c in self.order if c != j)
        if order == self.order:
            return self
        return MonotoneEncoder(self.mu, order)


def encode_point(enc: MonotoneEncoder, x) -> Configuration:
    return enc.encode_point(x)


def cell_decomposition(enc: MonotoneEncoder) -> list[EncodingCell]:
    return enc.cell_decomposition()


def continuous_influence(enc: MonotoneEncoder, A, i: int):
    return enc.continuous_influence(A, i)


def reorder(enc: MonotoneEncoder, j: int) -> MonotoneEncoder:
    return enc.reorder(j)


# ---------------------------------------------------------------- verification

@dataclass
class PushforwardStatistic:
    exact_match: bool
    max_volume_error: float
    samples: int
    tv_distance: float
    chi_square: float
    dof: int


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def verify_pushforward(enc: MonotoneEncoder, samples: int, seed: int,
                       chunk: int = 1 << 18) -> PushforwardStatistic:
    """Exact cell-volume check plus an empirical law of f(U) for uniform U."""
    mu = enc.mu
    weights = mu.weights
    errs = []
    exact_match = True
    for cell in enc.cell_decomposition():
        w = weights[cell.pattern.bits]
        if enc.exact:
            exact_match &= cell.volume == w
            errs.append(abs(float(cell.volume - w)))
        else:
            errs.append(abs(cell.volume - w))
    if not enc.exact:
        exact_match = max(errs) <= 1e-12
    counts = np.zeros(1 << enc.n, dtype=np.int64)
    rng = _rng(seed)
    left = samples
    while left > 0:
        m = min(chunk, left)
        counts += np.bincount(enc.encode_many(rng.random((m, enc.n))), minlength=1 << enc.n)
        left -= m
    p = mu.to_float().mass
    tv = 0.0
    chi2 = 0.0
    if samples > 0:
        emp = counts / samples
        tv = 0.5 * float(np.abs(emp - p).sum())
        expected = samples * p
        chi2 = float(((counts - expected) ** 2 / expected).sum())
    return PushforwardStatistic(bool(exact_match), float(max(errs)), samples, tv, chi2,
                                (1 << enc.n) - 1)


def check_threshold_tree(enc: MonotoneEncoder) -> bool:
    """Thresholds are non-decreasing in the decided prefix (every depth, every cover pair)."""
    for d in range(1, enc.n):
        a = enc._a[d]
        for v in range(1 << d):
            for t in range(d):
                bit = 1 << t
                if not v & bit and a[v] > a[v | bit]:
                    return False
    return True


def verify_monotone_map(enc: MonotoneEncoder, trials: int, seed: int) -> bool:
    """f(x) <= f(x') on random comparable pairs, and on all cell upper corners for n <= 8."""
    rng = _rng(seed)
    n = enc.n
    X = rng.random((trials, n))
    raise_mask = rng.random((trials, n)) < 0.5
    Y = X + raise_mask * (1 - X) * rng.random((trials, n))
    fx = enc.encode_many(X)
    fy = enc.encode_many(Y)
    if np.any(fx & ~fy):
        return False
    if n <= 8:
        if not check_threshold_tree(enc):
            return False
        corners = [(c.upper_corner(), c.pattern.bits) for c in enc.cell_decomposition()]
        for (x, fx_), (y, fy_) in combinations(corners, 2):
            if all(a <= b for a, b in zip(x, y)) and fx_ & ~fy_:
                return False
            if all(b <= a for a, b in zip(x, y)) and fy_ & ~fx_:
                return False
        # the corner of each cell must encode to the cell's own pattern
        for x, bits in corners:
            if enc.encode_point(x).bits != bits:
                return False
    return True


def pinned_domination(enc: MonotoneEncoder, j: int, trials: int, seed: int,
                      pin: float = 1.0) -> bool:
    """With U_j pinned, compare g (order with j first) against f pointwise.

    For ``pin = 1`` the reordered map dominates (g >= f); for ``pin = 0`` it
    is dominated (g <= f).
    """
    g_enc = enc.reorder(j)
    X = _rng(seed).random((trials, enc.n))
    X[:, j] = pin
    f = enc.encode_many(X)
    g = g_enc.encode_many(X)
    if pin == 1.0:
        return not np.any(f & ~g)
    return not np.any(g & ~f)


def cell_table(enc: MonotoneEncoder) -> list[tuple[str, Fraction | float]]:
    return [(index_to_string(c.pattern.bits, enc.n), c.volume) for c in enc.cell_decomposition()]
