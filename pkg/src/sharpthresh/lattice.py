"""Configurations of the discrete cube {0,1}^n, the coordinatewise order, and events.

Coordinate ``i`` (0-based) of a configuration is bit ``i`` of its integer
index. User-facing strings are written coordinate 1 first, so ``"100"`` is
the configuration with only the first coordinate open.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

MAX_ENUM_DIM = 24


class DimensionError(ValueError):
    """Raised when an exact whole-space computation exceeds the enumeration limit."""


def check_dim(n: int, limit: int = MAX_ENUM_DIM) -> None:
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if n > limit:
        raise DimensionError(f"dimension {n} exceeds enumeration limit {limit}")


@dataclass(frozen=True)
class Configuration:
    """A point of {0,1}^n stored as an integer bit pattern."""

    bits: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits {self.bits:#x} do not fit in {self.n} coordinates")

    @classmethod
    def from_string(cls, s: str) -> "Configuration":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a binary string: {s!r}")
        return cls(string_to_index(s), len(s))

    @classmethod
    def from_bits(cls, values: Sequence[int]) -> "Configuration":
        return cls(sum(1 << i for i, v in enumerate(values) if v), len(values))

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __str__(self) -> str:
        return index_to_string(self.bits, self.n)

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.n)]

    def with_bit(self, i: int, value: int) -> "Configuration":
        b = self.bits | (1 << i) if value else self.bits & ~(1 << i)
        return Configuration(b, self.n)

    def count(self) -> int:
        return bin(self.bits).count("1")


def index_to_string(index: int, n: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(n))


def string_to_index(s: str) -> int:
    return sum(1 << i for i, ch in enumerate(s) if ch == "1")


def _same_dim(a: Configuration, b: Configuration) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} != {b.n}")


def join(a: Configuration, b: Configuration) -> Configuration:
    _same_dim(a, b)
    return Configuration(a.bits | b.bits, a.n)


def meet(a: Configuration, b: Configuration) -> Configuration:
    _same_dim(a, b)
    return Configuration(a.bits & b.bits, a.n)


def leq(a: Configuration, b: Configuration) -> bool:
    _same_dim(a, b)
    return a.bits & ~b.bits == 0


def popcounts(n: int) -> np.ndarray:
    """Number of open coordinates of every configuration, indexed by bit pattern."""
    check_dim(n)
    counts = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        counts.reshape(-1, 2, 1 << i)[:, 1, :] += 1
    return counts


def bit_table(n: int, i: int) -> np.ndarray:
    """Boolean array: coordinate ``i`` is open, over all 2^n configurations."""
    check_dim(n)
    t = np.zeros(1 << n, dtype=bool)
    t.reshape(-1, 2, 1 << i)[:, 1, :] = True
    return t


class Event:
    """A subset of {0,1}^n.

    Stored extensionally as a boolean mask over all 2^n configurations, or
    intensionally as a predicate on integer bit patterns. The mask is built
    on demand from the predicate when ``n`` is within the enumeration limit.
    """

    def __init__(self, n: int, mask: np.ndarray | None = None,
                 predicate: Callable[[int], bool] | None = None, label: str = ""):
        if n < 1:
            raise ValueError("n must be >= 1")
        if mask is None and predicate is None:
            raise ValueError("event needs a mask or a predicate")
        self.n = n
        self.label = label
        self._predicate = predicate
        self._mask = None
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (1 << n,):
                raise ValueError(f"mask must have length 2^{n}")
            mask.setflags(write=False)
            self._mask = mask

    @classmethod
    def from_mask(cls, mask, label: str = "") -> "Event":
        mask = np.asarray(mask, dtype=bool)
        n = int(mask.size).bit_length() - 1
        if mask.size != 1 << n:
            raise ValueError("mask length must be a power of two")
        return cls(n, mask=mask, label=label)

    @classmethod
    def from_members(cls, n: int, members: Iterable, label: str = "") -> "Event":
        check_dim(n)
        mask = np.zeros(1 << n, dtype=bool)
        for m in members:
            if isinstance(m, Configuration):
                if m.n != n:
                    raise ValueError("member dimension mismatch")
                m = m.bits
            elif isinstance(m, str):
                if len(m) != n:
                    raise ValueError(f"member {m!r} has wrong length")
                m = string_to_index(m)
            mask[m] = True
        return cls(n, mask=mask, label=label)

    @classmethod
    def from_predicate(cls, n: int, predicate: Callable[[int], bool], label: str = "") -> "Event":
        return cls(n, predicate=predicate, label=label)

    @classmethod
    def full(cls, n: int) -> "Event":
        return cls(n, mask=np.ones(1 << n, dtype=bool), label="Omega")

    @classmethod
    def coordinate(cls, n: int, i: int) -> "Event":
        """The dictator event {omega(i) = 1}."""
        return cls(n, mask=bit_table(n, i), label=f"X{i + 1}")

    @property
    def mask(self) -> np.ndarray:
        if self._mask is None:
            check_dim(self.n)
            pred = self._predicate
            m = np.fromiter((bool(pred(w)) for w in range(1 << self.n)), dtype=bool,
                            count=1 << self.n)
            m.setflags(write=False)
            self._mask = m
        return self._mask

    @property
    def is_extensional(self) -> bool:
        return self._mask is not None

    def __contains__(self, omega) -> bool:
        if isinstance(omega, Configuration):
            omega = omega.bits
        elif isinstance(omega, str):
            if len(omega) != self.n:
                raise ValueError("configuration string has wrong length")
            omega = string_to_index(omega)
        if self._mask is not None:
            return bool(self._mask[omega])
        return bool(self._predicate(omega))

    def members(self) -> list[int]:
        return np.flatnonzero(self.mask).tolist()

    def complement(self) -> "Event":
        return Event(self.n, mask=~self.mask, label=f"not({self.label})")

    def __and__(self, other: "Event") -> "Event":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return Event(self.n, mask=self.mask & other.mask)

    def __or__(self, other: "Event") -> "Event":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return Event(self.n, mask=self.mask | other.mask)

    def __eq__(self, other) -> bool:
        return isinstance(other, Event) and other.n == self.n and bool(
            np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.n, self.mask.tobytes()))

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __repr__(self) -> str:
        return f"Event(n={self.n}, label={self.label!r})"

    def to_json(self) -> str:
        return json.dumps([index_to_string(w, self.n) for w in self.members()])

    @classmethod
    def from_json(cls, text: str) -> "Event":
        members = json.loads(text)
        if not members:
            raise ValueError("cannot infer dimension of an empty event")
        return cls.from_members(len(members[0]), members)


def is_increasing(A: Event) -> bool:
    """True iff ``A`` is closed under raising any single coordinate.

    Single-flip closure implies the full up-set condition by transitivity.
    """
    check_dim(A.n)
    m = A.mask
    for i in range(A.n):
        v = m.reshape(-1, 2, 1 << i)
        if np.any(v[:, 0, :] & ~v[:, 1, :]):
            return False
    return True


def is_increasing_bruteforce(A: Event) -> bool:
    """Check the up-set condition over every comparable pair; only for tiny n."""
    check_dim(A.n, 10)
    members = A.members()
    size = 1 << A.n
    for w in members:
        for v in range(size):
            if w & ~v == 0 and not A.mask[v]:
                return False
    return True


def upward_closure(mask: np.ndarray) -> np.ndarray:
    """Smallest up-set containing the configurations flagged in ``mask``."""
    out = np.array(mask, dtype=bool, copy=True)
    n = out.size.bit_length() - 1
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 1, :] |= v[:, 0, :]
    return out


def all_upsets(n: int) -> np.ndarray:
    """Every up-set of {0,1}^n as rows of a boolean matrix (empty set included).

    Uses the split on the last coordinate: an up-set is a pair (lower, upper)
    of up-sets in dimension n-1 with lower contained in upper. Row counts are
    the Dedekind numbers 3, 6, 20, 168, 7581 for n = 1..5.
    """
    if not 1 <= n <= 5:
        raise DimensionError("all_upsets is limited to 1 <= n <= 5")
    rows = np.array([[False, False], [False, True], [True, True]])
    for _ in range(1, n):
        # lower <= upper  <=>  lower & ~upper is empty
        ok = (rows[:, None, :] & ~rows[None, :, :]).any(axis=2) == 0
        lo, hi = np.nonzero(ok)
        rows = np.concatenate([rows[lo], rows[hi]], axis=1)
    return rows


def random_upset(n: int, rng: np.random.Generator, density: float | None = None) -> Event:
    """Upward closure of a random set of generators.

    Generators are drawn among configurations of a random level so that the
    result is usually neither empty nor the whole space.
    """
    check_dim(n)
    size = 1 << n
    counts = popcounts(n)
    level = rng.integers(1, n + 1) if density is None else None
    mask = np.zeros(size, dtype=bool)
    if level is not None:
        candidates = np.flatnonzero(counts == level)
        k = rng.integers(1, min(len(candidates), 4) + 1)
        mask[rng.choice(candidates, size=k, replace=False)] = True
    else:
        mask = rng.random(size) < density
    if not mask.any():
        mask[size - 1] = True
    return Event(n, mask=upward_closure(mask), label="random-upset")
