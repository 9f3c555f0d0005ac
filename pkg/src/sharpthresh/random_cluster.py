"""Random-cluster measures on finite graphs: exact tables and heat-bath sampling."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import _kernels as K
from .lattice import Configuration, check_dim, popcounts
from .measure import PositiveMeasure, _as_rational

EXACT_EDGE_LIMIT = 16


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


@dataclass(frozen=True)
class FiniteGraph:
    """Finite loopless graph; parallel edges only when ``multigraph`` is set."""

    vertex_count: int
    edges: tuple
    multigraph: bool = False

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for u, v in edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            if u == v:
                raise ValueError("loops are not allowed")
            key = (min(u, v), max(u, v))
            if key in seen and not self.multigraph:
                raise ValueError(f"parallel edge {key} in a simple graph")
            seen.add(key)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def endpoint_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        return np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1])

    def to_edge_list(self) -> str:
        lines = [f"{self.vertex_count} {self.edge_count}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str, multigraph: bool = False) -> "FiniteGraph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        V, E = int(rows[0][0]), int(rows[0][1])
        edges = [(int(r[0]), int(r[1])) for r in rows[1:]]
        if len(edges) != E:
            raise ValueError(f"header announces {E} edges, found {len(edges)}")
        return cls(V, tuple(edges), multigraph)

    def digest(self) -> str:
        return hashlib.sha256(self.to_edge_list().encode()).hexdigest()[:16]

    def has_circuit(self) -> bool:
        uf = UnionFind(self.vertex_count)
        return any(not uf.union(u, v) for u, v in self.edges)


def triangle() -> FiniteGraph:
    return FiniteGraph(3, ((0, 1), (1, 2), (0, 2)))


def cycle_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def grid_graph(w: int, h: int) -> FiniteGraph:
    idx = lambda x, y: y * w + x  # noqa: E731
    edges = [(idx(x, y), idx(x + 1, y)) for y in range(h) for x in range(w - 1)]
    edges += [(idx(x, y), idx(x, y + 1)) for y in range(h - 1) for x in range(w)]
    return FiniteGraph(w * h, tuple(edges))


@dataclass(frozen=True)
class RCParameters:
    p: float | Fraction
    q: float | Fraction

    def __post_init__(self):
        p = _rational_or_float(self.p)
        q = _rational_or_float(self.q)
        if not 0 < p < 1:
            raise ValueError(f"p must lie in (0,1), got {p}")
        if q < 1:
            raise ValueError(f"q must be >= 1, got {q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def is_rational(self) -> bool:
        return isinstance(self.p, Fraction) and isinstance(self.q, Fraction)

    def open_probabilities(self) -> tuple[float, float]:
        """(P(open | endpoints joined off e), P(open | not joined))."""
        p, q = float(self.p), float(self.q)
        return p, p / (p + q * (1 - p))


def _rational_or_float(x):
    if isinstance(x, float):
        return x
    r = _as_rational(x)
    return float(x) if r is None else r


def _as_array(omega, m: int) -> np.ndarray:
    if isinstance(omega, Configuration):
        omega = omega.bits
    if isinstance(omega, (int, np.integer)):
        return np.array([(int(omega) >> e) & 1 for e in range(m)], dtype=np.uint8)
    arr = np.asarray(omega, dtype=np.uint8)
    if arr.shape != (m,):
        raise ValueError(f"configuration must have {m} entries")
    return arr


def cluster_count(g: FiniteGraph, omega) -> int:
    """Number of open clusters, isolated vertices included."""
    arr = _as_array(omega, g.edge_count)
    uf = UnionFind(g.vertex_count)
    for (u, v), o in zip(g.edges, arr):
        if o:
            uf.union(u, v)
    return uf.count


def all_cluster_counts(g: FiniteGraph) -> np.ndarray:
    check_dim(g.edge_count)
    eu, ev = g.endpoint_arrays()
    return K.all_cluster_counts(g.vertex_count, eu, ev).astype(np.int64)


def rc_weights(g: FiniteGraph, p, q, exact: bool | None = None) -> PositiveMeasure:
    """p^|w| (1-p)^(|E|-|w|) q^k(w), normalized; any q > 0 (q < 1 only for negative tests)."""
    m = g.edge_count
    check_dim(m)
    p, q = _rational_or_float(p), _rational_or_float(q)
    if not 0 < p < 1 or q <= 0:
        raise ValueError("need p in (0,1) and q > 0")
    k = all_cluster_counts(g)
    o = popcounts(m)
    rational = isinstance(p, Fraction) and isinstance(q, Fraction)
    if exact is None:
        exact = rational and m <= EXACT_EDGE_LIMIT
    if exact:
        if not rational:
            raise ValueError("exact mode needs rational p and q")
        a, b = p.numerator, p.denominator - p.numerator
        c, d = q.numerator, q.denominator
        V = g.vertex_count
        w = [a ** int(oi) * b ** (m - int(oi)) * c ** int(ki) * d ** (V - int(ki))
             for oi, ki in zip(o, k)]
        return PositiveMeasure(m, w)
    p, q = float(p), float(q)
    logw = o * math.log(p) + (m - o) * math.log1p(-p) + k * math.log(q)
    return PositiveMeasure.from_log_weights(m, logw)


def exact_rc_measure(g: FiniteGraph, params: RCParameters, exact: bool | None = None) -> PositiveMeasure:
    """The random-cluster measure as an explicit table (at most 24 edges)."""
    return rc_weights(g, params.p, params.q, exact)


def rc_base_measure(g: FiniteGraph, q) -> PositiveMeasure:
    """q^k(w) normalized; tilting it at p gives the random-cluster measure."""
    return rc_weights(g, Fraction(1, 2) if not isinstance(q, float) else 0.5, q)


def edge_marginal_bounds(params: RCParameters):
    """(p / (p + q(1-p)), p): bounds on the probability that a given edge is open."""
    p, q = params.p, params.q
    return p / (p + q * (1 - p)), p


def self_dual_point(q) -> float:
    s = math.sqrt(float(q))
    return s / (1 + s)


def dual_point(p, q):
    """p' with p'/(1-p') = q(1-p)/p."""
    p, q = _rational_or_float(p), _rational_or_float(q)
    if not 0 < p < 1:
        raise ValueError("p must lie in (0,1)")
    if q < 1:
        raise ValueError("q must be >= 1")
    return q * (1 - p) / (q * (1 - p) + p)


# ------------------------------------------------------------------- dynamics

def open_probability(g: FiniteGraph, omega, e: int, params: RCParameters) -> float:
    """Conditional probability that edge e is open given the rest of ``omega``."""
    arr = _as_array(omega, g.edge_count)
    eu, ev = g.endpoint_arrays()
    parent = np.empty(g.vertex_count, dtype=np.int64)
    p_conn, p_disc = params.open_probabilities()
    return p_conn if K.connected_off(g.vertex_count, eu, ev, arr, e, parent) else p_disc


@dataclass
class SamplerState:
    """Mutable single-chain state; not to be shared between threads."""

    graph: FiniteGraph
    current: np.ndarray
    rng: np.random.Generator
    sweeps: int = 0
    _eu: np.ndarray = field(default=None, repr=False)
    _ev: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.current = np.ascontiguousarray(self.current, dtype=np.uint8)
        if self.current.shape != (self.graph.edge_count,):
            raise ValueError("configuration length must equal the edge count")
        self._eu, self._ev = self.graph.endpoint_arrays()

    @classmethod
    def start(cls, g: FiniteGraph, seed: int, initial: str | np.ndarray = "closed") -> "SamplerState":
        rng = make_rng(seed)
        if isinstance(initial, str):
            fill = {"closed": 0, "open": 1}[initial]
            initial = np.full(g.edge_count, fill, dtype=np.uint8)
        return cls(g, initial, rng)

    def configuration(self) -> Configuration:
        return Configuration(int(sum(1 << e for e in np.flatnonzero(self.current))),
                             self.graph.edge_count)


def make_rng(seed: int) -> np.random.Generator:
    """Philox counter-based generator; streams are identical across platforms."""
    return np.random.Generator(np.random.Philox(int(seed)))


def heat_bath_step(state: SamplerState, params: RCParameters, edge: int,
                   u: float | None = None) -> SamplerState:
    """Resample ``edge`` from its conditional law (in place)."""
    if not 0 <= edge < state.graph.edge_count:
        raise IndexError(edge)
    u = state.rng.random() if u is None else u
    p_conn, p_disc = params.open_probabilities()
    K.heat_bath_run(state.graph.vertex_count, state._eu, state._ev, state.current, p_conn, p_disc,
                    np.array([edge], dtype=np.int64), np.array([u]))
    return state


def run_sweeps(state: SamplerState, params: RCParameters, sweeps: int) -> SamplerState:
    """Random-scan sweeps: each sweep is |E| updates at uniformly chosen edges."""
    m = state.graph.edge_count
    p_conn, p_disc = params.open_probabilities()
    block = max(1, (1 << 16) // max(m, 1))
    left = sweeps
    while left > 0:
        s = min(block, left)
        edges = state.rng.integers(0, m, size=s * m)
        us = state.rng.random(s * m)
        K.heat_bath_run(state.graph.vertex_count, state._eu, state._ev, state.current,
                        p_conn, p_disc, edges, us)
        left -= s
    state.sweeps += sweeps
    return state


def sample_rc(g: FiniteGraph, params: RCParameters, sweeps: int, burn_in: int, seed: int,
              thin: int = 1, initial: str = "closed") -> Iterator[np.ndarray]:
    """Yield ``sweeps // thin`` configurations (uint8 edge arrays) after ``burn_in`` sweeps."""
    if sweeps < 1 or thin < 1 or burn_in < 0:
        raise ValueError("need sweeps >= 1, thin >= 1, burn_in >= 0")
    state = SamplerState.start(g, seed, initial)
    run_sweeps(state, params, burn_in)
    for _ in range(sweeps // thin):
        run_sweeps(state, params, thin)
        yield state.current.copy()


def empirical_distribution(g: FiniteGraph, params: RCParameters, sweeps: int, burn_in: int,
                           seed: int) -> np.ndarray:
    """Visit frequencies of every configuration, one sample per sweep (small graphs)."""
    m = g.edge_count
    check_dim(m, 20)
    weights = 1 << np.arange(m)
    counts = np.zeros(1 << m, dtype=np.int64)
    for omega in sample_rc(g, params, sweeps, burn_in, seed):
        counts[int(omega @ weights)] += 1
    return counts / counts.sum()


def transition_apply(g: FiniteGraph, params: RCParameters, dist: np.ndarray) -> np.ndarray:
    """One random-scan heat-bath step applied to a distribution over configurations."""
    m = g.edge_count
    check_dim(m, 16)
    eu, ev = g.endpoint_arrays()
    conn = K.connected_off_table(g.vertex_count, eu, ev)
    p_conn, p_disc = params.open_probabilities()
    dist = np.asarray(dist, dtype=float)
    out = np.zeros_like(dist)
    for e in range(m):
        popen = np.where(conn[:, e], p_conn, p_disc)
        v = dist.reshape(-1, 2, 1 << e)
        pe = popen.reshape(-1, 2, 1 << e)[:, 0, :]  # conditional law ignores bit e
        mass = v[:, 0, :] + v[:, 1, :]
        new = np.empty_like(v)
        new[:, 1, :] = mass * pe
        new[:, 0, :] = mass * (1 - pe)
        out += new.reshape(-1)
    return out / m


def tv_distance(a, b) -> float:
    return 0.5 * float(np.abs(np.asarray(a, float) - np.asarray(b, float)).sum())


def write_samples(path: str | Path, samples: Sequence[np.ndarray], g: FiniteGraph,
                  params: RCParameters, seed: int, sweeps: int, burn_in: int, thin: int) -> Path:
    """Bit-packed sample rows plus a JSON sidecar ``<path>.json``."""
    path = Path(path)
    arr = np.asarray(samples, dtype=np.uint8).reshape(-1, g.edge_count)
    path.write_bytes(np.packbits(arr, axis=1).tobytes())
    meta = {"graph_sha256_16": g.digest(), "vertices": g.vertex_count, "edges": g.edge_count,
            "p": float(params.p), "q": float(params.q), "seed": seed, "sweeps": sweeps,
            "burn_in": burn_in, "thin": thin, "rows": int(arr.shape[0]),
            "row_bytes": int((g.edge_count + 7) // 8), "bit_order": "big-endian per byte, edge 0 first",
            "rng": f"numpy Philox (numpy {np.__version__})"}
    side = path.with_name(path.name + ".json")
    side.write_text(json.dumps(meta, indent=1))
    return side


def read_samples(path: str | Path) -> np.ndarray:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    raw = np.frombuffer(path.read_bytes(), dtype=np.uint8).reshape(meta["rows"], meta["row_bytes"])
    return np.unpackbits(raw, axis=1)[:, :meta["edges"]]
