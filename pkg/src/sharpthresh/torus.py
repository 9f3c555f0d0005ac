"""Square-lattice torus, box-crossing events and threshold bounds for the torus RC model."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .influence import SymmetryGroup
from .lattice import check_dim
from .random_cluster import (FiniteGraph, RCParameters, SamplerState, all_cluster_counts,
                             rc_weights, run_sweeps, self_dual_point)

TORUS_EXACT_EDGE_LIMIT = 24


@dataclass(frozen=True)
class TorusLattice:
    """The n x n torus: vertices (x, y) mod n, 2n^2 edges.

    Horizontal edge (x,y)-(x+1,y) is edge ``y*n + x``; vertical edge
    (x,y)-(x,y+1) is edge ``n*n + y*n + x``. For n = 2 the wrap-around makes
    pairs of parallel edges, which are kept as distinct edges.
    """

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("torus side must be >= 2")

    @property
    def vertex_count(self) -> int:
        return self.n * self.n

    @property
    def edge_count(self) -> int:
        return 2 * self.n * self.n

    def vertex(self, x: int, y: int) -> int:
        return (y % self.n) * self.n + (x % self.n)

    def h_edge(self, x: int, y: int) -> int:
        return (y % self.n) * self.n + (x % self.n)

    def v_edge(self, x: int, y: int) -> int:
        return self.n * self.n + (y % self.n) * self.n + (x % self.n)

    def edge_info(self, e: int) -> tuple[str, int, int]:
        """(orientation, x, y) of the lower-left endpoint."""
        nn = self.n * self.n
        kind = "h" if e < nn else "v"
        r = e % nn
        return kind, r % self.n, r // self.n

    def graph(self) -> FiniteGraph:
        n = self.n
        edges = [(self.vertex(x, y), self.vertex(x + 1, y)) for y in range(n) for x in range(n)]
        edges += [(self.vertex(x, y), self.vertex(x, y + 1)) for y in range(n) for x in range(n)]
        return FiniteGraph(n * n, tuple(edges), multigraph=(n == 2))

    # ------------------------------------------------------------ symmetries
    def edge_permutation(self, dx: int = 0, dy: int = 0, rotate: bool = False) -> tuple[int, ...]:
        """Permutation pi of edges with (pi omega)(e) = omega(pi[e]) for the map sending e to its image.

        The returned tuple lists, for each edge e, the edge whose state it
        takes, i.e. the preimage of e under the lattice map.
        """
        image = [0] * self.edge_count
        for e in range(self.edge_count):
            kind, x, y = self.edge_info(e)
            if rotate:
                # (x, y) -> (-y, x): horizontal edges become vertical and vice versa
                if kind == "h":
                    image[e] = self.v_edge(-y, x)
                else:
                    image[e] = self.h_edge(-y - 1, x)
            else:
                image[e] = self.h_edge(x + dx, y + dy) if kind == "h" else self.v_edge(x + dx, y + dy)
        pre = [0] * self.edge_count
        for e, f in enumerate(image):
            pre[f] = e
        return tuple(pre)

    def translation_group(self, rotations: bool = True) -> SymmetryGroup:
        gens = [self.edge_permutation(1, 0), self.edge_permutation(0, 1)]
        if rotations:
            gens.append(self.edge_permutation(rotate=True))
        return SymmetryGroup(self.edge_count, gens)

    # ---------------------------------------------------------------- duality
    def dual_edge(self, e: int) -> int:
        """The edge of the dual torus (identified with T_n) crossing e.

        The face with lower-left corner (x, y) is identified with vertex (x, y).
        """
        kind, x, y = self.edge_info(e)
        if kind == "h":
            return self.v_edge(x, y - 1)
        return self.h_edge(x - 1, y)

    def dual_configuration(self, omega: np.ndarray) -> np.ndarray:
        omega = np.asarray(omega, dtype=np.uint8)
        out = np.empty_like(omega)
        for e in range(self.edge_count):
            out[self.dual_edge(e)] = 1 - omega[e]
        return out


def build_torus(n: int) -> TorusLattice:
    return TorusLattice(n)


def config_array(t: TorusLattice, omega) -> np.ndarray:
    if isinstance(omega, (int, np.integer)):
        return np.array([(int(omega) >> e) & 1 for e in range(t.edge_count)], dtype=np.uint8)
    arr = np.ascontiguousarray(omega, dtype=np.uint8)
    if arr.shape != (t.edge_count,):
        raise ValueError("configuration length must be 2n^2")
    return arr


def homology_rank(t: TorusLattice, omega) -> int:
    """Rank of the winding vectors of the open cycles of ``omega`` (0, 1 or 2)."""
    omega = config_array(t, omega)
    n = t.n
    pos = {}
    winding = []
    adj = [[] for _ in range(t.vertex_count)]
    for e in np.flatnonzero(omega):
        kind, x, y = t.edge_info(int(e))
        u = t.vertex(x, y)
        v = t.vertex(x + 1, y) if kind == "h" else t.vertex(x, y + 1)
        step = (1, 0) if kind == "h" else (0, 1)
        adj[u].append((v, step))
        adj[v].append((u, (-step[0], -step[1])))
    for root in range(t.vertex_count):
        if root in pos:
            continue
        pos[root] = (root % n, root // n)
        stack = [root]
        while stack:
            u = stack.pop()
            ux, uy = pos[u]
            for v, (dx, dy) in adj[u]:
                target = (ux + dx, uy + dy)
                if v not in pos:
                    pos[v] = target
                    stack.append(v)
                else:
                    vx, vy = pos[v]
                    wx, wy = target[0] - vx, target[1] - vy
                    if wx or wy:
                        winding.append((wx // n, wy // n))
    if not winding:
        return 0
    return int(np.linalg.matrix_rank(np.array(winding, dtype=float)))


# ---------------------------------------------------------------- rectangles

@dataclass(frozen=True)
class RectangleSpec:
    """The translate [x0, x0+width] x [y0, y0+height] of a rectangle in the torus."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("rectangle sides must be >= 1")

    def check_fits(self, t: TorusLattice) -> None:
        if self.width >= t.n or self.height >= t.n:
            raise ValueError(f"{self.width}x{self.height} rectangle overlaps itself in T_{t.n}")


def crossed(t: TorusLattice, rect: RectangleSpec, omega, vertical: bool) -> bool:
    rect.check_fits(t)
    return bool(K.rect_crossing(config_array(t, omega), t.n, rect.x0, rect.y0, rect.width,
                                rect.height, vertical))


def crossed_long_ways(t: TorusLattice, rect: RectangleSpec, omega) -> bool:
    """The two shorter sides are joined by an open path inside the rectangle."""
    if rect.width == rect.height:
        raise ValueError("long-ways is undefined for a square")
    return crossed(t, rect, omega, vertical=rect.height > rect.width)


def crossed_short_ways(t: TorusLattice, rect: RectangleSpec, omega) -> bool:
    """The two longer sides are joined by an open path inside the rectangle."""
    if rect.width == rect.height:
        raise ValueError("short-ways is undefined for a square")
    return crossed(t, rect, omega, vertical=rect.height < rect.width)


def event_An(t: TorusLattice, n: int, omega) -> bool:
    """Some translate of the n x n square has an open left-right or top-bottom crossing."""
    if not 1 <= n < t.n:
        raise ValueError("square does not fit in the torus")
    return bool(K.square_crossing_anywhere(config_array(t, omega), t.n, n))


def long_ways_rectangle(n: int) -> RectangleSpec:
    """R_n = [0, n+1] x [0, n]."""
    return RectangleSpec(0, 0, n + 1, n)


def dual_rectangle(t: TorusLattice, n: int) -> RectangleSpec:
    """The n x (n+1) rectangle whose dual edges cross the relevant edges of R_n.

    R_n is crossed left-right in w exactly when this rectangle is not
    crossed bottom-top in the dual configuration w*.
    """
    return RectangleSpec(0, t.n - 1, n, n + 1)


def covering_violations(n: int, k: int, alpha: float, rng: np.random.Generator,
                        samples: int = 1000) -> int:
    """Count sampled configurations in A_n with no short-ways crossed family member.

    Densities are drawn uniformly per sample so that both sparse and dense
    configurations are visited; configurations outside A_n are skipped.
    """
    fam = rectangle_families(n, k, alpha)
    t = TorusLattice(k * n)
    bad = 0
    for _ in range(samples):
        om = (rng.random(t.edge_count) < rng.random()).astype(np.uint8)
        if K.square_crossing_anywhere(om, t.n, n) and \
                not some_family_member_crossed_short_ways(t, fam, om):
            bad += 1
    return bad


@dataclass(frozen=True)
class RectangleFamilies:
    k: int
    n: int
    alpha: float
    horizontal: tuple
    vertical: tuple

    @property
    def M(self) -> int:
        return len(self.horizontal) + len(self.vertical)

    def rectangles(self) -> list[RectangleSpec]:
        return list(self.horizontal) + list(self.vertical)


def rectangle_families(n: int, k: int, alpha: float) -> RectangleFamilies:
    """Translates of the wide and tall rectangles on floor-rounded lattices.

    Wide rectangles are floor(alpha n) x floor(n/alpha) at offsets
    (l1 floor(n(alpha-1)), l2 floor(n(1-1/alpha))); tall ones are the
    transposes. Offsets run once around the torus of side kn.
    """
    if not 1 < alpha < k:
        raise ValueError("need 1 < alpha < k")
    L = k * n
    long_side = math.floor(alpha * n)
    short_side = math.floor(n / alpha)
    step_long = math.floor(n * (alpha - 1))
    step_short = math.floor(n * (1 - 1 / alpha))
    if min(short_side, step_long, step_short) < 1:
        raise ValueError("degenerate geometry: increase n or move alpha away from 1")
    if long_side >= L:
        raise ValueError("rectangles do not fit in the torus")
    xs_h = range(0, L, step_long)
    ys_h = range(0, L, step_short)
    horizontal = tuple(RectangleSpec(x, y, long_side, short_side) for y in ys_h for x in xs_h)
    xs_v = range(0, L, step_short)
    ys_v = range(0, L, step_long)
    vertical = tuple(RectangleSpec(x, y, short_side, long_side) for y in ys_v for x in xs_v)
    return RectangleFamilies(k, n, alpha, horizontal, vertical)


def M_upper_bound(n: int, k: int, alpha: float) -> float:
    """Upper bound on M for floor rounding; infinite when n is too small for it to apply."""
    if alpha - 1 - 1 / n <= 0 or 1 - 1 / alpha - 1 / n <= 0:
        return math.inf
    return 2 * (1 + k / (alpha - 1 - 1 / n)) * (1 + k / (1 - 1 / alpha - 1 / n))


def M_asymptotic(k: int, alpha: float) -> float:
    return 2 * k * k * alpha / (alpha - 1) ** 2


def some_family_member_crossed_short_ways(t: TorusLattice, fam: RectangleFamilies, omega) -> bool:
    omega = config_array(t, omega)
    for group, vertical in ((fam.horizontal, True), (fam.vertical, False)):
        if not group:
            continue
        xs = np.array([r.x0 for r in group], dtype=np.int64)
        ys = np.array([r.y0 for r in group], dtype=np.int64)
        w, h = group[0].width, group[0].height
        if K.any_rect_crossed(omega, t.n, xs, ys, w, h, vertical):
            return True
    return False


def box_crossing_bound(k: int, n: int, alpha: float, q: float, p: float, c: float) -> float:
    """1 - exp(-g (p - p_sd)) with g = 2c log(kn) / (M q)."""
    psd = self_dual_point(q)
    if p <= psd:
        raise ValueError("bound requires p above the self-dual point")
    if c <= 0:
        raise ValueError("c must be positive")
    M = rectangle_families(n, k, alpha).M
    g = 2 * c / (M * q) * math.log(k * n)
    return 1 - math.exp(-g * (p - psd))


# ----------------------------------------------------------------- estimation

@dataclass(frozen=True)
class MCMCConfig:
    sweeps: int = 20_000
    burn_in: int = 2_000
    thin: int = 1
    seed: int = 0
    batches: int = 20
    initial: str = "closed"


@dataclass
class CrossingEstimate:
    event: str
    p: float
    q: float
    k: int | None
    n: int | None
    alpha: float | None
    torus: int
    estimate: float
    std_error: float
    samples: int
    exact: bool

    def to_dict(self) -> dict:
        return asdict(self)


def batch_means(values: np.ndarray, batches: int) -> tuple[float, float]:
    """Mean and batch-means standard error."""
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    b = min(batches, len(values))
    if b < 2:
        return mean, float("nan")
    size = len(values) // b
    means = values[: b * size].reshape(b, size).mean(axis=1)
    return mean, float(means.std(ddof=1) / math.sqrt(b))


def event_observable(t: TorusLattice, event: str, n: int | None = None, alpha: float | None = None,
                     k: int | None = None, average: bool = True):
    """Return (observable(omega) -> float, label).

    For long-ways and short-ways events with ``average`` set, the observable
    averages the indicator over all translates and both orientations, which
    has the same expectation under the translation- and rotation-invariant
    torus measure.
    """
    L = t.n
    if event == "LW":
        w, h = n + 1, n
    elif event == "SW":
        w, h = math.floor(n * alpha), math.floor(n / alpha)
    elif event == "A":
        return (lambda om: float(K.square_crossing_anywhere(om, L, n))), f"A_{n}"
    else:
        raise ValueError(f"unknown event {event!r}")
    if max(w, h) >= L:
        raise ValueError("rectangle does not fit in the torus")
    # LW: the wide rectangle crossed horizontally; SW: the wide rectangle crossed vertically
    vertical = event == "SW"
    if average:
        def obs(om):
            a = K.translate_crossing_fraction(om, L, w, h, vertical)
            b = K.translate_crossing_fraction(om, L, h, w, not vertical)
            return 0.5 * (a + b)
    else:
        def obs(om):
            return float(K.rect_crossing(om, L, 0, 0, w, h, vertical))
    return obs, f"{event}_{n}"


def exact_event_probability(t: TorusLattice, params: RCParameters, observable) -> float:
    """Probability of an event by full enumeration (at most 24 edges)."""
    m = t.edge_count
    check_dim(m, TORUS_EXACT_EDGE_LIMIT)
    mu = rc_weights(t.graph(), params.p, params.q, exact=False)
    w = mu.mass
    om = np.empty(m, dtype=np.uint8)
    total = 0.0
    for idx in range(1 << m):
        K.config_from_bits(idx, m, om)
        total += w[idx] * observable(om)
    return total


def estimate_crossing(t: TorusLattice, params: RCParameters, event: str, config: MCMCConfig,
                      n: int | None = None, alpha: float | None = None, k: int | None = None,
                      average: bool = True, force_mcmc: bool = False) -> CrossingEstimate:
    """Crossing probability by exact enumeration (<= 24 edges) or heat-bath MCMC."""
    obs, label = event_observable(t, event, n, alpha, k, average)
    common = dict(event=label, p=float(params.p), q=float(params.q), k=k, n=n, alpha=alpha,
                  torus=t.n)
    if t.edge_count <= TORUS_EXACT_EDGE_LIMIT and not force_mcmc:
        val = exact_event_probability(t, params, obs)
        return CrossingEstimate(**common, estimate=val, std_error=0.0, samples=0, exact=True)
    values = mcmc_observable(t, params, obs, config)
    mean, se = batch_means(values, config.batches)
    return CrossingEstimate(**common, estimate=mean, std_error=se, samples=len(values), exact=False)


def mcmc_observable(t: TorusLattice, params: RCParameters, observable, config: MCMCConfig) -> np.ndarray:
    g = t.graph()
    state = SamplerState.start(g, config.seed, config.initial)
    run_sweeps(state, params, config.burn_in)
    out = np.empty(config.sweeps // config.thin)
    for s in range(len(out)):
        run_sweeps(state, params, config.thin)
        out[s] = observable(state.current)
    return out


def estimate_pk(k: int, params: RCParameters, config: MCMCConfig) -> CrossingEstimate:
    """Finite-volume proxy for the long-ways crossing of a 2^k x 2^(k+1) rectangle.

    The rectangle sits in a torus of side 2^(k+2) with the torus
    random-cluster measure standing in for the wired infinite-volume one.
    """
    if k < 1 or 2 ** (k + 1) > 64:
        raise ValueError("need 1 <= k and 2^(k+1) <= 64")
    t = TorusLattice(2 ** (k + 2))
    w, h = 2 ** k, 2 ** (k + 1)
    L = t.n

    def obs(om):
        a = K.translate_crossing_fraction(om, L, w, h, True)
        b = K.translate_crossing_fraction(om, L, h, w, False)
        return 0.5 * (a + b)

    values = mcmc_observable(t, params, obs, config)
    mean, se = batch_means(values, config.batches)
    return CrossingEstimate(event=f"p_{k}", p=float(params.p), q=float(params.q), k=k, n=None,
                            alpha=None, torus=L, estimate=mean, std_error=se,
                            samples=len(values), exact=False)


# -------------------------------------------------------------- exact duality

def duality_check(t: TorusLattice, p, q) -> dict:
    """Exact torus duality on a fully enumerable torus.

    With p' the dual point and r(w) the homology rank of the open cycles,
    phi_p(w) q^(-r(w)) / phi_p'(w*) is the same constant for every w, and
    the dual cluster count satisfies k(w*) = c(w) + 1 - r(w) where c is the
    cycle rank. Returns the observed ratios with and without the q^r
    factor and the count of Euler-relation failures; the uncorrected
    ratio is constant only for q = 1.
    """
    from .random_cluster import dual_point

    m = t.edge_count
    check_dim(m, 16)
    p = Fraction(p)
    q = Fraction(q)
    ps = dual_point(p, q)
    g = t.graph()
    mu = rc_weights(g, p, q, exact=True)
    nu = rc_weights(g, ps, q, exact=True)
    kk = all_cluster_counts(g)
    ratios = set()
    plain = set()
    euler_failures = 0
    weights_bits = 1 << np.arange(m)
    for idx in range(1 << m):
        om = np.array([(idx >> e) & 1 for e in range(m)], dtype=np.uint8)
        dual = t.dual_configuration(om)
        didx = int(dual @ weights_bits)
        r = homology_rank(t, om)
        cyc = int(om.sum()) - t.vertex_count + int(kk[idx])
        if kk[didx] != cyc + 1 - r:
            euler_failures += 1
        ratios.add(mu(idx) / q ** r / nu(didx))
        plain.add(mu(idx) / nu(didx))
    return {"dual_p": ps, "ratios": ratios, "uncorrected_ratios": plain,
            "euler_failures": euler_failures,
            "holds": len(ratios) == 1 and euler_failures == 0}
