"""Densities on [0,1]^n: grid FKG and Holley checks, and a family with no sharp threshold.

The family ``rho_p(x) = prod_i c_p p^{x_i} (1-p)^{1-x_i}`` on [0,1]^N is
a product of one-dimensional exponential densities. With
``pi = p / (1 - p)`` each coordinate has CDF ``(pi^x - 1) / (pi - 1)``
(uniform at p = 1/2). For the increasing event A = (1/N, 1]^N the
probability mu_p(A) has a closed form whose slope at p = 1/2 stays
bounded as N grows.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

LOG_TOL = 1e-12
GRID_PAIR_LIMIT = 4096
UPSET_PAIR_LIMIT = 5000


# ---------------------------------------------------------------- grid densities

@dataclass(frozen=True)
class GridDensity:
    """Piecewise-constant density on the m^n grid of cells of [0,1]^n.

    ``values`` has shape (m,)*n; cell (j_1, ..., j_n) is the product of
    [j_k/m, (j_k+1)/m]. Values integrate to 1 (mean value 1).
    """

    n: int
    m: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.m,) * self.n:
            raise ValueError(f"values must have shape {(self.m,) * self.n}")
        if np.any(v <= 0):
            raise ValueError("density values must be strictly positive")
        if abs(v.sum() / self.m ** self.n - 1) > 1e-12:
            raise ValueError("density does not integrate to 1")
        object.__setattr__(self, "values", v)

    @classmethod
    def normalized(cls, n: int, m: int, values) -> "GridDensity":
        v = np.asarray(values, dtype=float).reshape((m,) * n)
        return cls(n, m, v * (m ** n / v.sum()))

    @classmethod
    def from_json(cls, text: str) -> "GridDensity":
        d = json.loads(text)
        n, m = int(d["n"]), int(d["m"])
        return cls(n, m, np.asarray(d["values"], dtype=float).reshape((m,) * n))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "m": self.m, "values": self.values.ravel().tolist()})

    @property
    def cell_masses(self) -> np.ndarray:
        """Probability of each cell, flattened row-major."""
        return self.values.ravel() / self.m ** self.n


def product_grid_density(p: float, n: int, m: int) -> GridDensity:
    """Cell averages of rho_p on the m^n grid (exact via the CDF)."""
    edges = np.linspace(0.0, 1.0, m + 1)
    cdf = counterexample_cdf(edges, p)
    one_d = m * np.diff(cdf)
    vals = one_d
    for _ in range(n - 1):
        vals = np.multiply.outer(vals, one_d)
    return GridDensity.normalized(n, m, vals)


def _two_axis_gaps(logf: np.ndarray, logg: np.ndarray, i: int, j: int) -> float:
    """min over a<b (axis i), c<d (axis j) of log g(b,d) + log f(a,c) - log g(b,c) - log f(a,d)."""
    m = logf.shape[0]
    lf = np.moveaxis(logf, (i, j), (0, 1))
    lg = np.moveaxis(logg, (i, j), (0, 1))
    worst = math.inf
    for a in range(m):
        for b in range(a + 1, m):
            # arrays over (c, d, rest...)
            up = lg[b][None, :, ...] + lf[a][:, None, ...]
            cross = lg[b][:, None, ...] + lf[a][None, :, ...]
            c, d = np.triu_indices(m, 1)
            gap = (up[c, d] - cross[c, d])
            worst = min(worst, float(gap.min()))
    return worst


def check_density_fkg(rho: GridDensity) -> bool:
    """rho(x v y) rho(x ^ y) >= rho(x) rho(y) on all pairs differing in two coordinates."""
    if rho.n < 2:
        return True
    lv = np.log(rho.values)
    for i in range(rho.n):
        for j in range(i + 1, rho.n):
            if _two_axis_gaps(lv, lv, i, j) < -LOG_TOL:
                return False
    return True


def _grid_coords(n: int, m: int) -> np.ndarray:
    return np.array(list(product(range(m), repeat=n)), dtype=np.int64)


def check_density_fkg_all_pairs(rho: GridDensity) -> bool:
    """The lattice condition on every pair of cells (grids of at most 4096 cells)."""
    return _holley_all_pairs(rho, rho)


def _holley_all_pairs(f: GridDensity, g: GridDensity) -> bool:
    cells = f.m ** f.n
    if cells > GRID_PAIR_LIMIT:
        raise ValueError("grid too large for the all-pairs check")
    X = _grid_coords(f.n, f.m)
    w = f.m ** np.arange(f.n - 1, -1, -1)
    lf = np.log(f.values.ravel())
    lg = np.log(g.values.ravel())
    for a in range(cells):
        join = (np.maximum(X[a], X) @ w)
        meet = (np.minimum(X[a], X) @ w)
        # x = X[a], y = every cell
        if np.any(lg[join] + lf[meet] - lg[a] - lf < -LOG_TOL):
            return False
    return True


@dataclass
class DominationResult:
    hypothesis: bool
    conclusion_checked: int
    conclusion_violations: int

    def __bool__(self) -> bool:
        return self.hypothesis and self.conclusion_violations == 0


def check_holley_domination(f: GridDensity, g: GridDensity, rng: np.random.Generator | None = None,
                            events: int = 200) -> DominationResult:
    """Hypothesis g(x v y) f(x ^ y) >= g(x) f(y) on all pairs, then mu_f(A) <= mu_g(A) spot checks.

    Increasing events are all up-sets of the grid when there are at most
    5000 of them, otherwise ``events`` random up-sets.
    """
    if (f.n, f.m) != (g.n, g.m):
        raise ValueError("densities live on different grids")
    hyp = _holley_all_pairs(f, g)
    if not hyp:
        return DominationResult(False, 0, 0)
    rng = rng or np.random.default_rng(0)
    U = increasing_grid_events(f.n, f.m, rng=rng, samples=events)
    pf = U @ f.cell_masses
    pg = U @ g.cell_masses
    bad = int(np.sum(pf > pg + 1e-12))
    return DominationResult(True, len(U), bad)


# --------------------------------------------------------------- grid up-sets

def _upper_covers(n: int, m: int) -> list[list[int]]:
    X = _grid_coords(n, m)
    w = m ** np.arange(n - 1, -1, -1)
    covers = []
    for x in X:
        cs = []
        for k in range(n):
            if x[k] + 1 < m:
                cs.append(int(x @ w + w[k]))
        covers.append(cs)
    return covers


def all_grid_upsets(n: int, m: int, limit: int = 300_000) -> np.ndarray:
    """Every up-set of the grid poset [m]^n as boolean rows over cells (row-major)."""
    cells = m ** n
    covers = _upper_covers(n, m)
    out = []

    # cells in decreasing row-major index are a reverse linear extension
    def rec(idx, chosen):
        if idx < 0:
            out.append(chosen)
            if len(out) > limit:
                raise ValueError("too many up-sets")
            return
        rec(idx - 1, chosen)
        if all((chosen >> c) & 1 for c in covers[idx]):
            rec(idx - 1, chosen | (1 << idx))

    rec(cells - 1, 0)
    bits = np.array(out, dtype=object)
    return np.array([[(int(b) >> c) & 1 for c in range(cells)] for b in bits], dtype=bool)


def random_grid_upset(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Upward closure of a few random cells."""
    X = _grid_coords(n, m)
    k = int(rng.integers(1, max(2, m ** n // 4) + 1))
    gens = X[rng.choice(len(X), size=k, replace=False)]
    return np.any(np.all(X[:, None, :] >= gens[None, :, :], axis=2), axis=1)


def increasing_grid_events(n: int, m: int, rng: np.random.Generator | None = None,
                           samples: int = 200) -> np.ndarray:
    try:
        return all_grid_upsets(n, m, limit=UPSET_PAIR_LIMIT)
    except ValueError:
        rng = rng or np.random.default_rng(0)
        return np.array([random_grid_upset(n, m, rng) for _ in range(samples)])


def positive_association_gap(rho: GridDensity, events: np.ndarray) -> float:
    """min over pairs of events of mu(A and B) - mu(A) mu(B)."""
    U = events.astype(float)
    w = rho.cell_masses
    joint = (U * w) @ U.T
    marg = U @ w
    return float((joint - np.outer(marg, marg)).min())


# ----------------------------------------------------- one-dimensional family

def _log_odds(p: float) -> float:
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return math.log(p) - math.log1p(-p)


def counterexample_density(x, p: float):
    """rho_p on [0,1]: log(pi)/(2p-1) p^x (1-p)^(1-x); identically 1 at p = 1/2."""
    x = np.asarray(x, dtype=float)
    lam = _log_odds(p)
    if lam == 0:
        return np.ones_like(x)
    return lam / math.expm1(lam) * np.exp(lam * x)


def counterexample_cdf(x, p: float):
    """(pi^x - 1) / (pi - 1)."""
    x = np.asarray(x, dtype=float)
    lam = _log_odds(p)
    if lam == 0:
        return x.copy()
    return np.expm1(lam * x) / math.expm1(lam)


def counterexample_inverse_cdf(u, p: float):
    """log(1 + u (pi - 1)) / log(pi)."""
    u = np.asarray(u, dtype=float)
    lam = _log_odds(p)
    if lam == 0:
        return u.copy()
    return np.log1p(u * math.expm1(lam)) / lam


def sample_counterexample(p: float, N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` draws from rho_p on [0,1]^N by inverse CDF."""
    return counterexample_inverse_cdf(rng.random((size, N)), p)


def counterexample_prob(p: float, N: int) -> float:
    """mu_p((1/N, 1]^N) = (1 - F_p(1/N))^N."""
    if N < 2:
        raise ValueError("N must be >= 2")
    lam = _log_odds(p)
    if lam == 0:
        return (1 - 1 / N) ** N
    tail = 1 - math.expm1(lam / N) / math.expm1(lam)
    return tail ** N


def counterexample_prob_limit(p: float) -> float:
    """lim_N mu_p(A) = pi^(-1/(pi-1)), and e^-1 at p = 1/2."""
    lam = _log_odds(p)
    if lam == 0:
        return math.exp(-1)
    return math.exp(-lam / math.expm1(lam))


def counterexample_derivative(p: float, N: int, h: float = 1e-5) -> float:
    """Centered finite difference of p -> mu_p(A)."""
    if not (0 < p - h and p + h < 1):
        raise ValueError("step leaves (0, 1)")
    return (counterexample_prob(p + h, N) - counterexample_prob(p - h, N)) / (2 * h)


def counterexample_derivative_half(N: int) -> float:
    """d/dp mu_p(A) at p = 1/2, equal to 2 (1 - 1/N)^N."""
    return 2 * (1 - 1 / N) ** N


def counterexample_covariance(N: int) -> float:
    """cov(U_i, 1_A) under the uniform density, A = (1/N, 1]^N.

    E[U_1 1_A] = (1 - 1/N^2)/2 (1 - 1/N)^(N-1), so the covariance is
    (1/(2N)) (1 - 1/N)^N. Summing 4 cov over the N coordinates recovers the
    slope 2 (1 - 1/N)^N at p = 1/2.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    return (1 - 1 / N) ** N / (2 * N)


@dataclass
class MCEstimate:
    estimate: float
    std_error: float
    samples: int


def mc_prob(p: float, N: int, samples: int, seed: int = 0, chunk: int = 1 << 17) -> MCEstimate:
    rng = np.random.Generator(np.random.Philox(seed))
    hits = 0
    left = samples
    while left:
        k = min(chunk, left)
        X = sample_counterexample(p, N, k, rng)
        hits += int(np.all(X > 1 / N, axis=1).sum())
        left -= k
    est = hits / samples
    return MCEstimate(est, math.sqrt(est * (1 - est) / samples), samples)


def mc_covariance(N: int, samples: int, seed: int = 0, chunk: int = 1 << 17) -> MCEstimate:
    """Sample covariance of U_1 and 1_A under the uniform density, with a delta-method error."""
    rng = np.random.Generator(np.random.Philox(seed))
    s_u = s_a = s_ua = 0.0
    left = samples
    while left:
        k = min(chunk, left)
        X = rng.random((k, N))
        a = np.all(X > 1 / N, axis=1).astype(float)
        u = X[:, 0]
        s_u += u.sum()
        s_a += a.sum()
        s_ua += (u * a).sum()
        left -= k
    mu_u, mu_a = s_u / samples, s_a / samples
    cov = s_ua / samples - mu_u * mu_a
    # second pass for the variance of the centered product
    rng = np.random.Generator(np.random.Philox(seed))
    left = samples
    acc = 0.0
    while left:
        k = min(chunk, left)
        X = rng.random((k, N))
        a = np.all(X > 1 / N, axis=1).astype(float)
        z = (X[:, 0] - mu_u) * (a - mu_a) - cov
        acc += float((z * z).sum())
        left -= k
    return MCEstimate(cov, math.sqrt(acc / (samples - 1) / samples), samples)


def counterexample_rows(Ns, ps, samples: int, seed: int = 0) -> list[dict]:
    rows = []
    for N in Ns:
        for p in ps:
            mc = mc_prob(p, N, samples, seed)
            rows.append({"N": N, "p": p, "exact": counterexample_prob(p, N),
                         "mc_estimate": mc.estimate, "mc_stderr": mc.std_error})
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["N", "p", "exact", "mc_estimate", "mc_stderr"],
                       lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
