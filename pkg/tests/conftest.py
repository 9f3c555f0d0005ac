from fractions import Fraction

import numpy as np
import pytest

from sharpthresh.corpus import random_fkg_measure
from sharpthresh.random_cluster import complete_graph, cycle_graph, grid_graph, path_graph, rc_weights, triangle


def monotonic_corpus(seed: int = 2024, per_size: int = 3, max_n: int = 10):
    """Exact monotonic measures: FKG-by-construction tables plus random-cluster tables."""
    rng = np.random.default_rng(seed)
    out = []
    for n in range(2, max_n + 1):
        for _ in range(per_size):
            out.append((f"fkg-n{n}", random_fkg_measure(n, rng)))
    graphs = {"triangle": triangle(), "cycle4": cycle_graph(4), "path4": path_graph(4),
              "K4": complete_graph(4), "grid3x2": grid_graph(3, 2)}
    for name, g in graphs.items():
        for p, q in ((Fraction(1, 2), Fraction(2)), (Fraction(1, 3), Fraction(3))):
            out.append((f"rc-{name}-p{p}-q{q}", rc_weights(g, p, q, exact=True)))
    return out


@pytest.fixture(scope="session")
def corpus():
    return monotonic_corpus()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=int):
            terminalreporter.write_line(RESULTS[key])
