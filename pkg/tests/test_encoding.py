from fractions import Fraction

import pytest

from sharpthresh.corpus import random_fkg_measure
from sharpthresh.encoding import (MonotoneEncoder, check_threshold_tree, pinned_domination,
                                  verify_monotone_map, verify_pushforward)
from sharpthresh.influence import conditional_influence
from sharpthresh.lattice import random_upset
from sharpthresh.measure import PositiveMeasure, product_measure
from sharpthresh.random_cluster import rc_weights, triangle


def test_rejects_non_monotonic():
    with pytest.raises(ValueError):
        MonotoneEncoder(PositiveMeasure(2, [1, 2, 2, 1]))


def test_product_measure_cells_are_boxes():
    mu = product_measure([Fraction(1, 3), Fraction(3, 4)])
    enc = MonotoneEncoder(mu)
    cells = enc.cells_by_pattern()
    c = cells[0b11]
    assert c.intervals == ((Fraction(2, 3), 1), (Fraction(1, 4), 1))
    assert c.volume == Fraction(1, 4)
    assert enc.encode_point([0.5, 0.9]).bits == 0b10
    assert enc.encode_point([Fraction(2, 3), 1]).bits == 0b10  # boundary maps to 0


def test_triangle_cells():
    enc = MonotoneEncoder(rc_weights(triangle(), Fraction(1, 2), Fraction(2)))
    vols = {c.pattern.bits: c.volume for c in enc.cell_decomposition()}
    assert vols[0] == Fraction(2, 7) and vols[7] == Fraction(1, 14)
    assert sum(vols.values()) == 1


def test_pushforward_exact_on_corpus(corpus):
    for name, mu in corpus:
        enc = MonotoneEncoder(mu)
        stat = verify_pushforward(enc, samples=0, seed=0)
        assert stat.exact_match, name


def test_pushforward_monte_carlo():
    enc = MonotoneEncoder(rc_weights(triangle(), Fraction(1, 2), Fraction(2)))
    stat = verify_pushforward(enc, samples=200_000, seed=3)
    assert stat.tv_distance < 0.01
    assert stat.chi_square < 30  # 7 dof


def test_monotone_map(corpus):
    for name, mu in corpus:
        if mu.n > 8:
            continue
        enc = MonotoneEncoder(mu)
        assert check_threshold_tree(enc), name
        assert verify_monotone_map(enc, trials=2000, seed=1), name


def test_exact_point_encoding_matches_vectorized(rng):
    mu = random_fkg_measure(5, rng)
    enc = MonotoneEncoder(mu, order=[3, 1, 4, 0, 2])
    X = rng.random((500, 5))
    vec = enc.encode_many(X)
    for x, b in zip(X, vec):
        assert enc.encode_point(list(x)).bits == b


def test_order_changes_cells_not_pushforward(rng):
    mu = random_fkg_measure(4, rng)
    for order in ([0, 1, 2, 3], [2, 0, 3, 1], [3, 2, 1, 0]):
        enc = MonotoneEncoder(mu, order=order)
        assert verify_pushforward(enc, 0, 0).exact_match


def _continuous_influence_oracle(enc, A, i):
    # U_i pinned to 1 or 0: volume of the other coordinates mapping into A
    on = off = Fraction(0)
    for cell in enc.cell_decomposition():
        if not A.mask[cell.pattern.bits]:
            continue
        rest = Fraction(1)
        for k, ln in enumerate(cell.lengths):
            if k != i:
                rest *= ln
        if cell.pattern[i]:
            on += rest
        else:
            off += rest
    return on - off


def test_influence_comparison_chain(corpus, rng):
    for name, mu in corpus:
        if mu.n > 6:
            continue
        enc = MonotoneEncoder(mu)
        for _ in range(3):
            A = random_upset(mu.n, rng)
            first = enc.order[0]
            assert enc.continuous_influence(A, first) == conditional_influence(mu, A, first), name
            for j in range(mu.n):
                J = enc.continuous_influence(A, j)
                assert J == _continuous_influence_oracle(enc, A, j)
                assert conditional_influence(mu, A, j) >= J, name
                assert enc.reorder(j).continuous_influence(A, j) == conditional_influence(mu, A, j)


def test_pinned_domination(corpus):
    for name, mu in corpus:
        if mu.n > 6:
            continue
        enc = MonotoneEncoder(mu)
        for j in range(mu.n):
            assert pinned_domination(enc, j, 500, seed=j), name
            assert pinned_domination(enc, j, 500, seed=j, pin=0.0), name


def test_cells_json():
    import json
    enc = MonotoneEncoder(product_measure([Fraction(1, 2)] * 2))
    cells = json.loads(enc.cells_to_json())
    assert len(cells) == 4
    assert {c["pattern"] for c in cells} == {"00", "01", "10", "11"}
    assert all(c["volume"] == "1/4" for c in cells)


def test_float_mode_encoder(rng):
    mu = random_fkg_measure(4, rng, exact=False)
    enc = MonotoneEncoder(mu)
    stat = verify_pushforward(enc, samples=50_000, seed=4)
    assert stat.exact_match and stat.max_volume_error < 1e-12
    assert isinstance(enc.continuous_influence(random_upset(4, rng), 1), float)
