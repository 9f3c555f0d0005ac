import json
import math
from fractions import Fraction

import numpy as np
import pytest

from sharpthresh.corpus import random_fkg_measure
from sharpthresh.influence import (SymmetryGroup, absolute_influence, check_event_invariance_sampled,
                                   check_invariance, conditional_influence, influence_equalization,
                                   influence_ratio, influence_report, integrate_threshold,
                                   majority_event, mixture_influences, mixture_measure, pivotal_mask,
                                   sharp_threshold_bound)
from sharpthresh.lattice import Event, random_upset
from sharpthresh.measure import TiltedFamily, product_measure, uniform_measure


def _cond_oracle(mu, A, i):
    on = [w for w in range(1 << mu.n) if (w >> i) & 1]
    off = [w for w in range(1 << mu.n) if not (w >> i) & 1]
    pa_on = sum(mu(w) for w in on if A.mask[w]) / sum(mu(w) for w in on)
    pa_off = sum(mu(w) for w in off if A.mask[w]) / sum(mu(w) for w in off)
    return pa_on - pa_off


def _abs_oracle(mu, A, i):
    total = Fraction(0)
    for w in range(1 << mu.n):
        if A.mask[w | (1 << i)] and not A.mask[w & ~(1 << i)]:
            total += mu(w)
    return total


def test_influences_match_oracles(rng):
    for _ in range(15):
        n = int(rng.integers(2, 6))
        mu = random_fkg_measure(n, rng)
        A = random_upset(n, rng)
        for i in range(n):
            assert conditional_influence(mu, A, i) == _cond_oracle(mu, A, i)
            assert absolute_influence(mu, A, i) == _abs_oracle(mu, A, i)


def test_trivial_examples():
    mu = uniform_measure(3)
    A = Event.coordinate(3, 0)
    assert absolute_influence(mu, A, 0) == 1
    assert conditional_influence(mu, A, 0) == 1
    full = Event.full(3)
    assert all(absolute_influence(mu, full, i) == 0 for i in range(3))


def test_product_measure_influences_coincide(rng):
    mu = product_measure([Fraction(1, 3), Fraction(1, 2), Fraction(4, 5), Fraction(2, 3)])
    for _ in range(5):
        A = random_upset(4, rng)
        for i in range(4):
            assert conditional_influence(mu, A, i) == absolute_influence(mu, A, i)


def test_pivotal_mask_shape():
    A = majority_event(3)
    piv = pivotal_mask(A, 3, 0)
    # coordinate 1 pivotal iff the others split 1-1
    assert sorted(np.flatnonzero(piv)) == [2, 3, 4, 5]


def test_report_serialization(rng):
    mu = random_fkg_measure(3, rng)
    rep = influence_report(mu, majority_event(3))
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "coordinate,conditional_influence,absolute_influence"
    assert len(lines) == 4 and lines[1].startswith("1,")
    d = json.loads(rep.to_json())
    assert len(d["conditional"]) == 3
    assert influence_ratio(0.5, 0, 4) is None


def test_symmetry_groups():
    S = SymmetryGroup.symmetric(4)
    assert S.is_transitive() and len(S.closure()) == 24
    C = SymmetryGroup.cyclic(5)
    assert len(C.closure()) == 5
    trivial = SymmetryGroup(3, [(0, 1, 2)])
    assert not trivial.is_transitive()
    with pytest.raises(ValueError):
        SymmetryGroup(3, [(0, 0, 1)])


def test_action_matches_index_map():
    G = SymmetryGroup.cyclic(4)
    g = G.generators[0]
    perm = G.index_map(g)
    for w in range(16):
        assert perm[w] == G.act(g, w)


def test_invariance_checks(rng):
    n = 5
    G = SymmetryGroup.symmetric(n)
    assert check_invariance(mixture_measure(n), majority_event(n), G)
    mu = random_fkg_measure(n, rng)
    assert not check_invariance(mu, None, G) or len(set(mu.mass.tolist())) <= n + 1
    pred = lambda w: bin(w).count("1") >= 3  # noqa: E731
    assert check_event_invariance_sampled(pred, G, rng, samples=200)
    assert not check_event_invariance_sampled(lambda w: w & 1, G, rng, samples=200)


def test_influence_equalization():
    n = 5
    fam = TiltedFamily(mixture_measure(n))
    vals = influence_equalization(fam, majority_event(n), SymmetryGroup.symmetric(n), Fraction(2, 5))
    assert len(set(vals)) == 1
    with pytest.raises(ValueError):
        influence_equalization(fam, Event.coordinate(n, 0), SymmetryGroup.symmetric(n), Fraction(1, 3))


def test_mixture_measure_table():
    mu = mixture_measure(1)
    assert mu.marginal(0) == Fraction(1, 2)
    mu5 = mixture_measure(5)
    third, two = Fraction(1, 3), Fraction(2, 3)
    for w in range(32):
        k = bin(w).count("1")
        expect = (third ** k * two ** (5 - k) + two ** k * third ** (5 - k)) / 2
        assert mu5(w) == expect
    with pytest.raises(ValueError):
        mixture_measure(4)


@pytest.mark.parametrize("N", [1, 3, 5, 7, 9, 11])
def test_mixture_closed_form_matches_table(N):
    mu = mixture_measure(N)
    A = majority_event(N)
    cond, absl = mixture_influences(N)
    assert cond == conditional_influence(mu, A, 0)
    assert absl == absolute_influence(mu, A, 0)


def test_mixture_gap_grows():
    cond, absl = mixture_influences(25)
    assert absl < cond / 5
    c101, a101 = mixture_influences(101)
    assert abs(float(c101) - 1 / 3) < 0.02
    assert a101 < Fraction(1, 1000)


def test_sharp_threshold_probe_and_integration():
    fam = TiltedFamily(uniform_measure(5))
    lhs, rhs = sharp_threshold_bound(fam, majority_event(5), Fraction(1, 2), c=0.1)
    assert lhs > 0 and rhs > 0
    assert integrate_threshold(0.4, 0.6, 100, 2, 1.0) == pytest.approx(1 - 0.5 * 100 ** (-0.1))
    with pytest.raises(ValueError):
        integrate_threshold(0.6, 0.4, 100, 2, 1.0)


def test_ratio_formula():
    assert influence_ratio(0.2, 0.5, 10) == pytest.approx(0.2 * 10 / (0.5 * math.log(10)))
