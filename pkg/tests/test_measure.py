from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpthresh.corpus import perturb, random_fkg_measure, random_positive_measure
from sharpthresh.lattice import Event, all_upsets, random_upset
from sharpthresh.measure import (PositiveMeasure, TiltedFamily, check_fkg_all_pairs, check_fkg_lattice,
                                 check_monotonic, check_strong_positive_association, conditional,
                                 covariance, dominates_bruteforce, is_positively_associated,
                                 product_measure, russo_derivative, stochastically_dominates, tilt,
                                 uniform_measure)


def _bits(w, n):
    return [(w >> i) & 1 for i in range(n)]


def test_exact_mode_normalizes_rationally():
    mu = PositiveMeasure(2, [1, "1/2", Fraction(1, 4), 2])
    assert mu.exact
    assert sum(mu.weights) == 1
    assert mu(0) == Fraction(4, 15)
    assert mu.probability(Event.coordinate(2, 0)) == Fraction(1, 15) * 2 + Fraction(8, 15)


def test_rejects_nonpositive_and_wrong_length():
    with pytest.raises(ValueError):
        PositiveMeasure(1, [1, 0])
    with pytest.raises(ValueError):
        PositiveMeasure(2, [1, 1, 1])
    with pytest.raises(ValueError):
        PositiveMeasure(1, [1.0, -1.0])


def test_json_roundtrip_both_modes(rng):
    mu = random_fkg_measure(4, rng)
    assert PositiveMeasure.from_json(mu.to_json()).equals(mu)
    nu = random_fkg_measure(4, rng, exact=False)
    back = PositiveMeasure.from_json(nu.to_json())
    assert not back.exact and back.equals(nu)


def test_product_measure_probabilities():
    mu = product_measure([Fraction(1, 3), Fraction(1, 2), Fraction(3, 4)])
    for w in range(8):
        expected = Fraction(1)
        for i, p in enumerate([Fraction(1, 3), Fraction(1, 2), Fraction(3, 4)]):
            expected *= p if (w >> i) & 1 else 1 - p
        assert mu(w) == expected
    assert mu.marginal(2) == Fraction(3, 4)
    assert check_fkg_lattice(mu) and check_monotonic(mu)


def test_fkg_saddle_fails():
    mu = PositiveMeasure(2, [1, 2, 2, 1])
    assert not check_fkg_lattice(mu)
    assert not check_fkg_all_pairs(mu)
    assert not check_monotonic(mu)
    assert not check_strong_positive_association(mu)


def test_fkg_boundary_equality_passes():
    # product measure sits exactly on the boundary of the lattice condition
    assert check_fkg_lattice(uniform_measure(5))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.booleans())
def test_reduced_fkg_matches_all_pairs(n, seed, exact):
    rng = np.random.default_rng(seed)
    mu = random_fkg_measure(n, rng, exact=exact)
    if rng.random() < 0.5:
        mu = perturb(mu, rng, count=1 + int(rng.integers(0, 3)))
    assert check_fkg_lattice(mu) == check_fkg_all_pairs(mu)


def test_equivalences_on_corpus(rng):
    for _ in range(60):
        n = int(rng.integers(2, 5))
        mu = random_fkg_measure(n, rng)
        if rng.random() < 0.5:
            mu = perturb(mu, rng, 2)
        verdict = check_fkg_lattice(mu)
        assert check_monotonic(mu) == verdict
        assert check_strong_positive_association(mu) == verdict


def test_fkg_implies_positive_association(rng):
    for _ in range(20):
        mu = random_fkg_measure(4, rng)
        assert is_positively_associated(mu)


def _pa_oracle(mu, n):
    ups = all_upsets(n)
    for a in ups:
        for b in ups:
            if mu.probability(a & b) < mu.probability(a) * mu.probability(b):
                return False
    return True


def test_positive_association_matrix_form_matches_loop(rng):
    for _ in range(10):
        mu = random_positive_measure(3, rng)
        assert is_positively_associated(mu) == _pa_oracle(mu, 3)


def test_conditional_measure_oracle(rng):
    mu = random_fkg_measure(4, rng)
    c = conditional(mu, {1: 1, 3: 0})
    assert c.n == 2 and c.free == (0, 2)
    total = sum(mu(w) for w in range(16) if (w >> 1) & 1 and not (w >> 3) & 1)
    for local in range(4):
        w = ((local & 1) << 0) | (((local >> 1) & 1) << 2) | (1 << 1)
        assert c(local) == mu(w) / total


def test_domination_maxflow_matches_upsets(rng):
    agree = 0
    for _ in range(40):
        n = int(rng.integers(1, 5))
        mu1 = random_positive_measure(n, rng)
        mu2 = tilt(mu1, Fraction(int(rng.integers(1, 5)), 5)) if rng.random() < 0.5 else random_positive_measure(n, rng)
        assert stochastically_dominates(mu1, mu2) == dominates_bruteforce(mu1, mu2)
        agree += 1
    assert agree == 40


def test_product_domination_order():
    lo = product_measure([Fraction(1, 3)] * 3)
    hi = product_measure([Fraction(2, 3)] * 3)
    assert stochastically_dominates(lo, hi)
    assert not stochastically_dominates(hi, lo)
    assert stochastically_dominates(lo, lo)


def test_tilt_identity_and_oracle(rng):
    mu = random_fkg_measure(3, rng)
    assert tilt(mu, Fraction(1, 2)) is mu
    p = Fraction(2, 7)
    t = tilt(mu, p)
    raw = [mu(w) * np.prod([p if b else 1 - p for b in _bits(w, 3)]) for w in range(8)]
    Z = sum(raw)
    assert all(t(w) == raw[w] / Z for w in range(8))
    with pytest.raises(ValueError):
        tilt(mu, 1.5)


def test_tilt_of_fkg_is_fkg(rng):
    for _ in range(10):
        mu = random_fkg_measure(4, rng)
        assert check_fkg_lattice(tilt(mu, Fraction(1, 5)))


def _prob_at(mu, A, p):
    return TiltedFamily(mu).probability(A, p)


def test_russo_matches_exact_difference_quotient(rng):
    for _ in range(10):
        mu = random_fkg_measure(4, rng)
        A = random_upset(4, rng)
        p = Fraction(3, 10)
        d = russo_derivative(TiltedFamily(mu), A, p)
        h = Fraction(1, 10**6)
        fd = (_prob_at(mu, A, p + h) - _prob_at(mu, A, p - h)) / (2 * h)
        assert abs(d - fd) < Fraction(1, 10**8)


def test_russo_product_equals_pivotal_sum():
    # for a product measure the derivative is the sum of absolute influences
    from sharpthresh.influence import absolute_influence
    A = Event.from_predicate(3, lambda w: bin(w).count("1") >= 2)
    p = Fraction(1, 3)
    fam = TiltedFamily(uniform_measure(3))
    mu = fam.member(p)
    assert russo_derivative(fam, A, p) == sum(absolute_influence(mu, A, i) for i in range(3))


def test_russo_rejects_non_increasing():
    A = Event.from_members(2, ["10"])
    with pytest.raises(ValueError):
        russo_derivative(TiltedFamily(uniform_measure(2)), A, Fraction(1, 3))


def test_covariance_oracle(rng):
    mu = random_fkg_measure(3, rng)
    A = random_upset(3, rng)
    e_xa = sum(mu(w) for w in range(8) if w & 1 and A.mask[w])
    assert covariance(mu, 0, A) == e_xa - mu.marginal(0) * mu.probability(A)
    assert covariance(mu, 0, A) >= 0
