from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpthresh.lattice import (Configuration, DimensionError, Event, all_upsets, index_to_string,
                                 is_increasing, is_increasing_bruteforce, join, leq, meet,
                                 random_upset, string_to_index, upward_closure)


def test_string_is_coordinate_one_first():
    c = Configuration.from_string("100")
    assert c[0] == 1 and c[1] == 0 and c[2] == 0
    assert c.bits == 1
    assert str(c) == "100"
    assert index_to_string(6, 3) == "011"
    assert string_to_index("011") == 6


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1))))
def test_string_roundtrip(nb):
    n, b = nb
    assert string_to_index(index_to_string(b, n)) == b
    assert Configuration.from_string(str(Configuration(b, n))).bits == b


@given(st.integers(0, 255), st.integers(0, 255))
def test_join_meet_order(a, b):
    x, y = Configuration(a, 8), Configuration(b, 8)
    j, m = join(x, y), meet(x, y)
    assert leq(x, j) and leq(y, j) and leq(m, x) and leq(m, y)
    assert all(j[i] == max(x[i], y[i]) and m[i] == min(x[i], y[i]) for i in range(8))


def test_configuration_rejects_bad_input():
    with pytest.raises(ValueError):
        Configuration.from_string("102")
    with pytest.raises(ValueError):
        Configuration(8, 3)
    with pytest.raises(ValueError):
        join(Configuration(0, 2), Configuration(0, 3))


def test_dedekind_counts():
    assert [len(all_upsets(n)) for n in range(1, 6)] == [3, 6, 20, 168, 7581]


def test_all_upsets_are_distinct_upsets():
    ups = all_upsets(4)
    assert len({u.tobytes() for u in ups}) == len(ups)
    for u in ups:
        assert is_increasing_bruteforce(Event(4, mask=u))


def test_upset_enumeration_limit():
    with pytest.raises(DimensionError):
        all_upsets(6)


def _naive_increasing(mask, n):
    return all(not mask[a] or mask[b] for a, b in product(range(1 << n), repeat=2) if a & ~b == 0)


@settings(max_examples=60)
@given(st.integers(1, 5), st.data())
def test_is_increasing_matches_pairwise_oracle(n, data):
    bits = data.draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n))
    mask = np.array(bits)
    expected = _naive_increasing(mask, n)
    assert is_increasing(Event(n, mask=mask)) == expected
    assert is_increasing_bruteforce(Event(n, mask=mask)) == expected


@settings(max_examples=40)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_upward_closure(n, seed):
    rng = np.random.default_rng(seed)
    mask = rng.random(1 << n) < 0.1
    up = upward_closure(mask)
    assert is_increasing(Event(n, mask=up))
    assert np.all(up[mask])
    assert np.array_equal(upward_closure(up), up)
    A = random_upset(n, rng)
    assert is_increasing(A)
    assert not is_increasing(A.complement()) or len(A) in (0, 1 << n)


def test_event_algebra_and_json():
    A = Event.from_members(3, ["110", "111"])
    B = Event.coordinate(3, 0)
    assert "110" in A and "010" not in A
    assert (A & B) == A
    assert (A | B) == B
    assert Event.from_json(A.to_json()) == A
    assert len(A.complement()) == 6
    assert Event.full(3).mask.all()
    pred = Event.from_predicate(3, lambda w: bin(w).count("1") >= 2)
    assert len(pred) == 4 and is_increasing(pred)
