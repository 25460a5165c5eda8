import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vbalanced.errors import DomainError
from vbalanced.gfseries import BalanceVector
from vbalanced.oracle import (
    balanced_words,
    canonical_rotation,
    count_necklaces,
    count_sequences,
    enumerate_necklaces,
    is_balanced,
    least_rotation,
    primitive_root,
)

VECTORS = [(1, 1), (2, 1), (1, 1, 1), (3, 1)]


def brute_necklaces(v, p):
    v = BalanceVector(v)
    n = v.weight * p
    seen = set()
    for w in itertools.product(range(v.k), repeat=n):
        if [w.count(i) for i in range(v.k)] == [p * vi for vi in v.parts]:
            seen.add(min(w[i:] + w[:i] for i in range(n)))
    return sorted(seen)


@pytest.mark.parametrize("v,p,count", [((1, 1), 2, 6), ((1, 1, 1), 1, 6), ((2, 1), 0, 1), ((1, 1), 0, 1)])
def test_count_sequences(v, p, count):
    assert count_sequences(v, p) == count


@pytest.mark.parametrize("v,p,count", [((1, 1), 1, 1), ((1, 1), 3, 4), ((2, 1), 2, 3), ((1, 1, 1), 1, 2)])
def test_count_necklaces(v, p, count):
    assert count_necklaces(v, p) == count


def test_necklace_spot_values():
    assert [count_necklaces((1, 1), p) for p in range(1, 6)] == [1, 2, 4, 10, 26]


def test_count_necklaces_needs_positive_p():
    with pytest.raises(DomainError):
        count_necklaces((1, 1), 0)


@pytest.mark.parametrize("v", VECTORS)
def test_formula_matches_brute_force(v):
    weight = sum(v)
    for p in range(1, 12 // weight + 1):
        found = enumerate_necklaces(v, p)
        assert len(found) == count_necklaces(v, p)
        if weight * p <= 10:
            assert found == brute_necklaces(v, p)


def test_enumerate_small():
    assert enumerate_necklaces((1, 1), 2) == [(0, 0, 1, 1), (0, 1, 0, 1)]
    assert enumerate_necklaces((1, 1), 1) == [(0, 1)]


def test_enumerate_guard():
    with pytest.raises(DomainError):
        enumerate_necklaces((1, 1), 11)


@pytest.mark.parametrize("v", VECTORS)
def test_rotation_classes_partition_words(v):
    weight = sum(v)
    for p in range(1, 12 // weight + 1):
        total = 0
        for neck in enumerate_necklaces(v, p):
            _, power = primitive_root(neck)
            total += len(neck) // power
        assert total == count_sequences(v, p)


def test_balanced_words_are_distinct_and_complete():
    words = list(balanced_words((2, 1), 2))
    assert len(words) == len(set(words)) == count_sequences((2, 1), 2)


class TestCanonical:
    def test_examples(self):
        assert canonical_rotation([0, 1, 0, 1]) == (0, 1, 0, 1)
        assert canonical_rotation([1, 0, 1, 0]) == (0, 1, 0, 1)
        assert canonical_rotation([2, 0, 1]) == (0, 1, 2)

    def test_empty(self):
        with pytest.raises(DomainError):
            canonical_rotation([])

    @given(st.lists(st.integers(0, 2), min_size=1, max_size=30), st.integers(0, 100))
    def test_rotation_invariant(self, w, r):
        r %= len(w)
        assert canonical_rotation(w) == canonical_rotation(w[r:] + w[:r])

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=30))
    def test_least_and_idempotent(self, w):
        c = canonical_rotation(w)
        assert c == min(tuple(w[i:] + w[:i]) for i in range(len(w)))
        assert canonical_rotation(list(c)) == c

    def test_least_rotation_index(self):
        w = [1, 1, 0, 1, 0]
        i = least_rotation(w)
        assert tuple(w[i:] + w[:i]) == (0, 1, 0, 1, 1)

    def test_linear_time_on_large_words(self):
        rng = np.random.default_rng(0)
        w = rng.integers(0, 2, 200_000).tolist()
        start = time.perf_counter()
        canonical_rotation(w)
        assert time.perf_counter() - start < 5.0

    def test_periodic_large_word(self):
        w = [0, 1] * 50_000
        assert canonical_rotation(w[1:] + w[:1]) == tuple(w)


class TestPrimitiveRoot:
    def test_examples(self):
        assert primitive_root([0, 1, 0, 1, 0, 1]) == ((0, 1), 3)
        assert primitive_root([0, 1, 1]) == ((0, 1, 1), 1)
        assert primitive_root([2, 2, 2]) == ((2,), 3)

    def test_exhaustive(self):
        for n in range(1, 13):
            for w in itertools.product((0, 1), repeat=n):
                root, power = primitive_root(w)
                assert root * power == w
                m = len(root)
                assert all(root[i:] + root[:i] != root for i in range(1, m))


class TestIsBalanced:
    def test_cases(self):
        assert is_balanced([0, 1, 1, 0], (1, 1))
        assert is_balanced([0, 0, 1], (2, 1))
        assert not is_balanced([0, 1, 1], (1, 1))
        assert not is_balanced([0, 2], (1, 1))
        assert not is_balanced([], (1, 1))
        assert is_balanced([], (1, 1), allow_empty=True)

    def test_arrays(self):
        assert is_balanced(np.array([0, 0, 1], dtype=np.uint8), (2, 1))
        assert not is_balanced(np.array([0, 1, 1], dtype=np.uint8), (2, 1))
