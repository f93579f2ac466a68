import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxz.qcomb import (
    BoundedPartition,
    enumerate_partitions,
    gaussian_binomial,
    gaussian_binomial_poly,
    q_pochhammer,
    transition_matrices,
)

qs = st.floats(min_value=0.05, max_value=0.95)


@given(n=st.integers(0, 14), data=st.data(), q=qs)
def test_binomial_symmetry(n, data, q):
    k = data.draw(st.integers(0, n))
    assert math.isclose(gaussian_binomial(n, k, q), gaussian_binomial(n, n - k, q), rel_tol=1e-13)


@given(n=st.integers(0, 14), data=st.data(), q=qs)
def test_binomial_bounds(n, data, q):
    k = data.draw(st.integers(0, n))
    v = gaussian_binomial(n, k, q * q)
    assert 1 - 1e-13 <= v <= (1 + 1e-13) / q_pochhammer(q * q, q * q)


@pytest.mark.parametrize("q,x", [(0.3, 0.7), (0.5, -1.3), (0.7, 2.0), (0.9, 0.1), (0.2, -0.4)])
def test_q_binomial_theorem(q, x):
    for L in range(0, 9):
        lhs = math.prod(1 + q ** (2 * k) * x for k in range(1, L + 1))
        rhs = sum(gaussian_binomial(L, n, q * q) * q ** (n * (n + 1)) * x**n for n in range(L + 1))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), sum(abs(gaussian_binomial(L, n, q * q)
                                                                    * q ** (n * (n + 1)) * x**n)
                                                                for n in range(L + 1)))


def test_binomial_poly_matches_numeric():
    for n in range(8):
        for k in range(n + 1):
            c = gaussian_binomial_poly(n, k)
            assert math.isclose(sum(ci * 0.37**i for i, ci in enumerate(c)), gaussian_binomial(n, k, 0.37),
                                rel_tol=1e-13)
            assert sum(c) == math.comb(n, k)


def test_pochhammer_direct():
    a, q = 0.3, 0.6
    assert math.isclose(q_pochhammer(a, q, 7), math.prod(1 - a * q**j for j in range(7)), rel_tol=1e-14)
    assert q_pochhammer(a, q, 0) == 1.0
    direct = math.prod(1 - a * q**j for j in range(400))
    assert math.isclose(q_pochhammer(a, q), direct, rel_tol=1e-14)


def _brute(num, total, lo, hi):
    return sorted(p for p in itertools.product(range(lo, hi + 1), repeat=num)
                  if sum(p) == total and all(p[i] >= p[i + 1] for i in range(num - 1)))


def test_enumerate_partitions_bruteforce():
    for num in range(1, 5):
        for lo in range(-4, 5):
            for hi in range(lo, 5):
                for total in range(-8, 9):
                    got = sorted(p.parts for p in enumerate_partitions(num, total, lo, hi))
                    assert got == _brute(num, total, lo, hi)


def test_bounded_partition_validation():
    with pytest.raises(ValueError):
        BoundedPartition((1, 2), 0, 3)
    with pytest.raises(ValueError):
        BoundedPartition((5, 1), 0, 3)
    assert BoundedPartition((3, 1, 1), 0, 3).conjugate() == (3, 1, 1)


@pytest.mark.parametrize("num,total,hi", [(2, 3, 3), (3, 4, 4), (3, 6, 4), (4, 5, 3)])
def test_transition_inverse(num, total, hi):
    tm = transition_matrices(enumerate_partitions(num, total, 0, hi))
    k = len(tm.partition_index)
    assert np.array_equal(tm.msub @ tm.msup, np.eye(k, dtype=np.int64))
    assert np.array_equal(np.triu(tm.msub, 1), np.zeros((k, k), dtype=np.int64))
