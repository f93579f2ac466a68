import math

import numpy as np
import pytest

from xxz.gapbound import (
    gamma_tensor,
    gap_lower_bound,
    ladder_norm,
    ladder_oracle_matrix,
    reduced_matrix,
    reduced_matrix_limit,
)
from xxz.groundstates import kink_norm2
from xxz.spectra import finite_gap
from xxz.spinchain import AnisotropyParams


@pytest.mark.parametrize("two_s,L", [(2, 3), (2, 4), (3, 3)])
def test_matches_dense_oracle(two_s, L):
    for q in (0.25, 0.7):
        for N in range(two_s * L + 1):
            rm = reduced_matrix(L, two_s, N, q)
            _, M = ladder_oracle_matrix(L, two_s, N, q)
            assert np.abs(rm.entries - M).max() < 1e-11


def test_top_vector_is_unit_eigenvector():
    rm = reduced_matrix(5, 2, 4, 0.5)
    c = rm.top_vector
    assert abs(np.linalg.norm(c) - 1) < 1e-14
    assert np.abs(rm.entries @ c - c).max() < 1e-12


def test_ladder_norm_factorizes():
    assert math.isclose(ladder_norm(6, (2, 3), 0.4), kink_norm2(6, 2, 0.4) * kink_norm2(6, 3, 0.4), rel_tol=1e-14)


def test_gamma_translation_invariant():
    a = gamma_tensor((2, 1), (2, 1), (3, 0), 2)
    b = gamma_tensor((5, 4), (5, 4), (6, 3), 2)
    assert a == b
    with pytest.raises(ValueError):
        gamma_tensor((1, 1), (2, 1), (2, 1), 2)


@pytest.mark.parametrize("S", [1.0, 1.5])
def test_bound_below_exact_gap(S):
    two_s = int(2 * S)
    for d in (1.3, 2.5):
        q = AnisotropyParams.from_delta(d).q
        for L in (3, 4):
            for N in range(1, two_s * L):
                b = gap_lower_bound(reduced_matrix(L, two_s, N, q), S, d)
                assert 0 <= b.bound <= finite_gap(L, S, N, d) + 1e-9


def test_stabilizes_to_half_infinite_limit():
    q, N = 0.5, 3
    lim = gap_lower_bound(reduced_matrix_limit("half_infinite", 2, q, N=N), 1.0, 2.0).bound
    diffs = [abs(gap_lower_bound(reduced_matrix(L, 2, N, q), 1.0, 2.0).bound - lim) for L in (4, 8, 16, 32)]
    assert diffs[-1] < 1e-8
    assert all(b <= a + 1e-15 for a, b in zip(diffs, diffs[1:]))


def test_bi_infinite_cutoff_stable():
    q = 0.4
    a = gap_lower_bound(reduced_matrix_limit("bi_infinite", 2, q, n0=0, cutoff=5), 1.0, 2.0).bound
    b = gap_lower_bound(reduced_matrix_limit("bi_infinite", 2, q, n0=0, cutoff=7), 1.0, 2.0).bound
    assert abs(a - b) < 1e-10


def test_ising_limit_value():
    for two_s in (2, 3, 4):
        b = gap_lower_bound(reduced_matrix(6, two_s, two_s * 3, 0.0), two_s / 2, math.inf)
        assert abs(b.deficit - 1 / two_s) < 1e-12
