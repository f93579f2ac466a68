import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxz import droplet as dr
from xxz.groundstates import antikink_state, kink_state, product_state
from xxz.spinchain import AnisotropyParams, Terms, build_sector_basis


def _q(delta):
    return AnisotropyParams.from_delta(delta).q


@pytest.mark.parametrize("L,n,delta", [(8, 2, 1.5), (10, 3, 2.0), (12, 5, 1.2), (30, 6, 3.0), (40, 9, 1.1)])
def test_overlap_bounds_hold(L, n, delta):
    fam = dr.droplet_family(L, n, delta, check=False)
    assert all(v <= 0 for v in fam.bound_violations().values())


@pytest.mark.parametrize("L,n,delta", [(7, 2, 1.5), (8, 3, 2.5), (9, 4, 1.3)])
def test_engine_matches_vectors(L, n, delta):
    fam = dr.droplet_family(L, n, delta)
    G, H, H2 = dr.droplet_bruteforce(L, n, delta)
    s = 1 / np.sqrt(np.diag(G))
    for A, B in ((fam.gram, G), (fam.h_gram, H), (fam.h2_gram, H2)):
        assert np.abs(A - B * np.outer(s, s)).max() < 1e-12
    assert np.allclose(fam.norms2, np.diag(G), rtol=1e-12)


def test_locality():
    for L, n in ((6, 2), (7, 3), (8, 4)):
        for x in dr.split_positions(L, n):
            assert dr.locality_defect(L, n, x, 1.7) < 1e-13


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_energy_deviation_bound(n):
    for delta in (1.2, 2.0, 4.0):
        fam = dr.droplet_family(3 * n + 6, n, delta)
        assert fam.energy_deviation().max() <= dr.energy_deviation_bound(n, _q(delta)) * (1 + 1e-12)


def test_two_site_table_against_alt():
    for delta in (1.3, 2.0, 5.0):
        mine = dr.two_site_h_table(delta)
        alt = dr.two_site_h_table_alt(delta)
        q = _q(delta)
        # independent route: product states and the two-site kink state as explicit 4-vectors
        H = dr.two_site_h(delta)
        kink2 = [np.array([1.0, 0, 0, 0]), np.array([0, q, q * q, 0]), np.array([0, 0, 0, q**3])]
        for (j, l), v in mine.items():
            bra = np.kron([1.0, 0] if j == 0 else [0, q], [1.0, 0] if l == 0 else [0, q])
            assert math.isclose(v, bra @ H @ kink2[j + l], abs_tol=1e-15)
        assert math.isclose(mine[(0, 0)], alt[(0, 0)], rel_tol=1e-12)
        assert math.isclose(mine[(1, 1)], alt[(1, 1)], rel_tol=1e-12)
        assert not math.isclose(mine[(0, 1)], alt[(0, 1)], rel_tol=1e-6)


def _ip_bruteforce(x, y, r, m, n, k, q):
    L = x + y + r
    a = product_state([kink_state(1, x, m, q), antikink_state(x + 1, L, n + k, q)])
    b = product_state([kink_state(1, x + r, m + k, q), antikink_state(x + r + 1, L, n, q)])
    basis = build_sector_basis(L, 0.5, N=m + n + k)
    return a.materialize(basis, normalize="raw") @ b.materialize(basis, normalize="raw")


@given(x=st.integers(1, 4), y=st.integers(1, 4), r=st.integers(0, 3), data=st.data(),
       q=st.floats(0.2, 0.8))
@settings(max_examples=60, deadline=None)
def test_overlap_closed_form(x, y, r, data, q):
    m = data.draw(st.integers(0, x))
    n = data.draw(st.integers(0, y))
    k = data.draw(st.integers(0, r))
    ref = _ip_bruteforce(x, y, r, m, n, k, q)
    assert math.isclose(dr.prelim_ip(x, y, r, m, n, k, q), ref, rel_tol=1e-11, abs_tol=1e-300)
    if r >= 1:
        assert math.isclose(dr.prelim3_ip(x, y, r, m, n, k, q), ref, rel_tol=1e-11, abs_tol=1e-300)
    if k == r or m == n == 0:
        assert math.isclose(dr.prelim_ip_alt(x, y, r, m, n, k, q), ref, rel_tol=1e-11)


def test_alt_overlap_exponent_differs():
    q = 0.5
    assert not math.isclose(dr.prelim_ip_alt(2, 2, 2, 1, 1, 1, q), _ip_bruteforce(2, 2, 2, 1, 1, 1, q))


def test_split_form_hamiltonian_element():
    delta = 1.8
    q = _q(delta)
    p = AnisotropyParams.from_delta(delta)
    for x, y, r, m, n, k in ((2, 2, 1, 1, 1, 1), (3, 2, 2, 1, 0, 1), (2, 3, 2, 2, 1, 1), (3, 3, 3, 1, 2, 2)):
        L = x + y + r
        a = product_state([kink_state(1, x, m, q), antikink_state(x + 1, L, n + k, q)])
        b = product_state([kink_state(1, x + r, m + k, q), antikink_state(x + r + 1, L, n, q)])
        basis = build_sector_basis(L, 0.5, N=m + n + k)
        t = Terms(L)
        t.add_bond(x - 1, x, 0.25, -1.0, -0.5 * p.inv_delta)
        t.add_field(x - 1, -p.boundary_field)
        t.add_field(x, -p.boundary_field)
        ref = a.materialize(basis, normalize="raw") @ (t.assemble(basis) @ b.materialize(basis, normalize="raw"))
        assert math.isclose(dr.prelim3_h(x, y, r, m, n, k, delta), ref, rel_tol=1e-10, abs_tol=1e-14)


def test_result1_and_orthogonality():
    q = 0.4
    for L in (10, 14):
        for n1 in range(1, 4):
            for n2 in range(1, 4):
                for x in range(n1, L - n2 + 1):
                    assert dr.result1_measured(L, x, n1, n2, q) <= dr.result1_bound(n1, n2, q)
    with pytest.raises(ValueError):
        dr.orth_family_bound(1.0, 0.4)


def test_projector_expectations():
    q, L = 0.45, 8
    alt_diff = 0
    for n in (2, 3, 4):
        for x in dr.split_positions(L, n):
            for a, b in ((2, 3), (4, 6), (6, 7)):
                for j in range(n + 1):
                    for sigma in ("up", "down"):
                        ref = dr.projector_expectation_bruteforce(L, n, x, (a, b), j, sigma, q)
                        assert abs(dr.projector_expectation(L, n, x, (a, b), j, sigma, q) - ref) < 1e-13
                        alt_diff += abs(dr.projector_expectation_alt(L, n, x, (a, b), j, sigma, q)
                                           - ref) > 1e-10
    assert alt_diff > 0


@pytest.mark.parametrize("L,n,delta", [(10, 4, 2.0), (11, 5, 3.0), (12, 6, 4.0)])
def test_family_norms_against_bounds(L, n, delta):
    q = _q(delta)
    meas = dr.measured_family_norms(L, n, delta)
    inst = dr.droplet_orth_instantiation(n, q)
    assert meas["proj_diff"] <= inst["proj_diff"]
    assert meas["op_norm"] <= inst["op_norm_bound"]
    assert meas["proj_diff"] <= dr.eval_result2(n, q)
