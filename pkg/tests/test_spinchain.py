import math

import numpy as np
import pytest

from xxz.spectra import eigensolve
from xxz.spinchain import (
    AnisotropyParams,
    HeightGraph,
    Terms,
    build_sector_basis,
    chain_hamiltonian,
    chain_terms,
    flip_reflect_permutations,
    permute_operator,
    quantum_group_generators,
    spin_matrices,
)


def test_params_roundtrip():
    p = AnisotropyParams.from_delta(2.0)
    assert math.isclose((p.q + 1 / p.q) / 2, 2.0)
    assert math.isclose(p.boundary_field, math.sqrt(3) / 4)
    assert math.isclose(p.a, -2 * math.log(p.q))
    inf = AnisotropyParams.from_delta(math.inf)
    assert inf.q == 0.0 and inf.inv_delta == 0.0 and inf.boundary_field == 0.5
    with pytest.raises(ValueError):
        AnisotropyParams.from_delta(0.5)


@pytest.mark.parametrize("S,L", [(0.5, 6), (1.0, 4), (1.5, 3)])
@pytest.mark.parametrize("boundary", ["kink", "pp", "free", "periodic"])
def test_sector_invariance(S, L, boundary):
    H, basis = chain_hamiltonian(L, S, 1.7, boundary, N=None)
    M = H.toarray()
    N = basis.configs.sum(axis=1)
    assert np.all(M[N[:, None] != N[None, :]] == 0)


def _droplet_terms(L, x, delta):
    A = AnisotropyParams.from_delta(delta).boundary_field
    t = chain_terms(x, 0.5, delta, "pm").shifted(0, L)
    t = t + chain_terms(L - x, 0.5, delta, "mp").shifted(x, L)
    b = Terms(L)
    b.add_bond(x - 1, x, 0.25, -1.0, -0.5 / delta)
    b.add_field(x - 1, -A)
    b.add_field(x, -A)
    return t + b


@pytest.mark.parametrize("L", range(2, 9))
def test_cut_identity(L):
    delta = 2.0
    for N in range(L + 1):
        basis = build_sector_basis(L, 0.5, N=N)
        full = chain_terms(L, 0.5, delta, "pp").assemble(basis).toarray()
        for x in range(1, L):
            parts = _droplet_terms(L, x, delta).assemble(basis).toarray()
            assert np.abs(full - parts).max() < 1e-15


@pytest.mark.parametrize("S,Lmax", [(0.5, 10), (1.0, 7), (1.5, 5)])
def test_kink_positivity(S, Lmax):
    two_s = int(2 * S)
    for L in range(2, Lmax + 1):
        for N in range(two_s * L + 1):
            H, basis = chain_hamiltonian(L, S, 1.6, "kink", N=N)
            r = eigensolve(H, 1 if basis.dim > 512 else None)
            assert abs(r.eigenvalues[0]) < 1e-10


@pytest.mark.parametrize("S,L", [(0.5, 6), (1.0, 4), (1.5, 3)])
def test_flip_and_reflection(S, L):
    """Reflection or flip alone exchanges kink and antikink; together they are a kink symmetry."""
    two_s = int(2 * S)
    for N in range(two_s * L + 1):
        H, basis = chain_hamiltonian(L, S, 2.5, "kink", N=N)
        reflect, flip, fb = flip_reflect_permutations(basis)
        Ha, _ = chain_hamiltonian(L, S, 2.5, "antikink", N=N)
        Hf, _ = chain_hamiltonian(L, S, 2.5, "antikink", N=two_s * L - N)
        Hk, _ = chain_hamiltonian(L, S, 2.5, "kink", N=two_s * L - N)
        assert np.abs(permute_operator(H, reflect).toarray() - Ha.toarray()).max() < 1e-15
        assert np.abs(permute_operator(H, flip, fb.dim).toarray() - Hf.toarray()).max() < 1e-15
        assert np.abs(permute_operator(H, flip[reflect], fb.dim).toarray() - Hk.toarray()).max() < 1e-15


@pytest.mark.parametrize("S", [0.5, 1.0, 1.5])
def test_free_hamiltonian_reconstruction(S):
    L, delta = 3, 1.8
    s3, sp_, sm = spin_matrices(S)
    d = s3.shape[0]
    s1, s2 = (sp_ + sm) / 2, (sp_ - sm) / 2j
    eye = np.eye(d)

    def site(op, x):
        mats = [eye] * L
        mats[x] = op
        out = np.ones((1, 1))
        for m in mats:
            out = np.kron(out, m)
        return out

    K = sum(S * S * np.eye(d**L) - site(s3, x) @ site(s3, x + 1)
            - (site(s1, x) @ site(s1, x + 1) + site(s2, x) @ site(s2, x + 1)) / delta for x in range(L - 1))
    H, basis = chain_hamiltonian(L, S, delta, "free", N=None)
    idx = basis.configs.astype(int) @ (d ** np.arange(L - 1, -1, -1))
    assert np.abs(H.toarray() - K[np.ix_(idx, idx)].real).max() < 1e-14
    assert np.abs(K.imag).max() < 1e-14


def test_height_graph_validation():
    with pytest.raises(ValueError):
        HeightGraph((0, 1), ((0, 1, 0),), {0: (0,), 1: (2,)})
    g = HeightGraph.grid((2, 3))
    assert g.size == 6 and len(g.bonds) == 7


@pytest.mark.parametrize("L,q", [(3, 0.3), (4, 0.55), (5, 0.8)])
def test_quantum_group_relations(L, q):
    g = {k: v.toarray() for k, v in quantum_group_generators(L, q).items()}
    K, Ki = g["K"], g["Kinv"]
    E, F = K @ g["KinvE"], g["FK"] @ Ki
    assert np.abs(E @ F - F @ E - (K - Ki) / (q - 1 / q)).max() < 1e-12
    assert np.abs(K @ E @ Ki - q * q * E).max() < 1e-12
    # the generators commute with the Hamiltonian whose zero modes put down spins on the right
    H, basis = chain_hamiltonian(L, 0.5, (q + 1 / q) / 2, "antikink", N=None)
    idx = basis.configs.astype(int) @ (2 ** np.arange(L - 1, -1, -1))
    Hf = np.zeros((2**L, 2**L))
    Hf[np.ix_(idx, idx)] = H.toarray()
    for X in (E, F, K):
        assert np.abs(Hf @ X - X @ Hf).max() < 1e-12
