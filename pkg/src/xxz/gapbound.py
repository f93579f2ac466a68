"""Spin-ladder reduction and the reduced-matrix lower bound on the kink gap.

A spin-S chain is embedded in a 2S-leg spin-1/2 ladder.  The ladder ground
band is spanned by products of spin-1/2 kink states with per-leg down counts
n_m; symmetrizing over legs leaves states labelled by partitions.  The
reduced matrix is the rung symmetrizer restricted to that band, and its
second eigenvalue controls the bound gamma >= 2S(1 - 1/Delta)(1 - delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qcomb import (
    BoundedPartition,
    enumerate_partitions,
    gaussian_binomial,
    orbit_size,
    q_pochhammer,
    transition_matrices,
)

ONE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class ReducedMatrix:
    partitions: tuple
    entries: np.ndarray
    variant: str
    q: float
    two_s: int
    top_vector: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.partitions)


def ladder_norm(L: int, nvec, q: float) -> float:
    """Squared norm of the product of per-leg kink states: prod q^{n(n+1)} [L n]_{q^2}."""
    out = 1.0
    for n in nvec:
        out *= q ** (n * (n + 1)) * gaussian_binomial(L, n, q * q)
    return out


def _ps_elementary_one(parts, legs: int) -> int:
    shift = -min(0, min(parts))
    p = [x + shift for x in parts]
    cols = [sum(1 for x in p if x >= c) for c in range(1, max(p, default=0) + 1)]
    return math.prod(math.comb(legs, c) for c in cols)


@lru_cache(maxsize=256)
def _gamma_block(legs: int, total: int, lo: int, hi: int):
    parts = enumerate_partitions(legs, total, lo, hi)
    tm = transition_matrices(parts)
    msub = tm.msub.astype(float)
    msup = tm.msup.astype(float)
    pmon = np.array([orbit_size(p.parts) for p in parts], dtype=float)
    pel = np.array([_ps_elementary_one(p.parts, legs) for p in parts], dtype=float)
    G = np.einsum("li,lj,kl,l->ijk", msub, msub, msup, 1.0 / pel)
    G *= np.sqrt(np.outer(pmon, pmon))[:, :, None]
    return tuple(parts), G


def gamma_tensor(mu, nu, kappa, legs: int) -> float:
    """Gamma^kappa_{mu nu}: q-independent structure constants of the reduced matrix."""
    mu, nu, kappa = (tuple(getattr(p, "parts", p)) for p in (mu, nu, kappa))
    if not (len(mu) == len(nu) == len(kappa) == legs):
        raise ValueError("partitions must have `legs` parts")
    if not (sum(mu) == sum(nu) == sum(kappa)):
        raise ValueError("partitions must share the same total")
    allp = mu + nu + kappa
    lo, hi = min(allp), max(allp)
    # translation invariance: normalize the window to start at 0
    parts, G = _gamma_block(legs, sum(mu) - legs * lo, 0, hi - lo)
    index = {p.parts: i for i, p in enumerate(parts)}
    sh = lambda p: tuple(x - lo for x in p)
    return float(G[index[sh(mu)], index[sh(nu)], index[sh(kappa)]])


def _assemble(parts, G, expo, weight, two_s, q, variant) -> ReducedMatrix:
    n = len(parts)
    if n == 0:
        raise ValueError("empty partition index")
    E = np.asarray(expo, dtype=float)
    W = np.asarray(weight, dtype=float)
    ex = E[None, None, :] - 0.5 * E[:, None, None] - 0.5 * E[None, :, None]
    qp = np.power(float(q), ex) if q > 0 else (np.abs(ex) < 1e-12).astype(float)
    rat = W[None, None, :] / np.sqrt(W[:, None, None] * W[None, :, None])
    M = np.einsum("ijk,ijk->ij", G, qp * rat)
    M = 0.5 * (M + M.T)
    pmon = np.array([orbit_size(p.parts) for p in parts], dtype=float)
    # top eigenvector c_mu = sqrt(|orbit| * ps(e_mu)), computed in log form
    lg = 0.5 * (np.log(pmon) + np.log(W)) + (0.5 * E * math.log(q) if q > 0 else 0.0)
    if q == 0:
        lg = np.where(E == E.min(), lg, -np.inf)
    c = np.exp(lg - lg.max())
    c /= np.linalg.norm(c)
    return ReducedMatrix(tuple(parts), M, variant, q, two_s, c)


def reduced_matrix(L: int, two_s: int, N: int, q: float) -> ReducedMatrix:
    """Reduced matrix on partitions of N into 2S per-leg down counts in [0, L]."""
    if not 0 <= N <= two_s * L:
        raise ValueError("N out of range")
    parts, G = _gamma_block(two_s, N, 0, L)
    expo = [sum(k * (k + 1) for k in p.parts) for p in parts]
    weight = [math.prod(gaussian_binomial(L, k, q * q) for k in p.parts) for p in parts]
    return _assemble(parts, G, expo, weight, two_s, q, f"finite({L})")


def reduced_matrix_limit(variant: str, two_s: int, q: float, *, N: int | None = None, n0: int | None = None,
                         cutoff: int = 6) -> ReducedMatrix:
    """Half-infinite (fixed N, L -> inf) or bi-infinite (filling n0, signed parts |k| <= cutoff)."""
    if not 0 < q < 1:
        raise ValueError("limits need 0 < q < 1")
    q2 = q * q
    if variant == "half_infinite":
        parts, G = _gamma_block(two_s, N, 0, N)
        expo = [sum(k * (k + 1) for k in p.parts) for p in parts]
        weight = [math.prod(1.0 / q_pochhammer(q2, q2, k) for k in p.parts) for p in parts]
        return _assemble(parts, G, expo, weight, two_s, q, "half_infinite")
    if variant == "bi_infinite":
        parts, G = _gamma_block(two_s, n0 + two_s * cutoff, 0, 2 * cutoff)
        parts = tuple(p.shifted(-cutoff) for p in parts)
        expo = [sum(k * k for k in p.parts) for p in parts]
        ex = np.asarray(expo, float)
        # drop kappa terms below the double-precision floor
        tail = q ** (ex[None, None, :] - 0.5 * ex[:, None, None] - 0.5 * ex[None, :, None])
        G = np.where(tail < 1e-14, 0.0, G)
        return _assemble(parts, G, expo, [1.0] * len(parts), two_s, q, f"bi_infinite({n0})")
    raise ValueError(f"unknown variant {variant!r}")


@dataclass(frozen=True)
class GapBound:
    delta: float  # largest eigenvalue strictly below the ground-band eigenvalue 1
    deficit: float  # 1 - delta
    bound: float
    top_eigenvalue: float


def gap_lower_bound(rm: ReducedMatrix, S: float, delta_aniso: float) -> GapBound:
    """gamma >= 2S(1 - 1/Delta)(1 - lambda_2), lambda_2 = second eigenvalue of the reduced matrix."""
    M, c = rm.entries, rm.top_vector
    top = float(c @ M @ c)
    if rm.dim == 1:
        lam2 = 0.0
    else:
        # restrict to the orthogonal complement of the ground-band direction
        P = np.eye(rm.dim) - np.outer(c, c)
        w = np.linalg.eigvalsh(P @ M @ P)
        # P M P has one spurious zero from the removed direction
        w = np.sort(w)
        idx = np.argmin(np.abs(w))
        w = np.delete(w, idx)
        lam2 = float(w.max()) if len(w) else 0.0
        if lam2 >= 1 - ONE_TOL and abs(lam2 - 1) < ONE_TOL and np.allclose(w, 1.0, atol=ONE_TOL):
            raise ValueError("all eigenvalues equal one")
    inv = 0.0 if math.isinf(delta_aniso) else 1.0 / delta_aniso
    return GapBound(lam2, 1.0 - lam2, 2 * S * (1 - inv) * (1 - lam2), top)


# --------------------------------------------------------------------------- independent ladder oracle


def ladder_oracle_matrix(L: int, two_s: int, N: int, q: float) -> tuple[list, np.ndarray]:
    """Gram matrix <phi_mu, P^Sym phi_nu> of normalized leg-orbit averages, built densely."""
    from itertools import permutations as perms

    from .groundstates import antikink_state
    from .spinchain import build_sector_basis, rung_symmetrizer

    legs = two_s
    parts = enumerate_partitions(legs, N, 0, L)
    leg_vecs = {}
    full = build_sector_basis(L, 0.5, full=True)
    for n in range(L + 1):
        v = antikink_state(1, L, n, q).materialize(full, normalize="raw")
        leg_vecs[n] = v.reshape((2,) * L)
    P1 = rung_symmetrizer(legs).reshape((2,) * (2 * legs))

    def orbit_vec(p):
        acc = 0.0
        seen = set(perms(p.parts))
        for s in seen:
            t = leg_vecs[s[0]]
            for k in s[1:]:
                t = np.multiply.outer(t, leg_vecs[k])
            acc = acc + t
        # axes are (m, x); reorder to rung-major (x, m)
        order = [m * L + x for x in range(L) for m in range(legs)]
        return np.transpose(acc / len(seen), order)

    vecs = [orbit_vec(p) for p in parts]

    def apply_sym(t):
        for x in range(L):
            ax = list(range(x * legs, (x + 1) * legs))
            t = np.tensordot(P1, t, axes=(list(range(legs, 2 * legs)), ax))
            t = np.moveaxis(t, list(range(legs)), ax)
        return t

    pv = [apply_sym(v) for v in vecs]
    n = len(parts)
    M = np.zeros((n, n))
    norms = [math.sqrt(float(np.sum(v * v))) for v in vecs]
    for i in range(n):
        for j in range(n):
            M[i, j] = float(np.sum(vecs[i] * pv[j])) / (norms[i] * norms[j])
    return parts, M
