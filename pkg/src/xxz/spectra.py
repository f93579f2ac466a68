"""Sector eigensolvers, the one-magnon spectrum and gap extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .spinchain import SparseOperator, chain_hamiltonian

DENSE_MAX = 512
DEGEN_RTOL = 1e-8


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, best_residual: float):
        super().__init__(f"{msg} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    solver: str
    residual_norms: np.ndarray
    label: dict = field(default_factory=dict)
    vectors: np.ndarray | None = None

    @property
    def gap(self) -> float:
        return distinct_gap(self.eigenvalues)


def distinct_levels(vals: np.ndarray) -> list[float]:
    """Collapse eigenvalues equal within 1e-8 * max(1, |lambda|)."""
    out: list[float] = []
    for v in np.sort(vals):
        if not out or abs(v - out[-1]) > DEGEN_RTOL * max(1.0, abs(v)):
            out.append(float(v))
    return out


def distinct_gap(vals: np.ndarray) -> float:
    lv = distinct_levels(vals)
    if len(lv) < 2:
        raise ValueError("no gap defined: only one distinct level")
    return lv[1] - lv[0]


def lanczos(H, k: int, tol: float = 1e-10, seed: int = 0, max_krylov: int = 300,
            max_restarts: int = 50) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """k lowest eigenpairs by Lanczos with full reorthogonalization and explicit restarts."""
    A = H.tocsr() if isinstance(H, SparseOperator) else H
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    m = min(n, max(max_krylov, 3 * k + 20))
    start = rng.standard_normal(n)
    locked = np.zeros((n, 0))
    best = math.inf
    for _ in range(max_restarts):
        Q = np.zeros((n, m + 1))
        alpha, beta = np.zeros(m), np.zeros(m)
        v = start - locked @ (locked.T @ start)
        v /= np.linalg.norm(v)
        Q[:, 0] = v
        steps = m
        for j in range(m):
            w = A @ Q[:, j]
            alpha[j] = Q[:, j] @ w
            w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
            w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
                steps = j + 1
                break
            Q[:, j + 1] = w / beta[j]
        try:
            T_vals, T_vecs = sla.eigh_tridiagonal(alpha[:steps], beta[: steps - 1])
        except np.linalg.LinAlgError:
            T = np.diag(alpha[:steps]) + np.diag(beta[: steps - 1], 1) + np.diag(beta[: steps - 1], -1)
            T_vals, T_vecs = np.linalg.eigh(T)
        kk = min(k, steps)
        X = Q[:, :steps] @ T_vecs[:, :kk]
        res = np.linalg.norm(A @ X - X * T_vals[:kk], axis=0)
        best = min(best, float(res.max()))
        if res.max() <= tol * max(1.0, np.abs(T_vals[:kk]).max()) and (kk == k or steps == n):
            return T_vals[:kk], X, res
        start = X.sum(axis=1) + 1e-3 * rng.standard_normal(n)
        m = min(n, int(m * 1.5))
    raise ConvergenceError("Lanczos did not converge", best)


def eigensolve(H: SparseOperator, k: int | None = None, tol: float = 1e-10, seed: int = 0,
               solver: str = "auto", vectors: bool = False) -> SpectrumResult:
    """k lowest eigenvalues (all if k is None) with residual norms."""
    if not H.hermitian:
        raise ValueError("eigensolve needs a hermitian operator")
    n = H.dim
    if solver == "auto":
        solver = "dense" if n <= DENSE_MAX or k is None else "lanczos"
    if solver == "dense":
        M = H.toarray()
        w, V = np.linalg.eigh(M)
        kk = n if k is None else min(k, n)
        w, V = w[:kk], V[:, :kk]
        res = np.linalg.norm(M @ V - V * w, axis=0)
    else:
        # degenerate levels need deflation: repeat Lanczos against converged vectors
        w, V, res = _lanczos_deflated(H, k, tol, seed)
    return SpectrumResult(w, solver, res, vectors=V if vectors else None)


def _lanczos_deflated(H: SparseOperator, k: int, tol: float, seed: int):
    A = H.tocsr()
    shift = abs(A).sum(axis=1).max() + 1.0
    vals, vecs, ress = [], np.zeros((H.dim, 0)), []
    for it in range(k + 5):
        if len(vals) >= k:
            break
        # penalize found vectors: A + shift * P_found
        P = vecs

        class Op:
            shape = A.shape

            def __matmul__(self, x):
                y = A @ x
                if P.shape[1]:
                    y = y + shift * (P @ (P.T @ x))
                return y

        w, X, r = lanczos(Op(), k - len(vals), tol=tol, seed=seed + it)
        for j in range(len(w)):
            x = X[:, j] - vecs @ (vecs.T @ X[:, j])
            nx = np.linalg.norm(x)
            if nx < 1e-6:
                continue
            x /= nx
            vecs = np.column_stack([vecs, x])
            vals.append(float(x @ (A @ x)))
            ress.append(float(np.linalg.norm(A @ x - vals[-1] * x)))
    order = np.argsort(vals)[:k]
    return np.array(vals)[order], vecs[:, order], np.array(ress)[order]


def one_magnon_spectrum(L: int, delta: float) -> np.ndarray:
    """{0} together with 1 - Delta^-1 cos(pi l / L), l = 1..L-1, ascending."""
    inv = 0.0 if math.isinf(delta) else 1.0 / delta
    return np.sort(np.r_[0.0, 1.0 - inv * np.cos(np.pi * np.arange(1, L) / L)])


def kink_gap_exact(L: int, delta: float) -> float:
    inv = 0.0 if math.isinf(delta) else 1.0 / delta
    return 1.0 - inv * math.cos(math.pi / L)


def finite_gap(L: int, S: float, N: int, delta: float, boundary: str = "kink", tol: float = 1e-10,
               seed: int = 0, pin: int | None = None) -> float:
    """Lowest excitation above the ground level of sector N."""
    H, basis = chain_hamiltonian(L, S, delta, boundary, N=N, pin=pin)
    if basis.dim < 2:
        raise ValueError("no gap defined: one-dimensional sector")
    k = min(basis.dim, 4)
    while True:
        r = eigensolve(H, k if basis.dim > DENSE_MAX else None, tol=tol, seed=seed)
        lv = distinct_levels(r.eigenvalues)
        if len(lv) >= 2:
            return lv[1] - lv[0]
        if k >= basis.dim:
            raise ValueError("no gap defined: only one distinct level")
        k = min(basis.dim, 2 * k)


def lowest_levels(L: int, S: float, N: int, delta: float, boundary: str, k: int, tol: float = 1e-10,
                  seed: int = 0) -> SpectrumResult:
    H, basis = chain_hamiltonian(L, S, delta, boundary, N=N)
    r = eigensolve(H, min(k, basis.dim), tol=tol, seed=seed)
    r.label = {"L": L, "S": S, "N": N, "M": S * L - N, "boundary": boundary, "delta": delta}
    return r


def delta_sweep(L: int, S: float, boundary: str, inv_deltas, k: int = 4, sectors=None,
                tol: float = 1e-10) -> list[dict]:
    """Rows (delta_inv, sector_M, level_index, eigenvalue) over a grid of Delta^-1 in [0, 1]."""
    rows = []
    ts = int(round(2 * S))
    sectors = range(ts * L + 1) if sectors is None else sectors
    for t in inv_deltas:
        if not 0.0 <= t <= 1.0:
            raise ValueError("Delta^-1 grid must lie in [0, 1]")
        delta = math.inf if t == 0 else 1.0 / t
        for N in sectors:
            try:
                r = lowest_levels(L, S, N, delta, boundary, k, tol)
            except Exception as exc:  # annotate and continue the sweep
                rows.append({"delta_inv": t, "sector_M": S * L - N, "level_index": -1,
                             "eigenvalue": math.nan, "error": str(exc)})
                continue
            for i, e in enumerate(r.eigenvalues):
                rows.append({"delta_inv": t, "sector_M": S * L - N, "level_index": i, "eigenvalue": float(e)})
    return rows


def free_chain_gap(L: int, S: float, delta: float, max_sector: int = 1) -> float:
    """Lowest energy above the all-up state of the open chain without boundary fields,
    minimized over the sectors with 1..max_sector down units."""
    best = math.inf
    for N in range(1, max_sector + 1):
        r = lowest_levels(L, S, N, delta, "free", 1)
        best = min(best, float(r.eigenvalues[0]))
    return best


def ring_gap(L: int, S: float, delta: float, max_sector: int = 1) -> float:
    """Same as free_chain_gap on the periodic ring."""
    best = math.inf
    for N in range(1, max_sector + 1):
        r = lowest_levels(L, S, N, delta, "periodic", 1)
        best = min(best, float(r.eigenvalues[0]))
    return best
