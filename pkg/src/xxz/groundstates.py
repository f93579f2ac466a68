"""Closed-form ground states and exact scalar functionals.

States are stored as per-site exponent tables: the coefficient of a
configuration {s_x} (down counts) is q^{sum_x e_x(s_x)} * prod_x f_x(s_x),
optionally restricted to a fixed number of downs on given site blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcomb import gaussian_binomial, q_pochhammer
from .spinchain import HeightGraph, SectorBasis, _two_s, build_sector_basis


@dataclass(frozen=True, eq=False)
class ClosedFormState:
    kind: str
    q: float
    two_s: int
    expo: np.ndarray  # (nsites, 2S+1) exponent of q per local down count
    logf: np.ndarray  # (nsites, 2S+1) log of extra factors
    blocks: tuple = ()  # ((start, stop, downs), ...) with stop exclusive
    N: int | None = None
    offset: int = 1  # label of the first site

    @property
    def nsites(self) -> int:
        return self.expo.shape[0]

    def _log_parts(self, cfg: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        cfg = np.atleast_2d(cfg).astype(np.int64)
        rows = np.arange(self.nsites)
        e = self.expo[rows, cfg].sum(axis=1)
        f = self.logf[rows, cfg].sum(axis=1)
        ok = np.ones(len(cfg), dtype=bool)
        for a, b, k in self.blocks:
            ok &= cfg[:, a:b].sum(axis=1) == k
        if self.N is not None:
            ok &= cfg.sum(axis=1) == self.N
        return e, f, ok

    def coefficient(self, config: Sequence[int]) -> float:
        e, f, ok = self._log_parts(np.asarray(config))
        return float(_qpow(self.q, e[0]) * math.exp(f[0])) if ok[0] else 0.0

    def materialize(self, basis: SectorBasis | None = None, normalize: str = "max") -> np.ndarray:
        """Coefficient vector on ``basis``; normalize='max' scales the largest entry to 1."""
        if basis is None:
            basis = build_sector_basis(self.nsites, self.two_s / 2, N=self.N, full=self.N is None)
        e, f, ok = self._log_parts(basis.configs)
        if not ok.any():
            return np.zeros(basis.dim)
        if self.q == 0.0:
            emin = e[ok].min()
            v = np.where(ok & (e == emin), np.exp(f - f[ok].max()), 0.0)
        else:
            lg = e * math.log(self.q) + f
            lg = np.where(ok, lg, -np.inf)
            v = np.exp(lg - lg.max())
        if normalize == "unit":
            v = v / np.linalg.norm(v)
        elif normalize == "raw":
            v = np.where(ok, _qpow(self.q, e) * np.exp(f), 0.0)
        return v

    def norm2_bruteforce(self) -> float:
        basis = build_sector_basis(self.nsites, self.two_s / 2, N=self.N, full=self.N is None)
        v = self.materialize(basis, normalize="raw")
        return float(v @ v)


def _qpow(q: float, e):
    return np.power(float(q), np.asarray(e, dtype=float))


def _state(kind, q, two_s, expo, logf=None, blocks=(), N=None, offset=1) -> ClosedFormState:
    expo = np.asarray(expo, dtype=float)
    if logf is None:
        logf = np.zeros_like(expo)
    return ClosedFormState(kind, float(q), two_s, expo, np.asarray(logf, dtype=float), tuple(blocks), N, offset)


# --------------------------------------------------------------------------- ASW states


def asw_state(graph: HeightGraph, S: float, M: float, qs: Sequence[float] | None = None) -> ClosedFormState:
    """Zero-energy state of the kink Hamiltonian on a height graph, sector M.

    Coefficient of {m_x}: prod_i q_i^{-l_i(x) m_x} * binom(2S, S + m_x)^{1/2}.
    """
    ts = _two_s(S)
    s = ts / 2
    n2 = ts * graph.size - 2 * M
    if abs(n2 - round(n2)) > 1e-9 or round(n2) % 2 or not 0 <= n2 <= 2 * ts * graph.size:
        raise ValueError(f"infeasible sector M={M}")
    N = int(round(n2)) // 2
    if qs is None:
        from .spinchain import AnisotropyParams
        qs = [AnisotropyParams.from_delta(d).q for d in graph.deltas]
    if len(set(qs)) > 1:
        raise ValueError("closed-form table needs a common q; use asw_coefficients for mixed q")
    q = qs[0]
    dloc = np.arange(ts + 1)
    mloc = s - dloc
    expo = np.array([[-sum(graph.heights[x]) * m for m in mloc] for x in graph.sites])
    logf = np.tile(0.5 * np.log([math.comb(ts, int(d)) for d in dloc]), (graph.size, 1))
    return _state("asw", q, ts, expo, logf, N=N)


def asw_coefficients(graph: HeightGraph, S: float, basis: SectorBasis, qs: Sequence[float]) -> np.ndarray:
    """ASW coefficients with per-direction q_i, on an explicit basis (log-space normalized)."""
    ts = _two_s(S)
    m = basis.m()
    lg = np.zeros(basis.dim)
    for i, qi in enumerate(qs):
        li = np.array([graph.heights[x][i] for x in graph.sites], dtype=float)
        lg += -(m @ li) * math.log(qi)
    lg += 0.5 * np.log(np.vectorize(lambda d: math.comb(ts, int(d)))(basis.configs)).sum(axis=1)
    return np.exp(lg - lg.max())


# --------------------------------------------------------------------------- kinks (spin 1/2)


def kink_state(a: int, b: int, n: int, q: float) -> ClosedFormState:
    """psi^{+-}_{[a,b]}(n): downs weighted q^{b+1-x} (down spins on the right)."""
    xs = np.arange(a, b + 1)
    expo = np.stack([np.zeros(len(xs)), b + 1 - xs], axis=1)
    return _state("kink", q, 1, expo, N=n, offset=a)


def antikink_state(a: int, b: int, n: int, q: float) -> ClosedFormState:
    """psi^{-+}_{[a,b]}(n): downs weighted q^{x+1-a} (down spins on the left)."""
    xs = np.arange(a, b + 1)
    expo = np.stack([np.zeros(len(xs)), xs + 1 - a], axis=1)
    return _state("antikink", q, 1, expo, N=n, offset=a)


def kink_norm2(L: int, n: int, q: float) -> float:
    """||psi^{+-}_{[a,b]}(n)||^2 = [L n]_{q^2} q^{n(n+1)}, L = b - a + 1."""
    return gaussian_binomial(L, n, q * q) * q ** (n * (n + 1))


def kink_overlaps(a: int, b: int, m: int, n: int, q: float, exponent: str = "n(b-a+2)") -> dict:
    """Same-type squared norm and the mixed kink/antikink overlap on [a,b].

    ``exponent`` selects the mixed-overlap form: "n(b-a+2)" (default) or the
    alternative "b-a+2" kept for comparison.
    """
    L = b - a + 1
    same = kink_norm2(L, n, q) if m == n else 0.0
    if m != n:
        mixed = 0.0
    else:
        e = n * (b - a + 2) if exponent == "n(b-a+2)" else (b - a + 2)
        mixed = math.comb(L, n) * q**e
    return {"same_norm2": same, "mixed_overlap": mixed}


def product_state(parts: Sequence[ClosedFormState], kind: str = "product") -> ClosedFormState:
    """Tensor product of chain states on consecutive intervals."""
    expo = np.concatenate([p.expo for p in parts])
    logf = np.concatenate([p.logf for p in parts])
    blocks, start, total = [], 0, 0
    for p in parts:
        for a, b, k in p.blocks:
            blocks.append((a + start, b + start, k))
        if p.N is not None:
            blocks.append((start, start + p.nsites, p.N))
            total += p.N
        start += p.nsites
    return _state(kind, parts[0].q, parts[0].two_s, expo, logf, blocks,
                  N=total if all(p.N is not None for p in parts) else None, offset=parts[0].offset)


def coproduct_decompose(kind: str, a: int, b: int, n: int, x: int, q: float):
    """Split psi^{+-} (kind='kink') or psi^{-+} (kind='antikink') on [a,b] at cut x.

    Returns [(left, right, weight)] with left on [a,x] (k downs) and right on
    [x+1,b] (n-k downs); weights q^{(b-x)k} resp. q^{(x+1-a)(n-k)}.
    """
    if not a <= x < b:
        raise ValueError("cut must satisfy a <= x < b")
    make = kink_state if kind == "kink" else antikink_state
    out = []
    for k in range(max(0, n - (b - x)), min(n, x - a + 1) + 1):
        w = q ** ((b - x) * k) if kind == "kink" else q ** ((x + 1 - a) * (n - k))
        out.append((make(a, x, k, q), make(x + 1, b, n - k, q), w))
    return out


def coproduct_multi(kind: str, cuts: Sequence[int], n: int, q: float):
    """Multi-cell split of a kink on [cuts[0]+1, cuts[-1]] into cells (cuts[j-1], cuts[j]].

    Returns [(cell states, weight)] with weight prod_j q^{(x_r - x_j) k_j} for kinks
    and prod_j q^{(x_{j-1} - x_0) k_j} for antikinks.
    """
    make = kink_state if kind == "kink" else antikink_state
    cells = [(cuts[j - 1] + 1, cuts[j]) for j in range(1, len(cuts))]
    sizes = [b - a + 1 for a, b in cells]
    out = []

    def rec(j, left, ks):
        if j == len(cells):
            if left == 0:
                if kind == "kink":
                    e = sum((cuts[-1] - cuts[i + 1]) * k for i, k in enumerate(ks))
                else:
                    e = sum((cuts[i] - cuts[0]) * k for i, k in enumerate(ks))
                out.append(([make(c[0], c[1], k, q) for c, k in zip(cells, ks)], q**e))
            return
        for k in range(0, min(left, sizes[j]) + 1):
            rec(j + 1, left - k, ks + [k])

    rec(0, n, [])
    return out


def droplet_state(L: int, n: int, x: int, q: float) -> ClosedFormState:
    """xi_{L,n}(x) = psi^{+-}_{[1,x]}(floor(n/2)) (x) psi^{-+}_{[x+1,L]}(ceil(n/2))."""
    nl, nr = n // 2, n - n // 2
    if not nl <= x <= L - nr:
        raise ValueError(f"droplet position {x} outside [{nl}, {L - nr}]")
    parts = []
    if x >= 1:
        parts.append(kink_state(1, x, nl, q))
    if x < L:
        parts.append(antikink_state(x + 1, L, nr, q))
    st = product_state(parts, "droplet")
    return _state("droplet", q, 1, st.expo, st.logf, st.blocks, n, 1)


def droplet_norm2(L: int, n: int, x: int, q: float) -> float:
    nl, nr = n // 2, n - n // 2
    return kink_norm2(x, nl, q) * kink_norm2(L - x, nr, q)


def grand_canonical_state(heights: Sequence[float], mu: float, q: float) -> ClosedFormState:
    """Product state over sites of |up> + q^{l(x)-mu} |down> (no sector restriction)."""
    h = np.asarray(heights, dtype=float)
    expo = np.stack([np.zeros(len(h)), h - mu], axis=1)
    return _state("grand_canonical", q, 1, expo)


# --------------------------------------------------------------------------- infinite volume


def infinite_partition_Z(n: int, q: float) -> float:
    """Z(n) = q^{n(n+1)} / (q^2; q^2)_inf."""
    return q ** (n * (n + 1)) / q_pochhammer(q * q, q * q)


def z0_series(q: float) -> float:
    """Constant term of the grand-canonical generating function as a double series."""
    total, n = 0.0, 0
    q2 = q * q
    while True:
        t = q2 ** (n * (n + 1)) / (q_pochhammer(q2, q2, n) * q_pochhammer(q2, q2, n + 1))
        total += t
        if t < 1e-17 * total or q == 0.0:
            return total
        n += 1


def magnetization_profile(x: int, n: int, q: float) -> float:
    """<S3_x>_n in the bi-infinite kink state with interface between n and n+1."""
    if n >= x:
        d = n + 1 - x
        return -0.5 + q ** (2 * d) * _alt_series(q, 1 + 2 * d)
    d = x - n
    return 0.5 - q ** (2 * d) * _alt_series(q, 1 + 2 * d)


def _alt_series(q: float, c: int) -> float:
    """sum_k (-1)^k q^{k(k + c)}."""
    total, k = 0.0, 0
    while True:
        t = q ** (k * (k + c)) if k else 1.0
        total += (-1) ** k * t
        if k and (t < 1e-17 or q == 0.0):
            return total
        k += 1


def finite_kink_profile(x: int, n: int, q: float, half_width: int = 12) -> float:
    """Finite-window oracle for magnetization_profile: kink state on [n-w, n+w]."""
    a, b = n - half_width, n + half_width
    downs = n - a + 1
    # downs on the left: weight q^{x_k - a} per down
    st = antikink_state(a, b, downs, q)
    basis = build_sector_basis(b - a + 1, 0.5, N=downs)
    v = st.materialize(basis)
    p = v * v / (v @ v)
    return float(p @ (0.5 - basis.configs[:, x - a]))


def classical_kink_profile(l: float, tau: float, q: float, orientation: str = "kink",
                           phi: float = 0.0) -> tuple[float, float, float]:
    """Unit vector of the classical kink: sigma3 = (1 - q^{2l} tau) / (1 + q^{2l} tau)."""
    ll = l if orientation == "kink" else -l
    u = tau * q ** (2 * ll) if q > 0 else (tau if ll == 0 else (0.0 if ll > 0 else math.inf))
    if math.isinf(u):
        return (0.0, 0.0, -1.0)
    s3 = (1 - u) / (1 + u)
    perp = 2 * math.sqrt(u) / (1 + u)
    return (perp * math.cos(phi), perp * math.sin(phi), s3)


def classical_recursion(s3: float, q: float, orientation: str = "kink") -> float:
    A = (1 - q * q) / (1 + q * q)
    if orientation == "kink":
        return (s3 + A) / (A * s3 + 1)
    return (A * s3 - 1) / (-s3 + A)


def grand_canonical_expectation(heights: Sequence[float], mu: float, q: float,
                                observable: np.ndarray | None = None,
                                sites: Sequence[int] | None = None) -> float:
    """Expectation in the product state (|up> + q^{l-mu}|down>) per site.

    With ``observable`` None, returns <S3> at the first listed site; otherwise
    ``observable`` is a dense matrix acting on ``sites`` (basis up=0, down=1, site-major).
    """
    h = np.asarray(heights, dtype=float)
    if sites is None:
        sites = [0]
    vecs = []
    for x in sites:
        w = q ** (h[x] - mu) if q > 0 else (1.0 if h[x] == mu else (0.0 if h[x] > mu else math.inf))
        if math.isinf(w):
            v = np.array([0.0, 1.0])
        else:
            v = np.array([1.0, w]) / math.sqrt(1 + w * w)
        vecs.append(v)
    if observable is None:
        v = vecs[0]
        return 0.5 * (v[0] ** 2 - v[1] ** 2)
    psi = vecs[0]
    for v in vecs[1:]:
        psi = np.kron(psi, v)
    return float(psi @ observable @ psi)


def gc_s3(l: float, mu: float, q: float) -> float:
    """Closed-form single-site <S3> = (1 - q^{2(l-mu)}) / (2 (1 + q^{2(l-mu)}))."""
    t = q ** (2 * (l - mu))
    return 0.5 * (1 - t) / (1 + t)
