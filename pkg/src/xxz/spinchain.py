"""Spin operators, height graphs, sector bases and sparse XXZ assembly."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

INF = math.inf


def dim_cap() -> int:
    return int(float(os.environ.get("XXZ_DIM_CAP", 2e7)))


class DimensionCapError(MemoryError):
    pass


def _two_s(S: float) -> int:
    t = 2 * Fraction(S).limit_denominator(4)
    if t.denominator != 1 or t < 1:
        raise ValueError(f"spin must be a positive half-integer, got {S}")
    return int(t)


# --------------------------------------------------------------------------- parameters


@dataclass(frozen=True)
class AnisotropyParams:
    """Coupled anisotropy parameters.

    ``boundary_field`` is A = sqrt(1 - Delta^-2)/2 (spin-1/2 chain normalization);
    ``a2`` is the un-halved sqrt(1 - Delta^-2) used by the spin-S kink.
    """

    delta: float
    q: float
    a: float
    boundary_field: float

    @classmethod
    def from_q(cls, q: float) -> "AnisotropyParams":
        q = float(q)
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {q}")
        if q == 0.0:
            return cls(INF, 0.0, INF, 0.5)
        delta = (q + 1.0 / q) / 2.0
        return cls(delta, q, -2.0 * math.log(q), 0.5 * (1.0 - q * q) / (1.0 + q * q))

    @classmethod
    def from_delta(cls, delta: float) -> "AnisotropyParams":
        delta = float(delta)
        if delta < 1.0:
            raise ValueError(f"Delta must be >= 1, got {delta}")
        if math.isinf(delta):
            return cls.from_q(0.0)
        q = delta - math.sqrt(delta * delta - 1.0)
        # reuse the closed forms in q, but keep the user's delta exactly
        base = cls.from_q(q)
        return cls(delta, base.q, base.a, 0.5 * math.sqrt(1.0 - delta**-2))

    @property
    def inv_delta(self) -> float:
        return 0.0 if math.isinf(self.delta) else 1.0 / self.delta

    @property
    def a2(self) -> float:
        return 2.0 * self.boundary_field


def params(delta: float | None = None, q: float | None = None) -> AnisotropyParams:
    if (delta is None) == (q is None):
        raise ValueError("give exactly one of delta, q")
    return AnisotropyParams.from_delta(delta) if q is None else AnisotropyParams.from_q(q)


# --------------------------------------------------------------------------- spin matrices


def spin_matrices(S: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense S3, S+, S- in the basis m = S, S-1, ..., -S."""
    n = _two_s(S) + 1
    s = (n - 1) / 2
    m = s - np.arange(n)
    s3 = np.diag(m)
    sp_ = np.zeros((n, n))
    for j in range(1, n):
        # S+ |m_j> = sqrt(S(S+1) - m_j(m_j+1)) |m_j + 1>
        sp_[j - 1, j] = math.sqrt(s * (s + 1) - m[j] * (m[j] + 1))
    return s3, sp_, sp_.T.copy()


# --------------------------------------------------------------------------- geometry


@dataclass(frozen=True)
class HeightGraph:
    sites: tuple
    bonds: tuple  # (x, y, direction)
    heights: dict
    deltas: tuple = (2.0,)
    periodic: bool = False

    def __post_init__(self):
        idx = {x: i for i, x in enumerate(self.sites)}
        if len(idx) != len(self.sites):
            raise ValueError("duplicate sites")
        d = len(self.deltas)
        for x, y, i in self.bonds:
            if x not in idx or y not in idx:
                raise ValueError(f"bond ({x},{y}) leaves the site set")
            if not 0 <= i < d:
                raise ValueError(f"bond direction {i} out of range")
            if self.periodic:
                continue
            lx, ly = np.asarray(self.heights[x]), np.asarray(self.heights[y])
            e = np.zeros(d, dtype=int)
            e[i] = 1
            if not np.array_equal(ly - lx, e):
                raise ValueError(f"heights violate l(y) - l(x) = e_{i} on bond ({x},{y})")
        if not self._connected(idx):
            raise ValueError("graph is not connected")

    def _connected(self, idx) -> bool:
        if not self.sites:
            return False
        adj = {x: [] for x in self.sites}
        for x, y, _ in self.bonds:
            adj[x].append(y)
            adj[y].append(x)
        seen, stack = {self.sites[0]}, [self.sites[0]]
        while stack:
            for y in adj[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.sites)

    @property
    def size(self) -> int:
        return len(self.sites)

    def index(self, x) -> int:
        return self.sites.index(x)

    @classmethod
    def chain(cls, L: int, start: int = 1, delta: float = 2.0, periodic: bool = False) -> "HeightGraph":
        sites = tuple(range(start, start + L))
        bonds = [(x, x + 1, 0) for x in sites[:-1]]
        if periodic and L > 2:
            bonds.append((sites[-1], sites[0], 0))
        return cls(sites, tuple(bonds), {x: (x,) for x in sites}, (delta,), periodic)

    @classmethod
    def grid(cls, shape: Sequence[int], deltas: Sequence[float] | None = None) -> "HeightGraph":
        """Hypercubic box with heights l(x) = x and bonds along each positive axis."""
        shape = tuple(shape)
        d = len(shape)
        deltas = tuple(deltas) if deltas is not None else (2.0,) * d
        sites = tuple(tuple(int(c) for c in x) for x in np.ndindex(*shape))
        bonds = []
        for x in sites:
            for i in range(d):
                if x[i] + 1 < shape[i]:
                    y = list(x)
                    y[i] += 1
                    bonds.append((x, tuple(y), i))
        return cls(sites, tuple(bonds), {x: x for x in sites}, deltas)


# --------------------------------------------------------------------------- sector basis


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Configurations with fixed down-unit count N, stored as down counts s_x = S - m_x.

    Rows are in lexicographic order of (s_1, ..., s_L); ``N=None`` spans the full space.
    """

    two_s: int
    nsites: int
    N: int | None
    configs: np.ndarray
    keys: np.ndarray

    @property
    def spin(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return len(self.keys)

    @property
    def magnetization(self) -> float | None:
        return None if self.N is None else self.spin * self.nsites - self.N

    def m(self) -> np.ndarray:
        return self.spin - self.configs

    def index_of(self, config: Sequence[int]) -> int:
        key = int(np.dot(np.asarray(config, dtype=np.int64), self._weights()))
        i = int(np.searchsorted(self.keys, key))
        if i >= self.dim or self.keys[i] != key:
            raise KeyError(f"configuration {tuple(config)} not in sector")
        return i

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.keys, keys)
        idx = np.minimum(idx, self.dim - 1)
        if not np.all(self.keys[idx] == keys):
            raise KeyError("configuration outside sector")
        return idx

    def _weights(self) -> np.ndarray:
        return (self.two_s + 1) ** np.arange(self.nsites - 1, -1, -1, dtype=np.int64)


def build_sector_basis(nsites: int, S: float, M: float | None = None, *, N: int | None = None,
                       full: bool = False) -> SectorBasis:
    """Enumerate the sector with magnetization M (or down-unit count N)."""
    ts = _two_s(S)
    if not full:
        if N is None:
            if M is None:
                raise ValueError("give M or N")
            n2 = ts * nsites - 2 * Fraction(M).limit_denominator(4)
            if n2.denominator != 1 or n2 % 2:
                raise ValueError(f"empty sector: parity of M={M} incompatible with {nsites} sites of spin {S}")
            N = int(n2 // 2)
        if not 0 <= N <= ts * nsites:
            raise ValueError(f"empty sector: N={N} outside [0, {ts * nsites}]")
    if (ts + 1) ** nsites >= 2**62:
        raise DimensionCapError("configuration keys overflow int64")
    cfg = np.zeros((1, 0), dtype=np.int8)
    part = np.zeros(1, dtype=np.int64)
    for site in range(nsites):
        rem = nsites - site - 1
        cfg = np.repeat(cfg, ts + 1, axis=0)
        s = np.tile(np.arange(ts + 1, dtype=np.int8), len(part))
        part = np.repeat(part, ts + 1) + s
        cfg = np.concatenate([cfg, s[:, None]], axis=1)
        if N is not None:
            ok = (part <= N) & (part + ts * rem >= N)
            cfg, part = cfg[ok], part[ok]
        if len(part) > dim_cap():
            raise DimensionCapError(f"sector dimension exceeds cap {dim_cap()}")
    w = (ts + 1) ** np.arange(nsites - 1, -1, -1, dtype=np.int64)
    keys = cfg.astype(np.int64) @ w
    return SectorBasis(ts, nsites, None if full else N, cfg, keys)


# --------------------------------------------------------------------------- sparse operator


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Canonical coordinate triplets: row-major sorted, duplicates merged, no zeros."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    hermitian: bool = True

    @classmethod
    def from_coo(cls, dim: int, rows, cols, vals, hermitian: bool = True) -> "SparseOperator":
        m = sp.coo_matrix((np.asarray(vals), (np.asarray(rows), np.asarray(cols))), shape=(dim, dim)).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        c = m.tocoo()
        return cls(dim, c.row.astype(np.int64), c.col.astype(np.int64), c.data, hermitian)

    @classmethod
    def from_matrix(cls, m, hermitian: bool = True) -> "SparseOperator":
        c = sp.coo_matrix(m)
        return cls.from_coo(c.shape[0], c.row, c.col, c.data, hermitian)

    @property
    def nnz(self) -> int:
        return len(self.vals)

    def tocsr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(self.dim, self.dim))

    def toarray(self) -> np.ndarray:
        return self.tocsr().toarray()

    def __matmul__(self, v):
        return self.tocsr() @ v

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator.from_coo(self.dim, np.r_[self.rows, other.rows], np.r_[self.cols, other.cols],
                                       np.r_[self.vals, other.vals], self.hermitian and other.hermitian)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        return self + SparseOperator(other.dim, other.rows, other.cols, -other.vals, other.hermitian)

    def same_triplets(self, other: "SparseOperator") -> bool:
        return (self.dim == other.dim and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols) and np.array_equal(self.vals, other.vals))

    def is_symmetric(self, tol: float = 0.0) -> bool:
        d = self.tocsr() - self.tocsr().conj().T
        return d.nnz == 0 or abs(d).max() <= tol

    def to_text(self) -> str:
        lines = [f"dim={self.dim} hermitian={int(self.hermitian)}"]
        lines += [f"{r} {c} {v:.17g}" for r, c, v in zip(self.rows, self.cols, self.vals)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SparseOperator":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        head = dict(tok.split("=") for tok in lines[0].split())
        data = np.array([ln.split() for ln in lines[1:]], dtype=float).reshape(-1, 3)
        return cls.from_coo(int(head["dim"]), data[:, 0].astype(np.int64), data[:, 1].astype(np.int64),
                            data[:, 2], bool(int(head["hermitian"])))


# --------------------------------------------------------------------------- hamiltonian terms


@dataclass
class Terms:
    """Symbolic XXZ-type operator: const + sum over bonds and site fields.

    bonds[(x, y)] = [c0, cz, cxy] stands for c0 + cz S3_x S3_y + cxy (S+_x S-_y + S-_x S+_y);
    fields[x] = h stands for h S3_x.  Sites are positions 0..nsites-1.
    """

    nsites: int
    bonds: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)

    def add_bond(self, x: int, y: int, c0: float, cz: float, cxy: float) -> None:
        key = (min(x, y), max(x, y))
        cur = self.bonds.setdefault(key, [0.0, 0.0, 0.0])
        cur[0] += c0
        cur[1] += cz
        cur[2] += cxy

    def add_field(self, x: int, h: float) -> None:
        self.fields[x] = self.fields.get(x, 0.0) + h

    def __add__(self, other: "Terms") -> "Terms":
        out = Terms(max(self.nsites, other.nsites))
        for t in (self, other):
            for (x, y), c in t.bonds.items():
                out.add_bond(x, y, *c)
            for x, h in t.fields.items():
                out.add_field(x, h)
        return out

    def shifted(self, offset: int, nsites: int) -> "Terms":
        out = Terms(nsites)
        for (x, y), c in self.bonds.items():
            out.add_bond(x + offset, y + offset, *c)
        for x, h in self.fields.items():
            out.add_field(x + offset, h)
        return out

    def assemble(self, basis: SectorBasis) -> SparseOperator:
        if basis.nsites != self.nsites:
            raise ValueError("basis and operator have different site counts")
        s = basis.spin
        m = basis.m()
        diag = np.zeros(basis.dim)
        for (x, y), (c0, cz, _) in sorted(self.bonds.items()):
            diag += c0
            if cz:
                diag += cz * m[:, x] * m[:, y]
        for x, h in sorted(self.fields.items()):
            if h:
                diag += h * m[:, x]
        rows, cols, vals = [np.arange(basis.dim)], [np.arange(basis.dim)], [diag]
        w = basis._weights()
        cas = s * (s + 1)
        for (x, y), (_, _, cxy) in sorted(self.bonds.items()):
            if not cxy:
                continue
            for u, v in ((x, y), (y, x)):
                # S+_u S-_v: one down unit moves from u to v
                ok = (basis.configs[:, u] >= 1) & (basis.configs[:, v] < basis.two_s)
                src = np.nonzero(ok)[0]
                mu, mv = m[src, u], m[src, v]
                amp = np.sqrt((cas - mu * (mu + 1)) * (cas - mv * (mv - 1)))
                tgt = basis.lookup(basis.keys[src] - w[u] + w[v])
                rows.append(tgt)
                cols.append(src)
                vals.append(cxy * amp)
        nnz = sum(len(r) for r in rows)
        if nnz > dim_cap():
            raise DimensionCapError(f"{nnz} nonzeros exceeds cap {dim_cap()} (XXZ_DIM_CAP)")
        return SparseOperator.from_coo(basis.dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


BOUNDARY_SIGNS = {"pm": (1, -1), "mp": (-1, 1), "pp": (1, 1), "mm": (-1, -1)}


def xxz_terms(graph: HeightGraph, S: float, boundary: str = "kink", *,
              deltas: Sequence[float] | None = None, pin: int | None = None) -> Terms:
    """Term list for the XXZ Hamiltonian on ``graph``.

    Bulk bonds are S^2 - S3 S3 - (1/2Delta)(S+S- + S-S+).  Boundaries:

    kink / antikink: per bond +-S*sqrt(1-Delta^-2)(S3_x - S3_y), oriented by heights.
    pm, mp, pp, mm: fields -S*sqrt(1-Delta^-2)(alpha S3_first + beta S3_last);
      for S=1/2 the prefactor is A = sqrt(1-Delta^-2)/2. ``droplet`` is pp.
    pinned: pm on [first, pin] plus mp on [pin, last].
    free / periodic: no fields (periodic closes the ring through the graph).
    """
    two_s = _two_s(S)
    s = two_s / 2
    ds = tuple(deltas) if deltas is not None else graph.deltas
    prm = [AnisotropyParams.from_delta(d) for d in ds]
    pos = {x: i for i, x in enumerate(graph.sites)}
    t = Terms(graph.size)
    b = boundary
    if b == "periodic" and not graph.periodic:
        graph = HeightGraph.chain(graph.size, graph.sites[0], ds[0], periodic=True)
        pos = {x: i for i, x in enumerate(graph.sites)}
    for x, y, i in graph.bonds:
        p = prm[i]
        t.add_bond(pos[x], pos[y], s * s, -1.0, -0.5 * p.inv_delta)
        if b in ("kink", "antikink"):
            h = s * p.a2 * (1 if b == "kink" else -1)
            t.add_field(pos[x], h)
            t.add_field(pos[y], -h)
    if b == "droplet":
        b = "pp"
    if b in BOUNDARY_SIGNS or b == "pinned":
        if len(prm) != 1:
            raise ValueError(f"boundary {boundary!r} requires a chain")
        h = s * prm[0].a2
        first, last = 0, graph.size - 1
        if b == "pinned":
            if pin is None:
                raise ValueError("pinned boundary needs pin site")
            k = pos[pin]
            t.add_field(first, -h)
            t.add_field(last, -h)
            t.add_field(k, 2 * h)
        else:
            al, be = BOUNDARY_SIGNS[b]
            t.add_field(first, -h * al)
            t.add_field(last, -h * be)
    elif b not in ("kink", "antikink", "free", "periodic"):
        raise ValueError(f"unknown boundary {boundary!r}")
    return t


def chain_terms(L: int, S: float, delta: float, boundary: str, pin: int | None = None) -> Terms:
    return xxz_terms(HeightGraph.chain(L, 1, delta), S, boundary, pin=pin)


def assemble_xxz(graph: HeightGraph, S: float, boundary: str, sector: SectorBasis, *,
                 deltas: Sequence[float] | None = None, pin: int | None = None) -> SparseOperator:
    if sector.two_s != _two_s(S) or sector.nsites != graph.size:
        raise ValueError("sector does not match graph/spin")
    return xxz_terms(graph, S, boundary, deltas=deltas, pin=pin).assemble(sector)


def chain_hamiltonian(L: int, S: float, delta: float, boundary: str = "kink", N: int | None = None,
                      pin: int | None = None) -> tuple[SparseOperator, SectorBasis]:
    basis = build_sector_basis(L, S, N=N, full=N is None)
    return chain_terms(L, S, delta, boundary, pin).assemble(basis), basis


# --------------------------------------------------------------------------- dense full-space helpers


def site_operator(op: np.ndarray, x: int, L: int) -> sp.csr_matrix:
    d = op.shape[0]
    return sp.kron(sp.kron(sp.identity(d**x), sp.csr_matrix(op)), sp.identity(d ** (L - x - 1))).tocsr()


def flip_reflect_permutations(basis: SectorBasis) -> tuple[np.ndarray, np.ndarray, SectorBasis]:
    """Index maps for reflection x -> L+1-x and for the global spin flip m -> -m.

    Returns (reflect, flip, flipped_basis): reflect permutes ``basis`` onto itself,
    flip maps ``basis`` onto ``flipped_basis`` (sector N -> 2SL - N).
    """
    reflect = basis.lookup(basis.configs[:, ::-1].astype(np.int64) @ basis._weights())
    fb = build_sector_basis(basis.nsites, basis.spin, N=None if basis.N is None else basis.two_s * basis.nsites - basis.N,
                            full=basis.N is None)
    flip = fb.lookup((basis.two_s - basis.configs).astype(np.int64) @ fb._weights())
    return reflect, flip, fb


def permute_operator(H: SparseOperator, perm: np.ndarray, dim: int | None = None) -> SparseOperator:
    """Operator P H P^T where basis vector i is sent to perm[i]."""
    return SparseOperator.from_coo(dim or H.dim, perm[H.rows], perm[H.cols], H.vals, H.hermitian)


# --------------------------------------------------------------------------- quantum group


def quantum_group_generators(L: int, q: float) -> dict[str, SparseOperator]:
    """K, K^-1, K^-1 E and F K on the full spin-1/2 chain of length L.

    K = prod_x q^{2 S3_x};  K^-1 E = sum_x prod_{y<x} q^{-2 S3_y} S+_x;
    F K = sum_x prod_{y>x} q^{2 S3_y} S-_x.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    s3, spl, smi = spin_matrices(0.5)
    kx = np.diag(q ** (2 * np.diag(s3)))
    kix = np.diag(q ** (-2 * np.diag(s3)))
    eye = np.eye(2)

    def chain_prod(ops):
        out = sp.csr_matrix(np.ones((1, 1)))
        for o in ops:
            out = sp.kron(out, sp.csr_matrix(o)).tocsr()
        return out

    K = chain_prod([kx] * L)
    Ki = chain_prod([kix] * L)
    KiE = sum(chain_prod([kix] * x + [spl] + [eye] * (L - x - 1)) for x in range(L))
    FK = sum(chain_prod([eye] * x + [smi] + [kx] * (L - x - 1)) for x in range(L))
    return {name: SparseOperator.from_matrix(m, hermitian=name in ("K", "Kinv"))
            for name, m in (("K", K), ("Kinv", Ki), ("KinvE", KiE), ("FK", FK))}


# --------------------------------------------------------------------------- ladder symmetrizer


def rung_symmetrizer(legs: int) -> np.ndarray:
    """(1/legs!) sum_pi of leg permutations on (C^2)^{legs}."""
    d = 2**legs
    out = np.zeros((d, d))
    perms = list(permutations(range(legs)))
    for b in range(d):
        bits = [(b >> (legs - 1 - k)) & 1 for k in range(legs)]
        for p in perms:
            nb = [bits[p[k]] for k in range(legs)]
            out[int("".join(map(str, nb)), 2), b] += 1.0
    return out / len(perms)


def symmetrizer(L: int, legs: int) -> SparseOperator:
    """Rung-wise symmetrizer on the ladder; site order is rung-major (x, m)."""
    if 2 ** (L * legs) > dim_cap():
        raise DimensionCapError("ladder space too large")
    p1 = sp.csr_matrix(rung_symmetrizer(legs))
    out = sp.csr_matrix(np.ones((1, 1)))
    for _ in range(L):
        out = sp.kron(out, p1).tocsr()
    return SparseOperator.from_matrix(out)
