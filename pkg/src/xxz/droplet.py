"""Spin-1/2 droplet states for the XXZ chain with ++ boundary fields.

xi_{L,n}(x) = psi^{+-}_{[1,x]}(floor(n/2)) (x) psi^{-+}_{[x+1,L]}(ceil(n/2)).
psi^{+-} weights a down spin at site y of [a,b] by q^{b+1-y}, psi^{-+} by q^{y+1-a}.

Inner products between droplet states, with or without the local H^{++}
terms inserted, are evaluated by splitting every factor into cells with the
coproduct and pairing cells through the closed-form kink overlaps; nothing of
size 2^L is ever built.  Brute-force counterparts live alongside for testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .groundstates import antikink_state, droplet_state, kink_state, product_state
from .qcomb import gaussian_binomial, q_pochhammer
from .spinchain import (
    AnisotropyParams,
    Terms,
    build_sector_basis,
    chain_hamiltonian,
    chain_terms,
)

KINK, ANTI = "+-", "-+"


def f_q(q: float, n: float = math.inf) -> float:
    """(q^2; q^2)_n."""
    return q_pochhammer(q * q, q * q, n)


def qb(n: int, k: int, q: float) -> float:
    return gaussian_binomial(n, k, q * q)


def seg_norm2(length: int, k: int, q: float) -> float:
    """<psi^{ab}_I(k), psi^{ab}_I(k)> = [|I| k]_{q^2} q^{k(k+1)}."""
    if not 0 <= k <= length:
        return 0.0
    return qb(length, k, q) * q ** (k * (k + 1))


def seg_mixed(length: int, k: int, q: float, exponent: str = "k(len+1)") -> float:
    """<psi^{+-}_I(k), psi^{-+}_I(k)> = binom(|I|, k) q^{k(|I|+1)}.

    exponent="len+1" evaluates the alternative reading without the factor k.
    """
    if not 0 <= k <= length:
        return 0.0
    e = k * (length + 1) if exponent == "k(len+1)" else length + 1
    return math.comb(length, k) * q**e


def split_positions(L: int, n: int) -> range:
    return range(n // 2, L - (n - n // 2) + 1)


def two_site_h(delta: float) -> np.ndarray:
    """H^{++}_{x,x+1} on (up up, up dn, dn up, dn dn)."""
    p = AnisotropyParams.from_delta(delta)
    A, t = p.boundary_field, p.inv_delta
    H = np.diag([-A, 0.5, 0.5, A])
    H[1, 2] = H[2, 1] = -0.5 * t
    return H


# --------------------------------------------------------------------------- segment algebra


@dataclass(frozen=True)
class _Factor:
    kind: str
    a: int
    b: int
    n: int


def _droplet_factors(L: int, n: int, x: int) -> list[_Factor]:
    nl, nr = n // 2, n - n // 2
    out = []
    if x >= 1:
        out.append(_Factor(KINK, 1, x, nl))
    if x < L:
        out.append(_Factor(ANTI, x + 1, L, nr))
    return out


def _cells(L: int, cuts, singles) -> list[tuple[int, int]]:
    """Cells (a, b) covering [1, L] with right ends at every cut and singleton cells at `singles`."""
    ends = set(c for c in cuts if 1 <= c <= L) | {L}
    for s in singles:
        ends.add(s)
        if s - 1 >= 1:
            ends.add(s - 1)
    ends = sorted(ends)
    out, start = [], 1
    for e in ends:
        out.append((start, e))
        start = e + 1
    return out


def _expand(factors: list[_Factor], cells, q: float):
    """Terms (k per cell, weight) of the product state split over `cells`, plus the cell kinds."""
    kinds = []
    per_factor = []
    for f in factors:
        fc = [(i, c) for i, c in enumerate(cells) if f.a <= c[0] and c[1] <= f.b]
        kinds += [f.kind] * len(fc)
        sizes = [c[1] - c[0] + 1 for _, c in fc]
        terms = []

        def rec(j, left, ks, f=f, fc=fc, sizes=sizes, terms=terms):
            if j == len(fc):
                if left == 0:
                    if f.kind == KINK:
                        e = sum((f.b - c[1]) * k for (_, c), k in zip(fc, ks))
                    else:
                        e = sum((c[0] - f.a) * k for (_, c), k in zip(fc, ks))
                    terms.append((tuple(ks), q**e))
                return
            rest = sum(sizes[j + 1:])
            for k in range(max(0, left - rest), min(left, sizes[j]) + 1):
                rec(j + 1, left - k, ks + [k])

        rec(0, f.n, [])
        per_factor.append(terms)
    out = []
    for combo in iproduct(*per_factor):
        ks = sum((c[0] for c in combo), ())
        w = math.prod(c[1] for c in combo)
        out.append((ks, w))
    return out, kinds


def _embed(op: np.ndarray, pos: int, nb: int) -> np.ndarray:
    """Operator on consecutive block positions starting at pos of an nb-site block."""
    w = op.shape[0].bit_length() - 1
    return np.kron(np.kron(np.eye(2**pos), op), np.eye(2 ** (nb - pos - w)))


def local_inner(L: int, left: list[_Factor], right: list[_Factor], q: float,
                ops: list[tuple[int, np.ndarray]] = ()) -> float:
    """<left, O right> with O the product of local operators [(x, op)], op acting on x, x+1, ..."""
    singles = sorted({x + d for x, op in ops for d in range(op.shape[0].bit_length() - 1)})
    cuts = [f.b for f in left] + [f.b for f in right]
    cells = _cells(L, cuts, singles)
    block = [i for i, c in enumerate(cells) if c[0] == c[1] and c[0] in singles]
    big = [i for i in range(len(cells)) if i not in block]
    nb = len(block)
    O = np.eye(2**nb)
    for x, op in ops:
        O = O @ _embed(op, singles.index(x), nb)

    def group(terms):
        acc: dict = {}
        for ks, w in terms:
            v = np.array([1.0])
            for i in block:
                v = np.kron(v, [1.0, 0.0] if ks[i] == 0 else [0.0, q])
            key = tuple(ks[i] for i in big)
            acc[key] = acc.get(key, 0.0) + w * v
        return acc

    t1, k1 = _expand(left, cells, q)
    t2, k2 = _expand(right, cells, q)
    g1, g2 = group(t1), group(t2)
    total = 0.0
    for key, v1 in g1.items():
        v2 = g2.get(key)
        if v2 is None:
            continue
        ov = 1.0
        for i, k in zip(big, key):
            ln = cells[i][1] - cells[i][0] + 1
            ov *= seg_norm2(ln, k, q) if k1[i] == k2[i] else seg_mixed(ln, k, q)
            if ov == 0.0:
                break
        if ov:
            total += ov * float(v1 @ O @ v2)
    return total


# --------------------------------------------------------------------------- overlap closed forms


def prelim_ip(x: int, y: int, r: int, m: int, n: int, k: int, q: float) -> float:
    """<psi^{+-}_{[1,x]}(m) psi^{-+}_{[x+1,x+y+r]}(n+k), psi^{+-}_{[1,x+r]}(m+k) psi^{-+}_{[x+r+1,x+y+r]}(n)>."""
    return (math.comb(r, k) * qb(x, m, q) * qb(y, n, q)
            * q ** (m * (m + 1) + n * (n + 1) + k * (r + 1) + r * (m + n)))


def prelim_ip_alt(x: int, y: int, r: int, m: int, n: int, k: int, q: float) -> float:
    """The variant with q^{m(m+k+1)+n(n+k+1)+k(r+1)}; agrees with prelim_ip only when k = r or m = n = 0."""
    return (math.comb(r, k) * qb(x, m, q) * qb(y, n, q)
            * q ** (m * (m + k + 1) + n * (n + k + 1) + k * (r + 1)))


def prelim_normalized(x: int, y: int, r: int, m: int, n: int, k: int, q: float) -> float:
    den = qb(x + r, m + k, q) * qb(y + r, n + k, q)
    if den == 0:
        return 0.0
    return math.comb(r, k) * math.sqrt(qb(x, m, q) * qb(y, n, q) / den) * q ** ((m + n + k) * (r - k))


def special1(x: int, y: int, r: int, m: int, n: int, q: float) -> float:
    return math.sqrt(qb(x, m, q) * qb(y, n, q) / (qb(x + r, m + r, q) * qb(y + r, n + r, q)))


def special2(x: int, y: int, r: int, m: int, n: int, q: float) -> float:
    return math.sqrt(qb(x, m, q) * qb(y, n, q) / (qb(x + r, m, q) * qb(y + r, n, q))) * q ** ((m + n) * r)


def special1_lower(m: int, n: int, q: float) -> float:
    a = 1 - q ** (2 * (m + 1)) / (1 - q * q)
    b = 1 - q ** (2 * (n + 1)) / (1 - q * q)
    return (a * b) ** -0.5 if a > 0 and b > 0 else math.inf


def two_site_overlap(j: int, l: int, q: float) -> float:
    """<psi_{x}(j) psi_{x+1}(l), psi^{+-}_{[x,x+1]}(j+l)> = q^{3j+2l} with the weights above."""
    return q ** (3 * j + 2 * l)


def two_site_h_table(delta: float) -> dict:
    """(j, l) -> <psi_{x}(j) psi_{x+1}(l), H^{++}_{x,x+1} psi^{+-}_{[x,x+1]}(j+l)>."""
    q = AnisotropyParams.from_delta(delta).q
    H = two_site_h(delta)
    kink2 = {0: np.array([1.0, 0, 0, 0]), 1: np.array([0, q, q * q, 0]), 2: np.array([0, 0, 0, q**3])}
    out = {}
    for j in (0, 1):
        for l in (0, 1):
            prod_ = np.kron([1.0, 0.0] if j == 0 else [0.0, q], [1.0, 0.0] if l == 0 else [0.0, q])
            out[(j, l)] = float(prod_ @ H @ kink2[j + l])
    return out


def two_site_h_table_alt(delta: float) -> dict:
    """Alternative two-site table; (0,1) and (1,0) differ from two_site_h_table."""
    p = AnisotropyParams.from_delta(delta)
    q, A = p.q, p.boundary_field
    c = 2 * (1 + q * q)
    return {(0, 0): -A, (0, 1): q**2 * (1 - q) ** 2 / c, (1, 0): -(q**4) * (1 - q * q) / c, (1, 1): A * q**5}


def prelim3_ip(x: int, y: int, r: int, m: int, n: int, k: int, q: float, *, inner=None) -> float:
    """Split form of the cross-cut droplet inner product across the bond (x, x+1), r >= 1.

    ``inner(j, l)`` replaces the two-site overlap (default: the plain overlap),
    which is how the H^{++}_{x,x+1} matrix element is obtained.
    """
    if r < 1:
        raise ValueError("the split form needs r >= 1")
    inner = inner or (lambda j, l: two_site_overlap(j, l, q))
    tot = 0.0
    for j in (0, 1):
        for l in (0, 1):
            if m - j < 0 or k - l < 0 or m - j > x - 1:
                continue
            third = (seg_mixed(r - 1, k - l, q) if r >= 1 else float(k == l)) * seg_norm2(y, n, q) \
                * q ** ((r - 1) * n)
            if third == 0.0:
                continue
            tot += (q ** ((r + 2) * m + n + k - 3 * j + (r - 2) * l) * seg_norm2(x - 1, m - j, q)
                    * inner(j, l) * third)
    return tot


def prelim3_h(x: int, y: int, r: int, m: int, n: int, k: int, delta: float) -> float:
    """<... , H^{++}_{x,x+1} ...> for the cross-cut droplet pair via the split form."""
    q = AnisotropyParams.from_delta(delta).q
    tab = two_site_h_table(delta)
    return prelim3_ip(x, y, r, m, n, k, q, inner=lambda j, l: tab[(j, l)])


def result1_bound(n1: int, n2: int, q: float) -> float:
    return 4 * q ** (min(n1, n2) + 1) / math.sqrt(1 - q * q)


def result1_measured(L: int, x: int, n1: int, n2: int, q: float) -> float:
    """||Proj(psi^{+-}_{[1,x]}(n1) psi^{-+}_{[x+1,L]}(n2)) - Proj(xi_{L,n1+n2}(x~))||, x~ = x + floor((n2-n1)/2)."""
    n = n1 + n2
    xt = x + (n2 - n1) // 2
    a = [_Factor(KINK, 1, x, n1), _Factor(ANTI, x + 1, L, n2)]
    b = _droplet_factors(L, n, xt)
    a = [f for f in a if f.a <= f.b]
    ab = local_inner(L, a, b, q)
    aa = local_inner(L, a, a, q)
    bb = local_inner(L, b, b, q)
    c2 = min(1.0, ab * ab / (aa * bb))
    return math.sqrt(max(0.0, 1.0 - c2))


def result2_bound(n: int, d: int, q: float) -> float:
    return q ** (n * d) / f_q(q)


# --------------------------------------------------------------------------- droplet family


@dataclass
class DropletFamily:
    L: int
    n: int
    delta: float
    q: float
    positions: list
    norms2: np.ndarray
    gram: np.ndarray
    h_gram: np.ndarray
    h2_gram: np.ndarray

    def bound_matrix(self) -> np.ndarray:
        pos = np.array(self.positions)
        return self.q ** (self.n * np.abs(pos[:, None] - pos[None, :])) / f_q(self.q)

    def bound_violations(self, rtol: float = 1e-12) -> dict:
        """Largest excess over the three off-diagonal overlap bounds (<= 0 means all hold)."""
        B = self.bound_matrix()
        pos = np.array(self.positions)
        d = np.abs(pos[:, None] - pos[None, :])
        slack = rtol * np.maximum(1.0, B)
        out = {}
        for name, M, mask in (("gram", self.gram, d >= 0), ("h_gram", self.h_gram, d >= 1),
                              ("h2_gram", self.h2_gram, d >= 2)):
            ex = (np.abs(M) - B - slack)[mask]
            out[name] = float(ex.max()) if ex.size else -math.inf
        return out

    def assert_bounds(self) -> None:
        bad = {k: v for k, v in self.bound_violations().items() if v > 0}
        if bad:
            raise AssertionError(f"droplet overlap bounds violated: {bad}")

    def energy_deviation(self) -> np.ndarray:
        """||(H - A) xi(x)||^2 / ||xi(x)||^2 per position."""
        A = AnisotropyParams.from_delta(self.delta).boundary_field
        d = np.diag(self.h2_gram) - 2 * A * np.diag(self.h_gram) + A * A
        return d


def local_ops(L: int, x: int, delta: float) -> list[tuple[int, np.ndarray]]:
    """Local operator O_x with H^{++} xi(x) = O_x xi(x).

    Interior x: the two-site H^{++}_{x,x+1}.  At x = 0 (resp. L) the state is a single
    antikink (kink) and H^{++} differs from its annihilating Hamiltonian by -2A S3 on the
    first (last) site.
    """
    if 1 <= x < L:
        return [(x, two_site_h(delta))]
    A = AnisotropyParams.from_delta(delta).boundary_field
    return [(1 if x == 0 else L, np.diag([-A, A]))]


def droplet_family(L: int, n: int, delta: float, check: bool = True) -> DropletFamily:
    """Normalized overlap, H^{++} and (H^{++})^2 matrices of the droplet family."""
    if not 0 <= n <= L:
        raise ValueError("need 0 <= n <= L")
    q = AnisotropyParams.from_delta(delta).q
    pos = list(split_positions(L, n))
    facs = {x: _droplet_factors(L, n, x) for x in pos}
    ops = {x: local_ops(L, x, delta) for x in pos}
    k = len(pos)
    G, Hm, H2m = np.zeros((k, k)), np.zeros((k, k)), np.zeros((k, k))
    for i, x in enumerate(pos):
        for j in range(i, k):
            y = pos[j]
            G[i, j] = G[j, i] = local_inner(L, facs[x], facs[y], q)
            Hm[i, j] = Hm[j, i] = local_inner(L, facs[x], facs[y], q, ops[y])
            H2m[i, j] = H2m[j, i] = local_inner(L, facs[x], facs[y], q, ops[x] + ops[y])
    nrm = np.diag(G).copy()
    s = 1.0 / np.sqrt(nrm)
    fam = DropletFamily(L, n, delta, q, pos, nrm, G * s[:, None] * s[None, :],
                        Hm * s[:, None] * s[None, :], H2m * s[:, None] * s[None, :])
    if check:
        fam.assert_bounds()
    return fam


def droplet_bruteforce(L: int, n: int, delta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unnormalized (gram, <xi, H xi>, <xi, H^2 xi>) from explicit vectors (small L only)."""
    if L > 12:
        raise ValueError("brute force limited to L <= 12")
    q = AnisotropyParams.from_delta(delta).q
    H, basis = chain_hamiltonian(L, 0.5, delta, "pp", N=n)
    Hd = H.toarray()
    V = np.array([droplet_state(L, n, x, q).materialize(basis, normalize="raw")
                  for x in split_positions(L, n)]).T
    HV = Hd @ V
    return V.T @ V, V.T @ HV, HV.T @ HV


def locality_defect(L: int, n: int, x: int, delta: float) -> float:
    """max |H^{++} xi(x) - O_x xi(x)| on explicit vectors."""
    q = AnisotropyParams.from_delta(delta).q
    H, basis = chain_hamiltonian(L, 0.5, delta, "pp", N=n)
    v = droplet_state(L, n, x, q).materialize(basis, normalize="raw")
    p = AnisotropyParams.from_delta(delta)
    t = Terms(L)
    if 1 <= x < L:
        t.add_bond(x - 1, x, 0.25, -1.0, -0.5 * p.inv_delta)
        t.add_field(x - 1, -p.boundary_field)
        t.add_field(x, -p.boundary_field)
    else:
        t.add_field(0 if x == 0 else L - 1, -2 * p.boundary_field)
    return float(np.abs(H @ v - t.assemble(basis) @ v).max())


# --------------------------------------------------------------------------- near-orthogonal families


def orth_family_bound(C: float, eps: float, r: float | None = None, Cprime: float | None = None,
                      N: int | None = None) -> dict:
    """Bounds for a family with |<f_n, f_m>| <= C eps^{|n-m|}.

    proj_diff bounds ||sum Proj(f_n) - Proj(span)||; op_norm_bound bounds ||X Proj(span)||
    when ||X f_n|| <= r and |<X f_n, X f_m>| <= C' eps^{|n-m|} for |n-m| >= N.
    """
    if not (1 + 2 * C) * eps < 1:
        raise ValueError("need (1 + 2C) eps < 1")
    pd = 2 * C * eps / (1 - eps)
    out = {"proj_diff": pd, "op_norm_bound": None}
    if r is not None:
        num = (2 * N - 1) * r * r + 2 * Cprime * eps**N / (1 - eps)
        out["op_norm_bound"] = math.sqrt(num / (1 - pd))
    return out


def droplet_orth_instantiation(n: int, q: float) -> dict:
    """The near-orthogonality bound applied to xi_{L,n}: C = 1/f_q, eps = q^n, r^2 = 2q^{2 fl}/(1-q^{2 fl}), C' = 4/f_q, N = 2."""
    fl = n // 2
    fq = f_q(q)
    r2 = 2 * q ** (2 * fl) / (1 - q ** (2 * fl))
    return orth_family_bound(1 / fq, q**n, math.sqrt(r2), 4 / fq, 2)


def eval_result1(n: int, q: float) -> float:
    fl = n // 2
    d = 1 - 3 * q ** (2 * fl)
    if d <= 0:
        return math.inf
    return 2 * math.sqrt(2) * q**fl / math.sqrt(d * f_q(q))


def eval_result2(n: int, q: float) -> float:
    return 2 * q**n / ((1 - q**n) * f_q(q))


def energy_deviation_bound(n: int, q: float) -> float:
    fl = n // 2
    return 2 * q ** (2 * fl) / (1 - q ** (2 * fl)) if fl > 0 else math.inf


def _orthonormal_span(V: np.ndarray) -> np.ndarray:
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    return U[:, s > 1e-12 * s.max()]


def measured_family_norms(L: int, n: int, delta: float) -> dict:
    """Dense ||sum Proj(xi) - Proj(K)|| and ||(H - A) Proj(K)||."""
    q = AnisotropyParams.from_delta(delta).q
    A = AnisotropyParams.from_delta(delta).boundary_field
    H, basis = chain_hamiltonian(L, 0.5, delta, "pp", N=n)
    V = np.array([droplet_state(L, n, x, q).materialize(basis, normalize="unit")
                  for x in split_positions(L, n)]).T
    U = _orthonormal_span(V)
    PK = U @ U.T
    S = V @ V.T
    X = (H.toarray() - A * np.eye(basis.dim)) @ PK
    return {"proj_diff": float(np.linalg.norm(S - PK, 2)), "op_norm": float(np.linalg.norm(X, 2))}


# --------------------------------------------------------------------------- pattern projections


def projection_weight(L: int, n: int, x: int, cuts, counts, q: float) -> float:
    """<Q_{P,n} > in the normalized droplet xi_{L,n}(x); cuts = right ends 0 < x_1 < ... < x_r = L."""
    nl, nr = n // 2, n - n // 2
    cuts = list(cuts)
    if cuts[-1] != L or sum(counts) != n:
        return 0.0
    edges = [0] + cuts
    lcells, rcells = [], []
    for j in range(1, len(edges)):
        a, b, c = edges[j - 1] + 1, edges[j], counts[j - 1]
        if b <= x:
            lcells.append((a, b, c))
        elif a > x:
            rcells.append((a, b, c))
        else:
            lc = nl - sum(t[2] for t in lcells)
            lcells.append((a, x, lc))
            rcells.append((x + 1, b, c - lc))
    if sum(t[2] for t in lcells) != nl or sum(t[2] for t in rcells) != nr:
        return 0.0
    if any(not 0 <= c <= b - a + 1 for a, b, c in lcells + rcells):
        return 0.0
    return _kink_proj(lcells, 1, x, nl, q, KINK) * _kink_proj(rcells, x + 1, L, nr, q, ANTI)


def _kink_proj(cells, a0, b0, n, q, kind) -> float:
    if not cells:
        return 1.0
    num = math.prod(qb(b - a + 1, c, q) for a, b, c in cells)
    den = qb(b0 - a0 + 1, n, q)
    if kind == KINK:
        e = sum(c * (2 * (b0 - b) - (n - c)) for a, b, c in cells)
    else:
        e = sum(c * (2 * (a - a0) - (n - c)) for a, b, c in cells)
    return num / den * q**e


def projector_expectation(L: int, n: int, x: int, J: tuple[int, int], j: int, sigma: str, q: float) -> float:
    """<G^sigma_j>_{L,n,x} for J = [a, b]; inadmissible indices give 0."""
    a, b = J
    lenJ = b - a + 1
    if sigma == "up":
        counts = (j, 0, n - j)
    elif sigma == "down":
        counts = (j, lenJ, n - j - lenJ)
    else:
        raise ValueError("sigma must be 'up' or 'down'")
    cuts, cnts = [], []
    for end, c in zip((a - 1, b, L), counts):
        if end >= (cuts[-1] + 1 if cuts else 1):
            cuts.append(end)
            cnts.append(c)
        elif c != 0:
            return 0.0
    if any(c < 0 for c in cnts):
        return 0.0
    return projection_weight(L, n, x, cuts, cnts, q)


def projector_expectation_alt(L: int, n: int, x: int, J: tuple[int, int], j: int, sigma: str,
                                 q: float) -> float:
    """Case-split closed forms, kept for comparison with projector_expectation."""
    a, b = J
    lenJ = b - a + 1
    fl, cl = n // 2, n - n // 2
    g = lambda N, K: qb(N, K, q) if 0 <= K <= N else 0.0
    if 0 <= x <= a - 1:
        r = a - 1 - x - j + fl
        if sigma == "up":
            return g(a - 1 - x, r) * g(L - b, n - j) / g(L - x, cl) * q ** (2 * (n - j) * (lenJ + r))
        return g(a - 1 - x, r) * g(L - b, n - j - lenJ) / g(L - x, cl) * q ** (2 * (n - j) * r)
    if a <= x <= b:
        if sigma == "up":
            if j != fl:
                return 0.0
            return (g(a - 1, fl) * g(L - b, cl) / (g(x, fl) * g(L - x, cl))
                    * q ** (2 * (fl * (x - a + 1) + cl * (b - x))))
        if j != fl - x + a - 1:
            return 0.0
        return g(a - 1, x - fl) * g(L - b, L - x - cl) / (g(x, fl) * g(L - x, cl))
    r = x - b - fl + j
    return g(a - 1, j) * g(x - b, r) / g(x, fl) * q ** (2 * j * (lenJ + r))


def projector_expectation_bruteforce(L: int, n: int, x: int, J, j: int, sigma: str, q: float) -> float:
    basis = build_sector_basis(L, 0.5, N=n)
    v = droplet_state(L, n, x, q).materialize(basis, normalize="unit")
    c = basis.configs.astype(int)
    a, b = J
    left = c[:, : a - 1].sum(axis=1)
    mid = c[:, a - 1:b].sum(axis=1)
    want = 0 if sigma == "up" else b - a + 1
    mask = (left == j) & (mid == want)
    return float(np.sum(v[mask] ** 2))


# --------------------------------------------------------------------------- polarized intervals


def polarized_interval_bound(E: float, L: int, l: int, delta: float, M: float = 0.0) -> dict:
    """epsilon = 2(E+M)/(gamma floor(L/l)) and the energy shift M eps + 2(1/Delta + 2M) sqrt(eps(1-eps))."""
    t = AnisotropyParams.from_delta(delta).inv_delta
    gamma = 1 - t
    if gamma <= 0:
        raise ValueError("need Delta > 1")
    eps = 2 * (E + M) / (gamma * (L // l))
    ok = eps < 1
    shift = M * eps + 2 * (t + 2 * M) * math.sqrt(eps * (1 - eps)) if ok else math.nan
    return {"epsilon": eps, "energy_shift": shift, "meaningful": ok}


def polarized_fraction(psi: np.ndarray, L: int, l: int) -> list[tuple[int, float]]:
    """(a, ||psi - P_J psi||^2 / ||psi||^2) for every J = [a, a+l-1] on the full 2^L space."""
    idx = np.arange(2**L)
    bits = (idx[:, None] >> (L - 1 - np.arange(L))[None, :]) & 1
    nrm = float(psi @ psi)
    out = []
    for a in range(1, L - l + 2):
        s = bits[:, a - 1:a - 1 + l].sum(axis=1)
        keep = (s == 0) | (s == l)
        out.append((a, float(np.sum(psi[~keep] ** 2)) / nrm))
    return out


def commutator_norm(L: int, J: tuple[int, int], delta: float) -> float:
    """||[P_J, [P_J, H^XXZ]]|| on the full space."""
    H, basis = chain_hamiltonian(L, 0.5, delta, "free")
    Hd = H.toarray()
    c = basis.configs.astype(int)
    a, b = J
    s = c[:, a - 1:b].sum(axis=1)
    p = ((s == 0) | (s == b - a + 1)).astype(float)
    C1 = p[:, None] * Hd - Hd * p[None, :]
    C2 = p[:, None] * C1 - C1 * p[None, :]
    return float(np.linalg.norm(C2, 2))


# --------------------------------------------------------------------------- spectra


def _padded_terms(W: int, delta: float) -> Terms:
    # sites outside the window frozen up: each end bond contributes (1/2)(1/2 - S3)
    t = chain_terms(W, 0.5, delta, "free")
    t.add_field(0, -0.5)
    t.add_field(W - 1, -0.5)
    return t


@dataclass
class BandReport:
    geometry: str
    L: int
    n: int
    delta: float
    q: float
    band_levels: list
    band_center: float
    band_width: float
    next_level: float
    kappa: float
    margin: float
    subspace_angle: float | None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("geometry", "L", "n", "delta", "q", "band_levels", "band_center",
                                               "band_width", "next_level", "kappa", "margin", "subspace_angle",
                                               "extra")}


def droplet_band_check(L: int, n: int, delta: float, geometry: str = "open", window: int | None = None,
                       assert_band: bool = True) -> BandReport:
    p = AnisotropyParams.from_delta(delta)
    q, A = p.q, p.boundary_field
    angle = None
    extra: dict = {}
    if geometry == "open":
        H, basis = chain_hamiltonian(L, 0.5, delta, "pp", N=n)
        count, center, scale = L - n + 1, A, q**n
    elif geometry == "ring":
        if not 1 <= n <= L - 1:
            raise ValueError("ring needs 1 <= n <= L-1")
        H, basis = chain_hamiltonian(L, 0.5, delta, "periodic", N=n)
        count, center, scale = L, 2 * A, q**n + q ** (L - n)
    elif geometry == "infinite_truncated":
        W = window or L
        basis = build_sector_basis(W, 0.5, N=n)
        H = _padded_terms(W, delta).assemble(basis)
        count, center, scale = W - n + 1, 2 * A, q**n
        L = W
        extra["tail_estimate"] = q ** (W / 2)
        extra["constant_shift"] = 0.5
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    M = H.toarray()
    if geometry == "infinite_truncated":
        M = M + 0.5 * np.eye(basis.dim)
    w, V = np.linalg.eigh(M)
    band = w[:count]
    nxt = float(w[count]) if len(w) > count else math.inf
    width = float(np.abs(band - center).max())
    if geometry in ("open", "ring"):
        if geometry == "open":
            X = np.array([droplet_state(L, n, x, q).materialize(basis, normalize="unit")
                          for x in split_positions(L, n)]).T
        else:
            X = _ring_droplets(L, n, q, basis)
        U = _orthonormal_span(X)
        B = V[:, :count]
        angle = float(np.linalg.norm(U @ U.T - B @ B.T, 2)) if U.shape[1] == count else 1.0
    rep = BandReport(geometry, L, n, delta, q, [float(v) for v in band], center, width, nxt,
                     width / scale if scale > 0 else math.inf, nxt - float(band.max()), angle, extra)
    if assert_band and geometry != "infinite_truncated" and not rep.margin > 0:
        raise AssertionError("no positive margin above the droplet band")
    return rep


def _ring_droplets(L: int, n: int, q: float, basis) -> np.ndarray:
    x0 = L // 2
    v = droplet_state(L, n, x0, q).materialize(basis, normalize="unit")
    c = basis.configs
    cols = []
    for s in range(L):
        shifted = np.roll(c, s, axis=1)
        idx = basis.lookup(_keys(shifted, basis))
        u = np.zeros(basis.dim)
        u[idx] = v
        cols.append(u)
    return np.array(cols).T


def _keys(configs, basis):
    w = basis._weights()
    return configs.astype(np.int64) @ w


# --------------------------------------------------------------------------- interface mixture


def antikink_kink_mixture(n: int, q: float, side: str = "right", kmax: int | None = None) -> dict:
    """Limit weights over k of the interface seen from one droplet edge.

    n even: q^{2k(k+1)}; n odd: q^{2k^2}; normalized over the truncated range.
    """
    if not 0 < q < 1:
        raise ValueError("need 0 < q < 1")
    if side not in ("right", "left"):
        raise ValueError("side must be 'right' or 'left'")
    if kmax is None:
        kmax = 1
        while q ** (2 * kmax * (kmax - 1)) > 1e-18:
            kmax += 1
    ks = np.arange(-kmax, kmax + 1)
    e = 2 * ks * (ks + 1) if n % 2 == 0 else 2 * ks * ks
    w = q ** e.astype(float)
    return {"k": ks, "weights": w / w.sum(), "side": side, "parity": n % 2}


def mixture_prelimit(n: int, q: float) -> dict:
    """Finite-n weights from the two-interface decomposition, on the same k labels."""
    kp = np.arange(n + 1)
    e = -2 * kp + kp * (kp + 1) + (n - kp) * (n - kp + 1)
    den = np.array([f_q(q, k) * f_q(q, n - k) for k in kp])
    lw = e * math.log(q) - np.log(den)
    w = np.exp(lw - lw.max())
    ks = (n // 2 - kp) if n % 2 == 0 else ((n + 1) // 2 - kp)
    return {"k": ks, "weights": w / w.sum()}


def mixture_distance(n: int, q: float) -> float:
    lim = antikink_kink_mixture(n, q)
    pre = mixture_prelimit(n, q)
    d = dict(zip(lim["k"].tolist(), lim["weights"]))
    tot = 0.0
    for k, w in zip(pre["k"].tolist(), pre["weights"]):
        tot += abs(w - d.get(k, 0.0))
    tot += sum(v for k, v in d.items() if k not in set(pre["k"].tolist()))
    return tot


# --------------------------------------------------------------------------- brute-force kink helpers


def segment_vector(kind: str, a: int, b: int, k: int, q: float, L: int):
    """Explicit full-space vector of a single kink/antikink factor embedded on [a, b] of [1, L]."""
    st = kink_state(a, b, k, q) if kind == KINK else antikink_state(a, b, k, q)
    return st


def product_vector(L: int, factors: list[_Factor], q: float, basis=None) -> np.ndarray:
    parts = [kink_state(f.a, f.b, f.n, q) if f.kind == KINK else antikink_state(f.a, f.b, f.n, q)
             for f in factors]
    st = product_state(parts)
    if basis is None:
        basis = build_sector_basis(L, 0.5, N=sum(f.n for f in factors))
    return st.materialize(basis, normalize="raw")
