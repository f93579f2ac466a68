"""Second-order perturbation theory of the kink gap about the Ising limit.

H(t) = H0 + t H1 with t = 1/Delta,
H0 = sum_x (S + S3_x)(S - S3_{x+1}),  H1 = -1/2 sum_x (S+_x S-_{x+1} + S-_x S+_{x+1}).

Configurations are down counts s_x in 0..2S.  After the similarity
transform |s> -> prod_x binom(2S, s_x)^{-1/2} |s>, every matrix element of H1
is rational, so the degenerate second-order effective matrix is exact.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy

from .spinchain import Terms, build_sector_basis, _two_s


def ising_energy(cfg, two_s: int) -> int:
    return sum((two_s - cfg[i]) * cfg[i + 1] for i in range(len(cfg) - 1))


def _hops(cfg, two_s: int):
    """Yield (new_cfg, rational amplitude) of H1 in the rescaled basis."""
    L = len(cfg)
    for x in range(L - 1):
        for u, v in ((x, x + 1), (x + 1, x)):
            # S+_u S-_v: a down unit moves from u to v
            if cfg[u] >= 1 and cfg[v] < two_s:
                new = list(cfg)
                new[u] -= 1
                new[v] += 1
                yield tuple(new), Fraction(-(two_s - cfg[u] + 1) * (cfg[v] + 1), 2)


def _level_configs(L: int, N: int, two_s: int, energy: int) -> list[tuple]:
    out = []

    def rec(prefix, e, left):
        i = len(prefix)
        if i == L:
            if left == 0 and e == energy:
                out.append(tuple(prefix))
            return
        rem = L - i - 1
        for s in range(two_s + 1):
            if s > left or left - s > two_s * rem:
                continue
            ne = e + ((two_s - prefix[-1]) * s if prefix else 0)
            if ne > energy:
                continue
            rec(prefix + [s], ne, left - s)

    rec([], 0, N)
    return out


def interface_window(two_s: int, n: int, half: int = 4) -> tuple[int, int]:
    """(L, N) for a window with `half` full sites, one interface site holding n up units, `half` empty."""
    return 2 * half + 1, half * two_s + (two_s - n)


def excited_manifold(two_s: int, n: int, half: int = 4):
    L, N = interface_window(two_s, n, half)
    for e in range(1, 4 * two_s * two_s + 2):
        P = _level_configs(L, N, two_s, e)
        if P:
            return e, P, L, N
    raise RuntimeError("no excited level found")


def effective_matrix(two_s: int, n: int, half: int = 4):
    """Exact second-order effective matrix on the lowest excited Ising level."""
    e0, P, L, N = excited_manifold(two_s, n, half)
    idx = {c: i for i, c in enumerate(P)}
    k = len(P)
    first = [[Fraction(0)] * k for _ in range(k)]
    second = [[Fraction(0)] * k for _ in range(k)]
    for j, b in enumerate(P):
        for c, amp_cb in _hops(b, two_s):
            if c in idx:
                first[idx[c]][j] += amp_cb
                continue
            ec = ising_energy(c, two_s)
            for a, amp_ac in _hops(c, two_s):
                if a in idx:
                    second[idx[a]][j] += amp_ac * amp_cb / (e0 - ec)
    return e0, P, first, second


def ground_shift(two_s: int, n: int, half: int = 4) -> Fraction:
    """Second-order shift of the unique Ising ground configuration."""
    g = tuple([two_s] * half + [two_s - n] + [0] * half)
    tot = Fraction(0)
    for c, amp_cg in _hops(g, two_s):
        ec = ising_energy(c, two_s)
        for a, amp_ac in _hops(c, two_s):
            if a == g:
                tot += amp_ac * amp_cg / (0 - ec)
    return tot


def e2_coefficient(S: float, n: int, half: int = 4):
    """Exact E2(S, n): gap(t) = gap(0) + E2 t^2 + O(t^4) in the sector with filling residue n.

    Both the lowest excited level (degenerate second order when needed) and the
    ground level shift; E2 is the difference.  Returns a Fraction when rational,
    otherwise a sympy expression.
    """
    two_s = _two_s(S)
    if not 0 <= n <= two_s:
        raise ValueError("n must lie in 0..2S")
    if two_s == 2 and n == 1:
        raise ValueError("(S, n) = (1, 1): the excited state is infinitely degenerate")
    e0, P, first, second = effective_matrix(two_s, n, half)
    if any(v != 0 for row in first for v in row):
        raise ArithmeticError("first-order term does not vanish")
    g2 = ground_shift(two_s, n, half)
    if len(P) == 1:
        return second[0][0] - g2
    M = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in second])
    eig = min(M.eigenvals(), key=lambda z: float(z))
    eig = sympy.nsimplify(sympy.simplify(eig - sympy.Rational(g2.numerator, g2.denominator)))
    if eig.is_Rational:
        return Fraction(int(eig.p), int(eig.q))
    return eig


def e2_table(max_two_s: int = 9) -> list[tuple[str, int, str]]:
    """Rows (S, n, E2 as an exact fraction string); (1, 1) is reported as '**'."""
    rows = []
    for ts in range(2, max_two_s + 1):
        S = ts / 2
        for n in range(ts + 1):
            val = "**" if (ts, n) == (2, 1) else str(e2_coefficient(S, n))
            rows.append((str(Fraction(ts, 2)), n, val))
    return rows


def e2_alt_formula(S: float, n: int) -> Fraction:
    """Alternative nondegenerate closed form (kept for comparison with the exact values)."""
    S = Fraction(S).limit_denominator(4)
    n = Fraction(n)
    if n > S:
        n = 2 * S - n
    return (-Fraction(1, 4) * 2 * S * (n + 1) * (2 * S - n) / (2 * S - n + 1)
            - Fraction(1, 4) * 2 * (S - 1) * (n + 2) * (2 * S - n - 1) / (n + 3)
            + Fraction(1, 4) * 2 * S * (n + 1) * (2 * S - n) / (n + 1)
            - S * S / (2 * (2 * S - n - 1)))


def e2_alt_degenerate(S: int) -> Fraction:
    S = Fraction(S)
    return -4 * S * S / (S - 1) - (S * S - 4) * (S - 1) / (2 * (S + 3)) - S * S / (2 * (S - 1))


E2_TABLE = {
    1: {0: Fraction(-1, 6), 2: Fraction(-1, 6)},
    1.5: dict(enumerate([Fraction(43, 48), Fraction(-39, 16), Fraction(-39, 16), Fraction(43, 48)])),
    2: dict(enumerate([Fraction(2), Fraction(-1), Fraction(-14), Fraction(-1), Fraction(2)])),
    2.5: dict(enumerate([Fraction(311, 96), Fraction(1, 16), Fraction(-307, 80), Fraction(-307, 80),
                         Fraction(1, 16), Fraction(311, 96)])),
    3: dict(enumerate([Fraction(139, 30), Fraction(9, 8), Fraction(-27, 10), Fraction(-199, 12),
                       Fraction(-27, 10), Fraction(9, 8), Fraction(139, 30)])),
    3.5: dict(enumerate([Fraction(99, 16), Fraction(181, 80), Fraction(-279, 160), Fraction(-25, 4),
                         Fraction(-25, 4), Fraction(-279, 160), Fraction(181, 80), Fraction(99, 16)])),
    4: dict(enumerate([Fraction(166, 21), Fraction(7, 2), Fraction(-4, 5), Fraction(-16, 3), Fraction(-446, 21),
                       Fraction(-16, 3), Fraction(-4, 5), Fraction(7, 2), Fraction(166, 21)])),
    4.5: dict(enumerate([Fraction(1879, 192), Fraction(543, 112), Fraction(3, 16), Fraction(-68, 15),
                         Fraction(-2157, 224), Fraction(-2157, 224), Fraction(-68, 15), Fraction(3, 16),
                         Fraction(543, 112), Fraction(1879, 192)])),
}


# --------------------------------------------------------------------------- numeric cross-check


def perturbation_terms(L: int, S: float) -> tuple[Terms, Terms]:
    """H0 and H1 as term lists on a chain of L sites."""
    s = _two_s(S) / 2
    h0, h1 = Terms(L), Terms(L)
    for x in range(L - 1):
        # (S + S3_x)(S - S3_{x+1}) = S^2 + S S3_x - S S3_{x+1} - S3_x S3_{x+1}
        h0.add_bond(x, x + 1, s * s, -1.0, 0.0)
        h0.add_field(x, s)
        h0.add_field(x + 1, -s)
        h1.add_bond(x, x + 1, 0.0, 0.0, -0.5)
    return h0, h1


def _sector_operators(L: int, S: float, N: int):
    h0, h1 = perturbation_terms(L, S)
    basis = build_sector_basis(L, S, N=N)
    return h0.assemble(basis).tocsr(), h1.assemble(basis).tocsr()


def _two_lowest_distinct(A) -> float:
    from scipy.sparse.linalg import eigsh

    from .spectra import distinct_levels

    n = A.shape[0]
    if A.count_nonzero() == np.count_nonzero(A.diagonal()):
        # diagonal: Krylov solvers stall on the huge degeneracies here
        return distinct_levels(np.sort(A.diagonal()))[:2]
    if n <= 512:
        return distinct_levels(np.linalg.eigvalsh(A.toarray()))[:2]
    k = 4
    while True:
        v0 = np.random.default_rng(0).standard_normal(n)
        w = eigsh(A, k=min(k, n - 1), which="SA", ncv=40, tol=1e-13, v0=v0, return_eigenvectors=False)
        lv = distinct_levels(w)
        if len(lv) >= 2:
            return lv[:2]
        k *= 2


def sector_gap_at(t: float, L: int, S: float, N: int, ops=None) -> float:
    """Gap of H0 + t H1 in the sector with N down units."""
    H0, H1 = ops if ops is not None else _sector_operators(L, S, N)
    lv = _two_lowest_distinct(H0 + t * H1)
    return lv[1] - lv[0]


def spectrum_symmetry_defect(L: int, S: float, N: int, t: float) -> float:
    """max |spec(H(t)) - spec(H(-t))| over the full sector spectrum."""
    H0, H1 = _sector_operators(L, S, N)
    a = np.linalg.eigvalsh((H0 + t * H1).toarray())
    b = np.linalg.eigvalsh((H0 - t * H1).toarray())
    return float(np.abs(a - b).max())


def curvature_check(S: float, n: int, L: int, h: float = 0.01) -> dict:
    """Central second difference of the sector gap at t = 0 against 2 E2."""
    if not 1e-3 <= h <= 5e-2:
        raise ValueError("h must lie in [1e-3, 5e-2]")
    if L < n + 6:
        raise ValueError("L too small for the interface to sit away from the ends")
    two_s = _two_s(S)
    N = two_s * ((L - 1) // 2) + (two_s - n)
    ops = _sector_operators(L, S, N)
    g0 = sector_gap_at(0.0, L, S, N, ops)
    gp = sector_gap_at(h, L, S, N, ops)
    gm = sector_gap_at(-h, L, S, N, ops)
    d2 = (gp - 2 * g0 + gm) / (h * h)
    an = 2 * float(e2_coefficient(S, n))
    return {"numeric_d2": d2, "analytic": an, "diff": abs(d2 - an), "gap0": g0, "N": N}
