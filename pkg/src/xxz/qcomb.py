"""q-combinatorics and the symmetric-function kernel.

Covers q-Pochhammer symbols, Gaussian binomials, bounded (signed) partitions,
the monomial/elementary transition matrices and principal specializations.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

INFINITY = math.inf
TRUNC = 1e-16
_INT64_MAX = np.iinfo(np.int64).max


def q_pochhammer(a: float, q: float, n: float = INFINITY) -> float:
    """(a; q)_n = prod_{k=1..n} (1 - a q^{k-1}); n may be INFINITY."""
    if not 0.0 <= q < 1.0:
        raise ValueError(f"q must lie in [0, 1), got {q}")
    if n != INFINITY:
        n = int(n)
        if n < 0:
            raise ValueError("order must be non-negative")
        val = 1.0
        for k in range(n):
            val *= 1.0 - a * q**k
        return val
    val = 1.0
    k = 0
    while True:
        term = a * q**k
        val *= 1.0 - term
        k += 1
        if abs(term) < TRUNC or val == 0.0:
            return val
        if k > 100000:
            raise RuntimeError("q-Pochhammer product did not converge")


def gaussian_binomial(n: int, k: int, base: float) -> float:
    """Gaussian binomial [n choose k]_base, zero outside 0 <= k <= n."""
    if k < 0 or k > n:
        return 0.0
    if not 0.0 <= base <= 1.0:
        raise ValueError(f"base must lie in [0, 1], got {base}")
    if base == 1.0:
        return float(math.comb(n, k))
    k = min(k, n - k)
    val = 1.0
    for j in range(1, k + 1):
        val *= (1.0 - base ** (n - k + j)) / (1.0 - base**j)
    return val


def gaussian_binomial_poly(n: int, k: int) -> list[int]:
    """Integer coefficients of [n choose k]_x as a polynomial in x (index = power)."""
    if k < 0 or k > n:
        return [0]
    # Pascal rule: [n,k] = [n-1,k-1] + x^k [n-1,k]
    row = [[1]]
    for m in range(1, n + 1):
        new = []
        for j in range(m + 1):
            a = row[j - 1] if j >= 1 else [0]
            b = row[j] if j < m else [0]
            out = [0] * max(len(a), len(b) + j)
            for i, c in enumerate(a):
                out[i] += c
            for i, c in enumerate(b):
                out[i + j] += c
            new.append(out)
        row = new
    return row[k]


@dataclass(frozen=True)
class BoundedPartition:
    """Weakly decreasing integer sequence with all parts in [lower_bound, upper_bound]."""

    parts: tuple[int, ...]
    lower_bound: int
    upper_bound: int
    total: int = field(init=False)

    def __post_init__(self):
        p = tuple(int(x) for x in self.parts)
        object.__setattr__(self, "parts", p)
        object.__setattr__(self, "total", sum(p))
        if any(p[i] < p[i + 1] for i in range(len(p) - 1)):
            raise ValueError(f"parts not weakly decreasing: {p}")
        if p and (min(p) < self.lower_bound or max(p) > self.upper_bound):
            raise ValueError(f"parts {p} outside [{self.lower_bound}, {self.upper_bound}]")

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def conjugate(self) -> tuple[int, ...]:
        """Column lengths of the (non-negative) Young diagram."""
        if not self.parts or max(self.parts) <= 0:
            return ()
        return tuple(sum(1 for x in self.parts if x >= c) for c in range(1, max(self.parts) + 1))

    def shifted(self, c: int) -> "BoundedPartition":
        return BoundedPartition(tuple(x + c for x in self.parts), self.lower_bound + c, self.upper_bound + c)


def _min_partition(length: int, number: int) -> list[int]:
    q, r = divmod(number, length)
    return [q + 1 if j < r else q for j in range(length)]


def enumerate_partitions(num_parts: int, total: int, min_part: int, max_part: int) -> list[BoundedPartition]:
    """All weakly decreasing length-num_parts sequences in [min_part, max_part] summing to total.

    Ordered as the flattest-first successor walk: start at the flattest
    sequence and repeatedly raise the last part that is strictly below its
    predecessor, refilling the tail as flat as possible.
    """
    if num_parts < 1:
        raise ValueError("num_parts must be >= 1")
    if not num_parts * min_part <= total <= num_parts * max_part:
        return []
    out = []
    cur = _min_partition(num_parts, total)
    while cur[0] <= max_part:
        if cur[-1] >= min_part:
            out.append(BoundedPartition(tuple(cur), min_part, max_part))
        if num_parts == 1:
            break
        i = num_parts - 2
        while i >= 1 and cur[i] == cur[i - 1]:
            i -= 1
        nxt = cur[: i + 1]
        nxt[i] += 1
        nxt += _min_partition(num_parts - i - 1, sum(cur[i + 1:]) - 1)
        cur = nxt
    return out


def dominance_leq(p1: Sequence[int], p2: Sequence[int]) -> bool:
    """True iff every prefix sum of p1 is at most the matching prefix sum of p2."""
    a, b = list(p1), list(p2)
    n = max(len(a), len(b))
    a += [0] * (n - len(a))
    b += [0] * (n - len(b))
    return all(x <= y for x, y in zip(np.cumsum(a), np.cumsum(b)))


@dataclass(frozen=True)
class TransitionMatrices:
    msub: np.ndarray
    msup: np.ndarray
    partition_index: tuple[BoundedPartition, ...]


def _elementary_product(cols: Sequence[int], nvars: int) -> Counter:
    """Expand prod_c e_c(x_1..x_nvars) into a Counter over exponent tuples."""
    poly = Counter({(0,) * nvars: 1})
    for c in cols:
        if c > nvars:
            return Counter()
        subsets = list(combinations(range(nvars), c))
        new = Counter()
        for mono, coef in poly.items():
            for s in subsets:
                m = list(mono)
                for i in s:
                    m[i] += 1
                new[tuple(m)] += coef
        poly = new
    return poly


def elementary_of(partition: BoundedPartition) -> Counter:
    """El(lambda) = prod over columns c of the shifted diagram of e_c, in len(lambda) variables."""
    parts = partition.parts
    shift = -min(0, min(parts)) if parts else 0
    shifted = [x + shift for x in parts]
    cols = [sum(1 for x in shifted if x >= c) for c in range(1, max(shifted, default=0) + 1)]
    poly = _elementary_product(cols, len(parts))
    if shift:
        poly = Counter({tuple(e - shift for e in m): c for m, c in poly.items()})
    return poly


def _unit_lower_inverse(m: list[list[int]]) -> list[list[int]]:
    n = len(m)
    inv = [[0] * n for _ in range(n)]
    for i in range(n):
        if m[i][i] not in (1, -1):
            raise ArithmeticError("transition matrix is not unimodular triangular")
    for j in range(n):
        inv[j][j] = m[j][j]
        for i in range(j + 1, n):
            s = sum(m[i][k] * inv[k][j] for k in range(j, i))
            inv[i][j] = -s * m[i][i]
    return inv


def _to_int64(rows: list[list[int]]) -> np.ndarray:
    if any(abs(x) > _INT64_MAX for r in rows for x in r):
        raise OverflowError("transition matrix entry exceeds int64")
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(rows))


def transition_matrices(partitions: Sequence[BoundedPartition]) -> TransitionMatrices:
    """msub[i][j] = coefficient of x^{lambda_j} in El(lambda_i); msup its exact inverse."""
    parts = tuple(partitions)
    if not parts:
        return TransitionMatrices(np.zeros((0, 0), np.int64), np.zeros((0, 0), np.int64), ())
    ln, tot = len(parts[0]), parts[0].total
    if any(len(p) != ln or p.total != tot for p in parts):
        raise ValueError("partitions must share num_parts and total")
    polys = [elementary_of(p) for p in parts]
    msub = [[polys[i].get(parts[j].parts, 0) for j in range(len(parts))] for i in range(len(parts))]
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if msub[i][j]:
                raise ArithmeticError("transition matrix not lower triangular in enumeration order")
    msup = _unit_lower_inverse(msub)
    return TransitionMatrices(_to_int64(msub), _to_int64(msup), parts)


def orbit_size(parts: Sequence[int]) -> int:
    """Number of distinct permutations of a multiset."""
    cnt = Counter(parts)
    out = math.factorial(len(parts))
    for v in cnt.values():
        out //= math.factorial(v)
    return out


def principal_specialization(partition: BoundedPartition | Sequence[int], kind: str, num_vars: int,
                             base: float) -> float:
    """Principal specialization f(1, x, ..., x^{n-1}) with x = base.

    kind='elementary' evaluates prod_m e_{lambda_m}(x, x^2, ..., x^n), the
    q^2-specialization used by the reduced matrix (x = q^2); at base = 1 it
    is prod_m binom(n, lambda_m).  kind='monomial' evaluates
    m_lambda(1, x, ..., x^{n-1}); at base = 1 it is the orbit size.
    """
    parts = tuple(partition.parts if isinstance(partition, BoundedPartition) else partition)
    if kind == "elementary":
        out = 1.0
        for k in parts:
            if k < 0 or k > num_vars:
                return 0.0
            if base == 1.0:
                out *= math.comb(num_vars, k)
            else:
                out *= base ** (k * (k + 1) // 2) * gaussian_binomial(num_vars, k, base)
        return out
    if kind == "monomial":
        nz = [p for p in parts if p != 0]
        if len(nz) > num_vars:
            return 0.0
        padded = tuple(nz) + (0,) * (num_vars - len(nz))
        if base == 1.0:
            return float(orbit_size(padded))
        total = 0.0
        for perm in set(permutations(padded)):
            total += float(np.prod([base ** (i * e) for i, e in enumerate(perm)]))
        return total
    raise ValueError(f"unknown kind {kind!r}")


def theta_series(z: float, q: float) -> float:
    """f(z) = sum_k (-1)^k q^{k(k-1)/2} z^k, truncated below 1e-16."""
    if not 0.0 <= q < 1.0:
        raise ValueError("q must lie in [0, 1)")
    total = 0.0
    k = 0
    while True:
        term = (-1) ** k * (q ** (k * (k - 1) // 2) if k > 1 else 1.0) * z**k
        total += term
        if k > 1 and abs(term) < TRUNC:
            return total
        if k > 1 and q == 0.0:
            return total
        k += 1
        if k > 10000:
            raise RuntimeError("theta series did not converge")
