"""Interface toolkit for the (1,1,...,1) interface of the spin-1/2 XXZ model.

Two pictures are used.

Sticks (3-d cylinders): a stick has L+1 sites at heights l = -L/2, ..., L/2 and a
down spin at height l carries weight q^{2l}.  A cylinder of cross-section A is A
independent sticks, so canonical partition functions Z(Lambda, n) are coefficients
of the A-th power of the stick polynomial prod_l (1 + x q^{2l}).

Columns (2-d strips): a column has L sites at heights l in {-(L-1)/2, ..., (L-1)/2};
spin m = +-1/2 at height l carries weight q^{|l| - 2 m l}.  Z(L, n, M) is the
coefficient of z^{2M} in F_L(z)^n with F_L(z) = prod_l (z q^{|l|-l} + z^{-1} q^{|l|+l}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .qcomb import q_pochhammer


def _a(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError("need 0 < q < 1")
    return -2.0 * math.log(q)


def stick_heights(L: int) -> np.ndarray:
    return np.arange(L + 1) - L / 2


# --------------------------------------------------------------------------- stick statistics


@dataclass
class StickStats:
    L: int
    mu: float
    q: float
    mean: float
    F_L: float
    sigma2: float


def stick_stats(L: int, mu: float, q: float) -> StickStats:
    a = _a(q)
    x = a * (stick_heights(L) - mu) / 2
    mean = float(np.sum(0.5 * (1.0 - np.tanh(x))))
    sigma2 = float(0.25 * np.sum(1.0 / np.cosh(x) ** 2))
    return StickStats(L, mu, q, mean, mean - (mu + (L + 1) / 2), sigma2)


def F_infinity(mu: float, q: float, tol: float = 1e-16) -> float:
    """F_inf(mu) = -{mu} + tanh(a{mu}/2)/2 + sum_{l>=1} sinh(a{mu}) / (cosh(a{mu}) + cosh(a l))."""
    a = _a(q)
    f = mu - math.floor(mu)
    s = -f + 0.5 * math.tanh(a * f / 2)
    sh, ch = math.sinh(a * f), math.cosh(a * f)
    l = 1
    while True:
        t = sh / (ch + math.cosh(a * l))
        s += t
        if abs(t) < tol or l > 10_000:
            break
        l += 1
    return s


def F_infinity_uncorrected(mu: float, q: float, tol: float = 1e-16) -> float:
    """The same series with tanh(a{mu}) in place of tanh(a{mu}/2)."""
    a = _a(q)
    f = mu - math.floor(mu)
    return F_infinity(mu, q, tol) - 0.5 * math.tanh(a * f / 2) + 0.5 * math.tanh(a * f)


def F_tail_bound(L: int, mu: float, q: float) -> float:
    """|F_inf(mu) - F_L(mu)| bound for -L/2 <= mu <= L/2."""
    a = _a(q)
    return abs(math.log((1 + math.exp(-a / 2 * (L / 2 - mu))) / (1 + math.exp(-a / 2 * (L / 2 + mu))))) / a


def sigma2_infinity(mu: float, q: float, tol: float = 1e-16) -> float:
    a = _a(q)
    f = mu - math.floor(mu)
    s, l = 0.0, 0
    while True:
        t = 0.25 / math.cosh(a * (l - f) / 2) ** 2 + (0.25 / math.cosh(a * (-l - 1 - f) / 2) ** 2)
        s += t
        if t < tol:
            break
        l += 1
    return s


def sigma2_tail_bound(L: int, mu: float, q: float) -> float:
    return 2 * q ** (2 * (L / 2 - abs(mu))) / (1 - q * q)


def sigma2_bounds(q: float) -> tuple[float, float]:
    return q * q / (4 * (1 - q * q)), (1 + q * q) / (1 - q * q)


def delta_mu(mu: float) -> float:
    """Distance from mu to the nearest integer."""
    return min(mu - math.floor(mu), math.ceil(mu) - mu)


def solve_mu(L: int, rho: float, q: float) -> float:
    """mu with <N>_stick(mu) = rho (L+1)."""
    target = rho * (L + 1)
    if not 0.0 < target < L + 1:
        raise ValueError("target density out of range: need 0 < rho (L+1) < L+1")
    a = _a(q)
    h = stick_heights(L)

    def g(mu):
        return float(np.sum(special.expit(-a * (h - mu)))) - target

    lo, hi = -L / 2 - 1.0, L / 2 + 1.0
    while g(lo) > 0:
        lo -= 1.0 + abs(lo)
    while g(hi) < 0:
        hi += 1.0 + abs(hi)
    return optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


# --------------------------------------------------------------------------- exact sticks


def stick_polynomial(L: int, q: float, drop: float | None = None) -> np.ndarray:
    """Coefficients of prod_l (1 + x q^{2l}); `drop` removes the site at that height."""
    c = np.array([1.0])
    for l in stick_heights(L):
        if drop is not None and l == drop:
            continue
        c = np.convolve(c, [1.0, q ** (2 * l)])
    return c


def cylinder_partition(L: int, A: int, q: float) -> np.ndarray:
    """Z(Lambda, n) for n = 0..A(L+1) by repeated convolution of stick polynomials."""
    s = stick_polynomial(L, q)
    Z = np.array([1.0])
    for _ in range(A):
        Z = np.convolve(Z, s)
    return Z


def cylinder_partition_bruteforce(L: int, A: int, q: float) -> np.ndarray:
    """Same as cylinder_partition by enumerating all 2^{A(L+1)} configurations."""
    h = np.tile(stick_heights(L), A)
    N = len(h)
    if N > 20:
        raise ValueError("too many sites for enumeration")
    idx = np.arange(2**N)
    bits = (idx[:, None] >> np.arange(N)[None, :]) & 1
    w = q ** (2 * (bits * h).sum(axis=1))
    n = bits.sum(axis=1)
    return np.bincount(n, weights=w, minlength=N + 1)


@dataclass
class EnsembleGeometry:
    L: int
    A: int
    A0: int
    n: int

    def __post_init__(self):
        if not 0 < self.A0 < self.A:
            raise ValueError("need 0 < A0 < A")
        if not 0 <= self.n <= (self.L + 1) * self.A:
            raise ValueError("need 0 <= n <= (L+1) A")

    @property
    def rho(self) -> float:
        return self.n / ((self.L + 1) * self.A)


def C_const(A0: float, A: float, sigma2: float) -> float:
    x = A0 / (sigma2 * math.sqrt(A))
    if x >= 1:
        raise ValueError(f"C(A0, A) undefined: A0/(sigma^2 sqrt(A)) = {x:.4g} >= 1")
    return (1 + x) / (1 - x)


def activity_bounds(geom: EnsembleGeometry, k: int, mu: float, A0: float, q: float) -> dict:
    """Sandwich for Z(Lambda, n) / Z(Lambda, n-k) from the local CLT, with C(A0, A).

    Also returns the same sandwich multiplied by q^{-2k mu} and the special-case
    bounds (C(A0/2, A) with the sigma^2 bounds) when mu solves <N> = n/A.
    """
    L, A, n = geom.L, geom.A, geom.n
    a = _a(q)
    st = stick_stats(L, mu, q)
    lim = 0.5 * A0 * math.sqrt(A)
    if not n - A * st.mean <= lim + 1e-12:
        raise ValueError(f"hypothesis violated: n - A<N> = {n - A * st.mean:.4g} > A0 sqrt(A)/2 = {lim:.4g}")
    if not abs(k) <= lim + 1e-12:
        raise ValueError(f"hypothesis violated: |k| = {abs(k)} > A0 sqrt(A)/2 = {lim:.4g}")
    C = C_const(A0, A, st.sigma2)
    s2 = st.sigma2
    expo = k * (2 * n / A - 2 * st.mean + 2 * mu * a * s2 - k / A) / (a * s2)
    centre = q**expo
    out = {"upper": C * centre, "lower": centre / C, "C": C, "sigma2": s2, "mean": st.mean}
    if abs(n / A - st.mean) < 1e-9:
        Ch = C_const(A0 / 2, A, s2)
        out["special_upper"] = Ch * q ** (-2 * k * k * (1 - q * q) / (a * q * q * A))
        out["special_lower"] = q ** (-k * k * (1 - q * q) / (2 * a * (1 + q * q) * A)) / Ch
    return out


def minimal_A0(geom: EnsembleGeometry, k: int, mu: float, q: float) -> float:
    st = stick_stats(geom.L, mu, q)
    need = max(2 * (geom.n - geom.A * st.mean), 2 * abs(k), 0.0) / math.sqrt(geom.A)
    return max(need, 1e-9)


def eoe_error(geom: EnsembleGeometry, q: float) -> float:
    """epsilon of the 3-d equivalence of ensembles."""
    A, A0 = geom.A, geom.A0
    a = _a(q)
    den = q * q * math.sqrt(A - A0) - 2 * A0
    if den <= 0:
        raise ValueError(f"denominator q^2 sqrt(A-A0) - 2 A0 = {den:.4g} <= 0")
    return (math.log(A - A0) ** 2 + 2 * (1 + a * a) * A0**2 + 4) / (2 * (A - A0)) + 4 * A0 / den


def eoe_discrepancy(geom: EnsembleGeometry, q: float, height: float) -> dict:
    """Exact |<S3_x>_{Lambda,n} - <S3_x>^{GC}_{mu}| for x at `height`, and ||S3_x||_gs."""
    L, A, n = geom.L, geom.A, geom.n
    s = stick_polynomial(L, q)
    s_minus = stick_polynomial(L, q, drop=height)
    rest = np.array([1.0])
    for _ in range(A - 1):
        rest = np.convolve(rest, s)
    Z = np.convolve(rest, s)
    Zx = np.convolve(rest, s_minus)
    w = q ** (2 * height)
    p_can = np.array([w * Zx[m - 1] / Z[m] if m >= 1 and m - 1 < len(Zx) else 0.0 for m in range(len(Z))])
    s3 = 0.5 - p_can
    mu = solve_mu(L, n / A / (L + 1), q) if 0 < n < A * (L + 1) else None
    if mu is None:
        raise ValueError("need 0 < n < A (L+1)")
    a = _a(q)
    p_gc = float(special.expit(-a * (height - mu)))
    return {"canonical": float(s3[n]), "grand_canonical": 0.5 - p_gc, "mu": mu,
            "discrepancy": abs(float(s3[n]) - (0.5 - p_gc)), "norm_gs": float(np.abs(s3).max())}


def exp_moment_exact(L: int, mu: float, q: float, A: int = 1, sign: int = -1) -> float:
    """<q^{2 sign |N - <N>|}>^{GC} for A sticks (sign=-1 is the growing moment)."""
    a = _a(q)
    p = special.expit(-a * (stick_heights(L) - mu))
    dist = np.array([1.0])
    for _ in range(A):
        for pl in p:
            dist = np.convolve(dist, [1 - pl, pl])
    mean = A * float(p.sum())
    N = np.arange(len(dist))
    return float(np.sum(dist * q ** (2 * sign * np.abs(N - mean))))


def exp_moment_bruteforce(L: int, mu: float, q: float, sign: int = -1) -> float:
    a = _a(q)
    h = stick_heights(L)
    N = len(h)
    idx = np.arange(2**N)
    bits = (idx[:, None] >> np.arange(N)[None, :]) & 1
    w = np.exp(-a * ((bits * (h - mu)).sum(axis=1)))
    w /= w.sum()
    n = bits.sum(axis=1)
    mean = float(np.sum(w * n))
    return float(np.sum(w * q ** (2 * sign * np.abs(n - mean))))


def exp_moment_bound(L: int, mu: float, q: float, num_sticks: int = 1) -> float:
    """Single stick: 4 q^{-1-|F_L(mu)|} (<= 4 q^{-2}); A sticks: 2^{A+1} q^{-2A}."""
    if num_sticks == 1:
        return 4 * q ** (-1 - abs(stick_stats(L, mu, q).F_L))
    return 2 ** (num_sticks + 1) * q ** (-2 * num_sticks)


# --------------------------------------------------------------------------- columns (2-d)


def column_heights(L: int) -> np.ndarray:
    return np.arange(L) - (L - 1) / 2


def column_polynomial(L: int, q: float, fix: tuple[float, int] | None = None) -> np.ndarray:
    """Weights of one column indexed by 2M + L (M = total S3); `fix` = (height, +1 up / -1 down)."""
    c = np.array([1.0])
    for l in column_heights(L):
        up, dn = q ** (abs(l) - l), q ** (abs(l) + l)
        if fix is not None and l == fix[0]:
            up, dn = (up, 0.0) if fix[1] > 0 else (0.0, dn)
        # index 2M + L: up raises 2M by 1, down lowers it
        c = np.convolve(c, [dn, 0.0, up])
    return c


def strip_partition(L: int, n: int, q: float) -> dict:
    """Z(L, n, M) as {M: value} by convolution of n columns."""
    c = column_polynomial(L, q)
    Z = np.array([1.0])
    for _ in range(n):
        Z = np.convolve(Z, c)
    off = L * n
    return {(i - off) / 2: float(v) for i, v in enumerate(Z) if v != 0.0}


def strip_partition_bruteforce(L: int, n: int, q: float) -> dict:
    h = np.tile(column_heights(L), n)
    N = len(h)
    if N > 20:
        raise ValueError("too many sites for enumeration")
    idx = np.arange(2**N)
    up = (idx[:, None] >> np.arange(N)[None, :]) & 1
    m = up - 0.5
    w = q ** ((np.abs(h)[None, :] - 2 * m * h[None, :]).sum(axis=1))
    M = m.sum(axis=1)
    out: dict = {}
    for Mi, wi in zip(M, w):
        out[float(Mi)] = out.get(float(Mi), 0.0) + float(wi)
    return out


def F_column(L: int, z: float, q: float) -> float:
    return float(np.prod([z * q ** (abs(l) - l) + q ** (abs(l) + l) / z for l in column_heights(L)]))


def _phi_inv_terms(L: int, q: float, variant: str):
    eta = -math.log(q)
    scale = 2.0 if variant == "corrected" else 1.0
    return np.cosh(scale * eta * column_heights(L))


def phi_inverse(t: float, L: int, q: float, variant: str = "corrected") -> float:
    """m(t) = (1/2) sum_l sinh t / (cosh t + cosh(2 eta l)); variant='alt' uses cosh(eta l)."""
    c = _phi_inv_terms(L, q, variant)
    return float(0.5 * np.sum(np.sinh(t) / (np.cosh(t) + c)))


def phi_inverse_d1(t: float, L: int, q: float, variant: str = "corrected") -> float:
    c = _phi_inv_terms(L, q, variant)
    return float(0.5 * np.sum((1 + c * np.cosh(t)) / (np.cosh(t) + c) ** 2))


def phi_inverse_d2(t: float, L: int, q: float, variant: str = "corrected") -> float:
    c = _phi_inv_terms(L, q, variant)
    return float(0.5 * np.sum(np.sinh(t) * (c * c - 2 - c * np.cosh(t)) / (np.cosh(t) + c) ** 3))


def phi(m: float, L: int, q: float, variant: str = "corrected") -> float:
    if not -L / 2 < m < L / 2:
        raise ValueError("m must lie strictly inside (-L/2, L/2)")
    g = lambda t: phi_inverse(t, L, q, variant) - m
    hi = 1.0
    while g(hi) < 0:
        hi *= 2
    lo = -1.0
    while g(lo) > 0:
        lo *= 2
    return optimize.brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def phi_d1(m, L, q, variant="corrected"):
    return 1.0 / phi_inverse_d1(phi(m, L, q, variant), L, q, variant)


def phi_d2(m, L, q, variant="corrected"):
    t = phi(m, L, q, variant)
    d1 = phi_inverse_d1(t, L, q, variant)
    return -phi_inverse_d2(t, L, q, variant) / d1**3


@dataclass
class SaddleData:
    L: int
    n: int
    m: float
    t: float
    phi_prime: float
    log_estimate: float
    eps_upper: float
    eps_lower: float

    @property
    def Z_estimate(self) -> float:
        return math.exp(self.log_estimate)

    def bounds(self) -> tuple[float, float]:
        Z = self.Z_estimate
        return Z * (1 - self.eps_lower), Z * (1 + self.eps_upper)


def hayman_eps(n: int, m: float, phi_prime: float, eps: float) -> tuple[float, float]:
    u = n ** (-1 + 2 * eps)
    ex = math.exp(-2 * n ** (2 * eps) * (1 - u / 6) ** 2 / phi_prime)
    root = math.sqrt(2 * math.pi * n / phi_prime)
    upper = u / (6 - u) + root * ex
    lower = u + 4 * n ** (-1 + 4 * eps) * (m * phi_prime) ** 2 / (1 - 2 * u) ** 4 + (1 + root) * ex
    return upper, lower


def hayman_partition(L: int, n: int, m: float, q: float, eps: float = 0.2,
                     variant: str = "corrected") -> SaddleData:
    """Saddle-point estimate of Z(L, n, m n) with its error terms.

    log estimate = (1/2) ln(phi'(m)/(2 pi n)) + n (ln F_L(e^{t/2}) - m t), t = phi_L(m).
    """
    if not 0 < eps < 0.25:
        raise ValueError("eps must lie in (0, 1/4)")
    if n < 2:
        raise ValueError("need n >= 2")
    if not -L / 2 < m < L / 2:
        raise ValueError("m at or beyond the domain edge")
    t = phi(m, L, q, variant)
    p1 = phi_d1(m, L, q, variant)
    log_est = 0.5 * math.log(p1 / (2 * math.pi * n)) + n * (math.log(F_column(L, math.exp(t / 2), q)) - m * t)
    eu, el = hayman_eps(n, m, p1, eps)
    return SaddleData(L, n, m, t, p1, log_est, eu, el)


def hayman_log_estimate_integral(L: int, n: int, m: float, q: float, variant: str = "corrected") -> float:
    """Second route: (n/2) floor(L^2/2) ln q + (1/2) ln(phi'(m)/(2 pi n)) + n int_m^{L/2} phi."""
    p1 = phi_d1(m, L, q, variant)
    integral, _ = integrate.quad(lambda s: phi(s, L, q, variant), m, L / 2, epsabs=1e-13, epsrel=1e-10,
                                 limit=200)
    return 0.5 * n * (L * L // 2) * math.log(q) + 0.5 * math.log(p1 / (2 * math.pi * n)) + n * integral


def hayman_ratio_bounds(L: int, n: int, M: float, k: int, q: float, eps: float = 0.2) -> tuple[float, float]:
    """Bounds for Z(L, n, M) / Z(L, n, M - k) from two Hayman sandwiches."""
    a = hayman_partition(L, n, M / n, q, eps)
    b = hayman_partition(L, n, (M - k) / n, q, eps)
    r = math.exp(a.log_estimate - b.log_estimate)
    lo = r * (1 - a.eps_lower) / (1 + b.eps_upper)
    hi = r * (1 + a.eps_upper) / (1 - b.eps_lower) if b.eps_lower < 1 else math.inf
    return lo, hi


def theta_sum(q: float) -> float:
    """sum_{k in Z} q^{k^2}."""
    s, k = 1.0, 1
    while q ** (k * k) > 1e-18:
        s += 2 * q ** (k * k)
        k += 1
    return s


def column_ground_exponent(L: int, M: float) -> float:
    """Exponent e(M) of Z_inf(M) = q^{e(M)} / (q^2;q^2)_inf for one infinite column."""
    return M * M - (0.25 if L % 2 else 0.0)


def eoe_column_bound(L: int, n0: int, M0: float, q: float, power: int | None = None,
                    shifted: bool = True) -> float:
    """[q^{e(M0/n0)} sum_k q^{k^2} / (q^2;q^2)_inf]^{power}; power defaults to n0.

    shifted=False evaluates q^{r(r+1)} with r = M0/n0 taken literally.
    """
    r = M0 / n0
    e = column_ground_exponent(L, r) if shifted else r * (r + 1)
    base = q**e * theta_sum(q) / q_pochhammer(q * q, q * q)
    return base ** (n0 if power is None else power)


def _sup_on(f, lo: float, hi: float, pts: int = 201) -> float:
    return max(abs(f(x)) for x in np.linspace(lo, hi, pts))


def eoe2_error(L: int, n: int, n0: int, m: float, q: float, eps2: float = 0.25, eps: float = 0.2) -> dict:
    """E1, E2 and the total 2(E1 + E2) for the 2-d equivalence of ensembles.

    Suprema over the interval D are taken on a 201-point grid.
    """
    if not 0 < n0 < n:
        raise ValueError("need 0 < n0 < n")
    if not 0 < eps2 < 0.5:
        raise ValueError("eps2 must lie in (0, 1/2)")
    t = phi(m, L, q)
    p1 = phi_d1(m, L, q)
    ne = n**eps2
    den = 1 - math.exp(abs(t)) * q ** (2 * ne)
    if den <= 0:
        raise ValueError("E1 denominator 1 - e^{|t|} q^{2 n^eps2} is not positive")
    Fl = F_column(L, math.exp(t / 2), q)
    E1 = 4 / den * (math.exp(abs(t * ne)) * q ** (n ** (2 * eps2)) * theta_sum(q)
                    / (Fl * q_pochhammer(q * q, q * q))) ** n0
    c, r = m * n / (n - n0), n0 * ne / (n - n0)
    lo, hi = c - r, c + r
    if not (-L / 2 < lo and hi < L / 2):
        raise ValueError("interval D leaves the domain of phi_L")
    s1 = _sup_on(lambda x: phi_d1(x, L, q), lo, hi)
    s2 = _sup_on(lambda x: phi_d2(x, L, q), lo, hi)
    epu = _sup_on(lambda x: hayman_eps(n - n0, x, phi_d1(x, L, q), eps)[0], lo, hi)
    epl = _sup_on(lambda x: hayman_eps(n - n0, x, phi_d1(x, L, q), eps)[1], lo, hi)
    eu_n, el_n = hayman_eps(n, m, p1, eps)
    w = (abs(m) + ne) * n0 / (n - n0)
    pre = math.sqrt(1 + n0 / (n - n0))
    g = 0.5 * s1 * (abs(m) + ne) ** 2 * n0**2 / (n - n0)
    up = pre * math.sqrt(1 + s2 / p1 * w) * math.exp(g) * (1 + epu) / (1 - el_n) - 1 if el_n < 1 else math.inf
    inner = 1 - s2 / p1 * w
    down = 1 - pre * math.sqrt(max(inner, 0.0)) * math.exp(-g) * (1 - epl) / (1 + eu_n)
    E2 = max(up, down)
    return {"E1": E1, "E2": E2, "total": 2 * (E1 + E2), "t": t}


def eoe2_discrepancy(L: int, n: int, n0: int, m: float, q: float, height: float) -> dict:
    """Exact |<S3_x>^{can}_{(L,n,mn)} - <S3_x>^{GC}_{(L,n0,e^{t/2})}| for x in the first column."""
    M = m * n
    Z = strip_partition(L, n, q)
    c = column_polynomial(L, q)
    cu = column_polynomial(L, q, fix=(height, +1))
    rest = np.array([1.0])
    for _ in range(n - 1):
        rest = np.convolve(rest, c)
    Zu = np.convolve(rest, cu)
    off = L * n
    p_up = Zu[int(round(2 * M + off))] / Z[M]
    t = phi(m, L, q)
    w_up = math.exp(t) * q ** (abs(height) - height)
    w_dn = q ** (abs(height) + height)
    g_up = w_up / (w_up + w_dn)
    can, gc = p_up - 0.5, g_up - 0.5
    return {"canonical": can, "grand_canonical": gc, "discrepancy": abs(can - gc)}


# --------------------------------------------------------------------------- energy and spin waves


def bond_probability_sum(L: int, q: float) -> float:
    """max_k sum_{l} <Y_l>_{stick, k}: expected number of broken bonds in a stick of L+1 sites."""
    h = stick_heights(L)
    N = len(h)
    idx = np.arange(2**N)
    bits = (idx[:, None] >> np.arange(N)[None, :]) & 1
    w = q ** (2 * (bits * h).sum(axis=1))
    k = bits.sum(axis=1)
    broken = (bits[:, 1:] != bits[:, :-1]).sum(axis=1)
    best = 0.0
    for kk in range(N + 1):
        sel = k == kk
        best = max(best, float(np.sum(w[sel] * broken[sel]) / np.sum(w[sel])))
    return best


def bond_probability_bound(q: float) -> float:
    return 2 * (1 + q * q) / (1 - q * q)


def g_factor(delta: float, mu: float, L: int) -> float:
    """sum sech(alpha(l-mu)) sech(alpha(l+1-mu)) / sum sech^2(alpha(l-mu)), Delta = cosh(alpha)."""
    if not delta > 1:
        raise ValueError("need Delta > 1")
    if L % 2:
        raise ValueError("need L even")
    al = math.acosh(delta)
    l = np.arange(-L // 2, L // 2 + 1)
    s = 1 / np.cosh(al * (l - mu))
    return float(np.sum(s[:-1] * s[1:]) / np.sum(s * s))


def continuum_energy(delta: float, mu: float, L: int, R: float, laplace_eigenvalue: float) -> dict:
    """Coefficient (1/(2 Delta R^2)) lambda g(Delta, mu) and the order-1 residual for F = sech/2."""
    g = g_factor(delta, mu, L)
    al = math.acosh(delta)
    l = np.arange(-L // 2, L // 2 + 1)
    F = 0.5 / np.cosh(al * (l - mu))
    resid = float(np.sum(np.abs(np.cosh(al * (l[1:] - mu)) * F[1:] - np.cosh(al * (l[:-1] - mu)) * F[:-1]) ** 2))
    return {"g": g, "ratio_coefficient": laplace_eigenvalue * g / (2 * delta * R * R), "order1_residual": resid,
            "g_lower": delta - math.sqrt(delta * delta - 1)}


BESSEL_Z0 = float(special.jn_zeros(0, 1)[0])


@dataclass(frozen=True)
class Ansatz:
    """Constants of a phase profile on the rescaled domain, all normalized by the domain area."""
    name: str
    grad2: float  # ||grad phi||_2^2 / m
    norm2: float  # ||phi||_2^2 / m
    d1_sup: float
    d2_sup: float
    sup: float


def bessel_ansatz() -> Ansatz:
    """phi(r) = J0(z0 r) on the unit disk."""
    z0 = BESSEL_Z0
    n2, _ = integrate.quad(lambda r: 2 * special.j0(z0 * r) ** 2 * r, 0, 1, epsabs=1e-14, epsrel=1e-12)
    g2, _ = integrate.quad(lambda r: 2 * (z0 * special.j1(z0 * r)) ** 2 * r, 0, 1, epsabs=1e-14, epsrel=1e-12)
    r = np.linspace(0, 1, 4001)
    d1 = float(np.max(z0 * np.abs(special.j1(z0 * r))))
    # Hessian entries f'' cos^2 + (f'/r) sin^2 etc.; the largest entry is attained on the axes or diagonals
    fpp = -z0 * z0 * (special.j0(z0 * r) - special.jv(2, z0 * r)) / 2
    with np.errstate(invalid="ignore", divide="ignore"):
        fr = np.where(r > 0, -z0 * special.j1(z0 * r) / np.where(r > 0, r, 1), -z0 * z0 / 2)
    th = np.linspace(0, np.pi / 2, 91)[:, None]
    c2, s2 = np.cos(th) ** 2, np.sin(th) ** 2
    hxx = fpp * c2 + fr * s2
    hxy = (fpp - fr) * np.sqrt(c2 * s2)
    d2 = float(max(np.abs(hxx).max(), np.abs(hxy).max()))
    return Ansatz("bessel", g2, n2, d1, d2, 1.0)


def strip_ansatz() -> Ansatz:
    """phi(y) = cos(pi y / 2) on [-1, 1] (the d = 2 interface is a line)."""
    p = math.pi / 2
    return Ansatz("strip", p * p / 2, 0.5, p, p * p, 1.0)


def spinwave_gap_bound(R: float, delta: float, mu: float, shape: str = "disk", ansatz: Ansatz | None = None,
                       A_R: float = 1.0, S: float = 1.0) -> dict:
    """Numerator, denominator and gamma_1 bounds for the phase-twisted ground state."""
    if R <= 0:
        raise ValueError("need R > 0")
    if ansatz is None:
        ansatz = bessel_ansatz() if shape == "disk" else strip_ansatz()
    q = delta - math.sqrt(delta * delta - 1)
    d = delta_mu(mu)
    an = ansatz
    e_num = 6 * A_R * S * S / R**5 * an.d2_sup * an.d1_sup
    numer = 2 * (1 + q * q) / (1 - q * q) * (A_R * S * S / R**4 * an.grad2 + e_num)
    bracket = an.norm2 - math.sqrt(6) / R * an.d1_sup * an.sup - S * S / (12 * R * R) * an.sup**4
    denom = q ** (2 * d) * A_R * S * S / (4 * R * R) * bracket
    lin_den = an.norm2 - math.sqrt(6) / R * an.d1_sup * an.sup
    gamma = (16 * q ** (2 * (1 - d)) / ((1 - q * q) * R * R)
             * (an.grad2 + 6 / R * an.d2_sup * an.d1_sup) / lin_den) if lin_den > 0 else math.inf
    headline = 100 * q ** (2 * (1 - d)) / ((1 - q * q) * R * R)
    return {"numerator_bound": numer, "denominator_bound": denom, "gamma1_bound": gamma,
            "headline": headline, "headline_holds": gamma <= headline, "R_in_range": R > 70,
            "delta_mu": d, "q": q, "ansatz": an.name}


def headline_threshold(an: Ansatz | None = None) -> float:
    """Smallest R with 16 (grad2 + 6 c2 c1 / R) / (norm2 - sqrt6 c1 c0 / R) <= 100."""
    an = an or bessel_ansatz()
    k = 100 / 16
    num = 6 * an.d2_sup * an.d1_sup + k * math.sqrt(6) * an.d1_sup * an.sup
    gap = k * an.norm2 - an.grad2
    if gap <= 0:
        return math.inf
    return num / gap


# --------------------------------------------------------------------------- Voronoi averaging


def triangular_patch(radius: float, spacing: float = math.sqrt(2)) -> np.ndarray:
    """Triangular-lattice points within `radius` of the origin."""
    e1 = np.array([spacing, 0.0])
    e2 = np.array([spacing / 2, spacing * math.sqrt(3) / 2])
    k = int(radius / spacing) + 2
    pts = [i * e1 + j * e2 for i in range(-2 * k, 2 * k + 1) for j in range(-2 * k, 2 * k + 1)]
    pts = np.array(pts)
    return pts[np.linalg.norm(pts, axis=1) <= radius + 1e-12]


_DUNAVANT5 = (
    np.array([[1 / 3, 1 / 3], [0.059715871789770, 0.470142064105115], [0.470142064105115, 0.059715871789770],
              [0.470142064105115, 0.470142064105115], [0.797426985353087, 0.101286507323456],
              [0.101286507323456, 0.797426985353087], [0.101286507323456, 0.101286507323456]]),
    np.array([0.225, 0.132394152788506, 0.132394152788506, 0.132394152788506, 0.125939180544827,
              0.125939180544827, 0.125939180544827]),
)


def _tri_integral(f, P0, P1, P2, depth: int = 3) -> float:
    if depth > 0:
        m01, m12, m20 = (P0 + P1) / 2, (P1 + P2) / 2, (P2 + P0) / 2
        return sum(_tri_integral(f, *T, depth=depth - 1)
                   for T in ((P0, m01, m20), (m01, P1, m12), (m20, m12, P2), (m01, m12, m20)))
    pts, w = _DUNAVANT5
    X = P0[None, :] + pts[:, :1] * (P1 - P0)[None, :] + pts[:, 1:] * (P2 - P0)[None, :]
    area = abs((P1 - P0)[0] * (P2 - P0)[1] - (P1 - P0)[1] * (P2 - P0)[0]) / 2
    return float(area * np.dot(w, f(X[:, 0], X[:, 1])))


def voronoi_check(f, grad_sup: float, radius: float, spacing: float = math.sqrt(2)) -> dict:
    """|mean over lattice points - area average over their Voronoi hexagons| against rho ||grad f||."""
    pts = triangular_patch(radius, spacing)
    rho = spacing / math.sqrt(3)
    ang = np.pi / 6 + np.arange(6) * np.pi / 3
    hexv = rho * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    tot, area = 0.0, 0.0
    for x in pts:
        for j in range(6):
            P1, P2 = x + hexv[j], x + hexv[(j + 1) % 6]
            tot += _tri_integral(f, x, P1, P2)
        area += 3 * math.sqrt(3) / 2 * rho * rho
    lattice_mean = float(np.mean(f(pts[:, 0], pts[:, 1])))
    err = abs(lattice_mean - tot / area)
    return {"error": err, "bound": rho * grad_sup, "rho": rho, "points": len(pts)}


# --------------------------------------------------------------------------- energy formula oracle


def twisted_energy_check(shape: tuple[int, int], n: int, q: float, phase) -> dict:
    """<psi|H|psi> for psi = T(phi) psi_0 on a small 2-d grid, directly and via bond probabilities."""
    from .spinchain import HeightGraph, build_sector_basis, xxz_terms

    delta = (q + 1 / q) / 2
    G = HeightGraph.grid(shape, [delta] * len(shape))
    basis = build_sector_basis(G.size, 0.5, N=n)
    H = xxz_terms(G, 0.5, "kink").assemble(basis)
    hts = np.array([sum(G.heights[x]) for x in G.sites], dtype=float)
    ph = np.array([phase(x) for x in G.sites], dtype=float)
    c = basis.configs.astype(float)
    amp = q ** (c @ hts) * np.exp(1j * (c @ ph))
    Z = float(np.sum(np.abs(amp) ** 2))
    direct = float(np.real(np.vdot(amp, H.tocsr() @ amp))) / Z
    pref = 2 / (q + 1 / q) ** 2
    tot = 0.0
    w = np.abs(amp) ** 2
    for x, y, _ in G.bonds:
        i, j = G.index(x), G.index(y)
        if hts[j] < hts[i]:
            i, j = j, i
        one = (c[:, i] + c[:, j]) == 1
        P = float(np.sum(w[one]) / Z)
        tot += pref * P * (1 - math.cos(ph[j] - ph[i]))
    return {"direct": direct, "formula": tot}


# --------------------------------------------------------------------------- certificates


def certificate(formula_id: str, inputs: dict, bound_value, oracle_value=None, passed: bool | None = None) -> dict:
    return {"inputs": inputs, "formula_id": formula_id, "bound_value": bound_value,
            "oracle_value": oracle_value, "pass": passed}


def ensemble_certificates(L: int, A: int, n: int, q: float, kmax: int = 3) -> list[dict]:
    """Activity, equivalence-of-ensembles and exp-moment certificates for one cylinder instance."""
    out = []
    Z = cylinder_partition(L, A, q)
    mu = solve_mu(L, n / A / (L + 1), q)
    g = EnsembleGeometry(L, A, 1, n)
    for k in range(-kmax, kmax + 1):
        if not 0 <= n - k < len(Z):
            continue
        A0 = minimal_A0(g, k, mu, q)
        inp = {"L": L, "A": A, "n": n, "k": k, "q": q, "mu": mu, "A0": A0}
        try:
            b = activity_bounds(g, k, mu, A0, q)
        except ValueError as exc:
            out.append(certificate("stick.activity_ratio", inp, None, float(Z[n] / Z[n - k]), None)
                       | {"skipped": str(exc)})
            continue
        r = float(Z[n] / Z[n - k])
        out.append(certificate("stick.activity_ratio", inp, [b["lower"], b["upper"]], r,
                               bool(b["lower"] <= r <= b["upper"])))
    for A0 in (1, 2):
        if A0 >= A:
            continue
        geo = EnsembleGeometry(L, A, A0, n)
        inp = {"L": L, "A": A, "A0": A0, "n": n, "q": q}
        try:
            eps = eoe_error(geo, q)
        except ValueError as exc:
            out.append(certificate("stick.equivalence_eps", inp, None, None, None) | {"skipped": str(exc)})
            continue
        worst = max(eoe_discrepancy(geo, q, h)["discrepancy"] for h in stick_heights(L))
        out.append(certificate("stick.equivalence_eps", inp, eps * 0.5, worst, bool(worst <= eps * 0.5)))
    ex = exp_moment_exact(L, mu, q)
    out.append(certificate("stick.exp_moment", {"L": L, "mu": mu, "q": q}, exp_moment_bound(L, mu, q), ex,
                           bool(ex <= exp_moment_bound(L, mu, q))))
    return out
