"""Oracle suite behind `xxz verify`: each check compares a closed form or bound with an independent route."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import droplet, gapbound, interface, perturb, spectra
from .droplet import ANTI, KINK, _Factor
from .groundstates import kink_norm2, kink_state
from .spinchain import AnisotropyParams, build_sector_basis

Check = tuple[str, bool, str]


def check_kink_gap(Ls=(4, 6, 8), deltas=(1.25, 2.0, 5.0)) -> Check:
    worst = 0.0
    for L in Ls:
        for d in deltas:
            exact = spectra.kink_gap_exact(L, d)
            for N in range(1, L):
                worst = max(worst, abs(spectra.finite_gap(L, 0.5, N, d) - exact))
    return "kink_gap_closed_form", worst < 1e-9, f"max error {worst:.2e}"


def check_one_magnon(Ls=range(2, 11), deltas=(1.25, 2.0, 5.0)) -> Check:
    worst = 0.0
    for L in Ls:
        for d in deltas:
            r = spectra.lowest_levels(L, 0.5, 1, d, "kink", L)
            worst = max(worst, float(np.abs(np.sort(r.eigenvalues) - spectra.one_magnon_spectrum(L, d)).max()))
    return "one_magnon_spectrum", worst < 1e-10, f"max error {worst:.2e}"


def _ip(L, f1, f2, q):
    N = sum(f.n for f in f1)
    basis = build_sector_basis(L, 0.5, N=N)
    return float(droplet.product_vector(L, f1, q, basis) @ droplet.product_vector(L, f2, q, basis))


def check_overlap_formulas(max_len: int = 8, qs=(0.3, 0.6)) -> Check:
    worst = 0.0
    count = 0
    for q in qs:
        for L in range(1, max_len + 1):
            for n in range(L + 1):
                v = kink_state(1, L, n, q).materialize(build_sector_basis(L, 0.5, N=n), normalize="raw")
                worst = max(worst, abs(v @ v - kink_norm2(L, n, q)) / (v @ v))
                count += 1
        for x in range(1, 4):
            for y in range(1, 4):
                for r in range(0, max_len - x - y + 1):
                    for m in range(x + 1):
                        for n in range(y + 1):
                            for k in range(r + 1):
                                L = x + y + r
                                a = [_Factor(KINK, 1, x, m), _Factor(ANTI, x + 1, L, n + k)]
                                b = [_Factor(KINK, 1, x + r, m + k), _Factor(ANTI, x + r + 1, L, n)]
                                ref = _ip(L, a, b, q)
                                val = droplet.prelim_ip(x, y, r, m, n, k, q)
                                worst = max(worst, abs(val - ref) / max(abs(ref), 1e-300))
                                count += 1
    return "overlap_closed_forms", worst < 1e-11, f"{count} instances, max rel error {worst:.2e}"


def check_reduced_matrix(qs=(0.3, 0.6)) -> Check:
    worst = 0.0
    for q in qs:
        for two_s in (1, 2, 3):
            for L in range(1, 5):
                for N in range(0, min(6, two_s * L) + 1):
                    rm = gapbound.reduced_matrix(L, two_s, N, q)
                    _, M = gapbound.ladder_oracle_matrix(L, two_s, N, q)
                    worst = max(worst, float(np.abs(rm.entries - M).max()))
    return "reduced_matrix_oracle", worst < 1e-10, f"max error {worst:.2e}"


def check_lower_bound_sandwich() -> Check:
    bad = 0
    count = 0
    for S in (0.5, 1.0):
        two_s = int(2 * S)
        for L in (3, 4, 5):
            for d in (1.5, 3.0):
                q = AnisotropyParams.from_delta(d).q
                for N in range(1, two_s * L):
                    b = gapbound.gap_lower_bound(gapbound.reduced_matrix(L, two_s, N, q), S, d).bound
                    g = spectra.finite_gap(L, S, N, d, "kink")
                    count += 1
                    bad += b > g + 1e-9
    return "lower_bound_below_gap", bad == 0, f"{count} instances, {bad} violations"


def check_e2_curvature() -> Check:
    c = perturb.curvature_check(1.0, 0, 10)
    ok = c["diff"] < 0.03 and perturb.e2_coefficient(1.0, 0) == Fraction(-1, 3)
    return "e2_against_exact_diagonalization", ok, f"|d2 - 2 E2| = {c['diff']:.2e}"


def check_droplet_engine() -> Check:
    worst = 0.0
    for L, n, d in ((6, 2, 2.0), (7, 3, 1.5), (8, 4, 3.0)):
        fam = droplet.droplet_family(L, n, d, check=False)
        G, H, H2 = droplet.droplet_bruteforce(L, n, d)
        s = 1 / np.sqrt(np.diag(G))
        for A, B in ((fam.gram, G), (fam.h_gram, H), (fam.h2_gram, H2)):
            worst = max(worst, float(np.abs(A - B * s[:, None] * s[None, :]).max()))
    r = droplet.droplet_band_check(9, 3, 2.0, assert_band=False)
    ok = worst < 1e-12 and r.kappa < 10 and r.margin > 0.3
    return "droplet_engine_and_band", ok, f"engine error {worst:.1e}, kappa {r.kappa:.3f}, margin {r.margin:.3f}"


def check_stick_functions() -> Check:
    ok = True
    for q in (0.3, 0.6):
        lo, hi = interface.sigma2_bounds(q)
        for mu in np.linspace(-1, 1, 200):
            F = interface.F_infinity(mu, q)
            s2 = interface.sigma2_infinity(mu, q)
            ok &= abs(interface.F_infinity(mu + 1, q) - F) < 1e-12
            ok &= abs(interface.F_infinity(1 - mu, q) + F) < 1e-12
            ok &= abs(F) <= 1 and lo <= s2 <= hi
        for z in (0.0, 0.5, 1.0, -0.5):
            ok &= abs(interface.F_infinity(z, q)) < 1e-12
    return "stick_F_sigma_properties", bool(ok), "200-point grid, q in {0.3, 0.6}"


def check_activity_and_hayman() -> Check:
    tot = bad = 0
    q = 0.5
    for L in range(1, 5):
        for A in range(2, 13, 2):
            Z = interface.cylinder_partition(L, A, q)
            for n in range(1, A * (L + 1)):
                mu = interface.solve_mu(L, n / A / (L + 1), q)
                g = interface.EnsembleGeometry(L, A, 1, n)
                for k in range(-3, 4):
                    if not 0 <= n - k < len(Z):
                        continue
                    try:
                        b = interface.activity_bounds(g, k, mu, interface.minimal_A0(g, k, mu, q), q)
                    except ValueError:
                        continue
                    r = Z[n] / Z[n - k]
                    tot += 1
                    bad += not b["lower"] <= r <= b["upper"]
    for L in (2, 3):
        for n in (6, 8):
            Z = interface.strip_partition(L, n, q)
            for M, v in Z.items():
                if abs(M / n) <= 1 and abs(M / n) < L / 2:
                    lo, hi = interface.hayman_partition(L, n, M / n, q).bounds()
                    tot += 1
                    bad += not lo <= v <= hi
    return "activity_and_saddle_sandwiches", bad == 0, f"{tot} instances, {bad} outside"


def check_equivalence() -> Check:
    worst = 0.0
    for q in (0.85, 0.9):
        for L in (1, 2, 3):
            for A in (10, 12):
                for n in range(1, A * (L + 1), 3):
                    g = interface.EnsembleGeometry(L, A, 1, n)
                    eps = interface.eoe_error(g, q)
                    for h in interface.stick_heights(L):
                        d = interface.eoe_discrepancy(g, q, h)
                        worst = max(worst, d["discrepancy"] / (eps * d["norm_gs"]))
    e = interface.eoe2_error(3, 10, 2, 0.0, 0.5)
    d2 = max(interface.eoe2_discrepancy(3, 10, 2, 0.0, 0.5, h)["discrepancy"] for h in interface.column_heights(3))
    ok = worst <= 1 and d2 <= e["total"] * 0.5
    return "ensemble_equivalence", ok, f"3-d worst ratio {worst:.2e}; 2-d discrepancy {d2:.2e} vs {e['total']:.3g}/2"


def check_spinwave_components() -> Check:
    an = interface.bessel_ansatz()
    ok = abs(an.norm2 - 0.2695) < 1e-3 and abs(an.grad2 - 1.559) < 1e-2
    ok &= abs(an.norm2 - interface.special.j1(interface.BESSEL_Z0) ** 2) < 1e-10
    te = interface.twisted_energy_check((3, 3), 4, 0.5, lambda x: 0.4 * x[0] - 0.3 * x[1] ** 2)
    ok &= abs(te["direct"] - te["formula"]) < 1e-12
    pq = interface.bond_probability_sum(8, 0.4)
    ok &= pq <= interface.bond_probability_bound(0.4)
    for d in (1.2, 2.0, 5.0):
        for mu in (0.0, 0.25, 0.5):
            c = interface.continuum_energy(d, mu, 40, 10.0, 1.0)
            ok &= c["g_lower"] - 1e-12 <= c["g"] <= 1 and c["order1_residual"] < 1e-10
    v = interface.voronoi_check(lambda x, y: np.exp(0.2 * x + 0.1 * y), math.hypot(0.2, 0.1) * math.exp(1.2), 4.0)
    ok &= v["error"] <= v["bound"]
    return "spinwave_components", bool(ok), f"norm2 {an.norm2:.5f}, grad2 {an.grad2:.4f}, Pq sum {pq:.4f}"


SMALL = (check_kink_gap, check_one_magnon, check_overlap_formulas, check_reduced_matrix,
         check_lower_bound_sandwich, check_e2_curvature, check_droplet_engine, check_stick_functions,
         check_activity_and_hayman, check_equivalence, check_spinwave_components)


def run_suite(name: str = "small", seed: int = 0) -> list[Check]:
    if name not in ("small", "full"):
        raise ValueError(f"unknown suite {name!r}")
    checks = list(SMALL)
    if name == "full":
        checks[0] = lambda: check_kink_gap(Ls=(4, 6, 8, 10))
        checks[1] = lambda: check_one_magnon(Ls=range(2, 13))
    out = []
    for c in checks:
        try:
            out.append(c())
        except Exception as exc:  # report and keep going
            out.append((getattr(c, "__name__", "check"), False, f"raised {type(exc).__name__}: {exc}"))
    return out
