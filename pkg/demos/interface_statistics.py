"""Stick statistics, activity sandwiches and the spin-wave bound for the 3-d interface."""

import numpy as np

from xxz import interface as it

q = 0.5
print("mu     F_inf       sigma2")
for mu in np.linspace(0, 1, 5):
    print(f"{mu:<6.2f} {it.F_infinity(mu, q):+.8f} {it.sigma2_infinity(mu, q):.8f}")

L, A, n = 2, 8, 12
Z = it.cylinder_partition(L, A, q)
mu = it.solve_mu(L, n / A / (L + 1), q)
g = it.EnsembleGeometry(L, A, 1, n)
print(f"\ncylinder L={L}, A={A}, n={n}, mu={mu:.6f}")
for k in (-2, -1, 1, 2):
    b = it.activity_bounds(g, k, mu, it.minimal_A0(g, k, mu, q), q)
    print(f"k={k:+d}: {b['lower']:.4e} <= {Z[n] / Z[n - k]:.4e} <= {b['upper']:.4e}")

an = it.bessel_ansatz()
print(f"\nBessel ansatz: norm2 {an.norm2:.6f}, grad2 {an.grad2:.5f}; "
      f"the 100 q^(2(1-delta)) / ((1-q^2) R^2) form holds from R = {it.headline_threshold(an):.1f}")
for R in (100, 400):
    r = it.spinwave_gap_bound(R, 2.0, 0.25)
    print(f"R={R}: gamma1 <= {r['gamma1_bound']:.3e}, headline {r['headline']:.3e}")
