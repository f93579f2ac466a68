"""Spin-1/2 kink gap: exact diagonalization against 1 - cos(pi/L)/Delta, and the
reduced-matrix lower bound for higher spin."""

import math

from xxz import gapbound, spectra
from xxz.spinchain import AnisotropyParams

delta = 2.0
print("L   sector  gap            1 - cos(pi/L)/Delta")
for L in (4, 6, 8, 10):
    for N in (1, L // 2):
        g = spectra.finite_gap(L, 0.5, N, delta)
        print(f"{L:<3d} {N:<7d} {g:.12f} {spectra.kink_gap_exact(L, delta):.12f}")

print("\nS    L  N  lower bound   exact gap")
q = AnisotropyParams.from_delta(delta).q
for S in (1.0, 1.5):
    two_s = int(2 * S)
    for L in (3, 4):
        N = two_s * L // 2
        b = gapbound.gap_lower_bound(gapbound.reduced_matrix(L, two_s, N, q), S, delta).bound
        print(f"{S:<4} {L:<2d} {N:<2d} {b:.10f}  {spectra.finite_gap(L, S, N, delta):.10f}")

print("\nIsing limit, 1 - (second eigenvalue):",
      [round(gapbound.gap_lower_bound(gapbound.reduced_matrix(6, ts, 3 * ts, 0.0), ts / 2, math.inf).deficit, 12)
       for ts in (1, 2, 3, 4)])
