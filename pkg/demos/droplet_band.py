"""Droplet band of the spin-1/2 chain with ++ boundary fields at L = 9, Delta = 2."""

from xxz import droplet

for n in (3, 4, 5):
    r = droplet.droplet_band_check(9, n, 2.0, assert_band=False)
    print(f"n={n}: {len(r.band_levels)} band levels around {r.band_center:.6f}, width {r.band_width:.3e}, "
          f"kappa {r.kappa:.3f}, margin to next level {r.margin:.3f}")

fam = droplet.droplet_family(40, 8, 2.0)
print("\nL=40, n=8: max energy deviation", f"{fam.energy_deviation().max():.3e}",
      "bound", f"{droplet.energy_deviation_bound(8, fam.q):.3e}")
