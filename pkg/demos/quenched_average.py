"""Quenched pressure: exact disorder sums, Monte Carlo, and the annealed comparison."""

from quenchlab import Gaussian, Rademacher, annealed_pressure_gaussian, box, nearest_neighbor_family, quenched_exact, quenched_mc
from quenchlab.corpus import random_family

# sign disorder on an open chain is gauge-equivalent to the ferromagnet
rad = nearest_neighbor_family(Rademacher())
print("rademacher chain N=8 exact:", quenched_exact(rad, box(8), 1.0).mean)

# a frustrated family, where the disorder really matters
fam, region = random_family(4, "rademacher", frustrated=True)
exact = quenched_exact(fam, region, 1.0)
mc = quenched_mc(fam, region, 1.0, 10_000, seed=1)
print(f"frustrated family, {len(region)} sites: exact {exact.mean:.6f}  MC {mc.mean:.6f} +- {mc.std_error:.6f}")

# results depend only on the seed, not on the thread count
a = quenched_mc(fam, region, 1.0, 4000, seed=5, threads=1)
b = quenched_mc(fam, region, 1.0, 4000, seed=5, threads=4)
print("threads 1 vs 4 identical:", a == b)

# Jensen: the quenched pressure sits below the annealed one
gauss = nearest_neighbor_family(Gaussian(1.0))
for beta in (0.5, 1.0, 2.0):
    q = quenched_mc(gauss, box(8), beta, 10_000, seed=2)
    ann = annealed_pressure_gaussian(gauss, box(8), beta)
    print(f"beta={beta}: quenched {q.mean:.4f} +- {q.std_error:.4f}   annealed {ann:.4f}")
