"""Truncating heavy-tailed couplings.

Pareto couplings with alpha = 1.5 have a mean but no variance.  Splitting
each coupling at R into a bounded centered part and a remainder, the
pressure changes by at most (2 beta / |L|) sum E|J2|, which vanishes as R grows.
"""

import numpy as np

from quenchlab import SymmetricPareto, box, nearest_neighbor_family, quenched_mc, stream, truncate
from quenchlab.inequalities import truncation_error_check

law = SymmetricPareto(1.5, 1.0)
x = law.sample(stream(0, 0), 100_000)
print("E|J| closed form", law.moment(1.0), " sampled", np.abs(x).mean())

pair = truncate(law, 10.0)
j1, j2, _ = pair.sample(stream(1, 0), 100_000)
print("bounded part: max |J1|", np.abs(j1).max(), " mean", j1.mean())
print("tail: E|J2| closed form", pair.tail_abs_mean(), " sampled", np.abs(j2).mean())

fam = nearest_neighbor_family(law)
est = quenched_mc(fam, box(6), 1.0, 10_000, seed=4)
print(f"quenched pressure {est.mean:.4f} +- {est.std_error:.4f}, median {est.extra['median']:.4f}, iqr {est.extra['iqr']:.4f}")

rep = truncation_error_check(fam, box(6), 1.0, [1, 3, 10, 30, 100], 10_000, seed=2024)
print(f"{'R':>6} {'difference':>11} {'std_error':>10} {'bound':>8}")
for row in rep.details["rows"]:
    print(f"{row['R']:6.0f} {row['difference']:11.4f} {row['std_error']:10.4f} {row['bound']:8.4f}")
print("passed:", rep.passed)
