"""Monotonicity of the pressure in the coupling strength.

For centered disorder the quenched pressure cannot decrease when a
multiplier grows; for a ferromagnet the same holds for each coupling.
"""

import numpy as np

from quenchlab import Deterministic, Rademacher, box, instantiate, nearest_neighbor_family
from quenchlab import inequalities as lab
from quenchlab.corpus import cl_instance, griffiths_instance
from quenchlab.quenched import FiniteEnsemble

# two sites, one rademacher bond: P(lambda) = ln(4 cosh(beta lambda)) / 2
ens = FiniteEnsemble.product(box(2), [0b11], [Rademacher().support()])
rest, scaled = lab._split_exponents(ens, [0])
for lam in np.linspace(0, 2, 5):
    p, slope = lab._pressure_and_slope(ens, rest, scaled, 1.0, lam)
    print(f"lambda={lam:.1f}  P={p:.6f}  dP/dlambda={slope:.6f}")

# scan the bond multiplier of a rademacher chain
rep = lab.cl_monotonicity_check(nearest_neighbor_family(Rademacher()), box(6), 1.0, 0, np.linspace(0, 2, 21))
print("chain scan passed:", rep.passed, "min analytic slope", rep.details["min_analytic_slope"])

# a random multi-term ensemble
ens, term, beta = cl_instance(11)
rep = lab.cl_monotonicity_check(ens, None, beta, term, np.linspace(0, 2, 21), seed=11)
print("random ensemble:", rep.passed, "analytic vs FD gap", rep.details["analytic_fd_gap"])

# Griffiths on a random ferromagnet
h, term, beta = griffiths_instance(5)
rep = lab.griffiths_check(h, beta, term, np.linspace(0, 2, 11), seed=5)
print("griffiths:", rep.passed, "smallest correlation", rep.details["min_correlation"])

# a negative coupling is outside the hypothesis and is refused
anti = nearest_neighbor_family(Deterministic(-1.0))
try:
    lab.griffiths_check(instantiate(anti, box(4), 0), 1.0, 0, [0.0, 1.0])
except ValueError as exc:
    print("refused:", exc)
