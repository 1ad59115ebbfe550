"""Pressures along growing cubes against the limit bounds.

The sub-box inequality gives the limit as a supremum, so each table reports
the largest computed pressure and the bound, never an extrapolated value.
"""

from quenchlab import Deterministic, Gaussian, SymmetricPareto, bound_value, box_decompose, convergence_run, nearest_neighbor_family, norm

families = {
    "ferro": (nearest_neighbor_family(Deterministic(1.0)), "ferro_exact", [2, 4, 8, 16]),
    "gaussian": (nearest_neighbor_family(Gaussian(1.0)), "quenched_mc", [2, 4, 8]),
    "pareto 1.5": (nearest_neighbor_family(SymmetricPareto(1.5, 1.0)), "quenched_mc", [2, 4, 8]),
}

for name, (fam, kind, Ns) in families.items():
    table = convergence_run(fam, kind, 1.0, Ns, samples=10_000, seed=3)
    print(f"{name}: bound ({table.bound_kind}) = {table.claimed_limit_bound:.4f}")
    print(table.to_csv(), end="")
    print("flags:", table.flags or "none")
    print()

pareto = families["pareto 1.5"][0]
print("pareto norms: l1 =", norm(pareto, "l1").value, " l2sq =", norm(pareto, "l2sq").value)
print("lp bound at p=1.25:", bound_value(pareto, 1.0, "lp", p=1.25))

# N = m N1 + r with 0 <= r < N1; the covered fraction tends to one
for N in (7, 10, 25, 100):
    print(f"N={N:3d}, N1=3, d=2 ->", box_decompose(N, 3, 2))
