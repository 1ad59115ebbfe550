"""Seeded instance generators and the bundled verification suite.

Every generator is a pure function of its integer seed, so a failing instance
can be replayed from the seed recorded in its report.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import inequalities as lab
from .disorder import Deterministic, Discrete, Gaussian, Rademacher, SymmetricPareto, stream, truncate
from .lattice import CouplingFamily, Hamiltonian, InteractionTerm, Orbit, box, nearest_neighbor_family, place
from .quenched import FiniteEnsemble

BETAS = (0.2, 1.0, 5.0)
CHECK_NAMES = (
    "scalar",
    "ratio",
    "telescoping",
    "corollary",
    "cl",
    "griffiths",
    "superadditivity",
    "truncation",
)

FERRO_CHAIN = nearest_neighbor_family(Deterministic(1.0))
GAUSSIAN_CHAIN = nearest_neighbor_family(Gaussian(1.0))
PARETO_CHAIN = nearest_neighbor_family(SymmetricPareto(1.5, 1.0))
RADEMACHER_CHAIN = nearest_neighbor_family(Rademacher())


def _random_subsets(rng, n_sites: int, n_terms: int, max_size: int = 4) -> list[int]:
    out = []
    for _ in range(n_terms):
        k = int(rng.integers(1, min(max_size, n_sites) + 1))
        sites = rng.choice(n_sites, size=k, replace=False)
        out.append(int(sum(1 << int(i) for i in sites)))
    return out


def random_hamiltonian(seed: int, max_sites: int = 12, max_terms: int = 14, couplings: str = "gaussian") -> Hamiltonian:
    """Random multi-spin Hamiltonian on a chain of 2..max_sites sites."""
    rng = stream(seed, 0)
    n = int(rng.integers(2, max_sites + 1))
    T = int(rng.integers(1, max_terms + 1))
    masks = _random_subsets(rng, n, T)
    if couplings == "gaussian":
        J = rng.normal(size=T)
    elif couplings == "nonnegative":
        J = rng.uniform(0.0, 1.5, size=T)
    else:
        raise ValueError(couplings)
    return Hamiltonian(box(n), tuple(InteractionTerm(m, float(j)) for m, j in zip(masks, J)))


def ratio_corpus(count: int = 1000):
    """``(seed, hamiltonian, beta)`` triples with gaussian couplings."""
    return [(s, random_hamiltonian(s), BETAS[s % 3]) for s in range(count)]


def _two_point(rng):
    a, b = rng.normal(size=2)
    q = float(rng.uniform(0.1, 0.9))
    return np.array([a, b]), np.array([q, 1 - q])


def independent_ensemble(seed: int, max_sites: int = 8, max_terms: int = 10) -> FiniteEnsemble:
    """Product law of two-point couplings, not necessarily centered."""
    rng = stream(seed, 1)
    n = int(rng.integers(2, max_sites + 1))
    T = int(rng.integers(1, max_terms + 1))
    masks = _random_subsets(rng, n, T)
    laws = []
    for _ in range(T):
        if rng.random() < 0.5:
            c = float(rng.uniform(0.2, 2.0))
            laws.append((np.array([-c, c]), np.array([0.5, 0.5])))
        else:
            laws.append(_two_point(rng))
    return FiniteEnsemble.product(box(n), masks, laws, rng.uniform(0.0, 1.5, size=T))


def dependent_ensemble(seed: int, max_sites: int = 8) -> FiniteEnsemble:
    """Dependent couplings over at most 10 terms.

    Even seeds: truncation pairs, the bounded parts of up to five discrete
    couplings followed by their remainders on the same subsets.  Odd seeds:
    terms sharing a few random signs.
    """
    rng = stream(seed, 2)
    n = int(rng.integers(2, max_sites + 1))
    region = box(n)
    if seed % 2 == 0:
        T0 = int(rng.integers(1, 6))
        masks = _random_subsets(rng, n, T0)
        small, large = sorted(rng.uniform(0.1, 3.0, size=2))
        law = Discrete((float(small), float(large)), (0.5, 0.5))
        R = float(rng.uniform(small, large))
        base = FiniteEnsemble.product(region, masks, [law.support()] * T0)
        pairs = [truncate(law, R) for _ in range(T0)]
        j1 = np.column_stack([p.split(base.couplings[:, t])[0] for t, p in enumerate(pairs)])
        j2 = base.couplings - j1
        return FiniteEnsemble(region, tuple(masks) * 2, np.ones(2 * T0), np.hstack([j1, j2]), base.probs, False)
    T = int(rng.integers(2, 11))
    G = int(rng.integers(1, min(T, 6) + 1))
    masks = _random_subsets(rng, n, T)
    group = rng.integers(0, G, size=T)
    scale = rng.normal(size=T)
    signs = FiniteEnsemble.product(region, [1] * G, [(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))] * G)
    C = signs.couplings[:, group] * scale
    return FiniteEnsemble(region, tuple(masks), np.ones(T), C, signs.probs, False)


def cl_instance(seed: int, max_sites: int = 8, max_terms: int = 10):
    """Centered finitely supported ensemble plus the term whose multiplier is scanned."""
    rng = stream(seed, 3)
    n = int(rng.integers(2, max_sites + 1))
    T = int(rng.integers(1, max_terms + 1))
    masks = _random_subsets(rng, n, T)
    laws = []
    for _ in range(T):
        if rng.random() < 0.7:
            laws.append(Rademacher().support())
        else:
            a, b = sorted(rng.uniform(0.2, 2.0, size=2))
            laws.append(Discrete((float(a), float(b)), (0.5, 0.5)).support())
    ens = FiniteEnsemble.product(box(n), masks, laws, rng.uniform(0.2, 1.5, size=T))
    return ens, int(rng.integers(0, T)), (0.5, 1.0, 2.0)[seed % 3]


def griffiths_instance(seed: int):
    rng = stream(seed, 4)
    h = random_hamiltonian(seed, max_sites=10, max_terms=12, couplings="nonnegative")
    return h, int(rng.integers(0, len(h))), (0.5, 1.0, 2.0)[seed % 3]


def random_family(seed: int, law: str = "rademacher", max_terms: int = 10, max_sites: int = 10,
                  frustrated: bool = False):
    """Random finite-range family with a box it fits into, ``(family, region)``.

    ``law`` is ``rademacher``, ``finite`` (rademacher or a two-magnitude
    discrete law per orbit) or ``gaussian``.
    """
    if law not in ("rademacher", "finite", "gaussian"):
        raise ValueError(f"unknown law {law!r}")
    rng = stream(seed, 5)
    while True:
        d = int(rng.integers(1, 3))
        n_orb = int(rng.integers(1, 4))
        orbits = []
        seen = set()
        for _ in range(n_orb):
            k = int(rng.integers(1, 4))
            pts = {(0,) * d}
            while len(pts) < k:
                pts.add(tuple(int(c) for c in rng.integers(-1, 2, size=d)))
            o = tuple(sorted(pts))
            if law == "rademacher":
                dist = Rademacher()
            elif law == "finite":
                dist = Rademacher() if rng.random() < 0.7 else Discrete((0.5, 1.5), (0.5, 0.5))
            else:
                dist = Gaussian(float(rng.uniform(0.5, 1.5)))
            orb = Orbit(o, dist, float(rng.uniform(0.3, 1.5)))
            if orb.normalized() in seen:
                continue
            seen.add(orb.normalized())
            orbits.append(orb)
        fam = CouplingFamily(d, tuple(orbits))
        side = int(rng.integers(2, 9)) if d == 1 else int(rng.integers(2, 4))
        region = box(side, d)
        if len(region) > max_sites:
            continue
        pl = place(fam, region)
        if not 1 <= len(pl) <= max_terms:
            continue
        if frustrated and law != "gaussian":
            lz = FiniteEnsemble.from_placement(pl).log_partitions(1.0)
            if np.ptp(lz) < 1e-6:
                continue
        return fam, region


# ----------------------------------------------------------------------------
# suite runners


def run_scalar():
    return lab.scalar_toolbox_check(np.linspace(-50.0, 50.0, 100_001))


def run_ratio(count: int = 1000):
    return lab.merge_reports("ratio", (lab.ratio_identity_check(h, b, seed=s) for s, h, b in ratio_corpus(count)))


def run_telescoping(count: int = 1000):
    return lab.merge_reports(
        "telescoping", (lab.telescoping_bound_check(h, b, None, seed=s) for s, h, b in ratio_corpus(count))
    )


def run_corollary(count: int = 100):
    reps = []
    for s in range(count):
        h = random_hamiltonian(s, max_sites=8, max_terms=10)
        reps.append(lab.corollary_bound_check(h, BETAS[s % 3], None, "nonrandom", seed=s))
        reps.append(lab.corollary_bound_check(independent_ensemble(s), BETAS[s % 3], None, "independent", seed=s))
        reps.append(lab.corollary_bound_check(dependent_ensemble(s), BETAS[s % 3], None, "dependent", seed=s))
    return lab.merge_reports("corollary", reps)


LAMBDA_GRID = np.linspace(0.0, 2.0, 21)


def run_cl(count: int = 100):
    reps = []
    for s in range(count):
        ens, t, beta = cl_instance(s)
        reps.append(lab.cl_monotonicity_check(ens, None, beta, t, LAMBDA_GRID, seed=s))
    return lab.merge_reports("cl", reps)


def run_griffiths(count: int = 200):
    grid = np.linspace(0.0, 2.0, 11)
    reps = []
    for s in range(count):
        h, t, beta = griffiths_instance(s)
        reps.append(lab.griffiths_check(h, beta, t, grid, seed=s))
    return lab.merge_reports("griffiths", reps)


def run_superadditivity():
    reps = []
    for beta in (0.5, 1.0):
        reps.append(lab.superadditivity_sweep(FERRO_CHAIN, 16, beta))
        reps.append(lab.superadditivity_sweep(RADEMACHER_CHAIN, 8, beta))
        reps.append(lab.superadditivity_sweep(nearest_neighbor_family(Deterministic(1.0), 2), 4, beta))
    return lab.merge_reports("superadditivity", reps)


def run_truncation(samples: int = 10_000, seed: int = 2024, threads: int = 1):
    return lab.truncation_error_check(PARETO_CHAIN, box(6), 1.0, (1, 3, 10, 30, 100), samples, seed, threads)


RUNNERS: dict[str, Callable[[], lab.CheckReport]] = {
    "scalar": run_scalar,
    "ratio": run_ratio,
    "telescoping": run_telescoping,
    "corollary": run_corollary,
    "cl": run_cl,
    "griffiths": run_griffiths,
    "superadditivity": run_superadditivity,
    "truncation": run_truncation,
}


def default_suite(checks=None):
    """Run the named checks (all by default) on the bundled corpus."""
    names = CHECK_NAMES if checks is None else checks
    unknown = set(names) - set(RUNNERS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    return [RUNNERS[n]() for n in names]
