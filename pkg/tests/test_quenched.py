import math

import numpy as np
import pytest

from conftest import brute_log_partition, ferro_chain_pressure
from quenchlab.corpus import random_family
from quenchlab.disorder import Deterministic, Discrete, Gaussian, Rademacher, SymmetricPareto
from quenchlab.errors import CapacityError, ConfigError
from quenchlab.lattice import CouplingFamily, Orbit, box, nearest_neighbor_family, place
from quenchlab.quenched import (
    FiniteEnsemble,
    annealed_pressure_gaussian,
    quenched_exact,
    quenched_mc,
    replica_pressures,
)

LN2 = math.log(2.0)


class TestExact:
    def test_rademacher_chain_gauge(self):
        # on an open chain every sign pattern is gauge-equivalent to the ferromagnet
        for N in (2, 5, 8):
            est = quenched_exact(nearest_neighbor_family(Rademacher()), box(N), 1.0)
            assert est.exact and est.std_error == 0.0
            assert est.mean == pytest.approx(ferro_chain_pressure(N, 1.0), rel=1e-13)

    def test_matches_brute_average(self):
        fam = CouplingFamily(1, (
            Orbit(((0,), (1,)), Discrete((0.5, 2.0), (0.4, 0.6))),
            Orbit(((0,), (1,), (2,)), Rademacher(), 0.7),
        ))
        region = box(4)
        ens = FiniteEnsemble.from_placement(place(fam, region))
        ref = math.fsum(p * brute_log_partition(ens.hamiltonian(k), 0.9) for k, p in enumerate(ens.probs)) / 4
        assert quenched_exact(fam, region, 0.9).mean == pytest.approx(ref, rel=1e-12)

    def test_continuous_law_refused(self):
        with pytest.raises(ConfigError):
            quenched_exact(nearest_neighbor_family(Gaussian(1.0)), box(4), 1.0)

    def test_outcome_cap(self):
        with pytest.raises(CapacityError):
            quenched_exact(nearest_neighbor_family(Rademacher(), 2), box(4, 2), 1.0)

    def test_ensemble_validation(self):
        with pytest.raises(ValueError):
            FiniteEnsemble(box(2), (0b11,), np.ones(1), np.ones((2, 1)), np.array([0.5, 0.6]))


class TestMonteCarlo:
    def test_matches_exact_on_random_families(self):
        worst = -math.inf
        for seed in range(50):
            fam, region = random_family(seed, frustrated=True)
            beta = (0.5, 1.0, 2.0)[seed % 3]
            ex = quenched_exact(fam, region, beta).mean
            mc = quenched_mc(fam, region, beta, 2000, seed)
            worst = max(worst, abs(mc.mean - ex) - 5 * mc.std_error - 1e-12)
        assert worst <= 0.0

    def test_thread_count_does_not_matter(self):
        fam = nearest_neighbor_family(Gaussian(1.0))
        a = quenched_mc(fam, box(6), 1.0, 1000, 3, threads=1)
        b = quenched_mc(fam, box(6), 1.0, 1000, 3, threads=4)
        assert a.to_dict() == b.to_dict()

    def test_seed_changes_estimate(self):
        fam = nearest_neighbor_family(Gaussian(1.0))
        assert quenched_mc(fam, box(5), 1.0, 300, 1).mean != quenched_mc(fam, box(5), 1.0, 300, 2).mean

    def test_replicas_are_prefix_stable(self):
        pl = place(nearest_neighbor_family(Gaussian(1.0)), box(5))
        a = replica_pressures(pl, 1.0, 300, 9)
        b = replica_pressures(pl, 1.0, 1000, 9)
        np.testing.assert_array_equal(a, b[:300])

    def test_pareto_reports_robust_summaries(self):
        est = quenched_mc(nearest_neighbor_family(SymmetricPareto(1.5)), box(5), 1.0, 500, 0)
        assert {"median", "iqr"} <= set(est.to_dict())
        assert est.extra["iqr"] >= 0

    def test_meanless_pareto_refused(self):
        with pytest.raises(ConfigError):
            quenched_mc(nearest_neighbor_family(SymmetricPareto(0.9)), box(4), 1.0, 100, 0)

    def test_gaussian_chain_below_bound(self):
        for beta in (0.5, 1.0):
            est = quenched_mc(nearest_neighbor_family(Gaussian(1.0)), box(8), beta, 10_000, 11)
            assert est.mean + 5 * est.std_error <= LN2 + 1.5 * beta**2

    def test_lower_sanity_bound(self):
        # not a derived invariant; an empirical check that centered disorder keeps p above ln 2
        for law in (Rademacher(), Gaussian(1.0)):
            for beta in (0.5, 2.0):
                est = quenched_mc(nearest_neighbor_family(law, 2), box(3, 2), beta, 2000, 0)
                assert est.mean + 5 * est.std_error >= LN2

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            quenched_mc(nearest_neighbor_family(Gaussian(1.0)), box(4), 1.0, 1, 0)


class TestAnnealed:
    def test_pure_gaussian_closed_form(self):
        # every bond contributes beta^2 / 2 to ln E[Z]
        val = annealed_pressure_gaussian(nearest_neighbor_family(Gaussian(1.0)), box(4), 1.0)
        assert val == pytest.approx(LN2 + 3 * 0.5 / 4, rel=1e-14)

    def test_single_bond(self):
        val = annealed_pressure_gaussian(nearest_neighbor_family(Gaussian(1.0)), box(2), 1.0)
        assert val == pytest.approx(LN2 + 0.25, rel=1e-14)

    def test_mixed_family(self):
        fam = CouplingFamily(1, (
            Orbit(((0,), (1,)), Gaussian(0.5)),
            Orbit(((0,), (2,)), Deterministic(1.0)),
        ))
        # next-nearest bonds split five sites into chains {1,3,5} and {2,4}
        val = annealed_pressure_gaussian(fam, box(5), 1.0)
        assert val == pytest.approx((2 * LN2 + 3 * math.log(2 * math.cosh(1.0)) + 4 * 0.125) / 5, rel=1e-13)

    def test_jensen_on_random_gaussian_families(self):
        worst = -math.inf
        for seed in range(20):
            fam, region = random_family(seed, law="gaussian")
            mc = quenched_mc(fam, region, 1.0, 2000, seed)
            ann = annealed_pressure_gaussian(fam, region, 1.0)
            worst = max(worst, mc.mean - ann - 5 * mc.std_error)
        assert worst <= 0.0

    def test_rejects_other_laws(self):
        with pytest.raises(ConfigError):
            annealed_pressure_gaussian(nearest_neighbor_family(Rademacher()), box(4), 1.0)
