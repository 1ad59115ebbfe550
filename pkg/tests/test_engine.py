import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_expectation, brute_log_partition, ferro_chain_pressure
from quenchlab.corpus import random_hamiltonian
from quenchlab.disorder import Deterministic
from quenchlab.engine import (
    batch_log_partition,
    batch_prefix_log_partition,
    gibbs_expectation,
    gibbs_split,
    log_partition,
    partition_ratio,
    prefix_sweep,
)
from quenchlab.errors import CapacityError
from quenchlab.lattice import Hamiltonian, InteractionTerm, Region, box, instantiate, nearest_neighbor_family, prefix

LN2 = math.log(2.0)


def single(mask, j, n):
    return Hamiltonian(box(n), (InteractionTerm(mask, j),))


class TestClosedForms:
    def test_free_spins(self):
        for beta in (0.0, 1.0, 7.0):
            assert log_partition(Hamiltonian(box(3), ()), beta).pressure_density == pytest.approx(LN2, rel=1e-15)

    def test_single_site_field(self):
        s = log_partition(single(0b1, 1.0, 1), 1.0)
        assert s.pressure_density == pytest.approx(math.log(2 * math.cosh(1.0)), rel=1e-14)
        assert s.pressure_density == pytest.approx(1.1269280, abs=1e-7)

    def test_two_site_bond(self):
        s = log_partition(single(0b11, 1.0, 2), 1.0)
        assert s.pressure_density == pytest.approx(math.log(4 * math.cosh(1.0)) / 2, rel=1e-14)

    @pytest.mark.parametrize("N", [2, 4, 8, 13, 20])
    @pytest.mark.parametrize("beta", [0.3, 1.0, 4.0])
    def test_ferro_chain(self, N, beta):
        h = instantiate(nearest_neighbor_family(Deterministic(1.0)), box(N), 0)
        assert log_partition(h, beta).pressure_density == pytest.approx(ferro_chain_pressure(N, beta), rel=1e-12)

    def test_field_expectation(self):
        assert gibbs_expectation(single(0b1, 1.0, 1), 1.0, 0b1) == pytest.approx(math.tanh(1.0), rel=1e-14)

    def test_free_expectation_is_zero(self):
        assert gibbs_expectation(Hamiltonian(box(4), ()), 2.0, 0b0110) == 0.0

    def test_infinite_temperature_expectation(self):
        h = random_hamiltonian(3)
        assert gibbs_expectation(h, 0.0, 0b11) == 0.0

    def test_beta_zero_is_ln2(self):
        for seed in range(20):
            assert log_partition(random_hamiltonian(seed), 0.0).pressure_density == LN2


class TestRatio:
    def test_zero_coupling(self):
        h = random_hamiltonian(1)
        assert partition_ratio(h, InteractionTerm(0b1, 0.0), 1.3) == 1.0

    def test_free_prefix(self):
        r = partition_ratio(Hamiltonian(box(3), ()), InteractionTerm(0b101, 1.0), 1.0)
        assert r == pytest.approx(math.cosh(1.0), rel=1e-15)

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_quotient(self, seed):
        rng = np.random.default_rng(seed)
        terms = tuple(InteractionTerm(int(rng.integers(1, 8)), float(rng.normal())) for _ in range(4))
        h = Hamiltonian(box(3), terms)
        beta = 1.7
        q = math.exp(brute_log_partition(h, beta) - brute_log_partition(prefix(h, 3), beta))
        assert partition_ratio(prefix(h, 3), h.terms[3], beta) == pytest.approx(q, rel=1e-12)


class TestOracles:
    @pytest.mark.parametrize("seed", range(30))
    def test_gray_matches_brute_force(self, seed):
        h = random_hamiltonian(seed, max_sites=9, max_terms=10)
        beta = (0.2, 1.0, 5.0)[seed % 3]
        assert log_partition(h, beta).log_partition == pytest.approx(brute_log_partition(h, beta), rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_expectation_matches_brute_force(self, seed):
        h = random_hamiltonian(seed, max_sites=8, max_terms=8)
        mask = h.terms[0].subset
        assert gibbs_expectation(h, 0.8, mask) == pytest.approx(brute_expectation(h, 0.8, mask), abs=1e-12)

    def test_gray_matches_naive_on_thousand_instances(self):
        worst = 0.0
        for seed in range(1000):
            h = random_hamiltonian(10_000 + seed, max_sites=16, max_terms=20)
            beta = (0.2, 1.0, 5.0)[seed % 3]
            a = log_partition(h, beta, "gray").log_partition
            b = log_partition(h, beta, "naive").log_partition
            worst = max(worst, abs(a - b) / abs(b))
        assert worst <= 1e-12

    def test_gray_split_matches_naive(self):
        h = random_hamiltonian(77, max_sites=10)
        for mask in (0b1, 0b110, h.terms[-1].subset):
            g = gibbs_split(h, 2.0, mask, "gray")
            n = gibbs_split(h, 2.0, mask, "naive")
            np.testing.assert_allclose(g, n, rtol=1e-12, atol=1e-300)


class TestBounds:
    @given(st.integers(0, 10_000), st.floats(0.0, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_log_partition_between_energy_extremes(self, seed, beta):
        h = random_hamiltonian(seed, max_sites=8)
        n = len(h.region)
        energies = [-h.energy([1 - 2 * (c >> i & 1) for i in range(n)]) for c in range(1 << n)]
        lz = log_partition(h, beta).log_partition
        slack = 1e-12 * (1 + abs(lz))
        assert n * LN2 + beta * min(energies) - slack <= lz <= n * LN2 + beta * max(energies) + slack

    @given(st.integers(0, 10_000), st.floats(0.0, 20.0))
    @settings(max_examples=60, deadline=None)
    def test_expectation_in_unit_interval(self, seed, beta):
        h = random_hamiltonian(seed, max_sites=8)
        v = gibbs_expectation(h, beta, h.terms[0].subset)
        assert -1.0 <= v <= 1.0

    def test_odd_observable_vanishes_under_even_terms(self):
        h = Hamiltonian(box(4), (InteractionTerm(0b0011, 1.2), InteractionTerm(0b1111, -0.7)))
        assert gibbs_expectation(h, 3.0, 0b0100) == 0.0


class TestCapacity:
    def test_too_many_sites(self):
        with pytest.raises(CapacityError):
            log_partition(Hamiltonian(box(33), ()), 1.0)

    def test_non_finite_coupling(self):
        with pytest.raises(ValueError):
            log_partition(single(0b1, math.inf, 1), 1.0)

    def test_negative_beta(self):
        with pytest.raises(ValueError):
            log_partition(single(0b1, 1.0, 1), -1.0)

    def test_no_overflow_at_capacity_scale(self):
        h = instantiate(nearest_neighbor_family(Deterministic(1.0)), box(30), 0)
        lz = log_partition(h, 50.0).log_partition
        assert math.isfinite(lz)
        assert lz == pytest.approx(30 * ferro_chain_pressure(30, 50.0), rel=1e-13)


class TestBatch:
    def test_rows_match_single_calls(self):
        h = random_hamiltonian(5, max_sites=10)
        rng = np.random.default_rng(0)
        C = rng.normal(size=(7, len(h)))
        lz = batch_log_partition(h.masks, len(h.region), C, 1.3)
        for k in range(7):
            ref = log_partition(h.with_couplings(C[k]), 1.3, "naive").log_partition
            assert lz[k] == pytest.approx(ref, rel=1e-13)

    def test_row_independent_of_batch_size(self):
        h = random_hamiltonian(6, max_sites=10)
        C = np.random.default_rng(1).normal(size=(40, len(h)))
        full = batch_log_partition(h.masks, len(h.region), C, 0.9)
        part = batch_log_partition(h.masks, len(h.region), C[:3], 0.9)
        np.testing.assert_array_equal(full[:3], part)

    def test_prefix_sweep_matches_prefixes(self):
        h = random_hamiltonian(8, max_sites=9)
        lz, pp, pm = prefix_sweep(h, 1.1)
        for n in range(len(h) + 1):
            assert lz[n] == pytest.approx(log_partition(prefix(h, n), 1.1).log_partition, rel=1e-13, abs=1e-13)
        np.testing.assert_allclose(pp + pm, 1.0, rtol=1e-13)

    def test_batch_prefix_shape(self):
        h = random_hamiltonian(9, max_sites=6)
        C = np.random.default_rng(2).normal(size=(4, len(h)))
        out = batch_prefix_log_partition(h.masks, len(h.region), C, 1.0)
        assert np.asarray(out).shape[0] == 4

    def test_irregular_region(self):
        r = Region(2, ((0, 0), (5, 5)))
        h = Hamiltonian(r, (InteractionTerm(0b11, 1.0),))
        assert log_partition(h, 1.0).log_partition == pytest.approx(math.log(4 * math.cosh(1.0)), rel=1e-14)
