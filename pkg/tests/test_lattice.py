import numpy as np
import pytest

from quenchlab.disorder import Deterministic, Gaussian, Rademacher, SymmetricPareto, Uniform
from quenchlab.errors import ConfigError, UnsupportedRegionError
from quenchlab.lattice import (
    CouplingFamily,
    Hamiltonian,
    InteractionTerm,
    Orbit,
    Region,
    box,
    family_from_dict,
    instantiate,
    nearest_neighbor_family,
    place,
    prefix,
)


class TestRegion:
    def test_box_order_is_row_major(self):
        r = box(3, 2)
        assert len(r) == 9
        assert r.sites[:4] == ((1, 1), (1, 2), (1, 3), (2, 1))
        assert r.site_index((2, 3)) == 5
        assert r.is_box

    def test_irregular_region_is_not_box(self):
        r = Region(1, ((1,), (3,)))
        assert not r.is_box
        with pytest.raises(UnsupportedRegionError):
            place(nearest_neighbor_family(Rademacher()), r)

    def test_duplicate_sites_rejected(self):
        with pytest.raises(ValueError):
            Region(1, ((1,), (1,)))


class TestPlacement:
    @pytest.mark.parametrize("N", [1, 2, 5, 9])
    def test_chain_term_count(self, N):
        assert len(place(nearest_neighbor_family(Rademacher()), box(N))) == N - 1

    @pytest.mark.parametrize("N", [1, 2, 3, 4])
    def test_square_term_count(self, N):
        assert len(place(nearest_neighbor_family(Rademacher(), 2), box(N, 2))) == 2 * N * (N - 1)

    def test_oversized_orbit_is_omitted(self):
        fam = CouplingFamily(1, (Orbit(((0,), (5,)), Deterministic(1.0)),))
        assert len(place(fam, box(4))) == 0

    def test_canonical_order(self):
        fam = CouplingFamily(1, (
            Orbit(((0,), (1,), (2,)), Deterministic(1.0)),
            Orbit(((0,),), Deterministic(0.5)),
        ))
        pl = place(fam, box(4))
        keys = [((m & -m).bit_length(), m.bit_count(), m) for m in pl.subsets]
        assert keys == sorted(keys)
        assert pl.subsets[0] == 0b1

    def test_seeded_order_is_a_permutation(self):
        fam = nearest_neighbor_family(Gaussian(1.0), 2)
        a = place(fam, box(3, 2))
        b = place(fam, box(3, 2), order_seed=5)
        assert sorted(a.subsets) == sorted(b.subsets)
        assert place(fam, box(3, 2), order_seed=5) == b

    def test_translation_consistency(self):
        fam = CouplingFamily(2, (Orbit(((0, 0), (1, 0), (0, 1)), Deterministic(1.0)),))
        r = box(4, 2)
        pl = place(fam, r)
        shapes = set()
        for m in pl.subsets:
            pts = [r.sites[i] for i in range(len(r)) if m >> i & 1]
            base = min(pts)
            shapes.add(tuple(sorted(tuple(a - b for a, b in zip(p, base)) for p in pts)))
        assert shapes == {((0, 0), (0, 1), (1, 0))}
        assert len(pl) == 9


class TestFamily:
    def test_origin_required(self):
        with pytest.raises(ConfigError):
            CouplingFamily(1, (Orbit(((1,), (2,)), Rademacher()),))

    def test_translates_rejected(self):
        with pytest.raises(ConfigError):
            CouplingFamily(1, (Orbit(((0,), (1,)), Rademacher()), Orbit(((-1,), (0,)), Rademacher())))

    def test_uncentered_random_law_rejected(self):
        class Shifted(Uniform):
            @property
            def centered(self):
                return False

        with pytest.raises(ConfigError):
            CouplingFamily(1, (Orbit(((0,), (1,)), Shifted(1.0)),))

    def test_meanless_pareto_kept(self):
        fam = nearest_neighbor_family(SymmetricPareto(0.8))
        assert not fam.is_deterministic

    def test_range(self):
        fam = CouplingFamily(1, (Orbit(((0,), (3,)), Rademacher()),))
        assert fam.range == 4

    def test_dict_roundtrip(self):
        fam = nearest_neighbor_family(Gaussian(0.7), 2, multiplier=1.5)
        assert family_from_dict(fam.to_dict()) == fam

    @pytest.mark.parametrize("bad", [{}, {"dimension": 1, "orbits": [{"sites": [[0]]}]}, {"dimension": "x"}])
    def test_malformed(self, bad):
        with pytest.raises(ConfigError):
            family_from_dict(bad)


class TestHamiltonian:
    def test_instantiate_is_deterministic(self):
        fam = nearest_neighbor_family(Gaussian(1.0))
        a = instantiate(fam, box(6), 3)
        assert a == instantiate(fam, box(6), 3)
        assert a != instantiate(fam, box(6), 4)

    def test_energy_of_ferro_ground_state(self):
        h = instantiate(nearest_neighbor_family(Deterministic(1.0)), box(5), 0)
        assert h.energy([1] * 5) == -4.0
        assert h.energy([1, -1, 1, -1, 1]) == 4.0

    def test_prefix(self):
        h = instantiate(nearest_neighbor_family(Gaussian(1.0)), box(6), 1)
        assert len(prefix(h, 0)) == 0
        assert prefix(h, 3).terms == h.terms[:3]
        with pytest.raises(IndexError):
            prefix(h, 6)

    def test_term_must_live_in_region(self):
        with pytest.raises(ValueError):
            Hamiltonian(box(2), (InteractionTerm(0b100, 1.0),))

    def test_multiplier_scales_effective_coupling(self):
        h = Hamiltonian(box(2), (InteractionTerm(0b11, 2.0, 0.25),))
        np.testing.assert_array_equal(h.effective_couplings, [0.5])
        assert h.with_multiplier(0, 1.0).effective_couplings[0] == 2.0
