"""Finite regions of Z^d, multi-spin interaction terms and translation-invariant families.

Sites of a region are indexed ``0 .. |region|-1`` and a subset of sites is a
bitmask over those indices.  A :class:`Hamiltonian` is an *ordered* tuple of
terms; ``-H(sigma) = sum_n multiplier_n * coupling_n * sigma_{X_n}``, and its
prefixes are what the telescoping bounds are built from.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .disorder import Deterministic, distribution_from_dict, stream
from .errors import ConfigError, UnsupportedRegionError

__all__ = [
    "Region",
    "InteractionTerm",
    "Hamiltonian",
    "Orbit",
    "CouplingFamily",
    "Placement",
    "box",
    "place",
    "instantiate",
    "prefix",
    "nearest_neighbor_family",
    "family_from_dict",
    "mask_from_sites",
    "sites_of_mask",
]

MAX_MASK_SITES = 32


@dataclass(frozen=True)
class Region:
    dimension: int
    sites: tuple[tuple[int, ...], ...]
    side: int | None = None  # set for boxes [1, side]^d

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if len(self.sites) < 1:
            raise ValueError("a region needs at least one site")
        if any(len(s) != self.dimension for s in self.sites):
            raise ValueError("site coordinates must match the dimension")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("sites must be distinct")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.sites)})

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def is_box(self) -> bool:
        return self.side is not None

    def site_index(self, site: Sequence[int]) -> int:
        return self._index[tuple(site)]

    def __contains__(self, site) -> bool:
        return tuple(site) in self._index


def box(side: int, dimension: int = 1) -> Region:
    """The cube ``[1, side]^dimension``, sites in row-major order."""
    if side < 1:
        raise ValueError("box side must be at least 1")
    sites = tuple(itertools.product(range(1, side + 1), repeat=dimension))
    return Region(dimension, sites, side)


def mask_from_sites(indices: Sequence[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def sites_of_mask(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


@dataclass(frozen=True)
class InteractionTerm:
    subset: int
    coupling: float
    multiplier: float = 1.0

    def __post_init__(self):
        if self.subset <= 0:
            raise ValueError("interaction subsets must be nonempty")
        if self.multiplier < 0:
            raise ValueError("multipliers must be nonnegative")

    @property
    def effective(self) -> float:
        return self.multiplier * self.coupling

    @property
    def size(self) -> int:
        return self.subset.bit_count()


@dataclass(frozen=True)
class Hamiltonian:
    region: Region
    terms: tuple[InteractionTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        full = (1 << len(self.region)) - 1
        for t in self.terms:
            if t.subset & ~full:
                raise ValueError("term subset lies outside the region")

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def masks(self) -> np.ndarray:
        return np.array([t.subset for t in self.terms], dtype=np.int64)

    @property
    def effective_couplings(self) -> np.ndarray:
        return np.array([t.effective for t in self.terms], dtype=float)

    def with_couplings(self, couplings: Sequence[float]) -> "Hamiltonian":
        if len(couplings) != len(self.terms):
            raise ValueError("one coupling per term required")
        terms = [
            InteractionTerm(t.subset, float(c), t.multiplier)
            for t, c in zip(self.terms, couplings)
        ]
        return Hamiltonian(self.region, tuple(terms))

    def with_multiplier(self, index: int, multiplier: float) -> "Hamiltonian":
        terms = list(self.terms)
        t = terms[index]
        terms[index] = InteractionTerm(t.subset, t.coupling, multiplier)
        return Hamiltonian(self.region, tuple(terms))

    def energy(self, spins: Sequence[int]) -> float:
        """Direct evaluation of ``H(sigma)`` for one configuration of ±1 spins."""
        s = np.asarray(spins)
        e = 0.0
        for t in self.terms:
            e -= t.effective * float(np.prod(s[sites_of_mask(t.subset)]))
        return e

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimension": self.region.dimension,
            "sites": [list(s) for s in self.region.sites],
            "terms": [
                {"sites": sites_of_mask(t.subset), "coupling": t.coupling, "multiplier": t.multiplier}
                for t in self.terms
            ],
        }


def prefix(h: Hamiltonian, n: int) -> Hamiltonian:
    """Hamiltonian made of the first ``n`` terms of ``h``."""
    if not 0 <= n <= len(h.terms):
        raise IndexError(f"prefix length {n} outside [0, {len(h.terms)}]")
    return Hamiltonian(h.region, h.terms[:n])


def canonical_key(mask: int) -> tuple[int, int, int]:
    return ((mask & -mask).bit_length() - 1, mask.bit_count(), mask)


@dataclass(frozen=True)
class Orbit:
    """Translation orbit of a representative subset, given relative to the origin."""

    sites: tuple[tuple[int, ...], ...]
    distribution: Any
    multiplier: float = 1.0

    def normalized(self) -> tuple[tuple[int, ...], ...]:
        base = min(self.sites)
        return tuple(sorted(tuple(a - b for a, b in zip(s, base)) for s in self.sites))


@dataclass(frozen=True)
class CouplingFamily:
    dimension: int
    orbits: tuple[Orbit, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "orbits", tuple(self.orbits))
        origin = (0,) * self.dimension
        seen = set()
        for o in self.orbits:
            if not o.sites or any(len(s) != self.dimension for s in o.sites):
                raise ConfigError("orbit sites must be nonempty d-vectors")
            if len(set(o.sites)) != len(o.sites):
                raise ConfigError("orbit sites must be distinct")
            if origin not in o.sites:
                raise ConfigError("every orbit representative must contain the origin")
            if o.multiplier < 0:
                raise ConfigError("multipliers must be nonnegative")
            key = o.normalized()
            if key in seen:
                raise ConfigError("two orbits are translates of each other")
            seen.add(key)
            d = o.distribution
            if not isinstance(d, Deterministic) and not d.centered:
                # alpha <= 1 pareto laws are kept for sampling demos
                if getattr(d, "kind", "") != "symmetric_pareto":
                    raise ConfigError(f"random orbit law {d!r} is not centered")

    @property
    def range(self) -> int:
        if not self.orbits:
            return 0
        widths = []
        for o in self.orbits:
            arr = np.array(o.sites)
            widths.append(int((arr.max(axis=0) - arr.min(axis=0)).max()) + 1)
        return max(widths)

    @property
    def is_deterministic(self) -> bool:
        return all(isinstance(o.distribution, Deterministic) for o in self.orbits)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension,
            "orbits": [
                {"sites": [list(s) for s in o.sites], "distribution": o.distribution.to_dict(), "lambda": o.multiplier}
                for o in self.orbits
            ],
        }


def nearest_neighbor_family(distribution, dimension: int = 1, multiplier: float = 1.0) -> CouplingFamily:
    """One orbit per lattice direction, ``{0, e_k}``."""
    orbits = []
    for k in range(dimension):
        e = [0] * dimension
        e[k] = 1
        orbits.append(Orbit(((0,) * dimension, tuple(e)), distribution, multiplier))
    return CouplingFamily(dimension, tuple(orbits))


def family_from_dict(record: dict[str, Any]) -> CouplingFamily:
    """Parse ``{"dimension": d, "orbits": [{"sites": [[...]], "distribution": {...}, "lambda": 1.0}]}``."""
    try:
        d = int(record["dimension"])
        orbits = []
        for o in record.get("orbits", []):
            sites = tuple(tuple(int(c) for c in s) for s in o["sites"])
            dist = distribution_from_dict(o["distribution"])
            orbits.append(Orbit(sites, dist, float(o.get("lambda", 1.0))))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed model: {exc}") from None
    return CouplingFamily(d, tuple(orbits))


@dataclass(frozen=True)
class Placement:
    """Translates of a family inside a region, before couplings are drawn."""

    region: Region
    subsets: tuple[int, ...]
    multipliers: tuple[float, ...]
    distributions: tuple[Any, ...]
    orbit_ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.subsets)

    def hamiltonian(self, couplings: Sequence[float]) -> Hamiltonian:
        terms = tuple(
            InteractionTerm(m, float(c), lam)
            for m, c, lam in zip(self.subsets, couplings, self.multipliers)
        )
        return Hamiltonian(self.region, terms)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        """One coupling per term, drawn independently in term order."""
        return np.array([d.sample(rng) for d in self.distributions], dtype=float)

    def draw_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``(n, terms)`` couplings; row ``i`` does not depend on ``n``."""
        out = np.empty((n, len(self.subsets)))
        for i in range(n):
            out[i] = self.draw(rng)
        return out


def place(family: CouplingFamily, region: Region, order_seed: int | None = None) -> Placement:
    """All translates of each orbit that fit in the box, in canonical order.

    Canonical order sorts by (lowest site index, subset size, bitmask).  A
    non-None ``order_seed`` applies a seeded permutation instead.
    """
    if not region.is_box:
        raise UnsupportedRegionError("families can only be placed on box regions")
    if family.dimension != region.dimension:
        raise ValueError("family and region dimensions differ")
    N = region.side
    rows = []
    for oid, o in enumerate(family.orbits):
        arr = np.array(o.sites)
        lo, hi = arr.min(axis=0), arr.max(axis=0)
        ranges = [range(1 - lo[k], N - hi[k] + 1) for k in range(region.dimension)]
        for shift in itertools.product(*ranges):
            idx = [region.site_index(tuple(int(c) for c in s + np.array(shift))) for s in arr]
            rows.append((mask_from_sites(idx), o.multiplier, o.distribution, oid))
    rows.sort(key=lambda r: canonical_key(r[0]) + (r[3],))
    if order_seed is not None and rows:
        perm = stream(order_seed, 0).permutation(len(rows))
        rows = [rows[i] for i in perm]
    if rows:
        subsets, mults, dists, oids = zip(*rows)
    else:
        subsets, mults, dists, oids = (), (), (), ()
    return Placement(region, tuple(subsets), tuple(mults), tuple(dists), tuple(oids))


def instantiate(family: CouplingFamily, region: Region, rng_seed: int, order_seed: int | None = None) -> Hamiltonian:
    """Concrete Hamiltonian with couplings drawn reproducibly from ``rng_seed``."""
    pl = place(family, region, order_seed)
    return pl.hamiltonian(pl.draw(stream(rng_seed, 0)))
