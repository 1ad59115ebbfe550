"""Quenched pressure ``E[ln Z] / |region|`` over random couplings.

:func:`quenched_exact` enumerates every disorder outcome of finitely supported
laws and is the oracle for :func:`quenched_mc`, which averages seeded
independent replicas.  Replica ``i`` always draws its couplings from
``stream(seed, i)``, so estimates are bit-identical for any thread count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .disorder import Deterministic, Gaussian, stream
from .engine import MAX_SITES, batch_log_partition, log_partition
from .errors import CapacityError, ConfigError
from .lattice import CouplingFamily, Hamiltonian, InteractionTerm, Placement, Region, place

__all__ = [
    "PressureEstimate",
    "FiniteEnsemble",
    "MAX_OUTCOMES",
    "quenched_exact",
    "quenched_mc",
    "replica_pressures",
    "annealed_pressure_gaussian",
]

MAX_OUTCOMES = 1 << 20
MC_CHUNK = 256


@dataclass(frozen=True)
class PressureEstimate:
    mean: float
    std_error: float
    n_samples: int
    exact: bool
    seed: int | None = None
    extra: dict[str, float] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "mean": self.mean,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "exact": self.exact,
            "seed": self.seed,
        }
        out.update(self.extra)
        return out


@dataclass(frozen=True)
class FiniteEnsemble:
    """Finitely many coupling vectors over fixed subsets, with their probabilities.

    ``couplings`` has shape ``(K, T)``; the effective coupling of term ``t`` in
    outcome ``k`` is ``multipliers[t] * couplings[k, t]``.  ``independent``
    records whether the joint law is a product of per-term laws.
    """

    region: Region
    subsets: tuple[int, ...]
    multipliers: np.ndarray
    couplings: np.ndarray
    probs: np.ndarray
    independent: bool = True

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.couplings, dtype=float))
        P = np.asarray(self.probs, dtype=float)
        lam = np.asarray(self.multipliers, dtype=float)
        if C.shape != (len(P), len(self.subsets)) or lam.shape != (len(self.subsets),):
            raise ValueError("inconsistent ensemble shapes")
        if np.any(P < 0) or abs(P.sum() - 1.0) > 1e-12:
            raise ValueError("outcome probabilities must form a distribution")
        if np.any(lam < 0):
            raise ValueError("multipliers must be nonnegative")
        object.__setattr__(self, "couplings", C)
        object.__setattr__(self, "probs", P)
        object.__setattr__(self, "multipliers", lam)

    @classmethod
    def product(cls, region, subsets, laws, multipliers=None):
        """Independent terms; ``laws[t]`` is a ``(values, probabilities)`` pair."""
        k = 1
        for vals, _ in laws:
            k *= len(vals)
            if k > MAX_OUTCOMES:
                raise CapacityError(f"more than {MAX_OUTCOMES} disorder outcomes")
        T = len(laws)
        lam = np.ones(T) if multipliers is None else np.asarray(multipliers, dtype=float)
        if T == 0:
            return cls(region, (), lam, np.zeros((1, 0)), np.ones(1))
        idx = np.array(list(itertools.product(*[range(len(v)) for v, _ in laws])), dtype=np.int64)
        C = np.empty(idx.shape)
        P = np.ones(idx.shape[0])
        for t, (vals, probs) in enumerate(laws):
            C[:, t] = np.asarray(vals, dtype=float)[idx[:, t]]
            P *= np.asarray(probs, dtype=float)[idx[:, t]]
        return cls(region, tuple(subsets), lam, C, P, True)

    @classmethod
    def from_placement(cls, pl: Placement):
        laws = []
        for d in pl.distributions:
            if not getattr(d, "finite_support", False):
                raise ConfigError(f"{d.kind} couplings have no finite support to enumerate")
            laws.append(d.support())
        return cls.product(pl.region, pl.subsets, laws, pl.multipliers)

    @classmethod
    def single(cls, h: Hamiltonian):
        return cls(h.region, tuple(t.subset for t in h.terms),
                   np.array([t.multiplier for t in h.terms]),
                   np.array([[t.coupling for t in h.terms]]), np.ones(1))

    def __len__(self) -> int:
        return len(self.subsets)

    @property
    def n_sites(self) -> int:
        return len(self.region)

    @property
    def effective(self) -> np.ndarray:
        return self.couplings * self.multipliers

    def hamiltonian(self, k: int) -> Hamiltonian:
        terms = tuple(
            InteractionTerm(m, float(c), float(lam))
            for m, c, lam in zip(self.subsets, self.couplings[k], self.multipliers)
        )
        return Hamiltonian(self.region, terms)

    def expect(self, values) -> float:
        """Probability-weighted sum of per-outcome ``values``."""
        return math.fsum(self.probs * np.asarray(values, dtype=float))

    def log_partitions(self, beta: float) -> np.ndarray:
        return batch_log_partition(self.subsets, self.n_sites, self.effective, beta)

    def to_dict(self):
        return {
            "dimension": self.region.dimension,
            "sites": [list(s) for s in self.region.sites],
            "subsets": list(self.subsets),
            "multipliers": self.multipliers.tolist(),
            "couplings": self.couplings.tolist(),
            "probs": self.probs.tolist(),
            "independent": self.independent,
        }


def _check_capacity(region: Region):
    if len(region) > MAX_SITES:
        raise CapacityError(f"{len(region)} sites exceeds the enumeration capacity of {MAX_SITES}")


def _check_beta(beta):
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValueError("beta must be finite and nonnegative")


def quenched_exact(family: CouplingFamily, region: Region, beta: float) -> PressureEstimate:
    """Exact quenched pressure by enumerating every disorder outcome."""
    _check_capacity(region)
    _check_beta(beta)
    ens = FiniteEnsemble.from_placement(place(family, region))
    mean = ens.expect(ens.log_partitions(beta)) / len(region)
    return PressureEstimate(mean, 0.0, int(len(ens.probs)), True)


def _replica_chunk(pl: Placement, beta: float, seed: int, start: int, stop: int) -> np.ndarray:
    C = np.array([pl.draw(stream(seed, i)) for i in range(start, stop)]).reshape(stop - start, len(pl))
    lam = np.asarray(pl.multipliers, dtype=float)
    return batch_log_partition(pl.subsets, len(pl.region), C * lam, beta) / len(pl.region)


def replica_pressures(pl: Placement, beta: float, n_samples: int, seed: int, threads: int = 1) -> np.ndarray:
    """Pressure density of replicas ``0 .. n_samples-1``."""
    bounds = [(a, min(a + MC_CHUNK, n_samples)) for a in range(0, n_samples, MC_CHUNK)]
    if threads <= 1:
        parts = [_replica_chunk(pl, beta, seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda ab: _replica_chunk(pl, beta, seed, *ab), bounds))
    return np.concatenate(parts) if parts else np.empty(0)


def _reject_meanless(pl: Placement):
    for d in pl.distributions:
        if d.kind == "symmetric_pareto" and d.alpha <= 1:
            raise ConfigError("symmetric_pareto with alpha <= 1 has no mean; the quenched pressure is not covered")


def quenched_mc(
    family: CouplingFamily,
    region: Region,
    beta: float,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> PressureEstimate:
    """Monte Carlo quenched pressure with the standard error of the mean.

    ``extra`` carries the median and interquartile range of the replica
    pressures, which stay informative under fat-tailed couplings.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    _check_capacity(region)
    _check_beta(beta)
    pl = place(family, region)
    _reject_meanless(pl)
    p = replica_pressures(pl, beta, n_samples, seed, threads)
    se = float(np.std(p, ddof=1) / math.sqrt(n_samples))
    q1, med, q3 = np.percentile(p, [25, 50, 75])
    return PressureEstimate(
        float(np.mean(p)),
        se,
        int(n_samples),
        False,
        int(seed),
        {"median": float(med), "iqr": float(q3 - q1)},
    )


def annealed_pressure_gaussian(family: CouplingFamily, region: Region, beta: float) -> float:
    """``ln E[Z] / |region|`` for families of gaussian and deterministic orbits.

    Each gaussian term multiplies ``E[Z]`` by ``exp(beta^2 lambda^2 sd^2 / 2)``
    independently of the configuration; the deterministic terms are summed
    over configurations exactly.
    """
    _check_beta(beta)
    pl = place(family, region)
    det_terms = []
    gauss = 0.0
    for m, lam, d in zip(pl.subsets, pl.multipliers, pl.distributions):
        if isinstance(d, Gaussian):
            gauss += (beta * lam * d.sd) ** 2 / 2
        elif isinstance(d, Deterministic):
            det_terms.append((m, d.value, lam))
        else:
            raise ConfigError(f"annealed pressure needs gaussian or deterministic orbits, got {d.kind}")
    n = len(region)
    if det_terms:
        _check_capacity(region)
        h = Hamiltonian(region, tuple(InteractionTerm(m, v, lam) for m, v, lam in det_terms))
        lz = log_partition(h, beta).log_partition
    else:
        lz = n * math.log(2.0)
    return (lz + gauss) / n
