"""Centered scalar coupling laws, their moments, and the centered truncation.

Every law exposes ``sample(rng, size)``, ``moment(p)`` (the closed form of
``E|J|^p``), ``clipped_mean(R)`` (``E[J 1{|J| <= R}]``) and, for finitely
supported laws, ``support()`` returning ``(values, probabilities)``.

Random streams come from the counter-based Philox generator, keyed by an
explicit 64-bit seed and a stream index, so replica ``i`` of a run always sees
the same numbers no matter how the work is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ConfigError

__all__ = [
    "Deterministic",
    "Rademacher",
    "Gaussian",
    "Uniform",
    "SymmetricPareto",
    "Discrete",
    "TruncatedPair",
    "distribution_from_dict",
    "moment_p",
    "sample",
    "stream",
    "truncate",
]

SEED_MASK = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Philox generator for replica ``index`` of the run keyed by ``seed``."""
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


class _Law:
    kind: str = ""
    centered: bool = True
    finite_support: bool = False

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def moment(self, p: float) -> float:
        raise NotImplementedError

    def clipped_mean(self, R: float) -> float:
        # sign-symmetric laws: the integrand J 1{|J|<=R} is odd
        return 0.0

    def tail_abs_mean(self, R: float) -> float:
        """E|J 1{|J| > R}|."""
        raise NotImplementedError

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        raise ConfigError(f"{self.kind} law is not finitely supported")

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Deterministic(_Law):
    value: float
    kind = "deterministic"
    finite_support = True

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ConfigError("deterministic value must be finite")

    @property
    def centered(self) -> bool:  # type: ignore[override]
        return self.value == 0.0

    def sample(self, rng, size=None):
        if size is None:
            return float(self.value)
        return np.full(size, float(self.value))

    def moment(self, p):
        return abs(self.value) ** p

    def clipped_mean(self, R):
        return float(self.value) if abs(self.value) <= R else 0.0

    def tail_abs_mean(self, R):
        return abs(self.value) if abs(self.value) > R else 0.0

    def support(self):
        return np.array([float(self.value)]), np.array([1.0])

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Rademacher(_Law):
    kind = "rademacher"
    finite_support = True

    def sample(self, rng, size=None):
        out = 2.0 * rng.integers(0, 2, size=size) - 1.0
        return float(out) if size is None else out

    def moment(self, p):
        return 1.0

    def tail_abs_mean(self, R):
        return 1.0 if R < 1.0 else 0.0

    def support(self):
        return np.array([-1.0, 1.0]), np.array([0.5, 0.5])

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Gaussian(_Law):
    sd: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.sd > 0 or not math.isfinite(self.sd):
            raise ConfigError("gaussian sd must be positive and finite")

    def sample(self, rng, size=None):
        return rng.normal(0.0, self.sd, size=size)

    def moment(self, p):
        return self.sd**p * 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)

    def tail_abs_mean(self, R):
        # 2 * int_R^inf x phi(x/sd)/sd dx
        return self.sd * math.sqrt(2 / math.pi) * math.exp(-0.5 * (R / self.sd) ** 2)

    def to_dict(self):
        return {"kind": self.kind, "sd": self.sd}


@dataclass(frozen=True)
class Uniform(_Law):
    half_width: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise ConfigError("uniform half_width must be positive and finite")

    def sample(self, rng, size=None):
        return rng.uniform(-self.half_width, self.half_width, size=size)

    def moment(self, p):
        return self.half_width**p / (p + 1)

    def tail_abs_mean(self, R):
        w = self.half_width
        if R >= w:
            return 0.0
        return (w * w - R * R) / (2 * w)

    def to_dict(self):
        return {"kind": self.kind, "half_width": self.half_width}


@dataclass(frozen=True)
class SymmetricPareto(_Law):
    """Sign-symmetric Pareto law, density proportional to |x|^(-alpha-1) on |x| >= scale.

    ``alpha <= 1`` is allowed for sampling, but such a law has no mean and
    the quenched-limit machinery refuses it.
    """

    alpha: float
    scale: float = 1.0
    kind = "symmetric_pareto"

    def __post_init__(self):
        if not self.alpha > 0 or not self.scale > 0:
            raise ConfigError("symmetric_pareto needs alpha > 0 and scale > 0")

    @property
    def centered(self) -> bool:  # type: ignore[override]
        return self.alpha > 1

    def sample(self, rng, size=None):
        # numpy's pareto is the Lomax law, i.e. classic Pareto minus one
        mag = self.scale * (1.0 + rng.pareto(self.alpha, size=size))
        sign = 2.0 * rng.integers(0, 2, size=size) - 1.0
        return sign * mag

    def moment(self, p):
        if p >= self.alpha:
            return math.inf
        return self.alpha * self.scale**p / (self.alpha - p)

    def tail_abs_mean(self, R):
        if self.alpha <= 1:
            return math.inf
        a, s = self.alpha, self.scale
        if R <= s:
            return a * s / (a - 1)
        return a * s**a * R ** (1 - a) / (a - 1)

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "scale": self.scale}


@dataclass(frozen=True)
class Discrete(_Law):
    """Sign-symmetric law on ``±magnitudes[i]`` with total mass ``weights[i]``."""

    magnitudes: tuple[float, ...]
    weights: tuple[float, ...]
    kind = "discrete"
    finite_support = True

    def __post_init__(self):
        m = np.asarray(self.magnitudes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if m.ndim != 1 or m.shape != w.shape or m.size == 0:
            raise ConfigError("discrete law needs equal-length magnitudes and weights")
        if np.any(m <= 0) or np.any(w <= 0) or not np.all(np.isfinite(m)):
            raise ConfigError("discrete magnitudes and weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError("discrete weights must sum to 1")

    def sample(self, rng, size=None):
        idx = rng.choice(len(self.magnitudes), size=size, p=np.asarray(self.weights))
        mag = np.asarray(self.magnitudes)[idx]
        sign = 2.0 * rng.integers(0, 2, size=size) - 1.0
        out = sign * mag
        return float(out) if size is None else out

    def moment(self, p):
        return float(np.dot(self.weights, np.asarray(self.magnitudes) ** p))

    def tail_abs_mean(self, R):
        m = np.asarray(self.magnitudes)
        return float(np.dot(self.weights, np.where(m > R, m, 0.0)))

    def support(self):
        m = np.asarray(self.magnitudes, dtype=float)
        w = np.asarray(self.weights, dtype=float) / 2
        return np.concatenate([-m, m]), np.concatenate([w, w])

    def to_dict(self):
        return {"kind": self.kind, "magnitudes": list(self.magnitudes), "weights": list(self.weights)}


_KINDS = {
    "deterministic": (Deterministic, ("value",)),
    "rademacher": (Rademacher, ()),
    "gaussian": (Gaussian, ("sd",)),
    "uniform": (Uniform, ("half_width",)),
    "symmetric_pareto": (SymmetricPareto, ("alpha", "scale")),
    "discrete": (Discrete, ("magnitudes", "weights")),
}


def distribution_from_dict(record: dict[str, Any]):
    """Build a law from its config record, e.g. ``{"kind": "gaussian", "sd": 1.0}``."""
    if not isinstance(record, dict) or "kind" not in record:
        raise ConfigError(f"distribution must be an object with a 'kind': {record!r}")
    kind = record["kind"]
    if kind not in _KINDS:
        raise ConfigError(f"unknown distribution kind {kind!r}")
    cls, fields = _KINDS[kind]
    extra = set(record) - set(fields) - {"kind"}
    if extra:
        raise ConfigError(f"unexpected fields for {kind}: {sorted(extra)}")
    kwargs = {}
    for f in fields:
        if f in record:
            v = record[f]
            kwargs[f] = tuple(float(x) for x in v) if isinstance(v, list) else float(v)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from None


def sample(dist, rng: np.random.Generator, size=None):
    return dist.sample(rng, size)


def moment_p(dist, p: float) -> float:
    """``E|J|^p`` for ``p`` in [1, 2]; ``inf`` when the moment diverges."""
    if not 1.0 <= p <= 2.0:
        raise ValueError("p must lie in [1, 2]")
    return dist.moment(p)


@dataclass(frozen=True)
class TruncatedPair:
    """Joint law of the bounded part ``J1`` and the remainder ``J2 = J - J1``.

    ``J1 = J 1{|J| <= R} - E[J 1{|J| <= R}]`` is centered and bounded by
    ``R + |center|``.
    """

    dist: Any
    r_cutoff: float

    @property
    def center(self) -> float:
        return self.dist.clipped_mean(self.r_cutoff)

    def split(self, j):
        j = np.asarray(j, dtype=float)
        j1 = np.where(np.abs(j) <= self.r_cutoff, j, 0.0) - self.center
        return j1, j - j1

    def sample(self, rng, size=None):
        """Draw ``(J1, J2, J)`` from one underlying draw of ``J``."""
        j = np.asarray(self.dist.sample(rng, size), dtype=float)
        j1, j2 = self.split(j)
        return j1, j2, j

    def tail_abs_mean(self) -> float:
        """Closed form of ``E|J2|`` for sign-symmetric laws (center 0)."""
        if self.center != 0.0:
            raise NotImplementedError("closed form only for centered truncations")
        return self.dist.tail_abs_mean(self.r_cutoff)

    def support(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(J1 values, J2 values, probabilities)`` for finitely supported laws."""
        vals, probs = self.dist.support()
        j1, j2 = self.split(vals)
        return j1, j2, probs


def truncate(dist, R: float) -> TruncatedPair:
    if not R > 0:
        raise ValueError("truncation cutoff R must be positive")
    return TruncatedPair(dist, float(R))
