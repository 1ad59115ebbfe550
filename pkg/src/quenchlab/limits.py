"""Translation-invariant coupling norms, limit bounds and cube-sequence studies."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .disorder import Deterministic
from .engine import log_partition
from .errors import ConfigError
from .lattice import CouplingFamily, box, instantiate, place
from .quenched import quenched_exact, quenched_mc

__all__ = [
    "LN2",
    "NormReport",
    "ConvergenceRow",
    "ConvergenceTable",
    "norm",
    "bound_value",
    "default_bound_kind",
    "box_decompose",
    "box_pressure",
    "convergence_run",
    "moment_density",
    "row_seed",
]

LN2 = math.log(2.0)
NORM_KINDS = ("ferro", "l1", "l2sq", "lp")


@dataclass(frozen=True)
class NormReport:
    norm_kind: str
    value: float
    per_orbit_contributions: tuple[tuple[int, float], ...]
    p: float | None = None


def _orbit_moment(orbit, p: float) -> float:
    # the |X| translates of X containing the origin each carry weight 1/|X|
    return orbit.multiplier**p * orbit.distribution.moment(p)


def norm(family: CouplingFamily, kind: str, p: float | None = None) -> NormReport:
    """``sum_{X containing 0} E|J_X|^p / |X|`` summed over translation orbits.

    ``ferro`` is the plain coupling sum of a deterministic family, ``l1`` and
    ``l2sq`` fix ``p`` at 1 and 2, ``lp`` reports ``||J||_p^p`` for the given
    ``p`` in [1, 2].
    """
    if kind == "ferro":
        if not family.is_deterministic:
            raise ConfigError("the ferromagnetic norm needs a deterministic family")
        p = 1.0
    elif kind == "l1":
        p = 1.0
    elif kind == "l2sq":
        p = 2.0
    elif kind == "lp":
        if p is None or not 1.0 <= p <= 2.0:
            raise ValueError("lp norm needs p in [1, 2]")
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    contrib = tuple((i, _orbit_moment(o, p)) for i, o in enumerate(family.orbits))
    total = math.fsum(c for _, c in contrib) if all(math.isfinite(c) for _, c in contrib) else math.inf
    return NormReport(kind, total, contrib, p if kind == "lp" else None)


def _require_centered(family: CouplingFamily):
    for o in family.orbits:
        d = o.distribution
        if isinstance(d, Deterministic):
            if d.value != 0.0:
                raise ConfigError("spin-glass bounds need centered couplings; found a nonzero deterministic orbit")
        elif not d.centered:
            raise ConfigError(f"orbit law {d!r} is not centered")


def bound_value(
    family: CouplingFamily,
    beta: float,
    kind: str,
    p: float | None = None,
    tail_family: CouplingFamily | None = None,
) -> float:
    """Upper bound on the infinite-volume pressure.

    ``ferro``: ``ln 2 + 2 beta ||J||``; ``l2sq``: ``ln 2 + 1.5 beta^2 ||J||_2^2``;
    ``l1``: ``ln 2 + 2 beta ||J||_1``; ``combined``: the ``l2sq`` bound of
    ``family`` plus ``2 beta ||J'||_1`` of ``tail_family``; ``lp``:
    ``ln 2 + 3 beta^p ||J||_p^p``.  An infinite norm gives ``inf`` and a warning.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if kind == "ferro":
        terms = [(2 * beta, norm(family, "ferro").value)]
    elif kind == "l2sq":
        _require_centered(family)
        terms = [(1.5 * beta**2, norm(family, "l2sq").value)]
    elif kind == "l1":
        _require_centered(family)
        terms = [(2 * beta, norm(family, "l1").value)]
    elif kind == "combined":
        if tail_family is None:
            raise ValueError("combined bound needs tail_family")
        _require_centered(family)
        _require_centered(tail_family)
        terms = [(1.5 * beta**2, norm(family, "l2sq").value), (2 * beta, norm(tail_family, "l1").value)]
    elif kind == "lp":
        _require_centered(family)
        rep = norm(family, "lp", p)
        terms = [(3 * beta**p, rep.value)]
    else:
        raise ValueError(f"unknown bound kind {kind!r}")
    total = LN2
    for coef, val in terms:
        if coef == 0.0:
            continue
        if math.isinf(val):
            warnings.warn(f"{kind} norm is infinite; the bound does not apply", RuntimeWarning, stacklevel=2)
            return math.inf
        total += coef * val
    return total


def default_bound_kind(family: CouplingFamily) -> str:
    """Sharpest applicable bound: ferro for deterministic families, else l2sq, else l1."""
    if family.is_deterministic:
        return "ferro"
    if math.isfinite(norm(family, "l2sq").value):
        return "l2sq"
    return "l1"


def box_decompose(N: int, N1: int, d: int) -> tuple[int, int, float]:
    """``(m, r, (m N1)^d / N^d)`` with ``N = m N1 + r`` and ``0 <= r <= N1 - 1``."""
    if not (isinstance(N, (int, np.integer)) and isinstance(N1, (int, np.integer))):
        raise TypeError("N and N1 must be integers")
    if d < 1 or not 1 <= N1 <= N:
        raise ValueError("need d >= 1 and 1 <= N1 <= N")
    m, r = divmod(int(N), int(N1))
    return m, r, (m * N1) ** d / N**d


def moment_density(family: CouplingFamily, side: int, p: float) -> tuple[float, float]:
    """``(1/|L|) sum_{X in L} E|J_X|^p`` on the cube of side ``side``, two ways.

    The second value redistributes each term's weight equally over its sites
    and sums site by site; both must agree and stay below ``||J||_p^p``.
    """
    region = box(side, family.dimension)
    pl = place(family, region)
    w = [lam**p * d.moment(p) for lam, d in zip(pl.multipliers, pl.distributions)]
    direct = math.fsum(w) / len(region)
    per_site = np.zeros(len(region))
    for m, wt in zip(pl.subsets, w):
        k = m.bit_count()
        for i in range(len(region)):
            if m >> i & 1:
                per_site[i] += wt / k
    return direct, math.fsum(per_site) / len(region)


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    pressure: float
    std_error: float
    bound: float
    exact: bool


@dataclass
class ConvergenceTable:
    beta: float
    rows: list[ConvergenceRow]
    claimed_limit_bound: float
    bound_kind: str
    flags: list[str] = field(default_factory=list)

    @property
    def sup_pressure(self) -> float:
        return max(r.pressure for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "pressure", "std_error", "bound", "exact_flag"])
        for r in self.rows:
            w.writerow([r.N, repr(r.pressure), repr(r.std_error), repr(r.bound), int(r.exact)])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "bound_kind": self.bound_kind,
            "claimed_limit_bound": self.claimed_limit_bound,
            "sup_pressure": self.sup_pressure,
            "rows": [r.__dict__ for r in self.rows],
            "flags": list(self.flags),
        }


def row_seed(seed: int, N: int) -> int:
    """64-bit seed for the row of side ``N``, derived from the run seed."""
    a, b = np.random.SeedSequence(int(seed), spawn_key=(int(N),)).generate_state(2, np.uint32)
    return int(a) << 32 | int(b)


def box_pressure(family: CouplingFamily, N: int, beta: float, kind: str, samples: int = 10_000,
                 seed: int = 0, threads: int = 1) -> tuple[float, float, bool]:
    """``(pressure, std_error, exact)`` on the cube of side ``N``."""
    region = box(N, family.dimension)
    if kind == "ferro_exact":
        if not family.is_deterministic:
            raise ConfigError("ferro_exact needs a deterministic family")
        return log_partition(instantiate(family, region, 0), beta).pressure_density, 0.0, True
    if kind == "quenched_exact":
        est = quenched_exact(family, region, beta)
        return est.mean, 0.0, True
    if kind == "quenched_mc":
        est = quenched_mc(family, region, beta, samples, row_seed(seed, N), threads)
        return est.mean, est.std_error, False
    raise ValueError(f"unknown convergence kind {kind!r}")


def convergence_run(
    family: CouplingFamily,
    kind: str,
    beta: float,
    N_list: Sequence[int],
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    bound_kind: str | None = None,
    p: float | None = None,
) -> ConvergenceTable:
    """Pressures along cubes of increasing side, with the applicable limit bound.

    Flags rows whose pressure (plus five standard errors) exceeds the bound and pairs ``N1 < N`` that break the
    sub-box inequality ``p_N >= f p_N1 + (1 - f) ln 2`` beyond tolerance
    (``1e-10`` exact, five combined standard errors otherwise).  No limit is
    extrapolated.
    """
    bound_kind = bound_kind or default_bound_kind(family)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        bnd = bound_value(family, beta, bound_kind, p=p)
    Ns = sorted(set(int(n) for n in N_list))
    rows = []
    for N in Ns:
        val, se, ex = box_pressure(family, N, beta, kind, samples, seed, threads)
        rows.append(ConvergenceRow(N, val, se, bnd, ex))
    flags = []
    for r in rows:
        if r.pressure + 5 * r.std_error > bnd + 1e-10:
            flags.append(f"N={r.N}: pressure {r.pressure!r} exceeds bound {bnd!r}")
    for i, big in enumerate(rows):
        for small in rows[:i]:
            _, _, f = box_decompose(big.N, small.N, family.dimension)
            rhs = f * small.pressure + (1 - f) * LN2
            tol = 1e-10 + 5 * math.hypot(big.std_error, f * small.std_error)
            if big.pressure < rhs - tol:
                flags.append(f"N={big.N} vs N1={small.N}: sub-box inequality broken by {rhs - big.pressure!r}")
    return ConvergenceTable(float(beta), rows, bnd, bound_kind, flags)
