"""Numerical checks of the pressure inequalities on exact finite instances.

Each check returns a :class:`CheckReport`; ``max_violation`` is the largest
amount by which the inequality's left side exceeds its right side (negative
values are slack).  Expectations over disorder are computed by exhaustive
enumeration wherever the law is finitely supported; Monte Carlo is used
only for the heavy-tailed truncation check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .disorder import SymmetricPareto, stream, truncate
from .engine import (
    _signs,
    _blocks,
    log_partition,
    partition_ratio,
    prefix_sweep,
    batch_log_partition,
    batch_prefix_log_partition,
)
from .errors import PreconditionError
from .lattice import CouplingFamily, Hamiltonian, Region, place, prefix
from .limits import LN2, box_decompose, box_pressure
from .quenched import FiniteEnsemble

__all__ = [
    "CheckReport",
    "merge_reports",
    "log_cosh",
    "scalar_toolbox_check",
    "ratio_identity_check",
    "telescoping_bound_check",
    "corollary_bound_check",
    "cl_monotonicity_check",
    "griffiths_check",
    "superadditivity_check",
    "superadditivity_sweep",
    "truncation_error_check",
    "ENUM_TOL",
    "FD_TOL",
]

ENUM_TOL = 1e-10
FD_TOL = 1e-8
RATIO_RTOL = 1e-12
SIGMA = 5.0
# rounding floor added to statistical tolerances so zero-variance ensembles compare cleanly
NOISE_FLOOR = 1e-12


@dataclass
class CheckReport:
    name: str
    instances_run: int
    max_violation: float
    worst_instance_seed: int | None
    passed: bool
    tolerance: float
    worst_instance: dict[str, Any] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "instances_run": self.instances_run,
            "max_violation": self.max_violation,
            "worst_instance_seed": self.worst_instance_seed,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "worst_instance": self.worst_instance,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _report(name, violation, tol, seed=None, instance=None, **details) -> CheckReport:
    violation = float(violation)
    return CheckReport(name, 1, violation, seed, bool(violation <= tol), tol, instance, details)


def merge_reports(name: str, reports: Iterable[CheckReport]) -> CheckReport:
    """Aggregate per-instance reports; the worst instance is kept for replay."""
    reports = list(reports)
    if not reports:
        return CheckReport(name, 0, -math.inf, None, True, 0.0)
    worst = max(reports, key=lambda r: r.max_violation - r.tolerance)
    return CheckReport(
        name,
        sum(r.instances_run for r in reports),
        max(r.max_violation for r in reports),
        worst.worst_instance_seed,
        all(r.passed for r in reports),
        worst.tolerance,
        worst.worst_instance,
        {"failed_instances": sum(not r.passed for r in reports)},
    )


def log_cosh(x):
    """``ln cosh x`` without overflow or small-argument cancellation."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x < 1.0
    out = np.empty_like(x)
    out[small] = np.log1p(2.0 * np.sinh(x[small] / 2) ** 2)
    xl = x[~small]
    out[~small] = xl + np.log1p(np.exp(-2.0 * xl)) - LN2
    return out if out.ndim else float(out)


# ----------------------------------------------------------------------------
# scalar inequalities


def _gauss_legendre_cumulative(f, grid: np.ndarray, order: int = 8) -> np.ndarray:
    """``int_0^g f`` for each point of the sorted nonnegative ``grid``."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    a = np.concatenate([[0.0], grid[:-1]])
    b = grid
    half = (b - a) / 2
    mid = (b + a) / 2
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    pieces = half * (f(pts) @ weights)
    return np.cumsum(pieces)


def scalar_toolbox_check(grid: Sequence[float], p_grid: Sequence[float] = (1.0, 1.25, 1.5, 1.75, 2.0),
                         tol: float = 1e-12, quad_tol: float = 1e-9) -> CheckReport:
    """Pointwise scalar inequalities behind the pressure bounds.

    ``ln cosh x <= x^2/2``, ``ln cosh x <= |x|``, ``|tanh x| <= |x|``,
    ``|x - tanh x| <= |x| tanh^2 x <= min(|x|, |x|^3) <= x^2``, the envelopes
    ``min(|x|, x^2) <= |x|^p``, ``ln cosh x <= |x|^p`` and
    ``|x - tanh x| <= |x|^p`` for ``p`` in ``p_grid``, and the identity
    ``|x - tanh x| = int_0^|x| tanh^2`` by Gauss-Legendre quadrature.
    """
    x = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("grid must be finite")
    ax = np.abs(x)
    lc = log_cosh(x)
    th = np.tanh(x)
    gap = np.abs(x - th)
    mid = ax * th**2
    cube = np.minimum(ax, ax**3)
    parts = {
        "logcosh_le_half_square": lc - x**2 / 2,
        "logcosh_le_abs": lc - ax,
        "tanh_le_abs": np.abs(th) - ax,
        "gap_le_abs_tanh_sq": gap - mid,
        "abs_tanh_sq_le_min_cube": mid - cube,
        "min_cube_le_square": cube - x**2,
    }
    for p in p_grid:
        env = ax**p
        parts[f"min_square_le_pow_{p:g}"] = np.minimum(ax, ax**2) - env
        parts[f"logcosh_le_pow_{p:g}"] = lc - env
        parts[f"gap_le_pow_{p:g}"] = gap - env
    worst = {k: float(v.max()) if v.size else -math.inf for k, v in parts.items()}
    order = np.argsort(ax)
    integ = np.empty_like(ax)
    if ax.size:
        integ[order] = _gauss_legendre_cumulative(lambda y: np.tanh(y) ** 2, ax[order])
    quad_err = float(np.max(np.abs(integ - gap))) if ax.size else 0.0
    ineq = max(worst.values()) if worst else -math.inf
    violation = max(ineq, quad_err - quad_tol + tol)
    rep = CheckReport("scalar", int(ax.size), violation, None,
                      bool(ineq <= tol and quad_err <= quad_tol), tol)
    rep.details = {"per_inequality": worst, "quadrature_error": quad_err}
    if not rep.passed:
        k = int(np.argmax(np.maximum.reduce(list(parts.values()))))
        rep.worst_instance = {"x": float(x[k])}
    return rep


# ----------------------------------------------------------------------------
# single-Hamiltonian checks


def ratio_identity_check(h: Hamiltonian, beta: float, seed: int | None = None, rtol: float = RATIO_RTOL) -> CheckReport:
    """``Z_{n+1}/Z_n`` from two separate enumerations against the cosh/tanh closed form."""
    lz = [log_partition(prefix(h, n), beta).log_partition for n in range(len(h) + 1)]
    worst = -math.inf
    for n, term in enumerate(h.terms):
        quotient = math.exp(lz[n + 1] - lz[n])
        closed = partition_ratio(prefix(h, n), term, beta)
        worst = max(worst, abs(quotient - closed) / abs(closed))
    if not h.terms:
        worst = 0.0
    return _report("ratio", worst, rtol, seed, h.to_dict(), beta=beta)


def _step_terms(h: Hamiltonian, beta: float):
    """Per-term right-hand sides and exact log-ratios of the one-step bound."""
    lz, pp, pm = prefix_sweep(h, beta)
    a = beta * h.effective_couplings
    stated = log_cosh(a) + np.tanh(a) * (pp - pm)
    return lz, np.atleast_1d(stated), np.diff(lz)


def telescoping_bound_check(h: Hamiltonian, beta: float, n: int | None = None, seed: int | None = None,
                            tol: float = ENUM_TOL) -> CheckReport:
    """``p(full) - p(first n) <= (1/|L|) sum_{k>n} [ln cosh b_k + tanh b_k <sigma_{X_k}>_{k-1}]``.

    ``n=None`` checks every prefix.  The slack is also decomposed into the
    per-step gaps ``stated_k - ln(Z_k/Z_{k-1})``, each of which must be
    nonnegative.
    """
    T = len(h)
    if n is not None and not 0 <= n <= T:
        raise IndexError("prefix length out of range")
    vol = len(h.region)
    lz, stated, steps = _step_terms(h, beta)
    ns = range(T + 1) if n is None else [n]
    worst = -math.inf
    for k in ns:
        lhs = (lz[T] - lz[k]) / vol
        rhs = math.fsum(stated[k:]) / vol
        worst = max(worst, lhs - rhs)
    step_gap = (steps - stated) / vol if T else np.zeros(0)
    step_worst = float(step_gap.max()) if T else -math.inf
    slack_consistent = True
    if T:
        full_slack = math.fsum(stated) / vol - (lz[T] - lz[0]) / vol
        slack_consistent = abs(full_slack - math.fsum(stated - steps) / vol) <= tol
    violation = max(worst, step_worst)
    rep = _report("telescoping", violation, tol, seed, h.to_dict(), beta=beta)
    rep.passed = rep.passed and slack_consistent
    rep.details["min_step_slack"] = -step_worst if T else 0.0
    return rep


def corollary_bound_check(ens: FiniteEnsemble | Hamiltonian, beta: float, n: int | None, variant: str,
                          seed: int | None = None, tol: float = ENUM_TOL) -> CheckReport:
    """One of the three prefix bounds on the full pressure.

    ``nonrandom``: extra terms cost ``ln cosh b + |tanh b|`` each.
    ``dependent``: expectations of those two pieces, for any joint law.
    ``independent``: ``E ln cosh b + |E tanh b|``, needs a product law.
    """
    if isinstance(ens, Hamiltonian):
        ens = FiniteEnsemble.single(ens)
    if variant == "nonrandom":
        if len(ens.probs) != 1:
            raise PreconditionError("nonrandom variant needs a single coupling outcome")
    elif variant == "independent":
        if not ens.independent:
            raise PreconditionError("independent variant needs a product law")
    elif variant != "dependent":
        raise ValueError(f"unknown variant {variant!r}")
    T = len(ens)
    vol = ens.n_sites
    lz = batch_prefix_log_partition(ens.subsets, vol, ens.effective, beta)
    Ep = np.array([ens.expect(lz[:, k]) for k in range(T + 1)]) / vol
    b = beta * ens.effective
    lc = np.array([ens.expect(log_cosh(b[:, t])) for t in range(T)])
    if variant == "independent":
        th = np.array([abs(ens.expect(np.tanh(b[:, t]))) for t in range(T)])
    else:
        th = np.array([ens.expect(np.abs(np.tanh(b[:, t]))) for t in range(T)])
    cost = lc + th
    ns = range(T + 1) if n is None else [n]
    worst = -math.inf
    for k in ns:
        worst = max(worst, Ep[T] - Ep[k] - math.fsum(cost[k:]) / vol)
    return _report(f"corollary_{variant}", worst, tol, seed, ens.to_dict(), beta=beta)


# ----------------------------------------------------------------------------
# monotonicity checks


def _split_exponents(ens: FiniteEnsemble, selected: Sequence[int], factor=None):
    """Exponent pieces ``(rest, scaled)`` with ``-H = rest + lambda * scaled`` per outcome.

    Selected term ``t`` enters ``scaled`` as ``factor[:, t] * sigma_X``; the
    default factor is the raw coupling, so ``lambda`` plays the multiplier.
    """
    sel = np.zeros(len(ens), dtype=bool)
    sel[list(selected)] = True
    eff = ens.effective
    raw = ens.couplings if factor is None else factor
    total = 1 << ens.n_sites
    rest = np.zeros((len(ens.probs), total))
    scaled = np.zeros_like(rest)
    masks = np.asarray(ens.subsets, dtype=np.int64)
    for a, b in _blocks(ens.n_sites):
        s = _signs(masks, a, b) if len(masks) else np.zeros((0, b - a))
        for t in range(len(masks)):
            if sel[t]:
                scaled[:, a:b] += raw[:, t : t + 1] * s[t]
            else:
                rest[:, a:b] += eff[:, t : t + 1] * s[t]
    return rest, scaled


def _pressure_and_slope(ens, rest, scaled, beta, lam):
    """Quenched ``E ln Z / |L|`` and its exact ``lambda``-derivative."""
    x = beta * (rest + lam * scaled)
    m = x.max(axis=1, keepdims=True)
    w = np.exp(x - m)
    z = w.sum(axis=1)
    lz = m[:, 0] + np.log(z)
    slope = beta * (w * scaled).sum(axis=1) / z
    vol = ens.n_sites
    return ens.expect(lz) / vol, ens.expect(slope) / vol


def _fd_step(lam: float) -> float:
    return 1e-4 * max(1.0, lam)


def cl_monotonicity_check(model, region: Region | None, beta: float, orbit_index, lambda_grid: Sequence[float],
                          seed: int | None = None, fd_tol: float = FD_TOL, agree_tol: float = 1e-6,
                          tol: float = ENUM_TOL) -> CheckReport:
    """Quenched pressure is nondecreasing in the multiplier of centered couplings.

    ``max_violation`` is the largest excess of any component over its own
    tolerance, so the report passes when it is at most zero.

    ``model`` is a :class:`CouplingFamily` placed on ``region`` (the scaled
    terms are the translates of orbit ``orbit_index``) or a
    :class:`FiniteEnsemble` (``orbit_index`` is a term index or a list of
    them).  Checks that the exact quenched pressure does not decrease along
    ``lambda_grid``, that central differences at interior points are
    ``>= -fd_tol``, and that they match ``beta E[J <sigma_X>] / |L|`` to
    ``agree_tol``.
    """
    if isinstance(model, CouplingFamily):
        pl = place(model, region)
        ens = FiniteEnsemble.from_placement(pl)
        selected = [t for t, o in enumerate(pl.orbit_ids) if o == orbit_index]
    else:
        ens = model
        selected = [orbit_index] if np.isscalar(orbit_index) else list(orbit_index)
    grid = np.asarray(lambda_grid, dtype=float)
    if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise PreconditionError("lambda grid must be nonnegative and increasing")
    for t in selected:
        if abs(ens.expect(ens.couplings[:, t])) > 1e-12:
            raise PreconditionError(f"term {t} couplings are not centered")
    if not selected:
        raise PreconditionError("no terms selected")
    rest, scaled = _split_exponents(ens, selected)
    vals, slopes = zip(*(_pressure_and_slope(ens, rest, scaled, beta, lam) for lam in grid))
    vals = np.array(vals)
    mono = float(np.max(vals[:-1] - vals[1:])) if len(vals) > 1 else -math.inf
    fd_worst = -math.inf
    agree = 0.0
    for i in range(1, len(grid) - 1):
        lam = grid[i]
        h = _fd_step(lam)
        up = _pressure_and_slope(ens, rest, scaled, beta, lam + h)[0]
        dn = _pressure_and_slope(ens, rest, scaled, beta, lam - h)[0]
        fd = (up - dn) / (2 * h)
        fd_worst = max(fd_worst, -fd)
        agree = max(agree, abs(fd - slopes[i]))
    violation = max(mono - tol, fd_worst - fd_tol, agree - agree_tol)
    rep = _report("cl", violation, 0.0, seed, ens.to_dict(), beta=beta)
    rep.details.update(
        monotonicity_violation=mono,
        fd_min=-fd_worst if math.isfinite(fd_worst) else None,
        analytic_fd_gap=agree,
        min_analytic_slope=float(np.min(slopes)),
    )
    return rep


def griffiths_check(h: Hamiltonian, beta: float, term_index: int, j_grid: Sequence[float],
                    seed: int | None = None, fd_tol: float = ENUM_TOL, corr_tol: float = 1e-12) -> CheckReport:
    """Pressure of a ferromagnet is nondecreasing in each coupling.

    Varies the coupling of ``term_index`` along ``j_grid`` and checks
    monotone pressure, central differences ``>= -fd_tol`` and
    ``<sigma_X> >= -corr_tol`` for every term subset at every grid point.
    As for the CL check, ``max_violation`` is measured past each tolerance.
    """
    if np.any(h.effective_couplings < 0):
        raise PreconditionError("all couplings must be nonnegative")
    grid = np.asarray(j_grid, dtype=float)
    if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise PreconditionError("coupling grid must be nonnegative and increasing")
    ens = FiniteEnsemble.single(h)
    rest, scaled = _split_exponents(ens, [term_index], factor=ens.multipliers[None, :])
    vals = []
    corr_worst = -math.inf
    masks = h.masks
    for j in grid:
        vals.append(_pressure_and_slope(ens, rest, scaled, beta, j)[0])
        hj = h.with_couplings([j if t == term_index else c.coupling for t, c in enumerate(h.terms)])
        _, corr = batch_log_partition(masks, len(h.region), hj.effective_couplings[None, :], beta, queries=masks)
        corr_worst = max(corr_worst, float(-corr.min()))
    vals = np.array(vals)
    mono = float(np.max(vals[:-1] - vals[1:])) if len(vals) > 1 else -math.inf
    fd_worst = -math.inf
    for j in grid:
        step = _fd_step(j)
        lo = max(0.0, j - step)
        up = _pressure_and_slope(ens, rest, scaled, beta, j + step)[0]
        dn = _pressure_and_slope(ens, rest, scaled, beta, lo)[0]
        fd_worst = max(fd_worst, -(up - dn) / (j + step - lo))
    violation = max(mono - ENUM_TOL, fd_worst - fd_tol, corr_worst - corr_tol)
    rep = _report("griffiths", violation, 0.0, seed, h.to_dict(), beta=beta, term_index=term_index)
    rep.details.update(monotonicity_violation=mono, fd_min=-fd_worst, min_correlation=-corr_worst)
    return rep


# ----------------------------------------------------------------------------
# sub-box inequality


def superadditivity_check(family: CouplingFamily, N: int, N1: int, beta: float, disorder_mode: str = "exact",
                          samples: int = 10_000, seed: int = 0, pressure: Callable[[int], tuple] | None = None,
                          tol: float = ENUM_TOL) -> CheckReport:
    """``p_N >= f p_N1 + (1 - f) ln 2`` with ``f = (m N1)^d / N^d``, ``m = N // N1``.

    ``disorder_mode`` is ``exact`` (deterministic families or finitely
    supported disorder) or ``mc``; Monte Carlo comparisons allow five
    combined standard errors.
    """
    if pressure is None:
        pressure = _pressure_fn(family, beta, disorder_mode, samples, seed)
    m, r, f = box_decompose(N, N1, family.dimension)
    pN, sN, _ = pressure(N)
    p1, s1, _ = pressure(N1)
    rhs = f * p1 + (1 - f) * LN2
    stat = SIGMA * math.hypot(sN, f * s1)
    return _report("superadditivity", rhs - pN - stat, tol, None, None,
                   N=N, N1=N1, m=m, r=r, volume_fraction=f, p_N=pN, p_N1=p1, beta=beta)


def _pressure_fn(family, beta, mode, samples, seed):
    if mode == "exact":
        kind = "ferro_exact" if family.is_deterministic else "quenched_exact"
    elif mode == "mc":
        kind = "quenched_mc"
    else:
        raise ValueError(f"unknown disorder mode {mode!r}")
    cache = {}

    def pressure(n):
        if n not in cache:
            cache[n] = box_pressure(family, n, beta, kind, samples, seed)
        return cache[n]

    return pressure


def superadditivity_sweep(family: CouplingFamily, N_max: int, beta: float, disorder_mode: str = "exact",
                          samples: int = 10_000, seed: int = 0) -> CheckReport:
    """Sub-box inequality for every pair ``1 <= N1 <= N <= N_max``."""
    pressure = _pressure_fn(family, beta, disorder_mode, samples, seed)
    reps = [
        superadditivity_check(family, N, N1, beta, disorder_mode, samples, seed, pressure)
        for N in range(1, N_max + 1)
        for N1 in range(1, N + 1)
    ]
    out = merge_reports("superadditivity", reps)
    worst = max(reps, key=lambda r: r.max_violation)
    out.details.update({k: worst.details[k] for k in ("N", "N1", "beta")})
    return out


# ----------------------------------------------------------------------------
# heavy-tail truncation


def truncation_error_check(family: CouplingFamily, region: Region, beta: float, R_grid: Sequence[float],
                           n_samples: int, seed: int, threads: int = 1) -> CheckReport:
    """Effect of truncating every coupling at ``R`` on the quenched pressure.

    For each ``R`` the pressures with the full couplings and with the bounded
    parts are evaluated on the same draws; their mean difference must stay
    below ``(2 beta / |L|) sum_X lambda_X E|J2_X|`` plus five standard errors,
    and that bound must not increase along the (increasing) grid.
    """
    pl = place(family, region)
    for d in pl.distributions:
        if isinstance(d, SymmetricPareto) and d.alpha <= 1:
            raise PreconditionError("truncation check needs a finite first moment (alpha > 1)")
        if not d.centered and d.kind != "deterministic":
            raise PreconditionError(f"{d.kind} law is not centered")
    R = np.asarray(R_grid, dtype=float)
    if np.any(R <= 0) or np.any(np.diff(R) <= 0):
        raise PreconditionError("R grid must be positive and increasing")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    vol = len(region)
    lam = np.asarray(pl.multipliers, dtype=float)
    C = np.array([pl.draw(stream(seed, i)) for i in range(n_samples)]).reshape(n_samples, len(pl))
    full = batch_log_partition(pl.subsets, vol, C * lam, beta) / vol
    rows = []
    worst = -math.inf
    for r in R:
        pairs = [truncate(d, r) for d in pl.distributions]
        C1 = np.column_stack([pr.split(C[:, t])[0] for t, pr in enumerate(pairs)]) if len(pl) else C
        part = batch_log_partition(pl.subsets, vol, C1 * lam, beta) / vol
        diff = full - part
        mean = float(np.mean(diff))
        se = float(np.std(diff, ddof=1) / math.sqrt(n_samples))
        bound = 2 * beta / vol * math.fsum(l * pr.tail_abs_mean() for l, pr in zip(lam, pairs))
        worst = max(worst, mean - bound - SIGMA * se - NOISE_FLOOR)
        rows.append({"R": float(r), "difference": mean, "std_error": se, "bound": bound})
    bounds = np.array([row["bound"] for row in rows])
    mono = float(np.max(bounds[1:] - bounds[:-1])) if len(bounds) > 1 else -math.inf
    shrinks = len(bounds) < 2 or bounds[0] == 0 or bounds[-1] < bounds[0]
    violation = max(worst, mono)
    rep = _report("truncation", violation, 0.0, seed, {"family": family.to_dict(), "side": region.side},
                  beta=beta, rows=rows)
    rep.passed = rep.passed and shrinks
    return rep
