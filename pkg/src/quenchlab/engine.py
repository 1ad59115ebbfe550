"""Exact partition functions and Gibbs averages by exhaustive enumeration.

Configuration ``c`` (an integer below ``2**|region|``) has ``sigma_i = -1``
exactly when bit ``i`` of ``c`` is set, so ``sigma_X = (-1)**popcount(c & X)``.

Two independent routes compute ``ln Z``:

* the Gray-code walk (:func:`_gray_log_partition`), which visits every
  configuration flipping one spin at a time and only touches the terms
  incident to the flipped site;
* the vectorised re-evaluation path, which rebuilds every ``sigma_X`` from
  the bit parity of the configuration index in fixed-size blocks.

Both accumulate ``Z`` as a running ``(max exponent, shifted sum)`` pair so
that large ``beta * |J|`` cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import CapacityError
from .lattice import Hamiltonian, InteractionTerm

__all__ = [
    "GibbsSummary",
    "MAX_SITES",
    "log_partition",
    "gibbs_expectation",
    "gibbs_split",
    "partition_ratio",
    "prefix_sweep",
    "batch_log_partition",
    "batch_prefix_log_partition",
]

MAX_SITES = 32
CONFIG_BLOCK = 1 << 13
_BATCH_BUDGET = 1 << 22


@dataclass(frozen=True)
class GibbsSummary:
    log_partition: float
    pressure_density: float
    beta: float
    n_sites: int

    def to_dict(self):
        return {
            "log_partition": self.log_partition,
            "pressure_density": self.pressure_density,
            "beta": self.beta,
            "n_sites": self.n_sites,
        }


def _validate(h: Hamiltonian, beta: float) -> None:
    n = len(h.region)
    if n > MAX_SITES:
        raise CapacityError(f"{n} sites exceeds the enumeration capacity of {MAX_SITES}")
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValueError("beta must be finite and nonnegative")
    c = h.effective_couplings
    if c.size and not np.all(np.isfinite(c)):
        raise ValueError("couplings must be finite")


def _signs(masks: np.ndarray, start: int, stop: int) -> np.ndarray:
    """``(len(masks), stop - start)`` table of sigma_X over a block of configurations."""
    cfg = np.arange(start, stop, dtype=np.uint64)
    par = np.bitwise_count(cfg[None, :] & masks.astype(np.uint64)[:, None]) & 1
    return 1.0 - 2.0 * par.astype(np.float64)


def _blocks(n_sites: int):
    total = 1 << n_sites
    step = min(total, CONFIG_BLOCK)
    for start in range(0, total, step):
        yield start, start + step


class _Stream:
    """Running log-sum-exp with ± split of one or more observables."""

    def __init__(self, shape):
        self.m = np.full(shape, -np.inf)
        self.z = np.zeros(shape)

    def rescale(self, x):
        new_m = np.maximum(self.m, x.max(axis=-1))
        scale = np.exp(self.m - new_m)
        self.z *= scale
        self.m = new_m
        w = np.exp(x - new_m[..., None])
        self.z += w.sum(axis=-1)
        return w, scale

    @property
    def log_value(self):
        return self.m + np.log(self.z)


# ----------------------------------------------------------------------------
# Gray-code walk


@njit(cache=True)
def _gray_log_partition(n_sites, coup, site_ptr, site_terms, beta, query):
    n_terms = coup.shape[0]
    signs = np.ones(n_terms)
    # Neumaier-compensated running exponent
    x = 0.0
    comp = 0.0
    for t in range(n_terms):
        v = beta * coup[t]
        s = x + v
        if abs(x) >= abs(v):
            comp += (x - s) + v
        else:
            comp += (v - s) + x
        x = s
    q = 1.0
    m = x + comp
    zp = 1.0
    zm = 0.0
    total = 1 << n_sites
    for k in range(1, total):
        i = 0
        while not (k >> i) & 1:
            i += 1
        for p in range(site_ptr[i], site_ptr[i + 1]):
            t = site_terms[p]
            signs[t] = -signs[t]
            v = 2.0 * beta * coup[t] * signs[t]
            s = x + v
            if abs(x) >= abs(v):
                comp += (x - s) + v
            else:
                comp += (v - s) + x
            x = s
        if (query >> i) & 1:
            q = -q
        e = x + comp
        if e > m:
            r = math.exp(m - e)
            zp *= r
            zm *= r
            m = e
        w = math.exp(e - m)
        if q > 0:
            zp += w
        else:
            zm += w
    return m, zp, zm


def _incidence(h: Hamiltonian):
    n = len(h.region)
    lists = [[] for _ in range(n)]
    for t, term in enumerate(h.terms):
        m = term.subset
        for i in range(n):
            if m >> i & 1:
                lists[i].append(t)
    ptr = np.zeros(n + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(l) for l in lists])
    flat = np.array([t for l in lists for t in l], dtype=np.int64)
    return ptr, flat


def _gray(h: Hamiltonian, beta: float, query: int = 0):
    ptr, flat = _incidence(h)
    return _gray_log_partition(len(h.region), h.effective_couplings, ptr, flat, float(beta), int(query))


# ----------------------------------------------------------------------------
# vectorised re-evaluation path


def _naive(masks, coup, n_sites, beta, queries=()):
    """ln Z and (sum_plus, sum_minus) for each query, shifted by the same max."""
    queries = np.asarray(queries, dtype=np.int64)
    st = _Stream(())
    qp = np.zeros(len(queries))
    qm = np.zeros(len(queries))
    for a, b in _blocks(n_sites):
        x = np.zeros(b - a)
        if len(masks):
            s = _signs(masks, a, b)
            for t in range(len(masks)):
                x += (beta * coup[t]) * s[t]
        w, scale = st.rescale(x)
        qp *= scale
        qm *= scale
        if len(queries):
            sq = _signs(queries, a, b)
            qp += (w * (sq > 0)).sum(axis=-1)
            qm += (w * (sq < 0)).sum(axis=-1)
    return float(st.log_value), float(st.m), qp, qm


def log_partition(h: Hamiltonian, beta: float, method: str = "gray") -> GibbsSummary:
    """``ln Z`` and pressure density ``ln Z / |region|`` at inverse temperature ``beta``."""
    _validate(h, beta)
    n = len(h.region)
    if method == "gray":
        m, zp, zm = _gray(h, beta)
        lz = m + math.log(zp + zm)
    elif method == "naive":
        lz = _naive(h.masks, h.effective_couplings, n, float(beta))[0]
    else:
        raise ValueError(f"unknown method {method!r}")
    return GibbsSummary(lz, lz / n, float(beta), n)


def gibbs_split(h: Hamiltonian, beta: float, subset: int, method: str = "naive") -> tuple[float, float]:
    """Gibbs probabilities of ``sigma_X = +1`` and ``sigma_X = -1``."""
    _validate(h, beta)
    if subset <= 0 or subset >> len(h.region):
        raise ValueError("subset must be nonempty and inside the region")
    if method == "gray":
        _, zp, zm = _gray(h, beta, subset)
        zp, zm = np.array([zp]), np.array([zm])
    else:
        _, _, zp, zm = _naive(h.masks, h.effective_couplings, len(h.region), float(beta), [subset])
    tot = zp[0] + zm[0]
    return float(zp[0] / tot), float(zm[0] / tot)


def gibbs_expectation(h: Hamiltonian, beta: float, subset: int, method: str = "naive") -> float:
    """``<sigma_X>`` under the Gibbs measure of ``h``; always in [-1, 1]."""
    pp, pm = gibbs_split(h, beta, subset, method)
    return min(1.0, max(-1.0, pp - pm))


def _one_plus_minus_tanh(a: float) -> tuple[float, float]:
    """``(1 + tanh a, 1 - tanh a)`` without cancellation."""
    if a >= 0:
        e = math.exp(-2 * a)
        return 2.0 / (1.0 + e), 2.0 * e / (1.0 + e)
    e = math.exp(2 * a)
    return 2.0 * e / (1.0 + e), 2.0 / (1.0 + e)


def _ratio_closed_form(a: float, pp: float, pm: float) -> float:
    # cosh(a) [1 + tanh(a) <s>] with <s> = pp - pm and pp + pm = 1
    up, dn = _one_plus_minus_tanh(a)
    return math.cosh(a) * (up * pp + dn * pm)


def partition_ratio(h_prefix: Hamiltonian, next_term: InteractionTerm, beta: float) -> float:
    """``Z(prefix + term) / Z(prefix)`` from the cosh/tanh closed form.

    Evaluates ``cosh(b) * (1 + tanh(b) * <sigma_X>)`` with ``b = beta*lambda*J``
    and the average taken in the prefix ensemble; no second partition
    function is computed.
    """
    Hamiltonian(h_prefix.region, (next_term,))  # region check
    pp, pm = gibbs_split(h_prefix, beta, next_term.subset)
    return _ratio_closed_form(beta * next_term.effective, pp, pm)


def prefix_sweep(h: Hamiltonian, beta: float):
    """Quantities for every prefix of ``h`` in one enumeration pass.

    Returns ``(log_z, p_plus, p_minus)``: ``log_z[k]`` is ``ln Z`` of the first
    ``k`` terms (``k = 0 .. T``) and ``p_plus[k]``/``p_minus[k]`` are the
    prefix-``k`` Gibbs probabilities of ``sigma_{X_{k+1}} = ±1``.
    """
    _validate(h, beta)
    lz, pp, pm = batch_prefix_log_partition(
        h.masks, len(h.region), h.effective_couplings[None, :], beta, with_next=True
    )
    return lz[0], pp[0], pm[0]


# ----------------------------------------------------------------------------
# batched evaluation over many coupling vectors sharing one set of subsets


def _rows_per_batch(n_sites: int, width: int) -> int:
    block = min(1 << n_sites, CONFIG_BLOCK)
    return max(1, _BATCH_BUDGET // (block * max(1, width)))


def batch_log_partition(masks, n_sites: int, couplings, beta: float, queries=()):
    """``ln Z`` for each row of ``couplings`` (shape ``(B, T)``), effective couplings.

    With ``queries`` also returns ``(B, Q)`` Gibbs averages of each ``sigma_X``.
    Row results do not depend on how many rows are passed together.
    """
    if n_sites > MAX_SITES:
        raise CapacityError(f"{n_sites} sites exceeds the enumeration capacity of {MAX_SITES}")
    masks = np.asarray(masks, dtype=np.int64)
    C = np.atleast_2d(np.asarray(couplings, dtype=float))
    if C.shape[1] != len(masks):
        raise ValueError("coupling matrix width must match the number of terms")
    queries = np.asarray(queries, dtype=np.int64)
    B = C.shape[0]
    out = np.empty(B)
    exp_ = np.empty((B, len(queries)))
    step = _rows_per_batch(n_sites, 1 + len(queries))
    for r0 in range(0, B, step):
        Cb = C[r0 : r0 + step] * beta
        st = _Stream(Cb.shape[0])
        qp = np.zeros((Cb.shape[0], len(queries)))
        qm = np.zeros_like(qp)
        for a, b in _blocks(n_sites):
            x = np.zeros((Cb.shape[0], b - a))
            if len(masks):
                s = _signs(masks, a, b)
                for t in range(len(masks)):
                    x += Cb[:, t : t + 1] * s[t]
            w, scale = st.rescale(x)
            if len(queries):
                qp *= scale[:, None]
                qm *= scale[:, None]
                sq = _signs(queries, a, b)
                qp += (w[:, None, :] * (sq > 0)).sum(-1)
                qm += (w[:, None, :] * (sq < 0)).sum(-1)
        out[r0 : r0 + step] = st.log_value
        if len(queries):
            exp_[r0 : r0 + step] = (qp - qm) / (qp + qm)
    if len(queries):
        return out, np.clip(exp_, -1.0, 1.0)
    return out


def batch_prefix_log_partition(masks, n_sites: int, couplings, beta: float, with_next: bool = False):
    """``ln Z`` of every prefix for each coupling row: shape ``(B, T + 1)``.

    With ``with_next`` also returns ``(B, T)`` arrays of the prefix-``k``
    probabilities that ``sigma_{X_{k+1}}`` equals +1 and -1.
    """
    if n_sites > MAX_SITES:
        raise CapacityError(f"{n_sites} sites exceeds the enumeration capacity of {MAX_SITES}")
    masks = np.asarray(masks, dtype=np.int64)
    C = np.atleast_2d(np.asarray(couplings, dtype=float))
    B, T = C.shape
    if T != len(masks):
        raise ValueError("coupling matrix width must match the number of terms")
    lz = np.empty((B, T + 1))
    pplus = np.empty((B, T))
    pminus = np.empty((B, T))
    step = _rows_per_batch(n_sites, T + 1)
    for r0 in range(0, B, step):
        Cb = C[r0 : r0 + step] * beta
        nb = Cb.shape[0]
        st = _Stream((nb, T + 1))
        sp = np.zeros((nb, T))
        sm = np.zeros((nb, T))
        for a, b in _blocks(n_sites):
            x = np.zeros((nb, T + 1, b - a))
            if T:
                s = _signs(masks, a, b)
                acc = np.zeros((nb, b - a))
                for t in range(T):
                    acc += Cb[:, t : t + 1] * s[t]
                    x[:, t + 1] = acc
            w, scale = st.rescale(x)
            if with_next and T:
                sp *= scale[:, :T]
                sm *= scale[:, :T]
                sp += (w[:, :T] * (s > 0)).sum(-1)
                sm += (w[:, :T] * (s < 0)).sum(-1)
        lz[r0 : r0 + step] = st.log_value
        if with_next and T:
            tot = sp + sm
            pplus[r0 : r0 + step] = sp / tot
            pminus[r0 : r0 + step] = sm / tot
    if with_next:
        return lz, pplus, pminus
    return lz
