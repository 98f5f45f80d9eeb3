"""Exact computations on the ON/OFF capacity region.

The region is the polytope of rate vectors whose sum over every non-empty
link subset L stays below 1 - prod_{i in L}(1 - p_i).  Membership and load
are exact: full subset enumeration up to 24 links, and a sorted-prefix fast
path for symmetric ON probabilities that is exact at any N.  There is no
approximate fallback; out-of-range inputs fail loudly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ChannelModel

# Absolute slack for boundary comparisons, so scale_to_load round-trips
# through onoff_load at the target.
BOUNDARY_SLACK = 1e-12

_ENUM_MAX_LINKS = 24
_ENUM_BLOCK_BITS = 20


class ExactCheckUnavailable(ValueError):
    """Raised when no exact membership/load computation exists for the input."""


def r_k(p_min: float, k: int) -> float:
    """Probability that at least one of k links with ON probability p_min is ON."""
    if not 0.0 < p_min <= 1.0:
        raise ValueError(f"p_min must be in (0, 1], got {p_min}")
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return 1.0 - (1.0 - p_min) ** k


def mu_sym_k(p_min: float, k: int) -> float:
    """Symmetric per-link rate r_k / k; strictly decreasing in k."""
    return r_k(p_min, k) / k


@dataclass(frozen=True)
class CapacityParams:
    """ON probabilities of an ON/OFF system, all strictly positive."""

    on_probabilities: tuple[float, ...]

    def __post_init__(self):
        if not self.on_probabilities:
            raise ValueError("need at least one link")
        for i, p in enumerate(self.on_probabilities):
            if not 0.0 < p <= 1.0:
                raise ValueError(f"link {i}: ON probability must be in (0, 1], got {p}")

    @classmethod
    def symmetric(cls, p: float, n: int) -> "CapacityParams":
        return cls((float(p),) * n)

    @classmethod
    def from_channels(cls, channels: ChannelModel) -> "CapacityParams":
        if not channels.is_on_off:
            raise ValueError("capacity parameters are defined for ON/OFF channels only")
        return cls(channels.on_probabilities())

    @property
    def n(self) -> int:
        return len(self.on_probabilities)

    @property
    def p_min(self) -> float:
        return min(self.on_probabilities)

    @property
    def is_symmetric(self) -> bool:
        return len(set(self.on_probabilities)) == 1


@dataclass(frozen=True)
class LoadReport:
    """Load factor rho plus the subset of links achieving the binding ratio."""

    rho: float
    binding_subset: tuple[int, ...]


def _check_rates(lam: Sequence[float], params: CapacityParams) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    if lam.ndim != 1 or lam.shape[0] != params.n:
        raise ValueError("rate vector length disagrees with link count")
    if np.any(lam < 0):
        raise ValueError("rates must be non-negative")
    return lam


def _load_symmetric(lam: np.ndarray, p: float) -> LoadReport:
    """Exact load for equal ON probabilities: only sorted-prefix subsets bind."""
    n = lam.shape[0]
    order = np.argsort(-lam, kind="stable")
    prefix = np.cumsum(lam[order])
    ks = np.arange(1, n + 1)
    ratios = prefix / (1.0 - (1.0 - p) ** ks)
    k_star = int(np.argmax(ratios))
    binding = tuple(sorted(int(i) for i in order[: k_star + 1]))
    return LoadReport(rho=float(ratios[k_star]), binding_subset=binding)


def _load_enumerate(lam: np.ndarray, params: CapacityParams) -> LoadReport:
    """Exact load by enumerating all 2^N - 1 non-empty subsets (N <= 24)."""
    n = params.n
    if n > _ENUM_MAX_LINKS:
        raise ExactCheckUnavailable(
            f"exact check unavailable: {n} heterogeneous links exceed the "
            f"{_ENUM_MAX_LINKS}-link enumeration limit"
        )
    q = 1.0 - np.asarray(params.on_probabilities, dtype=np.float64)
    m = min(n, _ENUM_BLOCK_BITS)
    sums = np.zeros(1)
    prods = np.ones(1)
    for i in range(m):
        sums = np.concatenate([sums, sums + lam[i]])
        prods = np.concatenate([prods, prods * q[i]])

    best_ratio = -1.0
    best_base = 0
    best_extra = 0
    extra_links = range(m, n)
    for extra in range(1 << (n - m)):
        s_extra = sum(lam[i] for b, i in enumerate(extra_links) if extra >> b & 1)
        p_extra = math.prod(q[i] for b, i in enumerate(extra_links) if extra >> b & 1)
        denom = 1.0 - prods * p_extra
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = (sums + s_extra) / denom
        if extra == 0:
            ratios[0] = -np.inf  # the empty subset is excluded
        idx = int(np.argmax(ratios))
        if ratios[idx] > best_ratio:
            best_ratio = float(ratios[idx])
            best_base, best_extra = idx, extra

    members = [i for i in range(m) if best_base >> i & 1]
    members += [i for b, i in enumerate(extra_links) if best_extra >> b & 1]
    return LoadReport(rho=max(best_ratio, 0.0), binding_subset=tuple(members))


def onoff_load(
    lam: Sequence[float],
    params: CapacityParams,
    method: str = "auto",
) -> LoadReport:
    """Smallest rho with lam inside the rho-scaled region, plus binding subset.

    ``method`` is "auto" (symmetric fast path when possible), "sorted"
    (force the symmetric fast path) or "enumerate" (force full enumeration).
    """
    lam = _check_rates(lam, params)
    if not np.any(lam > 0):
        return LoadReport(rho=0.0, binding_subset=())
    if method not in ("auto", "sorted", "enumerate"):
        raise ValueError(f"unknown method {method!r}")
    if method == "sorted" or (method == "auto" and params.is_symmetric):
        if not params.is_symmetric:
            raise ValueError("sorted-prefix fast path requires symmetric ON probabilities")
        return _load_symmetric(lam, params.on_probabilities[0])
    return _load_enumerate(lam, params)


def onoff_membership(
    lam: Sequence[float],
    params: CapacityParams,
    method: str = "auto",
) -> bool:
    """True iff every subset constraint holds (within the boundary slack)."""
    return onoff_load(lam, params, method=method).rho <= 1.0 + BOUNDARY_SLACK


def scale_to_load(
    shape: Sequence[float],
    params: CapacityParams,
    rho_target: float,
) -> np.ndarray:
    """Scale a non-negative shape vector so its load factor equals rho_target."""
    if rho_target <= 0:
        raise ValueError(f"target load must be positive, got {rho_target}")
    shape = _check_rates(shape, params)
    base = onoff_load(shape, params).rho
    if base == 0.0:
        raise ValueError("shape vector has zero load; nothing to scale")
    return shape * (rho_target / base)


def f_balance_beta(lam: Sequence[float], k_groups: int, rho: float) -> float:
    """Tightest balance slack beta for a K-group analysis at load rho.

    With n_hat the smallest multiple of K at least N, beta is the smallest
    value such that every lambda_i <= lambda_tot / n_hat + beta (1 - rho) / K;
    uniform traffic on a multiple of K gives beta = 0.
    """
    if int(k_groups) != k_groups or k_groups < 1:
        raise ValueError(f"group count must be a positive integer, got {k_groups}")
    if rho >= 1.0:
        raise ValueError(f"balance slack is defined for rho < 1, got {rho}")
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[0]
    n_hat = math.ceil(n / k_groups) * k_groups
    slack = float(np.max(lam)) - float(np.sum(lam)) / n_hat
    return max(0.0, slack * k_groups / (1.0 - rho))


def multirate_mu_sym_lower(channels: ChannelModel) -> float:
    """Lower bound on the largest symmetric sum rate of a multi-rate system.

    Equals mu_hat * (1 - (1 - p_min)^N) with mu_hat the smallest per-link
    peak rate and p_min the smallest probability of reaching mu_hat.  Exact
    for symmetric systems; reduces to r_N for ON/OFF links.
    """
    probs = channels.prob_at_least(channels.mu_hat)
    for i, p in enumerate(probs):
        if p <= 0.0:
            raise ValueError(f"link {i} can never transmit at rate {channels.mu_hat}")
    p_min = min(probs)
    return channels.mu_hat * (1.0 - (1.0 - p_min) ** channels.n_links)


def max_rate_second_moment(channels: ChannelModel) -> float:
    """Exact E[max_i S_i(t)^2] via per-value CDF products over the joint support."""
    support = sorted({v for vals in channels.values for v in vals})
    cdf_prev = 0.0
    total = 0.0
    for v in support:
        cdf = 1.0
        for vals, pr in zip(channels.values, channels.probs):
            cdf *= sum(p for val, p in zip(vals, pr) if val <= v)
        total += v * v * (cdf - cdf_prev)
        cdf_prev = cdf
    return total
