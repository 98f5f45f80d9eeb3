"""Closed-form backlog and delay bounds for the scheduled downlink.

Four bound families are evaluated from (rates, channel parameters, arrival
moments, load factor):

* legacy     - the older linear-in-N ON/OFF bound;
* arbitrary  - the O(1) ON/OFF bound for any rates inside the scaled region,
               from a two-term (per-queue + total-backlog) drift argument,
               minimized over the group size K and over the legacy member;
* balanced   - the tighter O(1) ON/OFF bound under nearly-balanced rates,
               from a queue-grouped drift argument;
* multirate  - the linear-in-N bound for general bounded-rate channels.

Every report carries the constants it used, so a bound value can always be
re-derived from its report.  All constants are deterministic functions of
the models; nothing is estimated from samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .capacity import (
    CapacityParams,
    f_balance_beta,
    max_rate_second_moment,
    mu_sym_k,
    multirate_mu_sym_lower,
    r_k,
)
from .model import ArrivalModel, ChannelModel


@dataclass(frozen=True)
class ArrivalMoments:
    """First and second moments of the per-link arrival laws."""

    rates: tuple[float, ...]
    second_moments: tuple[float, ...]
    kinds: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.rates) != len(self.second_moments) or not self.rates:
            raise ValueError("need matching, non-empty rate/moment lists")
        for i, (lam, m2) in enumerate(zip(self.rates, self.second_moments)):
            if m2 < lam * lam - 1e-12:
                raise ValueError(f"link {i}: E[A^2]={m2} below lambda^2={lam * lam}")

    @property
    def n(self) -> int:
        return len(self.rates)

    @property
    def lambda_tot(self) -> float:
        return float(sum(self.rates))

    @property
    def sum_second(self) -> float:
        """Sum over links of E[A_i^2]."""
        return float(sum(self.second_moments))

    @property
    def sum_rate_sq(self) -> float:
        return float(sum(lam * lam for lam in self.rates))

    @property
    def total_second(self) -> float:
        """E[A_tot^2] under independent per-link streams."""
        return self.sum_second - self.sum_rate_sq + self.lambda_tot**2


def arrival_moments(model: ArrivalModel) -> ArrivalMoments:
    """Exact moments: Bernoulli gives E[A^2] = lambda, Poisson lambda + lambda^2."""
    second = tuple(
        lam if kind == "bernoulli" else lam + lam * lam
        for kind, lam in zip(model.kinds, model.rates)
    )
    return ArrivalMoments(rates=model.rates, second_moments=second, kinds=model.kinds)


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound: backlog (packets), delay (slots), and constants.

    When both are present, delay_bound = backlog_bound / lambda_tot.  An
    inapplicable report states which condition failed and carries no values.
    """

    kind: str
    applicable: bool
    backlog_bound: float | None = None
    delay_bound: float | None = None
    reason: str = ""
    constants: dict[str, float] = field(default_factory=dict)


def _inapplicable(kind: str, reason: str, **constants: float) -> BoundReport:
    return BoundReport(kind=kind, applicable=False, reason=reason, constants=dict(constants))


def _check_inputs(moments: ArrivalMoments, n: int) -> None:
    if moments.n != n:
        raise ValueError("arrival moments disagree with link count")
    if moments.lambda_tot <= 0:
        raise ValueError("bounds need a positive total arrival rate")


def legacy_onoff_bound(
    moments: ArrivalMoments, params: CapacityParams, rho: float
) -> BoundReport:
    """Linear-in-N ON/OFF delay bound; valid for any rates at load rho < 1."""
    _check_inputs(moments, params.n)
    if not 0.0 < rho < 1.0:
        return _inapplicable("legacy", f"load rho={rho:g} outside (0, 1)")
    n = params.n
    lam_tot = moments.lambda_tot
    rn = r_k(params.p_min, n)
    bracket = 1.0 + moments.sum_second / lam_tot - 2.0 * moments.sum_rate_sq / lam_tot
    delay = n * bracket / (2.0 * rn * (1.0 - rho))
    return BoundReport(
        kind="legacy",
        applicable=True,
        backlog_bound=delay * lam_tot,
        delay_bound=delay,
        constants={"r_N": rn, "B_0": _b_theta(moments, 0.0)},
    )


def _b_theta(moments: ArrivalMoments, theta: float) -> float:
    """Drift constant of the two-term argument at mixing weight theta."""
    lam_tot = moments.lambda_tot
    base = lam_tot / 2.0 + moments.sum_second / 2.0 - moments.sum_rate_sq
    return base + (theta / 2.0) * (moments.total_second + lam_tot - 2.0 * lam_tot**2)


def _arbitrary_at_k(
    moments: ArrivalMoments, params: CapacityParams, rho: float, k: int
) -> dict[str, float]:
    """Constants and the K-dependent backlog member of the arbitrary-rate bound."""
    n = params.n
    p_min = params.p_min
    lam_tot = moments.lambda_tot
    rk1 = r_k(p_min, k + 1)
    if k < n:
        mu_k = mu_sym_k(p_min, k)
        mu_n = mu_sym_k(p_min, n)
        theta = (1.0 - rho) * (mu_k - mu_n) / rk1
        c = rk1 / (
            r_k(p_min, n) * k * lam_tot / (n * (1.0 - rho))
            + r_k(p_min, k) * (rk1 - lam_tot) / (1.0 - rho)
        )
        epsilon = (1.0 - rho) * mu_k - theta * lam_tot
    else:
        theta = 0.0
        c = 1.0 / r_k(p_min, n)
        epsilon = (1.0 - rho) * mu_sym_k(p_min, n)
    b_theta = _b_theta(moments, theta)
    backlog_new = k * b_theta * c / (1.0 - rho) ** 2
    return {
        "K": float(k),
        "theta": theta,
        "epsilon": epsilon,
        "B_theta": b_theta,
        "C": c,
        "backlog_new": backlog_new,
    }


def onoff_arbitrary_bound(
    moments: ArrivalMoments,
    params: CapacityParams,
    rho: float,
    k: int | None = None,
) -> BoundReport:
    """O(1) ON/OFF bound for arbitrary rates inside the rho-scaled region.

    The group size K must satisfy r_{K+1} > lambda_tot.  With ``k`` omitted,
    every admissible K up to N is evaluated (K >= N collapses to a single
    branch) and the smallest bound is reported.  The delay bound is the
    smaller of the K-dependent member and the legacy member.
    """
    _check_inputs(moments, params.n)
    if not 0.0 < rho < 1.0:
        return _inapplicable("arbitrary", f"load rho={rho:g} outside (0, 1)")
    n = params.n
    lam_tot = moments.lambda_tot
    p_min = params.p_min

    if k is not None:
        if int(k) != k or k < 1:
            raise ValueError(f"K must be a positive integer, got {k}")
        if not r_k(p_min, k + 1) > lam_tot:
            raise ValueError(
                f"K={k} violates the admissibility condition "
                f"1 - (1 - p_min)^(K+1) > lambda_tot: "
                f"{r_k(p_min, k + 1):.6g} <= {lam_tot:.6g}"
            )
        best = _arbitrary_at_k(moments, params, rho, int(k))
    else:
        k_lo = smallest_admissible_k(lam_tot, p_min)
        best = None
        for kk in range(k_lo, n + 1):
            cand = _arbitrary_at_k(moments, params, rho, kk)
            if best is None or cand["backlog_new"] < best["backlog_new"]:
                best = cand
        if best is None:  # k_lo > n can only happen at rho >= 1, caught above
            return _inapplicable("arbitrary", "no admissible K")

    legacy = legacy_onoff_bound(moments, params, rho)
    delay = min(best.pop("backlog_new") / lam_tot, legacy.delay_bound)
    return BoundReport(
        kind="arbitrary",
        applicable=True,
        backlog_bound=delay * lam_tot,
        delay_bound=delay,
        constants=best,
    )


def smallest_admissible_k(lambda_tot: float, p_min: float) -> int:
    """Smallest K >= 1 with r_{K+1} > lambda_tot."""
    if lambda_tot >= 1.0:
        raise ValueError("no group size is admissible at lambda_tot >= 1")
    k = 1
    while not r_k(p_min, k + 1) > lambda_tot:
        k += 1
    return k


@dataclass(frozen=True)
class KSelectors:
    """The three group-size selection rules, smallest admissible value each."""

    feasible_min: int  # smallest K with r_{K+1} > lambda_tot
    log_rule: int  # closed-form max(1, ceil(log(2/(1-rho)) / log(1/(1-p_min))) - 1)
    balanced: int  # smallest K with r_K >= (1+rho)/2 (balanced-traffic bound)


def k_selectors(lambda_tot: float, p_min: float, rho: float) -> KSelectors:
    if not 0.0 < p_min <= 1.0:
        raise ValueError(f"p_min must be in (0, 1], got {p_min}")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    if p_min == 1.0:
        log_rule = 1
    else:
        log_rule = max(
            1, math.ceil(math.log(2.0 / (1.0 - rho)) / math.log(1.0 / (1.0 - p_min))) - 1
        )
    k_bal = 1
    while r_k(p_min, k_bal) < (1.0 + rho) / 2.0:
        k_bal += 1
    return KSelectors(
        feasible_min=smallest_admissible_k(lambda_tot, p_min),
        log_rule=log_rule,
        balanced=k_bal,
    )


def onoff_balanced_bound(
    moments: ArrivalMoments, params: CapacityParams, rho: float
) -> BoundReport:
    """Tighter O(1) ON/OFF bound under nearly-balanced rates.

    Uses the smallest K with r_K >= (1 + rho)/2; applicable when K <= N and
    the balance slack beta stays below 1/(2z).  For uniform Poisson traffic
    with N a multiple of K, the sharper specialized values are reported in
    the constants as Q_uniform_poisson / W_uniform_poisson.
    """
    _check_inputs(moments, params.n)
    if not 0.0 < rho < 1.0:
        return _inapplicable("balanced", f"load rho={rho:g} outside (0, 1)")
    n = params.n
    lam_tot = moments.lambda_tot
    k = 1
    while r_k(params.p_min, k) < (1.0 + rho) / 2.0:
        k += 1
    if k > n:
        return _inapplicable("balanced", f"group size K={k} exceeds N={n}", K=float(k))
    n_hat = math.ceil(n / k) * k
    z = 0.0 if k == 1 else (1.0 - 1.0 / k) / (1.0 - 1.0 / n_hat)
    beta = f_balance_beta(moments.rates, k, rho)
    if z > 0.0 and beta >= 1.0 / (2.0 * z):
        return _inapplicable(
            "balanced",
            f"balance slack beta={beta:.6g} >= 1/(2z)={1.0 / (2.0 * z):.6g}",
            K=float(k),
            z=z,
            beta=beta,
        )
    d = 0.5 * (lam_tot + moments.total_second)
    backlog = k * d / ((1.0 - rho) * (0.5 - z * beta))
    constants = {"K": float(k), "N_hat": float(n_hat), "z": z, "beta": beta, "D": d}

    uniform = len(set(moments.rates)) == 1
    all_poisson = moments.kinds is not None and set(moments.kinds) == {"poisson"}
    if uniform and all_poisson and n % k == 0:
        constants["Q_uniform_poisson"] = (2.0 * k * lam_tot - lam_tot**2) / (1.0 - rho)
        constants["W_uniform_poisson"] = (2.0 * k - lam_tot) / (1.0 - rho)

    return BoundReport(
        kind="balanced",
        applicable=True,
        backlog_bound=backlog,
        delay_bound=backlog / lam_tot,
        constants=constants,
    )


def multirate_bound(
    moments: ArrivalMoments, channels: ChannelModel, rho: float
) -> BoundReport:
    """Linear-in-N delay bound for bounded multi-rate channels under max-weight.

    Uses the exact peak-rate second moment E[max_i S_i^2] and the symmetric
    sum-rate lower bound (exact r_N for ON/OFF links).
    """
    _check_inputs(moments, channels.n_links)
    if not 0.0 < rho < 1.0:
        return _inapplicable("multirate", f"load rho={rho:g} outside (0, 1)")
    n = channels.n_links
    lam_tot = moments.lambda_tot
    if all(m == 1 for m in channels.mu_max):
        p_min = min(channels.on_probabilities())
        mu_sym = r_k(p_min, n)
    else:
        mu_sym = multirate_mu_sym_lower(channels)
    s_hat_sq = max_rate_second_moment(channels)
    cross = min(
        sum(lam * mm for lam, mm in zip(moments.rates, channels.mu_max)) / lam_tot,
        s_hat_sq / lam_tot,
    )
    delay = (
        n
        * (moments.sum_second / (2.0 * lam_tot) - 3.0 * moments.sum_rate_sq / (2.0 * lam_tot) + cross)
        / ((1.0 - rho) * mu_sym)
    )
    return BoundReport(
        kind="multirate",
        applicable=True,
        backlog_bound=delay * lam_tot,
        delay_bound=delay,
        constants={"mu_sym": mu_sym, "S_hat_sq": s_hat_sq, "mu_hat": float(channels.mu_hat)},
    )
