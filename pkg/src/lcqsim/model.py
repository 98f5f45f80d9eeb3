"""Stochastic primitives of the slotted downlink: channels, arrivals, queues.

The one-slot transition is ``Q_i(t+1) = max(Q_i(t) - mu_i(t), 0) + A_i(t)``
with at most one link served per slot: service is applied first, then the
slot's arrivals are admitted, so a packet arriving during slot t can depart
no earlier than slot t+1 and the minimum packet delay is one slot.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import rng

# Hard cap on the Poisson inverse-CDF search; at the arrival rates this
# simulator sees (lambda_i < a few packets/slot) the cap is unreachable.
POISSON_CAP = 1000


def _as_prob(x: float, what: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{what} must be in [0, 1], got {x}")
    return x


@dataclass(frozen=True)
class ChannelModel:
    """Per-link law of the slot transmission rate (non-negative packets/slot).

    ``values[i]`` is link i's sorted integer support and ``probs[i]`` the
    matching probability masses.  ON/OFF links have support (0, 1).
    """

    values: tuple[tuple[int, ...], ...]
    probs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ValueError("channel model needs matching, non-empty value/prob lists")
        for i, (vals, pr) in enumerate(zip(self.values, self.probs)):
            if len(vals) != len(pr) or not vals:
                raise ValueError(f"link {i}: support and masses differ in length")
            if any(int(v) != v or v < 0 for v in vals):
                raise ValueError(f"link {i}: support must be non-negative integers")
            if list(vals) != sorted(set(vals)):
                raise ValueError(f"link {i}: support must be sorted and duplicate-free")
            for p in pr:
                _as_prob(p, f"link {i} rate mass")
            if abs(sum(pr) - 1.0) > 1e-9:
                raise ValueError(f"link {i}: rate masses sum to {sum(pr)}, not 1")
            if max(vals) < 1:
                raise ValueError(f"link {i}: maximum rate must be >= 1 packet/slot")

    @classmethod
    def on_off(cls, p: float | Sequence[float], n: int | None = None) -> "ChannelModel":
        """ON/OFF links; scalar ``p`` with ``n`` gives a symmetric system."""
        if isinstance(p, (int, float)):
            if n is None:
                raise ValueError("scalar ON probability needs an explicit link count")
            ps = [float(p)] * n
        else:
            ps = [float(x) for x in p]
            if n is not None and n != len(ps):
                raise ValueError("link count disagrees with ON-probability list")
        for x in ps:
            _as_prob(x, "ON probability")
        return cls(
            values=tuple((0, 1) for _ in ps),
            probs=tuple((1.0 - x, x) for x in ps),
        )

    @classmethod
    def multi_rate(cls, values: Sequence[int], probs: Sequence[float], n: int) -> "ChannelModel":
        """One discrete rate law shared by all ``n`` links."""
        vals = tuple(int(v) for v in values)
        pr = tuple(float(p) for p in probs)
        return cls(values=(vals,) * n, probs=(pr,) * n)

    @property
    def n_links(self) -> int:
        return len(self.values)

    @property
    def is_on_off(self) -> bool:
        return all(set(v) <= {0, 1} for v in self.values)

    @property
    def mu_max(self) -> tuple[int, ...]:
        """Per-link maximum transmission rate (top of the support)."""
        return tuple(v[-1] for v in self.values)

    @property
    def mu_hat(self) -> int:
        return min(self.mu_max)

    def on_probabilities(self) -> tuple[float, ...]:
        """Per-link Pr[S_i >= 1]."""
        return self.prob_at_least(1)

    def prob_at_least(self, rate: int) -> tuple[float, ...]:
        """Per-link Pr[S_i >= rate]."""
        return tuple(
            sum(p for v, p in zip(vals, pr) if v >= rate)
            for vals, pr in zip(self.values, self.probs)
        )

    @cached_property
    def tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened (offsets, values, cdf) arrays used by the sampling kernels.

        The last CDF entry of every link is forced to exactly 1.0 so inverse
        CDF search always terminates on a uniform draw in [0, 1).
        """
        offsets = np.zeros(self.n_links + 1, dtype=np.int64)
        flat_vals: list[int] = []
        flat_cdf: list[float] = []
        for i, (vals, pr) in enumerate(zip(self.values, self.probs)):
            cdf = np.cumsum(np.asarray(pr, dtype=np.float64))
            cdf[-1] = 1.0
            flat_vals.extend(vals)
            flat_cdf.extend(cdf.tolist())
            offsets[i + 1] = len(flat_vals)
        return offsets, np.array(flat_vals, dtype=np.int64), np.array(flat_cdf, dtype=np.float64)


@dataclass(frozen=True)
class ArrivalModel:
    """Per-link arrival law, Bernoulli(lambda_i) or Poisson(lambda_i).

    Streams are mutually independent and i.i.d. over slots.
    """

    kinds: tuple[str, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.kinds) != len(self.rates) or not self.kinds:
            raise ValueError("arrival model needs matching, non-empty kind/rate lists")
        for i, (kind, lam) in enumerate(zip(self.kinds, self.rates)):
            if kind not in ("bernoulli", "poisson"):
                raise ValueError(f"link {i}: unknown arrival law {kind!r}")
            if lam < 0:
                raise ValueError(f"link {i}: arrival rate must be non-negative")
            if kind == "bernoulli" and lam > 1.0:
                raise ValueError(f"link {i}: Bernoulli rate {lam} exceeds 1 packet/slot")

    @classmethod
    def bernoulli(cls, rates: Sequence[float]) -> "ArrivalModel":
        rates = tuple(float(x) for x in rates)
        return cls(kinds=("bernoulli",) * len(rates), rates=rates)

    @classmethod
    def poisson(cls, rates: Sequence[float]) -> "ArrivalModel":
        rates = tuple(float(x) for x in rates)
        return cls(kinds=("poisson",) * len(rates), rates=rates)

    @property
    def n_links(self) -> int:
        return len(self.rates)

    @property
    def lambda_tot(self) -> float:
        return float(sum(self.rates))

    @cached_property
    def pexp(self) -> tuple[float, ...]:
        """exp(-lambda_i) per link, precomputed once so both sampling backends
        start the Poisson inverse-CDF search from the same double."""
        return tuple(math.exp(-lam) for lam in self.rates)


def _poisson_inverse(lam: float, pexp: float, u: float) -> int:
    """Smallest k with u < CDF(k); one uniform per draw, shared algorithm."""
    k = 0
    p = pexp
    f = p
    while u >= f and k < POISSON_CAP:
        k += 1
        p *= lam / k
        f += p
    return k


def sample_channels(model: ChannelModel, streams: Sequence[rng.RngStream], t: int) -> np.ndarray:
    """Rate vector S(t); link i uses only its own channel stream at counter t."""
    offsets, values, cdf = model.tables
    out = np.empty(model.n_links, dtype=np.int64)
    for i in range(model.n_links):
        u = streams[i].uniform(t)
        j = int(offsets[i])
        while u >= cdf[j]:
            j += 1
        out[i] = values[j]
    return out


def sample_arrivals(model: ArrivalModel, streams: Sequence[rng.RngStream], t: int) -> np.ndarray:
    """Arrival vector A(t); link i uses only its own arrival stream at counter t."""
    out = np.empty(model.n_links, dtype=np.int64)
    pexp = model.pexp
    for i, (kind, lam) in enumerate(zip(model.kinds, model.rates)):
        u = streams[i].uniform(t)
        if kind == "bernoulli":
            out[i] = 1 if u < lam else 0
        else:
            out[i] = _poisson_inverse(lam, pexp[i], u)
    return out


class QueueState:
    """Per-link backlogs plus FIFO ledgers of in-flight arrival slots.

    The ledger for link i always holds exactly Q_i timestamps (one per queued
    packet; packets arriving together share a timestamp).  Cumulative
    arrival/departure/delay counters support conservation and delay checks.
    """

    __slots__ = ("backlog", "ledgers", "arrivals_total", "departures_total", "delay_sum", "departed")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one link")
        self.backlog: list[int] = [0] * n
        self.ledgers: list[deque[int]] = [deque() for _ in range(n)]
        self.arrivals_total = 0
        self.departures_total = 0
        self.delay_sum = 0
        self.departed = 0

    @property
    def n_links(self) -> int:
        return len(self.backlog)

    @property
    def q_tot(self) -> int:
        return sum(self.backlog)

    def nonempty_count(self) -> int:
        return sum(1 for q in self.backlog if q > 0)

    def ledgers_consistent(self) -> bool:
        return all(len(led) == q for led, q in zip(self.ledgers, self.backlog))


def feasibility_check(mu: Sequence[int], s: Sequence[int]) -> bool:
    """True iff mu has at most one non-zero entry and that entry equals S_i."""
    if len(mu) != len(s):
        raise ValueError("transmission and rate vectors differ in length")
    nonzero = [i for i, m in enumerate(mu) if m != 0]
    if len(nonzero) > 1:
        return False
    return all(mu[i] == s[i] for i in nonzero)


def step_queues(
    q: QueueState,
    mu: Sequence[int],
    a: Sequence[int],
    t: int,
    s: Sequence[int] | None = None,
) -> QueueState:
    """Advance one slot in place: serve min(Q_i, mu_i) FIFO, then admit A_i.

    Served packets leave during slot t and are charged delay t minus their
    arrival slot.  If ``s`` is given, mu is checked against it; regardless,
    mu must have at most one non-zero entry.
    """
    if len(mu) != q.n_links or len(a) != q.n_links:
        raise ValueError("vector length disagrees with link count")
    if s is not None and not feasibility_check(mu, s):
        raise ValueError("infeasible transmission vector for the given rate vector")
    served = [i for i, m in enumerate(mu) if m != 0]
    if len(served) > 1:
        raise ValueError("infeasible transmission vector: more than one link served")

    if served:
        i = served[0]
        m = int(mu[i])
        if m < 0:
            raise ValueError("transmission entries must be non-negative integers")
        d = min(q.backlog[i], m)
        led = q.ledgers[i]
        for _ in range(d):
            ts = led.popleft()
            q.delay_sum += t - ts
        q.backlog[i] -= d
        q.departed += d
        q.departures_total += d

    for i, ai in enumerate(a):
        ai = int(ai)
        if ai < 0:
            raise ValueError("arrival entries must be non-negative integers")
        if ai:
            q.ledgers[i].extend([t] * ai)
            q.backlog[i] += ai
            q.arrivals_total += ai
    return q
