"""Drives the slot loop over a horizon and reduces it to summary statistics.

One run is sequential and deterministic: identical (scenario, seed) pairs
give bit-identical SimStats on either backend.  Distinct runs share nothing
and may execute concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import KernelInputs, KernelTotals, run_kernel
from .model import ArrivalModel, ChannelModel, QueueState
from .scenario import Scenario
from .schedulers import SchedulerKind


@dataclass(frozen=True)
class SimStats:
    """Time averages over the measured window plus whole-run conservation totals.

    Backlog averages are over the pre-slot states of the measured slots
    (starting from empty queues); measured delay covers packets that departed
    inside the window, while packets still queued at the horizon count toward
    backlog only.  delay_little is the nominal-rate Little conversion
    qtot_mean / lambda_tot.
    """

    n: int
    horizon: int
    warmup_slots: int
    lambda_tot: float
    qtot_mean: float
    q_mean: tuple[float, ...]
    delay_measured: float | None
    delay_little: float | None
    z_mean: float
    prob_z_ge_half: float
    residual_backlog_mean: float
    full_backlog_mean: float
    arrivals_total: int
    departures_total: int
    departed_measured: int
    final_qtot: int
    z_trace: np.ndarray | None = field(default=None, compare=False, repr=False)


def little_delay(qtot_mean: float, lambda_tot: float) -> float:
    """Average delay implied by average backlog at the nominal total rate."""
    if lambda_tot <= 0:
        raise ValueError("Little conversion needs a positive total arrival rate")
    return qtot_mean / lambda_tot


def residual_split(q: QueueState, channels: ChannelModel) -> tuple[int, int]:
    """(residual, full) backlog: queues below their peak rate vs. at or above.

    Residual packets sit in queues with 0 < Q_i < mu_i,max and cannot fill a
    full transmission; the two parts always sum to Q_tot.
    """
    residual = 0
    full = 0
    for qi, mm in zip(q.backlog, channels.mu_max):
        if qi <= 0:
            continue
        if qi < mm:
            residual += qi
        else:
            full += qi
    return residual, full


@dataclass(frozen=True)
class DriftProbe:
    """Conditional one-slot drift of Z(t), split at the half-system threshold."""

    threshold: int
    mean_above: float | None
    count_above: int
    mean_below: float | None
    count_below: int


def drift_probe(z_trace: np.ndarray, n_links: int) -> DriftProbe:
    """Empirical E[dZ | Z >= ceil(N/2)] and E[dZ | Z < ceil(N/2)] from a trace.

    A condition with zero visits reports mean None rather than a number.
    """
    z = np.asarray(z_trace, dtype=np.int64)
    if z.ndim != 1 or z.shape[0] < 2:
        raise ValueError("need a trace of at least two Z values")
    threshold = -(-n_links // 2)
    dz = np.diff(z)
    above = z[:-1] >= threshold
    n_above = int(above.sum())
    n_below = dz.shape[0] - n_above
    return DriftProbe(
        threshold=threshold,
        mean_above=float(dz[above].mean()) if n_above else None,
        count_above=n_above,
        mean_below=float(dz[~above].mean()) if n_below else None,
        count_below=n_below,
    )


def simulate(
    channels: ChannelModel,
    arrivals: ArrivalModel,
    scheduler: SchedulerKind,
    horizon: int,
    seed: int,
    warmup_fraction: float = 0.0,
    keep_z_trace: bool = False,
    backend: str = "auto",
) -> SimStats:
    """Run one seeded trajectory from empty queues and reduce to SimStats."""
    if not 0.0 <= warmup_fraction < 1.0:
        raise ValueError("warm-up fraction must be in [0, 1)")
    warmup = int(horizon * warmup_fraction)
    inputs = KernelInputs.build(
        channels=channels,
        arrivals=arrivals,
        scheduler=scheduler,
        horizon=horizon,
        seed=seed,
        warmup=warmup,
        collect_z=keep_z_trace,
    )
    totals = run_kernel(inputs, backend=backend)
    return _reduce(inputs, totals, arrivals.lambda_tot)


def run_simulation(
    scenario: Scenario,
    seed: int | None = None,
    keep_z_trace: bool = False,
    backend: str = "auto",
) -> SimStats:
    """Run one scenario trajectory; ``seed`` overrides the scenario seed for
    replication sweeps."""
    return simulate(
        channels=scenario.channels(),
        arrivals=scenario.arrivals(),
        scheduler=scenario.scheduler,
        horizon=scenario.horizon,
        seed=scenario.seed if seed is None else seed,
        warmup_fraction=scenario.warmup_fraction,
        keep_z_trace=keep_z_trace,
        backend=backend,
    )


def _reduce(inputs: KernelInputs, totals: KernelTotals, lambda_tot: float) -> SimStats:
    measured = inputs.horizon - inputs.warmup
    if totals.final_qtot != totals.arrivals_total - totals.departures_total:
        raise RuntimeError(
            "packet conservation violated: "
            f"final={totals.final_qtot} arrivals={totals.arrivals_total} "
            f"departures={totals.departures_total}"
        )
    qtot_mean = totals.qtot_sum / measured
    delay_measured = (
        totals.delay_sum / totals.departed_measured if totals.departed_measured else None
    )
    delay_little = qtot_mean / lambda_tot if lambda_tot > 0 else None
    return SimStats(
        n=inputs.n,
        horizon=inputs.horizon,
        warmup_slots=inputs.warmup,
        lambda_tot=lambda_tot,
        qtot_mean=qtot_mean,
        q_mean=tuple(float(x) / measured for x in totals.q_sum),
        delay_measured=delay_measured,
        delay_little=delay_little,
        z_mean=totals.z_sum / measured,
        prob_z_ge_half=totals.z_ge_count / measured,
        residual_backlog_mean=totals.residual_sum / measured,
        full_backlog_mean=totals.full_sum / measured,
        arrivals_total=totals.arrivals_total,
        departures_total=totals.departures_total,
        departed_measured=totals.departed_measured,
        final_qtot=totals.final_qtot,
        z_trace=totals.z_trace,
    )


def batch_standard_error(trace: np.ndarray, batches: int = 100) -> float:
    """Standard error of the trace mean by non-overlapping batch means."""
    x = np.asarray(trace, dtype=np.float64)
    if x.shape[0] < 2 * batches:
        raise ValueError("trace too short for the requested batch count")
    usable = (x.shape[0] // batches) * batches
    means = x[:usable].reshape(batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))
