"""Pure-Python slot loop, composed from the library operations.

This is the reference semantics both backends must follow.  Per slot t:

1. snapshot statistics of the pre-slot state (Q_tot, Z, residual/full split),
   counted only once t reaches the warm-up boundary;
2. sample S(t), one draw per link from its channel stream at counter t;
3. select a link (scheduler stream drawn at counter t only when a tie or a
   multi-way random choice actually needs it);
4. serve min(Q, S) packets FIFO from the chosen queue (delay charged as
   t - arrival slot), then admit A(t), one draw per link at counter t.

All accumulators are integers; only the final averaging divides.
"""

from __future__ import annotations

import numpy as np

from . import rng
from .model import QueueState, sample_arrivals, sample_channels, step_queues
from .schedulers import (
    SchedulerKind,
    lcq_select,
    maxweight_multirate_select,
    modified_maxweight_select,
    random_connected_select,
    round_robin_select,
)

_SELECT = {
    SchedulerKind.LCQ: lcq_select,
    SchedulerKind.MAX_WEIGHT: maxweight_multirate_select,
    SchedulerKind.MODIFIED_MAX_WEIGHT: modified_maxweight_select,
    SchedulerKind.RANDOM_CONNECTED: random_connected_select,
}


def run(inputs) -> dict:
    """Run the loop described above; returns the raw integer accumulators."""
    n = inputs.n
    channels = inputs.channels
    arrivals = inputs.arrivals
    ch_streams = rng.streams(inputs.seed, rng.CHANNEL, n)
    arr_streams = rng.streams(inputs.seed, rng.ARRIVAL, n)
    sched_stream = rng.RngStream(inputs.seed, rng.SCHEDULER, 0)
    mu_max = channels.mu_max

    q = QueueState(n)
    rr_pointer = 0
    select = _SELECT.get(inputs.scheduler)

    qtot_sum = z_sum = z_ge = residual_sum = full_sum = 0
    delay_sum = departed_measured = 0
    q_sum = [0] * n
    z_trace = np.zeros(inputs.horizon + 1, dtype=np.int64) if inputs.collect_z else None

    for t in range(inputs.horizon):
        backlog = q.backlog
        z = 0
        if t >= inputs.warmup:
            for i in range(n):
                qi = backlog[i]
                if qi > 0:
                    z += 1
                    if qi < mu_max[i]:
                        residual_sum += qi
                    else:
                        full_sum += qi
                    qtot_sum += qi
                    q_sum[i] += qi
            z_sum += z
            if z >= inputs.z_threshold:
                z_ge += 1
        else:
            z = q.nonempty_count()
        if z_trace is not None:
            z_trace[t] = z

        s = sample_channels(channels, ch_streams, t)
        if inputs.scheduler == SchedulerKind.ROUND_ROBIN:
            choice, rr_pointer = round_robin_select(backlog, s, rr_pointer)
        else:
            choice = select(backlog, s, sched_stream, t)
        mu = [0] * n
        if choice is not None:
            mu[choice] = int(s[choice])

        a = sample_arrivals(arrivals, arr_streams, t)
        delay_before, departed_before = q.delay_sum, q.departed
        step_queues(q, mu, a, t)
        if t >= inputs.warmup:
            delay_sum += q.delay_sum - delay_before
            departed_measured += q.departed - departed_before

    if z_trace is not None:
        z_trace[inputs.horizon] = q.nonempty_count()

    return {
        "qtot_sum": qtot_sum,
        "z_sum": z_sum,
        "z_ge_count": z_ge,
        "residual_sum": residual_sum,
        "full_sum": full_sum,
        "delay_sum": delay_sum,
        "departed_measured": departed_measured,
        "arrivals_total": q.arrivals_total,
        "departures_total": q.departures_total,
        "final_qtot": q.q_tot,
        "q_sum": np.array(q_sum, dtype=np.int64),
        "z_trace": z_trace,
    }
