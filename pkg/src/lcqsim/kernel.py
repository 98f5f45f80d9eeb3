"""Backend selection for the slot loop.

The compiled extension is used when it was built; otherwise the pure-Python
reference loop takes over.  Setting LCQSIM_PURE_PYTHON=1 forces the fallback.
Both backends consume the same precomputed tables and stream keys and
produce integer accumulators, so their outputs are identical bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import rng
from .model import ArrivalModel, ChannelModel
from .schedulers import SCHEDULER_CODES, SchedulerKind

try:  # built by setup.py; absent in a plain source checkout
    from . import _kernel as _compiled
except ImportError:  # pragma: no cover - depends on the install
    _compiled = None

from . import _kernel_py


def compiled_available() -> bool:
    return _compiled is not None


def active_backend() -> str:
    """Name of the backend run_kernel("auto") would pick."""
    if _compiled is None or os.environ.get("LCQSIM_PURE_PYTHON") == "1":
        return "python"
    return "compiled"


@dataclass
class KernelInputs:
    """Everything one run needs, resolved to plain arrays plus the models."""

    n: int
    horizon: int
    seed: int
    warmup: int
    scheduler: SchedulerKind
    z_threshold: int
    collect_z: bool
    channels: ChannelModel
    arrivals: ArrivalModel

    @classmethod
    def build(
        cls,
        channels: ChannelModel,
        arrivals: ArrivalModel,
        scheduler: SchedulerKind,
        horizon: int,
        seed: int,
        warmup: int = 0,
        collect_z: bool = False,
    ) -> "KernelInputs":
        n = channels.n_links
        if arrivals.n_links != n:
            raise ValueError("channel and arrival models disagree on link count")
        if horizon < 1:
            raise ValueError("horizon must be at least one slot")
        if not 0 <= warmup < horizon:
            raise ValueError("warm-up must leave at least one measured slot")
        if scheduler == SchedulerKind.LCQ and not channels.is_on_off:
            raise ValueError("longest-connected-queue scheduling needs ON/OFF channels")
        return cls(
            n=n,
            horizon=int(horizon),
            seed=int(seed),
            warmup=int(warmup),
            scheduler=scheduler,
            z_threshold=-(-n // 2),  # ceil(n / 2)
            collect_z=collect_z,
            channels=channels,
            arrivals=arrivals,
        )


@dataclass
class KernelTotals:
    """Integer accumulators of one run; all averaging happens downstream."""

    qtot_sum: int
    z_sum: int
    z_ge_count: int
    residual_sum: int
    full_sum: int
    delay_sum: int
    departed_measured: int
    arrivals_total: int
    departures_total: int
    final_qtot: int
    q_sum: np.ndarray
    z_trace: np.ndarray | None


def run_kernel(inputs: KernelInputs, backend: str = "auto") -> KernelTotals:
    """Run the slot loop on the chosen backend ("auto", "compiled", "python")."""
    if backend == "auto":
        backend = active_backend()
    if backend == "python":
        raw = _kernel_py.run(inputs)
        return KernelTotals(**raw)
    if backend != "compiled":
        raise ValueError(f"unknown backend {backend!r}")
    if _compiled is None:
        raise RuntimeError("compiled kernel requested but the extension is not built")

    offsets, values, cdf = inputs.channels.tables
    q_sum = np.zeros(inputs.n, dtype=np.int64)
    if inputs.collect_z:
        z_trace = np.zeros(inputs.horizon + 1, dtype=np.int64)
    else:
        z_trace = np.zeros(1, dtype=np.int64)
    arr_poisson = np.array(
        [1 if k == "poisson" else 0 for k in inputs.arrivals.kinds], dtype=np.int64
    )
    raw = _compiled.run(
        inputs.n,
        inputs.horizon,
        inputs.warmup,
        SCHEDULER_CODES[inputs.scheduler],
        inputs.z_threshold,
        1 if inputs.collect_z else 0,
        rng.key_block(inputs.seed, rng.CHANNEL, inputs.n),
        rng.key_block(inputs.seed, rng.ARRIVAL, inputs.n),
        rng.stream_key(inputs.seed, rng.SCHEDULER, 0),
        offsets,
        values,
        cdf,
        arr_poisson,
        np.array(inputs.arrivals.rates, dtype=np.float64),
        np.array(inputs.arrivals.pexp, dtype=np.float64),
        np.array(inputs.channels.mu_max, dtype=np.int64),
        q_sum,
        z_trace,
    )
    return KernelTotals(
        q_sum=q_sum,
        z_trace=z_trace if inputs.collect_z else None,
        **raw,
    )
