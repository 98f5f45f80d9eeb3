"""Canned experiments, parameter sweeps, and CSV emission.

Each run becomes one ResultRow: scenario identifiers, the full SimStats
summary, and every bound family's delay value (empty with a recorded reason
when a bound does not apply to the run).  Tables are deterministic: rows are
sorted by (N, seed) and re-running with the same seed set reproduces the
file byte for byte.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .bounds import (
    BoundReport,
    arrival_moments,
    legacy_onoff_bound,
    multirate_bound,
    onoff_arbitrary_bound,
    onoff_balanced_bound,
)
from .capacity import CapacityParams, multirate_mu_sym_lower, onoff_load, scale_to_load
from .model import ArrivalModel, ChannelModel
from .scenario import Scenario, ScenarioError, tiered_shape
from .schedulers import SchedulerKind
from .simulate import SimStats, simulate

CSV_COLUMNS = [
    "run_id",
    "experiment",
    "N",
    "rho",
    "scheduler",
    "T",
    "seed",
    "qtot_mean",
    "delay_measured",
    "delay_little",
    "z_mean",
    "prob_z_ge_half",
    "residual_backlog_mean",
    "full_backlog_mean",
    "bound_legacy_W",
    "bound_thm1_W",
    "bound_thm1_K",
    "bound_thm2_W",
    "bound_thm2_K",
    "bound_thm2_beta",
    "bound_multirate_W",
    "applicability_notes",
]

# CSV column stem per bound family; thm1 is the arbitrary-rate O(1) bound,
# thm2 the balanced-traffic one (fixed external naming).
_BOUND_COLUMNS = {
    "legacy": "bound_legacy",
    "arbitrary": "bound_thm1",
    "balanced": "bound_thm2",
    "multirate": "bound_multirate",
}


@dataclass(frozen=True)
class ResultRow:
    """One (scenario, seed) run with its statistics and bound columns."""

    run_id: str
    experiment: str
    n: int
    rho: float | None
    scheduler: str
    horizon: int
    seed: int
    stats: SimStats
    bounds: dict[str, BoundReport]

    def notes(self) -> str:
        parts = [
            f"{_BOUND_COLUMNS[kind]}: {rep.reason}"
            for kind, rep in self.bounds.items()
            if not rep.applicable
        ]
        if self.stats.delay_measured is None:
            parts.append("delay_measured: no departures")
        if self.stats.delay_little is None:
            parts.append("delay_little: zero arrival rate")
        return "; ".join(parts)


def evaluate_bounds(
    channels: ChannelModel,
    arrivals: ArrivalModel,
    rho: float | None,
) -> dict[str, BoundReport]:
    """All four bound families for one system; ON/OFF-only families report
    why they are unavailable on multi-rate channels."""
    moments = arrival_moments(arrivals)
    reports: dict[str, BoundReport] = {}
    if rho is None:
        reason = "load factor unavailable"
        for kind in ("legacy", "arbitrary", "balanced", "multirate"):
            reports[kind] = BoundReport(kind=kind, applicable=False, reason=reason)
        return reports
    if channels.is_on_off:
        params = CapacityParams.from_channels(channels)
        reports["legacy"] = legacy_onoff_bound(moments, params, rho)
        reports["arbitrary"] = onoff_arbitrary_bound(moments, params, rho)
        reports["balanced"] = onoff_balanced_bound(moments, params, rho)
    else:
        for kind in ("legacy", "arbitrary", "balanced"):
            reports[kind] = BoundReport(
                kind=kind, applicable=False, reason="requires on/off channels"
            )
    reports["multirate"] = multirate_bound(moments, channels, rho)
    return reports


def _run_one(
    experiment: str,
    channels: ChannelModel,
    arrivals: ArrivalModel,
    scheduler: SchedulerKind,
    horizon: int,
    seed: int,
    rho: float | None,
    warmup_fraction: float = 0.0,
    keep_z_trace: bool = False,
) -> ResultRow:
    stats = simulate(
        channels=channels,
        arrivals=arrivals,
        scheduler=scheduler,
        horizon=horizon,
        seed=seed,
        warmup_fraction=warmup_fraction,
        keep_z_trace=keep_z_trace,
    )
    return ResultRow(
        run_id=f"{experiment}-N{channels.n_links:03d}-s{seed}",
        experiment=experiment,
        n=channels.n_links,
        rho=rho,
        scheduler=scheduler.value,
        horizon=horizon,
        seed=seed,
        stats=stats,
        bounds=evaluate_bounds(channels, arrivals, rho),
    )


def _gather(tasks: Sequence[Callable[[], ResultRow]], parallel: bool) -> list[ResultRow]:
    if not parallel or len(tasks) <= 1:
        rows = [task() for task in tasks]
    else:
        workers = min(len(tasks), os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda task: task(), tasks))
    return sorted(rows, key=lambda r: (r.n, r.seed))


def run_fig1(
    p: float = 0.5,
    rho: float = 0.8,
    n_list: Sequence[int] = (3, 10, 30, 100),
    horizon: int = 10**6,
    seeds: Sequence[int] = (1, 2, 3),
    warmup_fraction: float = 0.0,
    parallel: bool = True,
) -> list[ResultRow]:
    """Symmetric ON/OFF sweep: uniform Bernoulli traffic scaled to load rho,
    served by the longest-connected-queue policy, with all ON/OFF bounds."""
    if not 0.0 < rho < 1.0:
        raise ScenarioError(f"experiment 'fig1' requires rho < 1, got rho={rho:g}")
    tasks = []
    for n in n_list:
        channels = ChannelModel.on_off(p, n)
        params = CapacityParams.from_channels(channels)
        rates = scale_to_load(np.ones(n), params, rho)
        arrivals = ArrivalModel.bernoulli(rates)
        load = onoff_load(rates, params).rho
        for seed in seeds:
            tasks.append(
                lambda c=channels, a=arrivals, s=seed, r=load: _run_one(
                    "fig1", c, a, SchedulerKind.LCQ, horizon, s, r, warmup_fraction
                )
            )
    return _gather(tasks, parallel)


def run_fig2(
    p: float = 0.5,
    rho: float = 0.8,
    n_list: Sequence[int] = (3, 11, 31, 101),
    horizon: int = 10**6,
    seeds: Sequence[int] = (1, 2, 3),
    warmup_fraction: float = 0.0,
    parallel: bool = True,
) -> list[ResultRow]:
    """Heterogeneous ON/OFF sweep on the odd-N tiered pattern (1x, 2x, 4x),
    scaled to load rho and served by the longest-connected-queue policy."""
    if not 0.0 < rho < 1.0:
        raise ScenarioError(f"experiment 'fig2' requires rho < 1, got rho={rho:g}")
    tasks = []
    for n in n_list:
        if n % 2 == 0:
            raise ScenarioError(f"fig2 needs odd link counts, got n={n}")
        channels = ChannelModel.on_off(p, n)
        params = CapacityParams.from_channels(channels)
        rates = scale_to_load(np.asarray(tiered_shape(n)), params, rho)
        arrivals = ArrivalModel.bernoulli(rates)
        load = onoff_load(rates, params).rho
        for seed in seeds:
            tasks.append(
                lambda c=channels, a=arrivals, s=seed, r=load: _run_one(
                    "fig2", c, a, SchedulerKind.LCQ, horizon, s, r, warmup_fraction
                )
            )
    return _gather(tasks, parallel)


def counterexample_system(n: int) -> tuple[ChannelModel, ArrivalModel, float]:
    """The symmetric multi-rate system whose backlog must grow with N:
    Bernoulli(3/N) arrivals, rate-5 channels ON half the time.

    Returns (channels, arrivals, rho) with rho the exact load factor
    lambda_tot / (5 (1 - (1/2)^N)).
    """
    if n < 3:
        raise ScenarioError(f"counterexample needs n >= 3, got n={n}")
    channels = ChannelModel.multi_rate(values=(0, 5), probs=(0.5, 0.5), n=n)
    arrivals = ArrivalModel.bernoulli([3.0 / n] * n)
    rho = arrivals.lambda_tot / multirate_mu_sym_lower(channels)
    return channels, arrivals, rho


def run_counterexample(
    n_list: Sequence[int] = (12, 30, 60),
    horizon: int = 10**6,
    seeds: Sequence[int] = (1, 2, 3),
    warmup_fraction: float = 0.0,
    parallel: bool = True,
    scheduler: SchedulerKind = SchedulerKind.MAX_WEIGHT,
) -> list[ResultRow]:
    """Multi-rate residual-backlog sweep under max-weight (or the modified
    variant), reporting Z statistics and the residual/full backlog split."""
    if scheduler not in (SchedulerKind.MAX_WEIGHT, SchedulerKind.MODIFIED_MAX_WEIGHT):
        raise ScenarioError("counterexample runs under maxweight or modified_maxweight")
    tasks = []
    for n in n_list:
        channels, arrivals, rho = counterexample_system(n)
        for seed in seeds:
            tasks.append(
                lambda c=channels, a=arrivals, s=seed, r=rho: _run_one(
                    "counterexample", c, a, scheduler, horizon, s, r, warmup_fraction
                )
            )
    return _gather(tasks, parallel)


def run_scenario(scenario: Scenario, experiment: str = "simulate") -> list[ResultRow]:
    """Replicated runs of one scenario: seeds seed, seed+1, ..."""
    channels = scenario.channels()
    arrivals = scenario.arrivals()
    rho = scenario.load()
    tasks = [
        lambda s=scenario.seed + r: _run_one(
            experiment,
            channels,
            arrivals,
            scenario.scheduler,
            scenario.horizon,
            s,
            rho,
            scenario.warmup_fraction,
        )
        for r in range(scenario.replications)
    ]
    return _gather(tasks, parallel=True)


def sweep_n(scenario: Scenario, n_values: Sequence[int]) -> list[ResultRow]:
    """Re-run a scenario across link counts, rebuilding shapes per N."""
    if scenario.explicit_rates is not None:
        raise ScenarioError("cannot sweep N with explicit per-link 'lambda' rates")
    if scenario.channel_kind != "onoff":
        raise ScenarioError("N sweeps are defined for onoff scenarios")
    if len(set(scenario.on_probabilities)) != 1:
        raise ScenarioError("N sweeps need a symmetric ON probability")
    p = scenario.on_probabilities[0]
    tasks = []
    for n in n_values:
        if scenario.shape_name == "uniform":
            shape = (1.0,) * n
        elif scenario.shape_name == "tiered":
            shape = tiered_shape(n)
        else:
            raise ScenarioError("N sweeps need a named shape (uniform or tiered)")
        channels = ChannelModel.on_off(p, n)
        params = CapacityParams.from_channels(channels)
        rates = scale_to_load(np.asarray(shape), params, scenario.target_rho)
        if scenario.arrival_law == "bernoulli":
            arrivals = ArrivalModel.bernoulli(rates)
        else:
            arrivals = ArrivalModel.poisson(rates)
        load = onoff_load(rates, params).rho
        for rep in range(scenario.replications):
            tasks.append(
                lambda c=channels, a=arrivals, s=scenario.seed + rep, r=load: _run_one(
                    "sweep", c, a, scenario.scheduler, scenario.horizon, s, r,
                    scenario.warmup_fraction,
                )
            )
    return _gather(tasks, parallel=True)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _bound_cell(row: ResultRow, kind: str, field: str) -> float | None:
    rep = row.bounds.get(kind)
    if rep is None or not rep.applicable:
        return None
    if field == "W":
        return rep.delay_bound
    return rep.constants.get(field)


def row_to_record(row: ResultRow) -> dict[str, object]:
    st = row.stats
    return {
        "run_id": row.run_id,
        "experiment": row.experiment,
        "N": row.n,
        "rho": row.rho,
        "scheduler": row.scheduler,
        "T": row.horizon,
        "seed": row.seed,
        "qtot_mean": st.qtot_mean,
        "delay_measured": st.delay_measured,
        "delay_little": st.delay_little,
        "z_mean": st.z_mean,
        "prob_z_ge_half": st.prob_z_ge_half,
        "residual_backlog_mean": st.residual_backlog_mean,
        "full_backlog_mean": st.full_backlog_mean,
        "bound_legacy_W": _bound_cell(row, "legacy", "W"),
        "bound_thm1_W": _bound_cell(row, "arbitrary", "W"),
        "bound_thm1_K": _as_int(_bound_cell(row, "arbitrary", "K")),
        "bound_thm2_W": _bound_cell(row, "balanced", "W"),
        "bound_thm2_K": _as_int(_bound_cell(row, "balanced", "K")),
        "bound_thm2_beta": _bound_cell(row, "balanced", "beta"),
        "bound_multirate_W": _bound_cell(row, "multirate", "W"),
        "applicability_notes": row.notes(),
    }


def _as_int(value: float | None) -> int | None:
    return None if value is None else int(value)


def emit_csv(rows: Iterable[ResultRow], destination) -> str:
    """Write rows (sorted by N then seed) to ``destination``; returns the path."""
    rows = sorted(rows, key=lambda r: (r.n, r.seed))
    if not rows:
        raise ValueError("no rows to emit")
    import csv

    destination = os.fspath(destination)
    with open(destination, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            record = row_to_record(row)
            writer.writerow([_fmt(record[col]) for col in CSV_COLUMNS])
    return destination
