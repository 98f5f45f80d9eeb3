"""Command line interface.

Subcommands: simulate, bounds, fig1, fig2, counterexample, sweep.  Tables go
to CSV with --out; otherwise a short text summary is printed.  Exit code 0
on success, non-zero with a message naming the failed validation.
"""

from __future__ import annotations

import argparse
import sys

from .bounds import arrival_moments
from .experiments import (
    emit_csv,
    evaluate_bounds,
    row_to_record,
    run_counterexample,
    run_fig1,
    run_fig2,
    run_scenario,
    sweep_n,
)
from .kernel import active_backend
from .scenario import Scenario, ScenarioError, scenario_from_file


def _add_run_flags(sub: argparse.ArgumentParser, seeds_default: int | None = None) -> None:
    sub.add_argument("--slots", type=int, default=None, help="horizon override (slots)")
    sub.add_argument(
        "--seeds",
        type=int,
        default=seeds_default,
        help="number of replications; seeds are 1..k (canned experiments) or "
        "scenario seed + 0..k-1",
    )
    sub.add_argument("--out", default=None, help="CSV destination path")
    sub.add_argument("--warmup", type=float, default=None, help="warm-up fraction in [0, 1)")


def _n_list(raw: str) -> list[int]:
    try:
        return [int(x) for x in raw.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcqsim",
        description="Slotted-time Monte Carlo lab for max-weight downlink scheduling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario file and report statistics")
    p_sim.add_argument("scenario", help="scenario file path")
    _add_run_flags(p_sim)

    p_bounds = sub.add_parser("bounds", help="evaluate the analytic bounds for a scenario")
    p_bounds.add_argument("scenario", help="scenario file path")
    p_bounds.add_argument("--out", default=None, help="CSV destination path")

    p_fig1 = sub.add_parser("fig1", help="symmetric uniform-traffic sweep over N")
    p_fig1.add_argument("--p", type=float, default=0.5, help="ON probability")
    p_fig1.add_argument("--rho", type=float, default=0.8, help="target load factor (< 1)")
    p_fig1.add_argument("--n-list", type=_n_list, default=[3, 10, 30, 100])
    _add_run_flags(p_fig1, seeds_default=3)

    p_fig2 = sub.add_parser("fig2", help="heterogeneous tiered-traffic sweep over odd N")
    p_fig2.add_argument("--p", type=float, default=0.5, help="ON probability")
    p_fig2.add_argument("--rho", type=float, default=0.8, help="target load factor (< 1)")
    p_fig2.add_argument("--n-list", type=_n_list, default=[3, 11, 31, 101])
    _add_run_flags(p_fig2, seeds_default=3)

    p_counter = sub.add_parser(
        "counterexample", help="multi-rate residual-backlog sweep under max-weight"
    )
    p_counter.add_argument("--n-list", type=_n_list, default=[12, 30, 60])
    p_counter.add_argument(
        "--modified", action="store_true", help="use the modified max-weight variant"
    )
    _add_run_flags(p_counter, seeds_default=3)

    p_sweep = sub.add_parser("sweep", help="re-run a scenario across link counts")
    p_sweep.add_argument("scenario", help="scenario file path")
    p_sweep.add_argument(
        "--vary", required=True, help="sweep spec, e.g. N=3,10,30 (only N is supported)"
    )
    _add_run_flags(p_sweep)

    return parser


def _print_rows(rows) -> None:
    cols = [
        "run_id", "rho", "qtot_mean", "delay_measured", "delay_little",
        "z_mean", "bound_legacy_W", "bound_thm1_W", "bound_thm2_W", "bound_multirate_W",
    ]
    print("  ".join(f"{c:>16s}" for c in cols))
    for row in rows:
        rec = row_to_record(row)
        cells = ["" if rec[c] is None else (f"{rec[c]:.6g}" if isinstance(rec[c], float) else str(rec[c])) for c in cols]
        print("  ".join(f"{c:>16s}" for c in cells))


def _finish(rows, out) -> int:
    if out:
        path = emit_csv(rows, out)
        print(f"wrote {len(rows)} rows to {path} (backend: {active_backend()})")
    else:
        _print_rows(rows)
    return 0


def _scenario_with_overrides(args) -> Scenario:
    scenario = scenario_from_file(args.scenario)
    updates = {}
    if getattr(args, "slots", None) is not None:
        if args.slots < 1:
            raise ScenarioError("slots must be at least 1")
        updates["horizon"] = args.slots
    if getattr(args, "seeds", None) is not None:
        if args.seeds < 1:
            raise ScenarioError("seeds must be at least 1")
        updates["replications"] = args.seeds
    if getattr(args, "warmup", None) is not None:
        if not 0.0 <= args.warmup < 1.0:
            raise ScenarioError("warmup must be a fraction in [0, 1)")
        updates["warmup_fraction"] = args.warmup
    if updates:
        from dataclasses import replace

        scenario = replace(scenario, **updates)
    return scenario


def _cmd_simulate(args) -> int:
    scenario = _scenario_with_overrides(args)
    print(scenario.describe())
    print()
    rows = run_scenario(scenario)
    return _finish(rows, args.out)


def _cmd_bounds(args) -> int:
    scenario = scenario_from_file(args.scenario)
    channels = scenario.channels()
    arrivals = scenario.arrivals()
    rho = scenario.load()
    if rho is None and scenario.channel_kind == "multirate":
        from .capacity import multirate_mu_sym_lower

        rho = arrivals.lambda_tot / multirate_mu_sym_lower(channels)
    reports = evaluate_bounds(channels, arrivals, rho)
    moments = arrival_moments(arrivals)
    print(f"n = {channels.n_links}  lambda_tot = {moments.lambda_tot:.6g}  rho = {rho:.6g}")
    for kind, rep in reports.items():
        if rep.applicable:
            consts = "  ".join(f"{k}={v:.6g}" for k, v in rep.constants.items())
            print(
                f"{kind:>10s}: Q_tot <= {rep.backlog_bound:.6g} packets, "
                f"W <= {rep.delay_bound:.6g} slots   [{consts}]"
            )
        else:
            print(f"{kind:>10s}: not applicable ({rep.reason})")
    if args.out:
        import csv

        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "applicable", "backlog_bound", "delay_bound", "reason"])
            for kind, rep in reports.items():
                writer.writerow([
                    kind,
                    int(rep.applicable),
                    "" if rep.backlog_bound is None else f"{rep.backlog_bound:.6g}",
                    "" if rep.delay_bound is None else f"{rep.delay_bound:.6g}",
                    rep.reason,
                ])
        print(f"wrote bound table to {args.out}")
    return 0


def _seed_list(count: int) -> list[int]:
    return list(range(1, count + 1))


def _cmd_fig1(args) -> int:
    rows = run_fig1(
        p=args.p,
        rho=args.rho,
        n_list=args.n_list,
        horizon=args.slots or 10**6,
        seeds=_seed_list(args.seeds),
        warmup_fraction=args.warmup or 0.0,
    )
    return _finish(rows, args.out)


def _cmd_fig2(args) -> int:
    rows = run_fig2(
        p=args.p,
        rho=args.rho,
        n_list=args.n_list,
        horizon=args.slots or 10**6,
        seeds=_seed_list(args.seeds),
        warmup_fraction=args.warmup or 0.0,
    )
    return _finish(rows, args.out)


def _cmd_counterexample(args) -> int:
    from .schedulers import SchedulerKind

    rows = run_counterexample(
        n_list=args.n_list,
        horizon=args.slots or 10**6,
        seeds=_seed_list(args.seeds),
        warmup_fraction=args.warmup or 0.0,
        scheduler=SchedulerKind.MODIFIED_MAX_WEIGHT if args.modified else SchedulerKind.MAX_WEIGHT,
    )
    return _finish(rows, args.out)


def _cmd_sweep(args) -> int:
    key, _, raw = args.vary.partition("=")
    if key.strip() != "N" or not raw:
        raise ScenarioError(f"--vary supports only N=<list>, got {args.vary!r}")
    n_values = _n_list(raw)
    scenario = _scenario_with_overrides(args)
    rows = sweep_n(scenario, n_values)
    return _finish(rows, args.out)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "bounds": _cmd_bounds,
    "fig1": _cmd_fig1,
    "fig2": _cmd_fig2,
    "counterexample": _cmd_counterexample,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
