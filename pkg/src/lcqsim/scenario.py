"""Scenario documents: flat INI sections describing one experiment setup.

Grammar (all keys below, nothing else; unknown keys are errors):

    [system]    n, channel (onoff|multirate), p | p_list, values + probs
    [arrivals]  law (bernoulli|poisson), shape (uniform|tiered|list) + rho,
                or lambda (explicit list)
    [scheduler] kind (lcq|maxweight|modified_maxweight|random_connected|round_robin)
    [run]       slots, seed, replications, warmup, experiment

Target-load scaling applies to ON/OFF channels only; multi-rate scenarios
give explicit rates.  The "tiered" shape is the odd-N heterogeneous pattern
(lambda, 2*lambda, 4*lambda) used by the fig2 experiment.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

import numpy as np

from .capacity import CapacityParams, onoff_load, scale_to_load
from .model import ArrivalModel, ChannelModel
from .schedulers import SchedulerKind


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario document."""


_KNOWN_KEYS = {
    "system": {"n", "channel", "p", "p_list", "values", "probs"},
    "arrivals": {"law", "shape", "rho", "lambda"},
    "scheduler": {"kind"},
    "run": {"slots", "seed", "replications", "warmup", "experiment"},
}

_STABILITY_EXPERIMENTS = {"fig1", "fig2"}


def tiered_shape(n: int) -> tuple[float, ...]:
    """Heterogeneous 3-tier pattern: (N-1)/2 links at 1, (N-1)/2 at 2, one at 4."""
    if n < 3 or n % 2 == 0:
        raise ScenarioError(f"tiered shape needs an odd link count >= 3, got n={n}")
    half = (n - 1) // 2
    return (1.0,) * half + (2.0,) * half + (4.0,)


@dataclass(frozen=True)
class Scenario:
    """Fully resolved description of one experiment; see parse_scenario."""

    n: int
    channel_kind: str
    on_probabilities: tuple[float, ...] | None
    rate_values: tuple[int, ...] | None
    rate_probs: tuple[float, ...] | None
    arrival_law: str
    shape_name: str | None
    shape: tuple[float, ...] | None
    target_rho: float | None
    explicit_rates: tuple[float, ...] | None
    scheduler: SchedulerKind
    horizon: int
    seed: int
    replications: int = 1
    warmup_fraction: float = 0.0
    experiment: str | None = None

    def channels(self) -> ChannelModel:
        if self.channel_kind == "onoff":
            return ChannelModel.on_off(self.on_probabilities)
        return ChannelModel.multi_rate(self.rate_values, self.rate_probs, self.n)

    def rates(self) -> np.ndarray:
        """Per-link arrival rates, applying target-load scaling when asked for."""
        if self.explicit_rates is not None:
            return np.asarray(self.explicit_rates, dtype=np.float64)
        params = CapacityParams(self.on_probabilities)
        return scale_to_load(np.asarray(self.shape), params, self.target_rho)

    def arrivals(self) -> ArrivalModel:
        rates = self.rates()
        if self.arrival_law == "bernoulli":
            return ArrivalModel.bernoulli(rates)
        return ArrivalModel.poisson(rates)

    def load(self) -> float | None:
        """Load factor of the resolved rates (ON/OFF channels only)."""
        if self.channel_kind != "onoff":
            return None
        params = CapacityParams(self.on_probabilities)
        return onoff_load(self.rates(), params).rho

    def describe(self) -> str:
        """Echo of the scenario with every default made explicit."""
        lines = [
            "[system]",
            f"n = {self.n}",
            f"channel = {self.channel_kind}",
        ]
        if self.channel_kind == "onoff":
            lines.append("p_list = " + ", ".join(f"{p:g}" for p in self.on_probabilities))
        else:
            lines.append("values = " + ", ".join(str(v) for v in self.rate_values))
            lines.append("probs = " + ", ".join(f"{p:g}" for p in self.rate_probs))
        lines += ["", "[arrivals]", f"law = {self.arrival_law}"]
        if self.explicit_rates is not None:
            lines.append("lambda = " + ", ".join(f"{x:g}" for x in self.explicit_rates))
        else:
            shown = self.shape_name or ", ".join(f"{x:g}" for x in self.shape)
            lines.append(f"shape = {shown}")
            lines.append(f"rho = {self.target_rho:g}")
        lines += [
            "",
            "[scheduler]",
            f"kind = {self.scheduler.value}",
            "",
            "[run]",
            f"slots = {self.horizon}",
            f"seed = {self.seed}",
            f"replications = {self.replications}",
            f"warmup = {self.warmup_fraction:g}",
            f"experiment = {self.experiment or 'simulate'}",
        ]
        return "\n".join(lines)


def _get(section: dict, section_name: str, key: str, required: bool = True) -> str | None:
    if key not in section:
        if required:
            raise ScenarioError(f"missing required key '{key}' in [{section_name}]")
        return None
    return section[key]


def _parse_int(raw: str, what: str) -> int:
    try:
        return int(raw.replace("_", ""))
    except ValueError:
        raise ScenarioError(f"{what} must be an integer, got {raw!r}") from None


def _parse_float(raw: str, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(f"{what} must be a number, got {raw!r}") from None


def _parse_list(raw: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in raw.split(","))
    except ValueError:
        raise ScenarioError(f"{what} must be a comma-separated number list, got {raw!r}") from None


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document; see the module grammar."""
    parser = configparser.ConfigParser()
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario document: {exc}") from None

    for name in parser.sections():
        if name not in _KNOWN_KEYS:
            raise ScenarioError(f"unknown section [{name}]")
        for key in parser[name]:
            if key not in _KNOWN_KEYS[name]:
                raise ScenarioError(f"unknown key '{key}' in [{name}]")
    for name in ("system", "arrivals", "scheduler", "run"):
        if name not in parser:
            raise ScenarioError(f"missing section [{name}]")

    system = dict(parser["system"])
    arrivals = dict(parser["arrivals"])
    scheduler_sec = dict(parser["scheduler"])
    run = dict(parser["run"])

    n = _parse_int(_get(system, "system", "n"), "n")
    if n < 1:
        raise ScenarioError("n must be at least 1")

    channel_kind = system.get("channel", "onoff")
    on_probs = rate_values = rate_probs = None
    if channel_kind == "onoff":
        if "p" in system and "p_list" in system:
            raise ScenarioError("give either 'p' or 'p_list' in [system], not both")
        if "p" in system:
            on_probs = (_parse_float(system["p"], "p"),) * n
        elif "p_list" in system:
            on_probs = _parse_list(system["p_list"], "p_list")
            if len(on_probs) != n:
                raise ScenarioError(f"p_list has {len(on_probs)} entries for n={n}")
        else:
            raise ScenarioError("missing required key 'p' (or 'p_list') in [system]")
    elif channel_kind == "multirate":
        raw_values = _get(system, "system", "values")
        raw_probs = _get(system, "system", "probs")
        rate_values = tuple(int(v) for v in _parse_list(raw_values, "values"))
        rate_probs = _parse_list(raw_probs, "probs")
    else:
        raise ScenarioError(f"unknown channel kind {channel_kind!r}")

    law = _get(arrivals, "arrivals", "law")
    if law not in ("bernoulli", "poisson"):
        raise ScenarioError(f"unknown arrival law {law!r}")

    explicit = shape = shape_name = target_rho = None
    if "lambda" in arrivals:
        if "rho" in arrivals or "shape" in arrivals:
            raise ScenarioError("give either explicit 'lambda' or 'shape' + 'rho', not both")
        explicit = _parse_list(arrivals["lambda"], "lambda")
        if len(explicit) != n:
            raise ScenarioError(f"lambda has {len(explicit)} entries for n={n}")
    else:
        target_rho = _parse_float(_get(arrivals, "arrivals", "rho"), "rho")
        if target_rho <= 0:
            raise ScenarioError("rho must be positive")
        if channel_kind != "onoff":
            raise ScenarioError(
                "target-load scaling ('rho') is defined for onoff channels only; "
                "give explicit 'lambda' for multirate systems"
            )
        raw_shape = arrivals.get("shape", "uniform")
        if raw_shape == "uniform":
            shape_name, shape = "uniform", (1.0,) * n
        elif raw_shape == "tiered":
            shape_name, shape = "tiered", tiered_shape(n)
        else:
            shape = _parse_list(raw_shape, "shape")
            if len(shape) != n:
                raise ScenarioError(f"shape has {len(shape)} entries for n={n}")

    kind_raw = _get(scheduler_sec, "scheduler", "kind")
    try:
        scheduler = SchedulerKind(kind_raw)
    except ValueError:
        raise ScenarioError(f"unknown scheduler {kind_raw!r}") from None

    horizon = _parse_int(_get(run, "run", "slots"), "slots")
    if horizon < 1:
        raise ScenarioError("slots must be at least 1")
    seed = _parse_int(_get(run, "run", "seed"), "seed")
    replications = _parse_int(run.get("replications", "1"), "replications")
    if replications < 1:
        raise ScenarioError("replications must be at least 1")
    warmup = _parse_float(run.get("warmup", "0"), "warmup")
    if not 0.0 <= warmup < 1.0:
        raise ScenarioError("warmup must be a fraction in [0, 1)")
    experiment = run.get("experiment")
    if experiment in _STABILITY_EXPERIMENTS and target_rho is not None and target_rho >= 1.0:
        raise ScenarioError(f"experiment '{experiment}' requires rho < 1, got rho={target_rho:g}")
    if scheduler == SchedulerKind.LCQ and channel_kind != "onoff":
        raise ScenarioError("scheduler 'lcq' requires onoff channels; use 'maxweight'")

    scenario = Scenario(
        n=n,
        channel_kind=channel_kind,
        on_probabilities=on_probs,
        rate_values=rate_values,
        rate_probs=rate_probs,
        arrival_law=law,
        shape_name=shape_name,
        shape=shape,
        target_rho=target_rho,
        explicit_rates=explicit,
        scheduler=scheduler,
        horizon=horizon,
        seed=seed,
        replications=replications,
        warmup_fraction=warmup,
        experiment=experiment,
    )
    # surface model construction errors (bad probabilities, Bernoulli rate > 1
    # after scaling, lcq on multirate) at parse time with the offending value
    try:
        scenario.channels()
        scenario.arrivals()
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return scenario


def scenario_from_file(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())
