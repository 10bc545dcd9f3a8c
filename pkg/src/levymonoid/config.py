"""Experiment configuration: one TOML file drives simulation and every check.

Sections (all TOML tables; see README for the full grammar):

  [instance]            kind = "additive" | "max" | "lattice-union" (+ dim, side)
  [[measure.layers]]    mass plus distribution name and its parameters
  [path]                drift, horizon
  [probes]              characters (list of base-index multisets), times
  [run]                 replicates, seed, delta
  [moments] [transience] [convolution] [bochner] [invariance]
  [sum_criterion] [alpha]     check-specific parameters

Seeds, probe identities and tolerances are echoed into every report so a
run is reproducible from the config file alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import tomli

from .core import CharacterId, MonoidInstance
from .instances import InvalidSpecError, MarkDistribution, make_instance, mark_distribution
from .ppp import LevyMeasure, LevyMeasureLayer


class ConfigError(ValueError):
    """Malformed experiment configuration; message names the offending field."""


@dataclass
class ExperimentConfig:
    instance: MonoidInstance
    measure: LevyMeasure
    drift: float
    horizon: float
    probe_chars: list[CharacterId]
    probe_times: list[float]
    replicates: int
    seed: int
    delta: float
    sections: dict[str, dict[str, Any]] = field(default_factory=dict)

    def section(self, name: str) -> dict[str, Any]:
        if name not in self.sections:
            raise ConfigError(f"config is missing the [{name}] section")
        return self.sections[name]

    def with_seed(self, seed: int | None) -> "ExperimentConfig":
        if seed is not None:
            self.seed = int(seed)
        return self

    def with_delta(self, delta: float | None) -> "ExperimentConfig":
        if delta is not None:
            if not (0.0 < delta < 1.0):
                raise ConfigError(f"delta must lie in (0, 1), got {delta}")
            self.delta = float(delta)
        return self


def distribution_from_table(table: dict, where: str) -> MarkDistribution:
    if "distribution" not in table:
        raise ConfigError(f"{where}: missing 'distribution'")
    name = table["distribution"]
    params = {k: v for k, v in table.items() if k not in ("distribution", "mass")}
    try:
        return mark_distribution(name, **params)
    except (TypeError, InvalidSpecError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def measure_from_table(table: dict) -> LevyMeasure:
    layers = []
    for i, layer_tab in enumerate(table.get("layers", [])):
        where = f"measure.layers[{i}]"
        if "mass" not in layer_tab:
            raise ConfigError(f"{where}: missing 'mass'")
        try:
            layers.append(LevyMeasureLayer(float(layer_tab["mass"]),
                                           distribution_from_table(layer_tab, where)))
        except InvalidSpecError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return LevyMeasure(tuple(layers))


def parse_config(data: dict) -> ExperimentConfig:
    try:
        inst_tab = dict(data.get("instance", {}))
        kind = inst_tab.pop("kind", None)
        if kind is None:
            raise ConfigError("[instance]: missing 'kind'")
        instance = make_instance(kind, **inst_tab)
    except InvalidSpecError as exc:
        raise ConfigError(f"[instance]: {exc}") from exc

    measure = measure_from_table(data.get("measure", {}))

    path_tab = data.get("path", {})
    drift = float(path_tab.get("drift", 0.0))
    horizon = float(path_tab.get("horizon", 1.0))
    if horizon <= 0:
        raise ConfigError(f"[path].horizon must be positive, got {horizon}")
    if drift < 0:
        raise ConfigError(f"[path].drift must be nonnegative, got {drift}")
    if drift and not instance.drift_supported:
        raise ConfigError(f"[path].drift is not supported on instance {instance.name!r}")

    probes_tab = data.get("probes", {})
    raw_chars = probes_tab.get("characters", [[1]])
    if not raw_chars:
        raise ConfigError("[probes].characters must list at least one character")
    probe_chars = []
    for i, multiset in enumerate(raw_chars):
        if not multiset:
            raise ConfigError(f"[probes].characters[{i}] must be a nonempty index list")
        try:
            probe_chars.append(CharacterId(tuple(int(n) for n in multiset)))
        except ValueError as exc:
            raise ConfigError(f"[probes].characters[{i}]: {exc}") from exc
        if instance.enumeration_size is not None:
            if max(multiset) > instance.enumeration_size:
                raise ConfigError(
                    f"[probes].characters[{i}]: index {max(multiset)} beyond the "
                    f"{instance.enumeration_size} enumerated characters")
    probe_times = [float(t) for t in probes_tab.get("times", [1.0])]
    if not probe_times:
        raise ConfigError("[probes].times must list at least one time")
    if any(t < 0 or t > horizon for t in probe_times):
        raise ConfigError(f"[probes].times must lie in [0, horizon={horizon}]")

    run_tab = data.get("run", {})
    replicates = int(run_tab.get("replicates", 10_000))
    if replicates < 1:
        raise ConfigError(f"[run].replicates must be >= 1, got {replicates}")
    seed = int(run_tab.get("seed", 0))
    delta = float(run_tab.get("delta", 0.01))
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"[run].delta must lie in (0, 1), got {delta}")

    known = {"instance", "measure", "path", "probes", "run"}
    sections = {k: v for k, v in data.items() if k not in known}

    return ExperimentConfig(instance=instance, measure=measure, drift=drift,
                            horizon=horizon, probe_chars=probe_chars,
                            probe_times=probe_times, replicates=replicates,
                            seed=seed, delta=delta, sections=sections)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)
