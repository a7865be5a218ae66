"""Run configuration files and the reproducibility manifest.

Configs are flat INI-style key/value text. One ``[simulation]`` section sets
population, missingness, scale, and seeding; each ``[construct NAME]``
section declares one experimental cell. Every key has a default mirroring
the standard experiment (horizon 8, 30% missing observations, 500 patients,
OSF 0), so a minimal config is just a list of constructs.

A ``RunManifest`` is written next to every output file and embeds the full
resolved configuration (plus the original config text), so any output can be
regenerated from its manifest alone.
"""
from __future__ import annotations

import configparser
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .cohort import ConstructSpec
from .domain import ScaleConfig
from .errors import ConfigError
from .planner import BackupMode
from .policies import POLICY_KIND_BY_NAME, PolicyKind, PolicySpec
from .simulate import SimulationConfig
from .transitions import MODEL_CLASS_BY_NAME, ModelClass

_SIM_KEYS = {
    "population_size",
    "p_missing",
    "seed",
    "cps",
    "horizon",
    "score_min",
    "score_max",
    "baseline_mean",
    "baseline_std",
    "world_model",
    "osf_scale",
}
_CONSTRUCT_KEYS = {"policy", "model", "missing", "osf", "mode", "replications", "stop_after"}

_BOOL = {"yes": True, "true": True, "1": True, "no": False, "false": False, "0": False}


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, resolved from one config file."""

    simulation: SimulationConfig
    constructs: tuple[ConstructSpec, ...]
    world_model_class: ModelClass
    osf_scale: float

    def simulation_dict(self) -> dict:
        sim = self.simulation
        return {
            "population_size": sim.population_size,
            "p_missing": sim.p_missing,
            "seed": sim.seed,
            "cps": sim.scale.cps,
            "horizon": sim.scale.horizon,
            "score_min": sim.scale.score_min,
            "score_max": sim.scale.score_max,
            "baseline_mean": sim.baseline_mean,
            "baseline_std": sim.baseline_std,
            "world_model": self.world_model_class.value,
            "osf_scale": self.osf_scale,
        }

    def construct_dicts(self) -> list[dict]:
        out = []
        for c in self.constructs:
            out.append(
                {
                    "name": c.name,
                    "policy": c.policy.kind.value,
                    "model": c.policy.model_class.value,
                    "missing": c.include_missing,
                    "osf": c.osf,
                    "mode": c.policy.mode.value,
                    "replications": c.replications,
                    "stop_after": c.policy.stop_after,
                }
            )
        return out


def _get(section, key: str, cast, default, where: str):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return cast(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"{where}: invalid value {raw!r} for {key}") from None


def _bool(raw: str) -> bool:
    return _BOOL[raw.strip().lower()]


def parse_config(path: Union[str, Path], seed_override: Optional[int] = None) -> RunConfig:
    """Load and validate a run config; unknown keys are errors, not typos."""
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    sim_section = parser["simulation"] if parser.has_section("simulation") else {}
    if parser.has_section("simulation"):
        unknown = set(parser["simulation"]) - _SIM_KEYS
        if unknown:
            raise ConfigError(f"[simulation]: unknown keys {sorted(unknown)}")

    scale = ScaleConfig(
        score_min=_get(sim_section, "score_min", float, 0.0, "[simulation]"),
        score_max=_get(sim_section, "score_max", float, 40.0, "[simulation]"),
        cps=_get(sim_section, "cps", float, 100.0, "[simulation]"),
        horizon=_get(sim_section, "horizon", int, 8, "[simulation]"),
    )
    seed = _get(sim_section, "seed", int, 0, "[simulation]")
    if seed_override is not None:
        seed = seed_override
    simulation = SimulationConfig(
        scale=scale,
        population_size=_get(sim_section, "population_size", int, 500, "[simulation]"),
        p_missing=_get(sim_section, "p_missing", float, 0.3, "[simulation]"),
        seed=seed,
        baseline_mean=_get(sim_section, "baseline_mean", float, 20.0, "[simulation]"),
        baseline_std=_get(sim_section, "baseline_std", float, 8.0, "[simulation]"),
    )
    world_class = _get(
        sim_section, "world_model", lambda s: MODEL_CLASS_BY_NAME[s.strip()], ModelClass.GLOBAL_AVERAGE,
        "[simulation]",
    )
    osf_scale = _get(sim_section, "osf_scale", float, 1.0, "[simulation]")

    constructs = []
    for section_name in parser.sections():
        if section_name == "simulation":
            continue
        if not section_name.startswith("construct"):
            raise ConfigError(f"unknown section [{section_name}]")
        name = section_name[len("construct"):].strip() or f"construct{len(constructs)}"
        section = parser[section_name]
        unknown = set(section) - _CONSTRUCT_KEYS
        if unknown:
            raise ConfigError(f"[{section_name}]: unknown keys {sorted(unknown)}")
        where = f"[{section_name}]"
        kind = _get(section, "policy", lambda s: POLICY_KIND_BY_NAME[s.strip()], None, where)
        if kind is None:
            raise ConfigError(f"{where}: missing required key 'policy'")
        model_class = _get(
            section, "model", lambda s: MODEL_CLASS_BY_NAME[s.strip()],
            ModelClass.GLOBAL_AVERAGE, where,
        )
        mode = _get(
            section, "mode", lambda s: BackupMode(s.strip()), BackupMode.NORMAL, where
        )
        default_reps = 10 if kind is PolicyKind.PROBABILISTIC else 1
        try:
            policy = PolicySpec(
                kind=kind,
                model_class=model_class,
                stop_after=_get(section, "stop_after", int, 3, where),
                mode=mode,
            )
            constructs.append(
                ConstructSpec(
                    name=name,
                    policy=policy,
                    include_missing=_get(section, "missing", _bool, True, where),
                    osf=_get(section, "osf", float, 0.0, where),
                    replications=_get(section, "replications", int, default_reps, where),
                )
            )
        except ConfigError as e:
            raise ConfigError(f"{where}: {e}") from None

    return RunConfig(
        simulation=simulation,
        constructs=tuple(constructs),
        world_model_class=world_class,
        osf_scale=osf_scale,
    )


@dataclass(frozen=True)
class RunManifest:
    """Run provenance written alongside every output file."""

    command: str
    tool_version: str
    config_path: str
    config_text: str
    seed: int
    output_dir: str
    outputs: tuple[str, ...]
    simulation: dict
    constructs: tuple[dict, ...]
    world_model_source: str
    extras: dict

    def to_json(self) -> str:
        payload = {
            "tool": "treatplan",
            "version": self.tool_version,
            "command": self.command,
            "config_path": self.config_path,
            "config_text": self.config_text,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "outputs": list(self.outputs),
            "simulation": self.simulation,
            "constructs": list(self.constructs),
            "world_model_source": self.world_model_source,
            **self.extras,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json())
