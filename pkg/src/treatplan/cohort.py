"""Cohort-level experiment runner: constructs, metrics, and OSF sweeps.

A construct is one experimental cell: a decision policy paired with a
transition-model class, a missing-observation setting, an outcome-scaling
factor, and a replication count. Running a construct plays every patient's
episode, computes per-patient CPUC, and aggregates the standard report
metrics; replications rerun the same patients with fresh missingness and
coin draws and average the per-replication means.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .policies import PolicyKind, PolicySpec
from .rng import substream
from .simulate import EpisodeState, PatientAgent, SimulationConfig, run_episode
from .transitions import ModelClass, TransitionModel
from .utility import cpuc


@dataclass(frozen=True)
class ConstructSpec:
    """One cell of the experiment grid."""

    name: str
    policy: PolicySpec
    include_missing: bool = True
    osf: float = 0.0
    replications: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError(f"construct {self.name!r}: replications must be >= 1")
        if self.osf < 0:
            raise ConfigError(f"construct {self.name!r}: osf must be non-negative")
        if self.osf > 0 and self.policy.kind is not PolicyKind.MDP:
            raise ConfigError(
                f"construct {self.name!r}: osf only affects the mdp policy's planning"
            )

    @property
    def model_class(self) -> ModelClass:
        return self.policy.model_class


@dataclass(frozen=True)
class ReplicationStats:
    """Population metrics for one replication."""

    mean_cpuc: float
    mean_final_delta: float
    std_final_delta: float
    mean_services: float
    pct_max_dosage: float
    episodes: tuple[EpisodeState, ...] = ()


@dataclass(frozen=True)
class ConstructResult:
    """Replication-averaged metrics plus the per-replication breakdown."""

    spec: ConstructSpec
    mean_cpuc: float
    mean_final_delta: float
    std_final_delta: float
    mean_services: float
    pct_max_dosage: float
    replications: tuple[ReplicationStats, ...]


def _population_stats(
    episodes: Sequence[EpisodeState], cps: float, keep_episodes: bool
) -> ReplicationStats:
    cpucs = [cpuc(e.outcome.total_cost, e.outcome.final_delta, cps) for e in episodes]
    deltas = np.asarray([e.outcome.final_delta for e in episodes])
    services = [e.outcome.sessions_used for e in episodes]
    maxed = [e.outcome.max_dosage for e in episodes]
    return ReplicationStats(
        mean_cpuc=float(np.mean(cpucs)),
        mean_final_delta=float(deltas.mean()),
        std_final_delta=float(deltas.std(ddof=0)),
        mean_services=float(np.mean(services)),
        pct_max_dosage=100.0 * sum(maxed) / len(maxed),
        episodes=tuple(episodes) if keep_episodes else (),
    )


def run_construct(
    spec: ConstructSpec,
    population: Sequence[PatientAgent],
    cfg: SimulationConfig,
    planner_model: Optional[TransitionModel],
    *,
    osf_scale: float = 1.0,
    keep_episodes: bool = False,
) -> ConstructResult:
    """Run every patient (times ``replications``) under one construct.

    Patients and their world streams are fixed across replications; only the
    missingness masks and the policy coins are redrawn, which is what makes
    replications a statistical sample for the coin-flip policy. Per-patient
    CPUC is computed first and then averaged.
    """
    if len(population) == 0:
        raise ConfigError("population must not be empty")
    policy = spec.policy
    if policy.kind is PolicyKind.MDP:
        policy = replace(policy, osf=spec.osf)
    eff_cfg = cfg if spec.include_missing else replace(cfg, p_missing=0.0)

    reps: list[ReplicationStats] = []
    for rep in range(spec.replications):
        episodes = []
        for agent in population:
            episodes.append(
                run_episode(
                    agent,
                    policy,
                    planner_model,
                    eff_cfg,
                    obs_rng=substream(cfg.seed, "obs", agent.index, rep),
                    policy_rng=substream(cfg.seed, "policy", agent.index, rep),
                    osf_scale=osf_scale,
                )
            )
        reps.append(_population_stats(episodes, cfg.scale.cps, keep_episodes))

    return ConstructResult(
        spec=spec,
        mean_cpuc=float(np.mean([r.mean_cpuc for r in reps])),
        mean_final_delta=float(np.mean([r.mean_final_delta for r in reps])),
        std_final_delta=float(np.mean([r.std_final_delta for r in reps])),
        mean_services=float(np.mean([r.mean_services for r in reps])),
        pct_max_dosage=float(np.mean([r.pct_max_dosage for r in reps])),
        replications=tuple(reps),
    )


def sweep_osf(
    base: ConstructSpec,
    osf_values: Sequence[float],
    population: Sequence[PatientAgent],
    cfg: SimulationConfig,
    planner_model: Optional[TransitionModel],
    *,
    osf_scale: float = 1.0,
) -> list[tuple[float, ConstructResult]]:
    """Rerun one planning construct across OSF values on identical seeds.

    Substreams only key on (seed, patient, replication), so every OSF value
    sees the same world and the comparison is fully paired.
    """
    if len(osf_values) == 0:
        raise ConfigError("osf sweep needs at least one value")
    if base.policy.kind is not PolicyKind.MDP:
        raise ConfigError("osf sweeps only apply to the mdp policy")
    out = []
    for osf in osf_values:
        spec = replace(base, osf=float(osf), name=f"{base.name}@osf={osf:g}")
        out.append(
            (float(osf), run_construct(spec, population, cfg, planner_model, osf_scale=osf_scale))
        )
    return out
