"""Synthetic patient worlds and the online observe/decide/act episode loop.

A patient agent carries a latent continuous score evolved by a generative
transition model (the "world" model, which may differ from the model the
deciding policy plans with). Treating samples a next delta bin from the
world model's row for the patient's current conditioning bin, then a
continuous delta from that bin's effect Gaussian truncated to the bin's
interval, so the discrete and continuous tracks never disagree. Observations
go missing independently per session with configured probability.

The episode loop mirrors clinical flow: fold the latest reading into the
belief, decide, act on the world, advance the belief, repeat until the
policy stops or the horizon lands. Policies only ever see beliefs and
observations; the latent score stays on this side of the fence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

from .belief import Belief, IDENTITY_OBSERVATION, ObservationModel, predict, update
from .domain import (
    MISSING,
    Action,
    DeltaBin,
    Observation,
    ScaleConfig,
    bin_delta,
    observed,
)
from .errors import ConfigError, InvalidInputError
from .planner import DEFAULT_NODE_BUDGET
from .policies import DecisionContext, PolicySpec, decide
from .rng import substream, substream_seed
from .transitions import (
    ModelClass,
    Trajectory,
    TrajectorySession,
    TransitionModel,
)
from .utility import EpisodeOutcome


@dataclass(frozen=True)
class SimulationConfig:
    """Population, missingness, and seeding on top of a ScaleConfig."""

    scale: ScaleConfig = field(default_factory=ScaleConfig)
    population_size: int = 500
    p_missing: float = 0.3
    seed: int = 0
    baseline_mean: float = 20.0
    baseline_std: float = 8.0

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be at least 1")
        if not 0.0 <= self.p_missing <= 1.0:
            raise ConfigError("p_missing must lie in [0, 1]")
        if self.baseline_std < 0:
            raise ConfigError("baseline_std must be non-negative")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def cps(self) -> float:
        return self.scale.cps

    @property
    def horizon(self) -> int:
        return self.scale.horizon


@dataclass
class PatientAgent:
    """One simulated patient: identity, latent score state, world dynamics.

    ``reset()`` restores the intake state and re-seeds the world stream, so
    the same agent replays identically across runs and replications.
    """

    patient_id: str
    index: int
    baseline_score: float
    world_model: TransitionModel
    rng_stream: np.random.SeedSequence
    true_score: float = field(init=False)
    prev_score: float = field(init=False)
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.reset()

    def reset(self) -> None:
        self.true_score = self.baseline_score
        self.prev_score = self.baseline_score
        self._rng = np.random.Generator(np.random.PCG64(self.rng_stream))

    def conditioning_bin(self, cfg: ScaleConfig) -> DeltaBin:
        mc = self.world_model.model_class
        if mc is ModelClass.GLOBAL_AVERAGE:
            return bin_delta(self.true_score - self.baseline_score, cfg)
        if mc is ModelClass.FIRST_ORDER_LOCAL:
            return bin_delta(self.true_score - self.prev_score, cfg)
        return DeltaBin.FLATLINE  # zeroth order ignores it


@dataclass(frozen=True)
class SessionRecord:
    """One delivered treatment session as the world recorded it."""

    session: int
    action: Action
    true_score_after: float
    observation: Observation
    cost: float


@dataclass(frozen=True)
class EpisodeState:
    patient_id: str
    baseline_score: float
    sessions: tuple[SessionRecord, ...]
    terminated: bool
    outcome: EpisodeOutcome


# Hand-specified generative dynamics standing in for confidential outcome
# data. The shape matters more than the numbers: gains arrive mostly as
# occasional breakthrough sessions (rows are keyed by cumulative change);
# small partial gains tend to stall; deteriorations are deep but respond
# quickly to continued care; and once a breakthrough has landed, further
# sessions add little and drift back. That mix is what makes stopping
# decisions genuinely consequential for every policy.
DEFAULT_WORLD_TABLE = (
    (0.02, 0.04, 0.15, 0.35, 0.44),
    (0.02, 0.06, 0.19, 0.41, 0.32),
    (0.07, 0.14, 0.29, 0.16, 0.34),
    (0.09, 0.18, 0.30, 0.37, 0.06),
    (0.12, 0.24, 0.45, 0.15, 0.04),
)
DEFAULT_EFFECT_MEANS = (-6.0, -2.4, 0.0, 1.5, 7.8)
DEFAULT_EFFECT_STDS = (0.9, 0.6, 0.5, 0.4, 1.1)


def default_world_model(
    model_class: ModelClass = ModelClass.GLOBAL_AVERAGE, cfg: ScaleConfig = ScaleConfig()
) -> TransitionModel:
    """Built-in synthetic dynamics for running without any fitted data."""
    if model_class is ModelClass.ZEROTH_ORDER:
        table = np.asarray([DEFAULT_WORLD_TABLE[DeltaBin.FLATLINE]])
    else:
        table = np.asarray(DEFAULT_WORLD_TABLE)
    return TransitionModel(
        model_class=model_class,
        table=table,
        effect_means=np.asarray(DEFAULT_EFFECT_MEANS),
        effect_stds=np.asarray(DEFAULT_EFFECT_STDS),
        scale=cfg,
    )


def generate_population(
    cfg: SimulationConfig, world_model: TransitionModel
) -> list[PatientAgent]:
    """Draw a cohort of agents with clamped-Gaussian baselines and per-agent
    world substreams, all derived from the configured seed."""
    gen = substream(cfg.seed, "population")
    agents = []
    for i in range(cfg.population_size):
        baseline = cfg.scale.clamp(float(gen.normal(cfg.baseline_mean, cfg.baseline_std)))
        agents.append(
            PatientAgent(
                patient_id=f"p{i:04d}",
                index=i,
                baseline_score=baseline,
                world_model=world_model,
                rng_stream=substream_seed(cfg.seed, "world", i),
            )
        )
    return agents


def _sample_bin(rng: np.random.Generator, row: np.ndarray) -> DeltaBin:
    u = rng.random()
    acc = 0.0
    for n in range(len(row)):
        acc += row[n]
        if u < acc:
            return DeltaBin(n)
    return DeltaBin(len(row) - 1)  # guard against float shortfall in the row sum


def _sample_truncated(
    rng: np.random.Generator, mean: float, std: float, lo: float, hi: float
) -> float:
    """Draw from Normal(mean, std) truncated to (lo, hi) by inverse CDF."""
    if std <= 0.0:
        return min(max(mean, lo), hi)
    a = 0.0 if math.isinf(lo) else float(ndtr((lo - mean) / std))
    b = 1.0 if math.isinf(hi) else float(ndtr((hi - mean) / std))
    u = rng.random()
    x = mean + std * float(ndtri(a + u * (b - a)))
    if not math.isfinite(x):
        return min(max(mean, lo), hi)
    return x


def step_world(
    agent: PatientAgent,
    a: Action,
    cfg: SimulationConfig,
    obs_rng: Optional[np.random.Generator] = None,
) -> tuple[float, Observation, float]:
    """Advance the latent world one session and emit an observation.

    Stopping leaves the score untouched, costs nothing, and consumes no
    randomness; the episode loop terminates on it. Treating samples the next
    bin and its continuous effect from the agent's world model and masks the
    observation with probability ``p_missing``.
    """
    scale = cfg.scale
    if a is Action.STOP:
        return agent.true_score, MISSING, 0.0
    row = agent.world_model.row(agent.conditioning_bin(scale))
    n = _sample_bin(agent._rng, row)
    lo, hi = scale.bin_interval(n)
    delta = _sample_truncated(
        agent._rng, float(agent.world_model.effect_means[n]), float(agent.world_model.effect_stds[n]), lo, hi
    )
    new_score = scale.clamp(agent.true_score + delta)
    agent.prev_score = agent.true_score
    agent.true_score = new_score
    if obs_rng is not None and cfg.p_missing > 0 and obs_rng.random() < cfg.p_missing:
        obs = MISSING
    else:
        obs = observed(new_score)
    return new_score, obs, scale.cps


def run_episode(
    agent: PatientAgent,
    policy: PolicySpec,
    planner_model: Optional[TransitionModel],
    cfg: SimulationConfig,
    *,
    obs_rng: Optional[np.random.Generator] = None,
    policy_rng: Optional[np.random.Generator] = None,
    obs_model: ObservationModel = IDENTITY_OBSERVATION,
    osf_scale: float = 1.0,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> EpisodeState:
    """Play one patient's episode under a policy.

    The belief starts from the intake reading (no change yet, score known)
    and is maintained with ``planner_model`` (falling back to the world model
    for the model-free baselines). The reported final delta is measured on
    ground truth; the policy never saw it.
    """
    agent.reset()
    scale = cfg.scale
    belief_model = planner_model if planner_model is not None else agent.world_model
    belief = Belief.from_intake(agent.baseline_score)
    pending: Optional[Observation] = None
    records: list[SessionRecord] = []
    total_cost = 0.0

    for t in range(scale.horizon):
        if pending is not None:
            belief = update(belief, pending, obs_model, belief_model.model_class, scale)
        ctx = DecisionContext(belief, t, total_cost, policy_rng)
        action = decide(
            policy, ctx, planner_model, scale, osf_scale=osf_scale, node_budget=node_budget
        )
        new_score, obs, cost = step_world(agent, action, cfg, obs_rng)
        if action is Action.STOP:
            break
        total_cost += cost
        records.append(SessionRecord(t + 1, action, new_score, obs, cost))
        belief = predict(belief, action, belief_model, scale)
        pending = obs

    outcome = EpisodeOutcome(
        total_cost=total_cost,
        final_delta=agent.true_score - agent.baseline_score,
        sessions_used=len(records),
        max_dosage=len(records) == scale.horizon,
    )
    return EpisodeState(agent.patient_id, agent.baseline_score, tuple(records), True, outcome)


def episode_to_trajectory(ep: EpisodeState) -> Trajectory:
    """Recast an episode in the trajectory-CSV shape the fitter ingests."""
    sessions = [TrajectorySession(0, observed(ep.baseline_score), 0.0)]
    for r in ep.sessions:
        sessions.append(TrajectorySession(r.session, r.observation, r.cost))
    return Trajectory(ep.patient_id, tuple(sessions))


def replay_episode(
    traj: Trajectory,
    policy: PolicySpec,
    planner_model: Optional[TransitionModel],
    cfg: SimulationConfig,
    *,
    policy_rng: Optional[np.random.Generator] = None,
    obs_model: ObservationModel = IDENTITY_OBSERVATION,
    osf_scale: float = 1.0,
) -> EpisodeState:
    """Run a policy against a recorded trajectory instead of generated
    dynamics: the next score is whatever the data says, regardless of model.

    The data only covers sessions the real patient attended, so the episode
    ends when the recording runs out even if the policy would keep treating.
    For sessions recorded as missing, the last observed score stands in for
    the latent one in the session record and the final delta.
    """
    if not traj.sessions or traj.sessions[0].observation.is_missing:
        raise InvalidInputError("replay needs a trajectory with an observed intake reading")
    scale = cfg.scale
    baseline = float(traj.sessions[0].observation.score)
    belief_model = planner_model
    if belief_model is None:
        raise InvalidInputError("replay needs a transition model for belief upkeep")
    belief = Belief.from_intake(baseline)
    pending: Optional[Observation] = None
    records: list[SessionRecord] = []
    total_cost = 0.0
    last_known = baseline
    steps = traj.sessions[1:]

    for t in range(min(scale.horizon, len(steps))):
        if pending is not None:
            belief = update(belief, pending, obs_model, belief_model.model_class, scale)
        ctx = DecisionContext(belief, t, total_cost, policy_rng)
        action = decide(policy, ctx, planner_model, scale, osf_scale=osf_scale)
        if action is Action.STOP:
            break
        rec = steps[t]
        if not rec.observation.is_missing:
            last_known = float(rec.observation.score)
        total_cost += rec.cost
        records.append(SessionRecord(t + 1, Action.TREAT, last_known, rec.observation, rec.cost))
        belief = predict(belief, Action.TREAT, belief_model, scale)
        pending = rec.observation

    outcome = EpisodeOutcome(
        total_cost=total_cost,
        final_delta=last_known - baseline,
        sessions_used=len(records),
        max_dosage=len(records) == scale.horizon,
    )
    return EpisodeState(traj.patient_id, baseline, tuple(records), True, outcome)
