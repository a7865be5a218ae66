"""Decision strategies: four baselines plus the planning policies.

All strategies answer one question per session: treat or stop. The baselines
range from ignoring evidence entirely (fixed-length and always-treat, the
case-rate and fee-for-service stand-ins) to one-step readings of the
transition model (modal-bin and biased-coin). The planning strategies defer
to the decision-tree planner.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .belief import Belief
from .domain import Action, DeltaBin, IMPROVEMENT_BINS, N_BINS, ScaleConfig
from .errors import ConfigError
from .planner import DEFAULT_NODE_BUDGET, BackupMode, plan
from .transitions import ModelClass, TransitionModel


class PolicyKind(Enum):
    HARD_STOP = "hard_stop"
    RAW_EFFECT = "raw_effect"
    MAX_IMPROVE = "max_improve"
    PROBABILISTIC = "probabilistic"
    MDP = "mdp"


POLICY_KIND_BY_NAME = {k.value: k for k in PolicyKind}


@dataclass(frozen=True)
class PolicySpec:
    """A decision strategy plus the knobs it needs.

    ``stop_after`` only applies to HARD_STOP; ``mode`` and ``osf`` only to
    MDP. ``model_class`` names the transition model the strategy consults
    (ignored by HARD_STOP and RAW_EFFECT). The zeroth-order class cannot
    back the planning policy: with history-independent transitions the tree
    degenerates and always-treat/always-stop falls out trivially, so that
    combination is rejected outright.
    """

    kind: PolicyKind
    model_class: ModelClass = ModelClass.GLOBAL_AVERAGE
    stop_after: int = 3
    mode: BackupMode = BackupMode.NORMAL
    osf: float = 0.0

    def __post_init__(self):
        if self.kind is PolicyKind.HARD_STOP and self.stop_after < 1:
            raise ConfigError("hard_stop needs stop_after >= 1")
        if self.kind is PolicyKind.MDP and self.model_class is ModelClass.ZEROTH_ORDER:
            raise ConfigError(
                "the planning policy is trivial under a zeroth-order transition model "
                "(history-independent transitions); use the raw_effect policy instead"
            )
        if self.osf < 0:
            raise ConfigError("osf must be non-negative")


@dataclass
class DecisionContext:
    """Everything a strategy may look at: belief, time, spend, and its coin
    stream. Deliberately excludes the latent true score."""

    belief: Belief
    session_index: int
    accumulated_cost: float
    rng: Optional[np.random.Generator] = None


def _predicted_next_bins(belief: Belief, model: TransitionModel) -> np.ndarray:
    """Belief-weighted next-bin distribution under treatment; reduces to the
    conditioning bin's table row for point-mass beliefs."""
    return model.rows_matrix().T @ belief.probs


def decide(
    policy: PolicySpec,
    ctx: DecisionContext,
    model: Optional[TransitionModel],
    cfg: ScaleConfig = ScaleConfig(),
    *,
    osf_scale: float = 1.0,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Action:
    """Apply a strategy to one decision point."""
    kind = policy.kind
    if kind is PolicyKind.HARD_STOP:
        return Action.TREAT if ctx.session_index < policy.stop_after else Action.STOP
    if kind is PolicyKind.RAW_EFFECT:
        return Action.TREAT

    if model is None:
        raise ConfigError(f"{kind.value} policy needs a fitted transition model")

    if kind is PolicyKind.MAX_IMPROVE:
        q = _predicted_next_bins(ctx.belief, model)
        # modal bin, ties resolved toward the better outcome
        modal = DeltaBin(N_BINS - 1 - int(np.argmax(q[::-1])))
        return Action.TREAT if modal in IMPROVEMENT_BINS else Action.STOP

    if kind is PolicyKind.PROBABILISTIC:
        if ctx.rng is None:
            raise ConfigError("probabilistic policy needs a random stream")
        q = _predicted_next_bins(ctx.belief, model)
        p_improve = float(q[DeltaBin.LOW_IMPROVEMENT] + q[DeltaBin.HIGH_IMPROVEMENT])
        return Action.TREAT if ctx.rng.random() < p_improve else Action.STOP

    result = plan(
        ctx.belief,
        ctx.session_index,
        ctx.accumulated_cost,
        model,
        cfg,
        policy.osf,
        policy.mode,
        osf_scale=osf_scale,
        node_budget=node_budget,
    )
    return result.root_action
