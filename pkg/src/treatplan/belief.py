"""Belief tracking over delta bins with a continuous score estimate.

A belief is a distribution over the five delta bins plus a continuous
expected-score track. ``predict`` pushes the belief through the transition
model (and advances the score estimate by the expected treatment effect);
``update`` folds in an observed score via Bayes rule, or leaves the belief
untouched when the reading is missing. The bin a fresh observation maps to
depends on the conditioning convention of the active model class: one-step
change against the current score estimate for the local model, change since
baseline for the global model.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .domain import MISSING, Action, DeltaBin, N_BINS, Observation, ScaleConfig, bin_delta
from .errors import InvalidInputError
from .transitions import ModelClass, TransitionModel

log = logging.getLogger(__name__)

_PROB_TOL = 1e-9


@dataclass(frozen=True)
class Belief:
    """Distribution over delta bins plus the continuous score estimate."""

    probs: np.ndarray
    expected_score: float
    baseline_score: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (N_BINS,):
            raise InvalidInputError(f"belief needs {N_BINS} probabilities, got {probs.shape}")
        if np.any(probs < -_PROB_TOL) or abs(probs.sum() - 1.0) > _PROB_TOL:
            raise InvalidInputError(f"belief probabilities must be a distribution: {probs}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, b: DeltaBin, expected_score: float, baseline_score: float) -> "Belief":
        probs = np.zeros(N_BINS)
        probs[int(b)] = 1.0
        return cls(probs, float(expected_score), float(baseline_score))

    @classmethod
    def from_intake(cls, baseline_score: float) -> "Belief":
        """Belief right after the intake reading: no change yet, score known."""
        return cls.point_mass(DeltaBin.FLATLINE, baseline_score, baseline_score)


@dataclass(frozen=True)
class ObservationModel:
    """P(observed bin | true bin): rows are true bins, each a distribution."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (N_BINS, N_BINS):
            raise InvalidInputError(f"observation matrix must be {N_BINS}x{N_BINS}")
        if np.any(m < 0) or np.any(np.abs(m.sum(axis=1) - 1.0) > _PROB_TOL):
            raise InvalidInputError("observation matrix rows must be distributions")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "ObservationModel":
        return cls(np.eye(N_BINS))

    @classmethod
    def symmetric_noise(cls, p_correct: float) -> "ObservationModel":
        """Reads the true bin with probability ``p_correct``, else uniformly errs."""
        if not 0.0 <= p_correct <= 1.0:
            raise InvalidInputError("p_correct must lie in [0, 1]")
        off = (1.0 - p_correct) / (N_BINS - 1)
        m = np.full((N_BINS, N_BINS), off)
        np.fill_diagonal(m, p_correct)
        return cls(m)

    def likelihoods(self, observed_bin: DeltaBin) -> np.ndarray:
        """P(observed_bin | s) for every true bin s."""
        return self.matrix[:, int(observed_bin)]


IDENTITY_OBSERVATION = ObservationModel.identity()


def predict(
    b: Belief, a: Action, model: TransitionModel, cfg: ScaleConfig = ScaleConfig()
) -> Belief:
    """One-step belief propagation without an observation.

    Treating mixes the model rows by the current belief; stopping collapses
    to FLATLINE (patients off treatment are assumed stationary). The score
    estimate advances by the expected effect of the new bin distribution and
    stays clamped to the instrument range.
    """
    if a is Action.STOP:
        probs = np.zeros(N_BINS)
        probs[DeltaBin.FLATLINE] = 1.0
    else:
        probs = model.rows_matrix().T @ b.probs
    score = cfg.clamp(b.expected_score + float(probs @ model.effect_means))
    return Belief(probs, score, b.baseline_score)


def update(
    b: Belief,
    o: Observation,
    obs_model: ObservationModel = IDENTITY_OBSERVATION,
    convention: ModelClass = ModelClass.GLOBAL_AVERAGE,
    cfg: ScaleConfig = ScaleConfig(),
) -> Belief:
    """Fold an observation into the belief (Bayes rule); missing is a no-op.

    The observed score is binned per the active conditioning convention
    (one-step vs. the current estimate for the local model, since-baseline
    for the global model), then the posterior reweights the prior by the
    observation likelihoods. An actual reading replaces the score estimate.
    If the observation has zero likelihood under the prior, the belief
    collapses to the observed bin: a real reading outranks a contradicted
    prior.
    """
    if o.is_missing:
        return b
    x = cfg.clamp(float(o.score))
    if convention is ModelClass.GLOBAL_AVERAGE:
        reference = b.baseline_score
    else:
        reference = b.expected_score
    obs_bin = bin_delta(x - reference, cfg)
    weighted = obs_model.likelihoods(obs_bin) * b.probs
    z = float(weighted.sum())
    if z <= 0.0:
        log.warning(
            "degenerate belief update: observation bin %s impossible under prior; "
            "collapsing to the observed bin",
            obs_bin.label,
        )
        return Belief.point_mass(obs_bin, x, b.baseline_score)
    return Belief(weighted / z, x, b.baseline_score)


def forecast(
    b: Belief,
    actions: Sequence[Action],
    model: TransitionModel,
    cfg: ScaleConfig = ScaleConfig(),
) -> list[Belief]:
    """Iterated predicts with no intervening observations.

    Element ``k`` is the belief after the first ``k + 1`` actions.
    """
    if len(actions) == 0:
        raise InvalidInputError("forecast needs at least one action")
    out = []
    current = b
    for a in actions:
        current = predict(current, a, model, cfg)
        out.append(current)
    return out
