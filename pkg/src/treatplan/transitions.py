"""Maximum-likelihood transition models over delta bins.

Three model classes differ only in what they condition on when predicting the
next one-step outcome change:

* ``ZEROTH_ORDER`` — nothing; a single marginal row applied to everyone.
* ``FIRST_ORDER_LOCAL`` — the previous one-step delta bin.
* ``GLOBAL_AVERAGE`` — the binned change since baseline.

Fitting counts observed consecutive-session transitions; rows the data never
reaches fall back to a uniform distribution and are flagged in the fit
diagnostics. Each next-step bin also gets a Gaussian effect model (mean/std of
the continuous one-step deltas that landed in it), used to advance continuous
score estimates and to sample world dynamics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .domain import (
    N_BINS,
    Action,
    DeltaBin,
    Observation,
    ScaleConfig,
    bin_delta,
)
from .errors import FitError, InvalidInputError

_ROW_SUM_TOL = 1e-9
_MIN_STD = 1e-9


class ModelClass(Enum):
    ZEROTH_ORDER = "zeroth"
    FIRST_ORDER_LOCAL = "local"
    GLOBAL_AVERAGE = "global"


MODEL_CLASS_BY_NAME = {m.value: m for m in ModelClass}


@dataclass(frozen=True)
class TrajectorySession:
    """One observed (or missed) visit: session index, reading, cost."""

    session: int
    observation: Observation
    cost: float = 0.0


@dataclass(frozen=True)
class Trajectory:
    patient_id: str
    sessions: tuple[TrajectorySession, ...]

    def __post_init__(self):
        idx = [s.session for s in self.sessions]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidInputError(
                f"trajectory {self.patient_id!r}: session indices must strictly increase"
            )


@dataclass(frozen=True)
class TrajectoryDataset:
    trajectories: tuple[Trajectory, ...]

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)


@dataclass(frozen=True)
class FitDiagnostics:
    """What the fit saw and where it had to fall back."""

    model_class: ModelClass
    trajectories_used: int
    trajectories_skipped: int
    events_total: int
    row_counts: tuple[int, ...]
    smoothed_rows: tuple[DeltaBin, ...]
    effect_sample_counts: tuple[int, ...]
    effect_fallback_bins: tuple[DeltaBin, ...]

    def to_dict(self) -> dict:
        return {
            "model_class": self.model_class.value,
            "trajectories_used": self.trajectories_used,
            "trajectories_skipped": self.trajectories_skipped,
            "events_total": self.events_total,
            "row_counts": list(self.row_counts),
            "smoothed_rows": [b.label for b in self.smoothed_rows],
            "effect_sample_counts": list(self.effect_sample_counts),
            "effect_fallback_bins": [b.label for b in self.effect_fallback_bins],
        }


@dataclass(frozen=True)
class TransitionModel:
    """Conditional next-bin probability table plus per-bin effect Gaussians.

    ``table`` has one row per conditioning bin (a single row for
    ``ZEROTH_ORDER``); rows are distributions over the next one-step delta
    bin under treatment. ``effect_means``/``effect_stds`` describe the
    continuous one-step delta within each next-step bin. ``counts`` keeps the
    raw fit counts for diagnostics when the model was estimated from data.
    """

    model_class: ModelClass
    table: np.ndarray
    effect_means: np.ndarray
    effect_stds: np.ndarray
    counts: Optional[np.ndarray] = None
    diagnostics: Optional[FitDiagnostics] = None
    scale: ScaleConfig = field(default_factory=ScaleConfig)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        expected_rows = 1 if self.model_class is ModelClass.ZEROTH_ORDER else N_BINS
        if table.shape != (expected_rows, N_BINS):
            raise InvalidInputError(
                f"table shape {table.shape} invalid for {self.model_class.value}"
            )
        if np.any(table < 0):
            raise InvalidInputError("table entries must be non-negative")
        sums = table.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _ROW_SUM_TOL):
            raise InvalidInputError(f"table rows must sum to 1 (got sums {sums})")
        means = np.asarray(self.effect_means, dtype=float)
        stds = np.asarray(self.effect_stds, dtype=float)
        if means.shape != (N_BINS,) or stds.shape != (N_BINS,):
            raise InvalidInputError("effect params must have one (mean, std) per bin")
        if np.any(stds < 0):
            raise InvalidInputError("effect stds must be non-negative")
        for b in DeltaBin:
            lo, hi = self.scale.bin_interval(b)
            if not (lo - _ROW_SUM_TOL <= means[b] <= hi + _ROW_SUM_TOL):
                raise InvalidInputError(
                    f"effect mean {means[b]} for {b.label} outside its bin range"
                )
        for name, arr in (("table", table), ("effect_means", means), ("effect_stds", stds)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.counts is not None:
            counts = np.asarray(self.counts, dtype=int)
            counts.flags.writeable = False
            object.__setattr__(self, "counts", counts)

    def row(self, conditioning_bin: DeltaBin) -> np.ndarray:
        """Treatment row for a conditioning bin (ignored for zeroth order)."""
        if self.model_class is ModelClass.ZEROTH_ORDER:
            return self.table[0]
        return self.table[int(conditioning_bin)]

    def rows_matrix(self) -> np.ndarray:
        """Always 5x5: the zeroth-order row tiled when necessary."""
        if self.model_class is ModelClass.ZEROTH_ORDER:
            return np.repeat(self.table, N_BINS, axis=0)
        return self.table


def next_bin_distribution(
    model: TransitionModel, conditioning_bin: DeltaBin, action: Action
) -> np.ndarray:
    """Distribution over the next delta bin for one action.

    Stopping invokes the stationarity approximation: untreated patients stay
    put, i.e. a point mass on FLATLINE.
    """
    if action is Action.STOP:
        out = np.zeros(N_BINS)
        out[DeltaBin.FLATLINE] = 1.0
        return out
    return model.row(conditioning_bin).copy()


def _usable_scores(traj: Trajectory) -> Optional[list[tuple[int, Optional[float]]]]:
    """(session, score-or-None) pairs, or None if the intake reading is missing."""
    if not traj.sessions:
        return None
    first = traj.sessions[0]
    if first.observation.is_missing:
        return None
    return [(s.session, s.observation.score) for s in traj.sessions]


def fit(
    data: TrajectoryDataset, model_class: ModelClass, cfg: ScaleConfig = ScaleConfig()
) -> TransitionModel:
    """Maximum-likelihood fit of a transition model from observed trajectories.

    Only consecutive-session pairs with both readings present contribute; a
    trajectory whose intake reading is missing is skipped entirely (its
    baseline is undefined). Conditioning values follow the model class; for
    the local class the event additionally needs the preceding reading to
    define the previous one-step delta.
    """
    if len(data) == 0:
        raise FitError("empty dataset")

    n_rows = 1 if model_class is ModelClass.ZEROTH_ORDER else N_BINS
    counts = np.zeros((n_rows, N_BINS), dtype=int)
    deltas_by_bin: list[list[float]] = [[] for _ in range(N_BINS)]
    used = skipped = 0

    for traj in data:
        scores = _usable_scores(traj)
        if scores is None:
            skipped += 1
            continue
        used += 1
        baseline = scores[0][1]
        for i in range(1, len(scores)):
            s_idx, s_val = scores[i]
            p_idx, p_val = scores[i - 1]
            if s_val is None or p_val is None or s_idx - p_idx != 1:
                continue
            delta = s_val - p_val
            out_bin = bin_delta(delta, cfg)
            deltas_by_bin[out_bin].append(delta)
            if model_class is ModelClass.ZEROTH_ORDER:
                cond = 0
            elif model_class is ModelClass.GLOBAL_AVERAGE:
                cond = int(bin_delta(p_val - baseline, cfg))
            else:
                if i < 2:
                    continue
                pp_idx, pp_val = scores[i - 2]
                if pp_val is None or p_idx - pp_idx != 1:
                    continue
                cond = int(bin_delta(p_val - pp_val, cfg))
            counts[cond, out_bin] += 1

    events_total = int(counts.sum())
    if events_total == 0:
        raise FitError("no usable consecutive observed transitions in dataset")

    table = np.empty((n_rows, N_BINS), dtype=float)
    smoothed: list[DeltaBin] = []
    row_totals = counts.sum(axis=1)
    for r in range(n_rows):
        if row_totals[r] == 0:
            table[r] = 1.0 / N_BINS
            smoothed.append(DeltaBin(r))
        else:
            table[r] = counts[r] / row_totals[r]

    midpoints = cfg.bin_midpoints()
    means = np.empty(N_BINS)
    stds = np.empty(N_BINS)
    fallback: list[DeltaBin] = []
    for b in DeltaBin:
        samples = deltas_by_bin[b]
        if len(samples) < 2:
            means[b] = midpoints[b]
            stds[b] = 1.0
            fallback.append(b)
        else:
            arr = np.asarray(samples)
            means[b] = arr.mean()
            stds[b] = max(float(arr.std(ddof=1)), _MIN_STD)

    diag = FitDiagnostics(
        model_class=model_class,
        trajectories_used=used,
        trajectories_skipped=skipped,
        events_total=events_total,
        row_counts=tuple(int(t) for t in row_totals),
        smoothed_rows=tuple(smoothed),
        effect_sample_counts=tuple(len(d) for d in deltas_by_bin),
        effect_fallback_bins=tuple(fallback),
    )
    return TransitionModel(
        model_class=model_class,
        table=table,
        effect_means=means,
        effect_stds=stds,
        counts=counts,
        diagnostics=diag,
        scale=cfg,
    )
