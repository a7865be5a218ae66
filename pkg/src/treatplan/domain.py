"""Outcome scale, delta binning, and the value types everything else shares.

Scores live on a bounded instrument scale (default 0..40). Session-to-session
or since-baseline changes ("deltas") are discretized into five ordered bins,
which serve as the state and observation alphabet for belief tracking,
transition models, and planning alike.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from .errors import InvalidInputError


class DeltaBin(IntEnum):
    """Five ordered categories of outcome change, worst to best."""

    HIGH_DETERIORATION = 0
    LOW_DETERIORATION = 1
    FLATLINE = 2
    LOW_IMPROVEMENT = 3
    HIGH_IMPROVEMENT = 4

    @property
    def label(self) -> str:
        return _BIN_LABELS[self]


_BIN_LABELS = {
    DeltaBin.HIGH_DETERIORATION: "high_deterioration",
    DeltaBin.LOW_DETERIORATION: "low_deterioration",
    DeltaBin.FLATLINE: "flatline",
    DeltaBin.LOW_IMPROVEMENT: "low_improvement",
    DeltaBin.HIGH_IMPROVEMENT: "high_improvement",
}

BIN_BY_LABEL = {label: b for b, label in _BIN_LABELS.items()}

N_BINS = len(DeltaBin)

IMPROVEMENT_BINS = (DeltaBin.LOW_IMPROVEMENT, DeltaBin.HIGH_IMPROVEMENT)


class Action(IntEnum):
    """Binary session decision. STOP is absorbing within an episode."""

    STOP = 0
    TREAT = 1


@dataclass(frozen=True)
class Observation:
    """A session reading: an outcome score, or nothing at all."""

    score: Optional[float] = None

    @property
    def is_missing(self) -> bool:
        return self.score is None


MISSING = Observation(None)


def observed(score: float) -> Observation:
    return Observation(float(score))


@dataclass(frozen=True)
class ScaleConfig:
    """Instrument range, bin thresholds, session cost, and episode horizon.

    ``bin_edges`` are the four thresholds separating the five delta bins;
    boundary ownership follows the clinical convention baked into
    :func:`bin_delta`.
    """

    score_min: float = 0.0
    score_max: float = 40.0
    bin_edges: tuple[float, float, float, float] = (-4.0, -1.0, 1.0, 4.0)
    cps: float = 100.0
    horizon: int = 8
    delta_max_floor: float = 1.0

    def __post_init__(self):
        if not self.score_min < self.score_max:
            raise InvalidInputError("score_min must be below score_max")
        edges = tuple(float(e) for e in self.bin_edges)
        if len(edges) != 4 or any(a >= b for a, b in zip(edges, edges[1:])):
            raise InvalidInputError("bin_edges must be four strictly increasing thresholds")
        object.__setattr__(self, "bin_edges", edges)
        if not self.cps > 0:
            raise InvalidInputError("cps must be positive")
        if self.horizon < 1:
            raise InvalidInputError("horizon must be at least 1")
        if not self.delta_max_floor > 0:
            raise InvalidInputError("delta_max_floor must be positive")

    def clamp(self, score: float) -> float:
        return min(max(score, self.score_min), self.score_max)

    def in_range(self, score: float) -> bool:
        return self.score_min <= score <= self.score_max

    def bin_interval(self, b: DeltaBin) -> tuple[float, float]:
        """Delta range covered by ``b`` (outer bins extend to infinity)."""
        e = self.bin_edges
        bounds = [(-math.inf, e[0]), (e[0], e[1]), (e[1], e[2]), (e[2], e[3]), (e[3], math.inf)]
        return bounds[int(b)]

    def bin_midpoints(self) -> tuple[float, ...]:
        """Representative delta per bin; outer bins mirror the width of their
        nearest bounded neighbour."""
        e = self.bin_edges
        lo = e[0] - (e[1] - e[0]) / 2.0
        hi = e[3] + (e[3] - e[2]) / 2.0
        return (lo, (e[0] + e[1]) / 2.0, (e[1] + e[2]) / 2.0, (e[2] + e[3]) / 2.0, hi)


DEFAULT_SCALE = ScaleConfig()


def bin_delta(delta: float, cfg: ScaleConfig = DEFAULT_SCALE) -> DeltaBin:
    """Map a continuous outcome change to its delta bin.

    With default edges: d < -4 -> HIGH_DETERIORATION; -4 <= d < -1 ->
    LOW_DETERIORATION; -1 <= d <= 1 -> FLATLINE; 1 < d <= 4 ->
    LOW_IMPROVEMENT; d > 4 -> HIGH_IMPROVEMENT.
    """
    d = float(delta)
    if not math.isfinite(d):
        raise InvalidInputError(f"delta must be finite, got {delta!r}")
    e0, e1, e2, e3 = cfg.bin_edges
    if d < e0:
        return DeltaBin.HIGH_DETERIORATION
    if d < e1:
        return DeltaBin.LOW_DETERIORATION
    if d <= e2:
        return DeltaBin.FLATLINE
    if d <= e3:
        return DeltaBin.LOW_IMPROVEMENT
    return DeltaBin.HIGH_IMPROVEMENT


def delta_from_scores(current: float, reference: float, cfg: ScaleConfig = DEFAULT_SCALE) -> float:
    """Signed change of ``current`` relative to ``reference``.

    ``reference`` is the baseline score under the since-baseline convention or
    the previous session's score under the one-step convention.
    """
    for name, value in (("current", current), ("reference", reference)):
        if not cfg.in_range(value):
            raise InvalidInputError(
                f"{name} score {value} outside scale range [{cfg.score_min}, {cfg.score_max}]"
            )
    return float(current) - float(reference)
