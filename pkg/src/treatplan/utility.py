"""Cost-per-unit-change utility and the outcome-scaling adjustment.

CPUC is total cost divided by the final outcome change when the change is at
least one unit; below that, the cost is kept whole and each missing unit of
change adds one session-cost of penalty, which removes the division
singularity and makes delta=0 exactly one session-cost worse than delta=1 at
equal spend. Lower is better throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

from .belief import Belief
from .domain import ScaleConfig
from .errors import InvalidInputError


@dataclass(frozen=True)
class EpisodeOutcome:
    """End-of-episode facts a policy is judged on."""

    total_cost: float
    final_delta: float
    sessions_used: int
    max_dosage: bool

    def __post_init__(self):
        if self.total_cost < 0:
            raise InvalidInputError("total_cost must be non-negative")
        if self.sessions_used < 0:
            raise InvalidInputError("sessions_used must be non-negative")


def cpuc(total_cost: float, final_delta: float, cps: float) -> float:
    """Cost per unit of outcome change; sub-unit deltas pay a per-unit penalty."""
    if total_cost < 0:
        raise InvalidInputError("total_cost must be non-negative")
    if not cps > 0:
        raise InvalidInputError("cps must be positive")
    if final_delta >= 1.0:
        return total_cost / final_delta
    return total_cost + (1.0 - final_delta) * cps


def osf_adjust(
    cpuc_value: float, delta: float, delta_max: float, osf: float, scale: float = 1.0
) -> float:
    """Add the scaled outcome shortfall to a CPUC value.

    The shortfall ``(delta_max - delta) / delta_max`` lies in [0, 1] for
    deltas between 0 and ``delta_max``, so the added term is at most
    ``scale * osf``. ``scale`` is a tuning knob for how hard the shortfall
    term weighs against dollar-denominated CPUC; 1 applies the term as-is.
    """
    if delta_max <= 0:
        raise InvalidInputError("delta_max must be positive")
    if osf < 0:
        raise InvalidInputError("osf must be non-negative")
    if delta > delta_max:
        raise InvalidInputError("delta cannot exceed delta_max")
    return cpuc_value + (scale * osf) * ((delta_max - delta) / delta_max)


def delta_max_for(b: Belief, cfg: ScaleConfig = ScaleConfig()) -> float:
    """Largest achievable improvement over baseline given the instrument ceiling.

    A baseline already at the ceiling gets a small positive floor so the
    shortfall scaling stays well-defined.
    """
    dm = cfg.score_max - b.baseline_score
    if dm <= 0:
        return cfg.delta_max_floor
    return dm
