import numpy as np
import pytest

from treatplan.domain import MISSING, ScaleConfig, observed
from treatplan.transitions import (
    ModelClass,
    Trajectory,
    TrajectoryDataset,
    TrajectorySession,
    TransitionModel,
)

SCALE = ScaleConfig()


def make_model(table, means=None, stds=None, model_class=ModelClass.GLOBAL_AVERAGE):
    """Transition model from plain rows; effect params default to bin midpoints."""
    cfg = ScaleConfig()
    if means is None:
        means = cfg.bin_midpoints()
    if stds is None:
        stds = (1.0,) * 5
    return TransitionModel(
        model_class=model_class,
        table=np.asarray(table, dtype=float),
        effect_means=np.asarray(means, dtype=float),
        effect_stds=np.asarray(stds, dtype=float),
    )


def random_row(rng):
    w = rng.random(5) + 1e-3
    return w / w.sum()


def random_model(rng, model_class=ModelClass.GLOBAL_AVERAGE):
    """Random row-stochastic table with in-bin effect params."""
    cfg = ScaleConfig()
    n_rows = 1 if model_class is ModelClass.ZEROTH_ORDER else 5
    table = np.stack([random_row(rng) for _ in range(n_rows)])
    mids = cfg.bin_midpoints()
    means = []
    for b in range(5):
        lo, hi = cfg.bin_interval(b)
        lo = max(lo, mids[0] - 2.0)
        hi = min(hi, mids[4] + 2.0)
        means.append(lo + rng.random() * (hi - lo))
    stds = 0.2 + rng.random(5)
    return TransitionModel(
        model_class=model_class,
        table=table,
        effect_means=np.asarray(means),
        effect_stds=stds,
    )


def trajectory_from_scores(pid, scores, cost=100.0):
    """Scores list (None = missing) at consecutive sessions starting at 0."""
    sessions = []
    for i, s in enumerate(scores):
        obs = MISSING if s is None else observed(s)
        sessions.append(TrajectorySession(i, obs, 0.0 if i == 0 else cost))
    return Trajectory(pid, tuple(sessions))


def dataset(*score_lists):
    return TrajectoryDataset(
        tuple(trajectory_from_scores(f"p{i}", s) for i, s in enumerate(score_lists))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
