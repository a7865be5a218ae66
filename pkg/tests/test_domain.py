import math

import pytest
from hypothesis import given, strategies as st

from treatplan.domain import (
    Action,
    DeltaBin,
    MISSING,
    Observation,
    ScaleConfig,
    bin_delta,
    delta_from_scores,
    observed,
)
from treatplan.errors import InvalidInputError

CFG = ScaleConfig()

finite_deltas = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


def test_bin_members_and_order():
    assert [b.name for b in DeltaBin] == [
        "HIGH_DETERIORATION",
        "LOW_DETERIORATION",
        "FLATLINE",
        "LOW_IMPROVEMENT",
        "HIGH_IMPROVEMENT",
    ]
    assert DeltaBin.HIGH_DETERIORATION < DeltaBin.FLATLINE < DeltaBin.HIGH_IMPROVEMENT


def test_bin_delta_paper_examples():
    assert bin_delta(-5.0) is DeltaBin.HIGH_DETERIORATION
    assert bin_delta(0.0) is DeltaBin.FLATLINE


def test_bin_delta_boundary_sweep():
    # edge ownership at the four thresholds, checked against the interval
    # predicates evaluated by hand
    assert bin_delta(-4.0) is DeltaBin.LOW_DETERIORATION
    assert bin_delta(-1.0) is DeltaBin.FLATLINE
    assert bin_delta(1.0) is DeltaBin.FLATLINE
    assert bin_delta(4.0) is DeltaBin.LOW_IMPROVEMENT
    # just past each edge
    assert bin_delta(math.nextafter(-4.0, -5)) is DeltaBin.HIGH_DETERIORATION
    assert bin_delta(math.nextafter(1.0, 2)) is DeltaBin.LOW_IMPROVEMENT
    assert bin_delta(math.nextafter(4.0, 5)) is DeltaBin.HIGH_IMPROVEMENT


def test_bin_delta_rejects_non_finite():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(InvalidInputError):
            bin_delta(bad)


@given(finite_deltas)
def test_bin_delta_total(delta):
    b = bin_delta(delta)
    lo, hi = CFG.bin_interval(b)
    assert lo <= delta <= hi
    # exactly one bin claims it
    owners = [
        bb
        for bb in DeltaBin
        if _in_bin(delta, bb)
    ]
    assert owners == [b]


def _in_bin(d, b):
    e = CFG.bin_edges
    preds = [d < e[0], e[0] <= d < e[1], e[1] <= d <= e[2], e[2] < d <= e[3], d > e[3]]
    return preds[int(b)]


@given(finite_deltas, finite_deltas)
def test_bin_delta_monotone(d1, d2):
    lo, hi = sorted((d1, d2))
    assert bin_delta(lo) <= bin_delta(hi)


def test_delta_from_scores():
    assert delta_from_scores(25, 20) == 5
    assert delta_from_scores(20, 20) == 0
    assert delta_from_scores(15, 22) == -7


@given(
    st.floats(min_value=0, max_value=40),
    st.floats(min_value=0, max_value=40),
)
def test_delta_antisymmetric(a, b):
    assert delta_from_scores(a, b) == -delta_from_scores(b, a)


def test_delta_from_scores_range_check():
    with pytest.raises(InvalidInputError):
        delta_from_scores(45, 20)
    with pytest.raises(InvalidInputError):
        delta_from_scores(20, -1)


def test_observation():
    assert MISSING.is_missing
    assert not observed(12.5).is_missing
    assert observed(12.5).score == 12.5
    assert Observation() == MISSING


def test_actions():
    assert set(Action) == {Action.STOP, Action.TREAT}


def test_scale_config_validation():
    with pytest.raises(InvalidInputError):
        ScaleConfig(score_min=40, score_max=40)
    with pytest.raises(InvalidInputError):
        ScaleConfig(bin_edges=(-4, 1, -1, 4))
    with pytest.raises(InvalidInputError):
        ScaleConfig(cps=0)
    with pytest.raises(InvalidInputError):
        ScaleConfig(horizon=0)


def test_scale_midpoints_mirror_outer_bins():
    assert CFG.bin_midpoints() == (-5.5, -2.5, 0.0, 2.5, 5.5)


def test_clamp():
    assert CFG.clamp(-3) == 0
    assert CFG.clamp(43) == 40
    assert CFG.clamp(17.2) == 17.2
