"""Analytic oracles and coordination metrics.

The closed-form expectations are cross-checked against an independent
episode-length enumeration oracle; the trace-based mutual-information
estimator is checked against brute-force summation over explicit joint
tables.
"""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from macsim.analysis import (
    episode_return,
    ic_upper_bound,
    instantaneous_coordination,
    expected_r1,
    expected_r2,
    mutual_information_from_joint,
    optimal_return,
    pearson,
)
from macsim.types import EpisodeTrace, Mode, StepRecord


def enum_r1(bler, t_max):
    """Independent oracle: fire-and-forget either finishes in 2 slots or
    never finishes."""
    return (1 - bler) * -2.0 + bler * -float(t_max)


def enum_r2(bler, t_max):
    """Independent oracle: enumerate the ack-waiting episode-length
    distribution (length 3 + k after k erasures, truncated at t_max)."""
    if t_max < 4:
        return -float(t_max)
    total = 0.0
    prob_reached = 1.0
    for length in range(3, t_max):
        p = prob_reached * (1 - bler)
        total += p * -length
        prob_reached *= bler
    total += prob_reached * -float(t_max)
    return total


@pytest.mark.parametrize("bler", [0.0, 0.1, 0.25, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("t_max", [1, 2, 3, 4, 5, 8, 16, 32])
def test_closed_forms_match_enumeration(bler, t_max):
    assert expected_r1(bler, t_max) == pytest.approx(enum_r1(bler, t_max), abs=1e-12)
    assert expected_r2(bler, t_max) == pytest.approx(enum_r2(bler, t_max), abs=1e-12)


def test_r1_known_values():
    assert expected_r1(0.0, 17) == -2.0
    assert expected_r1(0.5, 4) == -3.0
    assert expected_r1(0.5, 8) == -5.0


def test_r2_known_values():
    assert expected_r2(0.3, 2) == -2.0
    assert expected_r2(0.0, 4) == -3.0
    assert expected_r2(0.5, 8) == -3.96875


def test_optimal_return_branch_crossover():
    assert optimal_return(0.5, 4) == -3.0        # fire-and-forget branch
    assert optimal_return(0.5, 8) == -3.96875    # ack-waiting branch
    assert optimal_return(0.0, 32) == -2.0


def test_r2_continuous_in_bler():
    for t_max in (4, 8, 16):
        blers = [i / 200 for i in range(201)]
        values = [expected_r2(b, t_max) for b in blers]
        jumps = [abs(b - a) for a, b in zip(values, values[1:])]
        assert max(jumps) < 0.1


def test_domain_validation():
    with pytest.raises(ValueError):
        expected_r1(1.5, 4)
    with pytest.raises(ValueError):
        expected_r2(0.5, 0)


def _trace(steps):
    return EpisodeTrace(steps, -float(len(steps)), "", 0, 0, Mode.EVAL)


def _step(t, dl, action):
    return StepRecord(t, (1,), (action,), (0,), (dl,), 0, -1.0)


def test_episode_return_counts_steps():
    steps = [_step(t, 0, 0) for t in range(3)]
    assert episode_return(_trace(steps)) == -3.0
    assert episode_return(_trace([_step(t, 0, 0) for t in range(32)])) == -32.0
    assert episode_return(_trace([])) == 0.0


def test_ic_zero_for_constant_messages():
    steps = [_step(t, 0, t % 3) for t in range(60)]
    assert instantaneous_coordination([_trace(steps)], 0).value == pytest.approx(0.0, abs=1e-12)


def test_ic_log2_for_perfect_coupling():
    # m alternates Null/SG uniformly; the next action mirrors the message
    steps = []
    messages = [t % 2 for t in range(101)]
    for t in range(101):
        prev_m = messages[t - 1] if t > 0 else 0
        steps.append(StepRecord(t, (1,), (prev_m,), (0,), (messages[t],), 0, -1.0))
    est = instantaneous_coordination([_trace(steps)], 0)
    assert est.value == pytest.approx(math.log(2), rel=1e-9)


def test_ic_matches_brute_force_on_synthetic_joint():
    joint = [[0.4, 0.1], [0.1, 0.4]]
    # synthesize a trace whose empirical pair distribution equals `joint`
    pairs = []
    for m in range(2):
        for a in range(2):
            pairs.extend([(m, a)] * int(joint[m][a] * 100))
    steps = [StepRecord(0, (1,), (0,), (0,), (pairs[0][0],), 0, -1.0)]
    for i, (m, a) in enumerate(pairs):
        next_m = pairs[i + 1][0] if i + 1 < len(pairs) else 0
        steps.append(StepRecord(i + 1, (1,), (a,), (0,), (next_m,), 0, -1.0))
    est = instantaneous_coordination([_trace(steps)], 0)
    # brute force over the same empirical table
    expected = mutual_information_from_joint(joint)
    assert est.value == pytest.approx(expected, abs=1e-12)
    assert est.pair_count == 100


def test_ic_bounds():
    rng = random.Random(5)
    for _ in range(50):
        weights = [[rng.random() for _ in range(3)] for _ in range(3)]
        total = sum(sum(row) for row in weights)
        joint = [[w / total for w in row] for row in weights]
        value = mutual_information_from_joint(joint)
        assert -1e-12 <= value <= ic_upper_bound() + 1e-12


def test_ic_requires_pairs():
    with pytest.raises(ValueError):
        instantaneous_coordination([_trace([_step(0, 0, 0)])], 0)


def test_pearson_known_values():
    assert pearson([1.0, 2.0, 3.0], [3.0, 5.0, 7.0]) == pytest.approx(1.0)
    assert pearson([1.0, 2.0, 3.0], [-1.0, -2.0, -3.0]) == pytest.approx(-1.0)
    assert pearson([1.0, 2.0, 3.0], [1.0, 3.0, 2.0]) == pytest.approx(0.5)


def test_pearson_errors():
    with pytest.raises(ValueError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        pearson([1.0], [2.0])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=20),
    st.floats(0.001, 1000.0),
    st.floats(-1e6, 1e6),
)
def test_pearson_affine_invariance(xs, scale, offset):
    rng = random.Random(17)
    ys = [x + rng.uniform(-1.0, 1.0) for x in xs]
    try:
        base = pearson(xs, ys)
    except ValueError:
        return  # degenerate variance: nothing to compare
    scaled = pearson([scale * x + offset for x in xs], ys)
    assert scaled == pytest.approx(base, abs=1e-7)
