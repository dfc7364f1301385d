"""Analytic performance oracles and coordination metrics.

The closed-form expectations cover the single-UE, single-SDU scenario:
one for the fire-and-forget policy (transmit once, delete blind) and one
for the ack-waiting policy (handshake, then one retry per erasure).
Their maximum is the achievable optimum for that scenario.

Instantaneous coordination is the empirical mutual information between
the downlink message received in one slot and the channel action taken
in the next, pooled over traces. Natural logarithms throughout; zero
joint cells contribute zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .types import EpisodeTrace, NUM_CHANNEL_ACTIONS, NUM_DL_MESSAGES


def _check_domain(bler: float, t_max: int) -> None:
    if not (isinstance(bler, (int, float)) and 0.0 <= bler <= 1.0):
        raise ValueError(f"bler must be within [0, 1], got {bler!r}")
    if not (isinstance(t_max, int) and t_max >= 1):
        raise ValueError(f"t_max must be an integer >= 1, got {t_max!r}")


def expected_r1(bler: float, t_max: int) -> float:
    """Expected return of the fire-and-forget policy: -2 on delivery,
    -t_max when the single shot is erased."""
    _check_domain(bler, t_max)
    return bler * (2 - t_max) - 2


def expected_r2(bler: float, t_max: int) -> float:
    """Expected return of the ack-waiting policy.

    Episode length is 3 + k after k erased attempts, truncated at t_max;
    the sum below is kept as an explicit loop rather than a geometric
    closed form.
    """
    _check_domain(bler, t_max)
    if t_max < 4:
        return float(-t_max)
    if t_max == 4:
        return -(bler + 3.0)
    total = 3.0
    for i in range(4, t_max):
        total += i * bler ** (i - 3)
    return (bler - 1.0) * total - t_max * bler ** (t_max - 3)


def optimal_return(bler: float, t_max: int) -> float:
    """Best achievable expected return for one UE delivering one SDU."""
    return max(expected_r1(bler, t_max), expected_r2(bler, t_max))


def episode_return(trace) -> float:
    """Sum of per-step rewards; accepts an EpisodeTrace or a step list."""
    steps = trace.steps if isinstance(trace, EpisodeTrace) else trace
    return sum(step.reward for step in steps)


@dataclass
class IcEstimate:
    """Plug-in mutual-information estimate with its frequency tables."""

    value: float
    joint: Dict[Tuple[int, int], float]
    dl_marginal: Dict[int, float]
    action_marginal: Dict[int, float]
    pair_count: int


def coordination_pairs(traces: Sequence[EpisodeTrace], ue: int) -> List[Tuple[int, int]]:
    """(downlink message at t, channel action at t+1) pairs for one UE,
    pooled over all episodes."""
    pairs: List[Tuple[int, int]] = []
    for trace in traces:
        steps = trace.steps if isinstance(trace, EpisodeTrace) else trace
        for prev, cur in zip(steps, steps[1:]):
            pairs.append((prev.dl_messages[ue], cur.actions[ue]))
    return pairs


def instantaneous_coordination(traces: Sequence[EpisodeTrace], ue: int) -> IcEstimate:
    """Plug-in mutual information I(m_t; a_{t+1}) for one UE."""
    pairs = coordination_pairs(traces, ue)
    if not pairs:
        raise ValueError("no consecutive step pairs available for IC estimation")
    n = len(pairs)
    joint_counts: Dict[Tuple[int, int], int] = {}
    for pair in pairs:
        joint_counts[pair] = joint_counts.get(pair, 0) + 1
    joint = {pair: c / n for pair, c in joint_counts.items()}
    dl_marginal: Dict[int, float] = {}
    action_marginal: Dict[int, float] = {}
    for (m, a), p in joint.items():
        dl_marginal[m] = dl_marginal.get(m, 0.0) + p
        action_marginal[a] = action_marginal.get(a, 0.0) + p
    value = 0.0
    for (m, a), p in joint.items():
        value += p * math.log(p / (dl_marginal[m] * action_marginal[a]))
    return IcEstimate(value, joint, dl_marginal, action_marginal, n)


def mean_instantaneous_coordination(traces: Sequence[EpisodeTrace], num_ues: int) -> float:
    """IC averaged across UEs."""
    return sum(instantaneous_coordination(traces, u).value
               for u in range(num_ues)) / num_ues


def mutual_information_from_joint(joint: Sequence[Sequence[float]]) -> float:
    """Brute-force mutual information of an explicit joint probability
    table (rows: downlink message, columns: next action). Independent of
    the trace-based estimator; used as its oracle."""
    rows = len(joint)
    cols = len(joint[0])
    row_sums = [sum(joint[i][j] for j in range(cols)) for i in range(rows)]
    col_sums = [sum(joint[i][j] for i in range(rows)) for j in range(cols)]
    total = 0.0
    for i in range(rows):
        for j in range(cols):
            p = joint[i][j]
            if p > 0.0:
                total += p * math.log(p / (row_sums[i] * col_sums[j]))
    return total


def ic_upper_bound() -> float:
    """IC can never exceed the smaller alphabet's entropy."""
    return min(math.log(NUM_DL_MESSAGES), math.log(NUM_CHANNEL_ACTIONS))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation coefficient; undefined (error) when either
    input has zero variance."""
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("pearson needs two equal-length vectors of size >= 2")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("pearson is undefined for zero-variance input")
    return cov / math.sqrt(vx * vy)
