"""Learner internals: memory window, state-key encoding, action
selection, and the temporal-difference backup."""

import random

import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from macsim.learner import (
    MemoryRecord,
    MemoryWindow,
    QTables,
    StateKey,
    memory_push,
    q_update,
    select_actions,
)
from macsim.types import ChannelAction, UplinkMessage

records = st.builds(MemoryRecord,
                    dl_message=st.integers(0, 2), action=st.integers(0, 2),
                    ul_message=st.integers(0, 1), obs=st.integers(0, 63))


def test_memory_push_single_slot():
    window = MemoryWindow((MemoryRecord(0, 0, 0, 0),))
    pushed = memory_push(window, MemoryRecord(1, 0, 0, 1))
    assert pushed.records == (MemoryRecord(1, 0, 0, 1),)


def test_memory_push_evicts_fifo():
    window = MemoryWindow.initial(2)
    first = MemoryRecord(1, 1, 1, 1)
    second = MemoryRecord(2, 2, 0, 2)
    third = MemoryRecord(0, 1, 0, 3)
    window = memory_push(memory_push(memory_push(window, first), second), third)
    assert window.records == (second, third)


def test_memory_push_identity_record():
    window = MemoryWindow.initial(3)
    assert memory_push(window, MemoryRecord(0, 0, 0, 0)).records == window.records


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.lists(records, max_size=12))
def test_memory_window_is_last_n(memory_len, pushed):
    window = MemoryWindow.initial(memory_len)
    for record in pushed:
        window = memory_push(window, record)
        assert len(window) == memory_len
    expected = ((MemoryRecord(0, 0, 0, 0),) * memory_len + tuple(pushed))[-memory_len:]
    assert window.records == expected


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 63), st.integers(1, 5), st.data())
def test_state_key_round_trip(obs, memory_len, data):
    window = MemoryWindow(tuple(data.draw(records) for _ in range(memory_len)))
    key = StateKey(obs, window)
    assert StateKey.decode(key.encode(), memory_len) == key


def test_state_key_encoding_is_injective_small_space():
    memory_len = 1
    seen = {}
    for m in range(3):
        for a in range(3):
            for n in range(2):
                for o_past in range(3):
                    for o in range(3):
                        key = StateKey(o, MemoryWindow((MemoryRecord(m, a, n, o_past),)))
                        value = key.encode()
                        assert value not in seen, (key, seen[value])
                        seen[value] = key


def test_select_actions_greedy_argmax():
    q = QTables(memory_len=1)
    key = StateKey(1, MemoryWindow.initial(1))
    q.q_p[key.encode()] = [0.0, 5.0, 1.0]
    q.q_s[key.encode()] = [2.0, 0.0]
    action, message = select_actions(q, key, 0.0, random.Random(0))
    assert action == ChannelAction.TRANSMIT
    assert message == UplinkMessage.NULL


def test_select_actions_deterministic_on_unique_max():
    q = QTables(memory_len=1)
    key = StateKey(0, MemoryWindow.initial(1))
    q.q_p[key.encode()] = [-1.0, -3.0, -2.0]
    q.q_s[key.encode()] = [-2.0, -1.0]
    picks = {select_actions(q, key, 0.0, random.Random(seed)) for seed in range(50)}
    assert picks == {(ChannelAction.NOTHING, UplinkMessage.SCHEDULING_REQUEST)}


def test_tie_break_uniform_chi_square():
    """Unseen state, epsilon=0: ties over the whole alphabet break
    uniformly (chi-square p > 0.01 over 1e4 draws)."""
    q = QTables(memory_len=1)
    key = StateKey(1, MemoryWindow.initial(1))
    rng = random.Random(20250810)
    counts = [0, 0, 0]
    for _ in range(10_000):
        action, _ = select_actions(q, key, 0.0, rng)
        counts[int(action)] += 1
    assert scipy.stats.chisquare(counts).pvalue > 0.01


def test_full_exploration_uniform():
    q = QTables(memory_len=1)
    key = StateKey(1, MemoryWindow.initial(1))
    q.q_p[key.encode()] = [100.0, 0.0, 0.0]  # exploration must ignore values
    rng = random.Random(7)
    counts = [0, 0, 0]
    for _ in range(10_000):
        action, _ = select_actions(q, key, 1.0, rng)
        counts[int(action)] += 1
    for c in counts:
        assert abs(c / 10_000 - 1 / 3) <= 3 * (1 / 3 * 2 / 3 / 10_000) ** 0.5


def test_selection_never_materializes_keys():
    q = QTables(memory_len=1)
    key = StateKey(1, MemoryWindow.initial(1))
    rng = random.Random(1)
    for _ in range(100):
        select_actions(q, key, 0.5, rng)
    assert not q.q_p and not q.q_s


def test_q_update_direct_value():
    # start 0, reward -1, gamma 1, next-state max -1, alpha 0.3 -> -0.6
    q = QTables(memory_len=1)
    s = StateKey(1, MemoryWindow.initial(1))
    s2 = StateKey(0, MemoryWindow.initial(1))
    q.q_p[s2.encode()] = [-1.0, -1.0, -1.0]
    q.q_s[s2.encode()] = [-1.0, -1.0]
    q_update(q, s, ChannelAction.TRANSMIT, UplinkMessage.NULL, -1.0, s2,
             alpha=0.3, gamma=1.0, terminal=False)
    assert q.q_p[s.encode()][1] == pytest.approx(-0.6, abs=1e-15)
    assert q.q_s[s.encode()][0] == pytest.approx(-0.6, abs=1e-15)


def test_q_update_fixed_point():
    q = QTables(memory_len=1)
    s = StateKey(1, MemoryWindow.initial(1))
    s2 = StateKey(0, MemoryWindow.initial(1))
    q.q_p[s.encode()] = [0.0, -2.0, 0.0]
    q.q_p[s2.encode()] = [-1.0, -1.5, -3.0]
    q.q_s[s.encode()] = [-2.0, 0.0]
    q.q_s[s2.encode()] = [-1.0, -1.0]
    # target r + gamma * max(next) equals the current cell: no change
    q_update(q, s, ChannelAction.TRANSMIT, UplinkMessage.NULL, -1.0, s2,
             alpha=0.7, gamma=1.0, terminal=False)
    assert q.q_p[s.encode()] == [0.0, -2.0, 0.0]
    assert q.q_s[s.encode()] == [-2.0, 0.0]


def test_q_update_terminal_bootstrap_zero():
    q = QTables(memory_len=1)
    s = StateKey(1, MemoryWindow.initial(1))
    s2 = StateKey(0, MemoryWindow.initial(1))
    q.q_p[s2.encode()] = [50.0, 50.0, 50.0]  # must be ignored at terminal
    q_update(q, s, ChannelAction.DELETE, UplinkMessage.NULL, -1.0, s2,
             alpha=1.0, gamma=1.0, terminal=True)
    assert q.q_p[s.encode()][2] == -1.0
    assert q.q_s[s.encode()][0] == -1.0


def test_q_update_rejects_bad_inputs():
    q = QTables(memory_len=1)
    s = StateKey(0, MemoryWindow.initial(1))
    with pytest.raises(ValueError):
        q_update(q, s, 0, 0, float("nan"), s, alpha=0.5, gamma=1.0, terminal=True)
    with pytest.raises(ValueError):
        q_update(q, s, 0, 0, -1.0, s, alpha=0.0, gamma=1.0, terminal=True)
    with pytest.raises(ValueError):
        q_update(q, s, 0, 0, -1.0, s, alpha=0.5, gamma=1.5, terminal=True)


def test_bandit_converges_to_best_arm():
    """Single-state three-arm deterministic bandit (rewards -1/0/-2,
    gamma=0): the greedy action is the zero-reward arm within 100
    updates at alpha=0.3."""
    rewards = [-1.0, 0.0, -2.0]
    q = QTables(memory_len=1)
    s = StateKey(0, MemoryWindow.initial(1))
    rng = random.Random(13)
    for _ in range(100):
        arm, _ = select_actions(q, s, 1.0, rng)  # pure exploration
        q_update(q, s, arm, 0, rewards[int(arm)], s, alpha=0.3, gamma=0.0,
                 terminal=True)
    greedy, _ = select_actions(q, s, 0.0, rng)
    assert greedy == ChannelAction.TRANSMIT  # arm 1 pays 0
