"""Tabular dual-policy UE learner.

Each UE keeps a sliding window of the last N slots, one record per slot
holding (downlink message, channel action, uplink message, observation).
The window plus the current buffer observation index two sparse value
tables: one over the three channel actions, one over the two uplink
messages. Both tables condition on the identical state and are updated
with the shared per-step reward.

State keys pack the observation and the window into a single integer:
11 bits per record (2 bits message, 2 bits action, 1 bit uplink, 6 bits
observation) with the current observation in the top 6 bits. The
encoding is injective for buffer observations up to 63 and windows up
to 5 records, and keeps keys inside a signed 64-bit integer for the
compiled kernel.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

from .types import (
    ChannelAction,
    NUM_CHANNEL_ACTIONS,
    NUM_UL_MESSAGES,
    UplinkMessage,
)

RECORD_BITS = 11
OBS_BITS = 6


@dataclass(frozen=True)
class MemoryRecord:
    """One slot of learner memory: (m, a, n, o)."""

    dl_message: int
    action: int
    ul_message: int
    obs: int

    def pack(self) -> int:
        return (self.dl_message << 9) | (self.action << 7) \
            | (self.ul_message << OBS_BITS) | self.obs

    @classmethod
    def unpack(cls, value: int) -> "MemoryRecord":
        return cls((value >> 9) & 0x3, (value >> 7) & 0x3,
                   (value >> OBS_BITS) & 0x1, value & 0x3F)


SENTINEL_RECORD = MemoryRecord(0, 0, 0, 0)


@dataclass(frozen=True)
class MemoryWindow:
    """Fixed-length FIFO of MemoryRecords, oldest first."""

    records: tuple

    @classmethod
    def initial(cls, memory_len: int) -> "MemoryWindow":
        return cls((SENTINEL_RECORD,) * memory_len)

    def push(self, record: MemoryRecord) -> "MemoryWindow":
        """Evict the oldest record and append the new one."""
        return MemoryWindow(self.records[1:] + (record,))

    def __len__(self) -> int:
        return len(self.records)


def memory_push(window: MemoryWindow, record: MemoryRecord) -> MemoryWindow:
    return window.push(record)


@dataclass(frozen=True)
class StateKey:
    """Current observation plus memory window, with a canonical integer
    encoding (injective, order preserving)."""

    current_obs: int
    memory: MemoryWindow

    def encode(self) -> int:
        key = self.current_obs
        for record in self.memory.records:
            key = (key << RECORD_BITS) | record.pack()
        return key

    @classmethod
    def decode(cls, value: int, memory_len: int) -> "StateKey":
        records = []
        for _ in range(memory_len):
            records.append(MemoryRecord.unpack(value & ((1 << RECORD_BITS) - 1)))
            value >>= RECORD_BITS
        return cls(value, MemoryWindow(tuple(reversed(records))))


def _as_key(state: Union[StateKey, int]) -> int:
    return state.encode() if isinstance(state, StateKey) else state


@dataclass
class QTables:
    """Sparse shared value tables for the channel-access and signaling
    policies. Absent keys read as ``default_value`` for every action and
    are only materialized when written to."""

    memory_len: int
    default_value: float = 0.0
    q_p: Dict[int, List[float]] = field(default_factory=dict)
    q_s: Dict[int, List[float]] = field(default_factory=dict)

    def p_row(self, state: Union[StateKey, int]) -> List[float]:
        row = self.q_p.get(_as_key(state))
        return list(row) if row is not None else [self.default_value] * NUM_CHANNEL_ACTIONS

    def s_row(self, state: Union[StateKey, int]) -> List[float]:
        row = self.q_s.get(_as_key(state))
        return list(row) if row is not None else [self.default_value] * NUM_UL_MESSAGES

    def _ensure(self, table: Dict[int, List[float]], key: int, width: int) -> List[float]:
        row = table.get(key)
        if row is None:
            row = [self.default_value] * width
            table[key] = row
        return row

    def checksum(self) -> str:
        """Content hash over both tables, bit-exact on the float values."""
        digest = hashlib.sha256()
        for name, table in (("p", self.q_p), ("s", self.q_s)):
            for key in sorted(table):
                digest.update(f"{name}:{key}:".encode())
                digest.update(",".join(v.hex() for v in table[key]).encode())
        return digest.hexdigest()


def egreedy_index(row: List[float], n_actions: int, epsilon: float,
                  rng: random.Random) -> int:
    """Epsilon-greedy index selection with uniform random tie-breaking.

    The exploration draw happens only when epsilon > 0 and the tie-break
    draw only when at least two entries share the maximum; the compiled
    kernel mirrors this draw discipline exactly.
    """
    if epsilon > 0.0 and rng.random() < epsilon:
        return rng.randrange(n_actions)
    best = row[0]
    for i in range(1, n_actions):
        if row[i] > best:
            best = row[i]
    ties = [i for i in range(n_actions) if row[i] == best]
    if len(ties) == 1:
        return ties[0]
    return ties[rng.randrange(len(ties))]


def select_actions(q: QTables, state: Union[StateKey, int], epsilon: float,
                   rng: random.Random) -> Tuple[ChannelAction, UplinkMessage]:
    """Pick one channel action and one uplink message from the same state.

    Both tables draw independently but condition on the identical state.
    """
    key = _as_key(state)
    a = egreedy_index(q.p_row(key), NUM_CHANNEL_ACTIONS, epsilon, rng)
    n = egreedy_index(q.s_row(key), NUM_UL_MESSAGES, epsilon, rng)
    return ChannelAction(a), UplinkMessage(n)


def q_update(q: QTables, state: Union[StateKey, int], action: int, ul_message: int,
             reward: float, next_state: Union[StateKey, int],
             alpha: float, gamma: float, terminal: bool) -> None:
    """One temporal-difference backup applied to both tables.

    Both tables see the identical (reward, state, next state) and differ
    only in the action dimension. At a terminal transition the bootstrap
    term is zero.
    """
    if not (math.isfinite(reward) and math.isfinite(alpha) and math.isfinite(gamma)):
        raise ValueError("q_update requires finite reward, alpha and gamma")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be within (0, 1], got {alpha!r}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be within [0, 1], got {gamma!r}")

    key = _as_key(state)
    next_key = _as_key(next_state)

    boot_p = 0.0 if terminal else max(q.p_row(next_key))
    row_p = q._ensure(q.q_p, key, NUM_CHANNEL_ACTIONS)
    row_p[action] = row_p[action] + alpha * (reward + gamma * boot_p - row_p[action])

    boot_s = 0.0 if terminal else max(q.s_row(next_key))
    row_s = q._ensure(q.q_s, key, NUM_UL_MESSAGES)
    row_s[ul_message] = row_s[ul_message] + alpha * (reward + gamma * boot_s - row_s[ul_message])
