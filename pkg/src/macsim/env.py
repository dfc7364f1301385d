"""Slot-synchronous shared-uplink environment.

All UEs share one uplink data channel modeled as a packet erasure
channel. Each slot every UE invokes one channel action; the environment
resolves collisions, samples the erasure for a lone transmitter, applies
deletions, samples SDU arrivals (empty-buffer-start mode), and reports
the buffer observations plus the BS-side uplink observation.

BS observation encoding: 0 = idle slot, 1..num_ues = collision-free
reception from UE (value - 1), num_ues + 1 = collision.

The per-episode random source is injected at reset() so episodes are
bit-reproducible; a lone transmission draws exactly one erasure sample,
collisions draw none (nothing is delivered either way).
"""

from __future__ import annotations

import random
from typing import List, Tuple

from .types import ChannelAction, EnvConfig, TrafficMode

REWARD_PER_STEP = -1.0


class EnvError(RuntimeError):
    """Contract violation while driving the environment."""


class MacEnv:
    """Cooperative multi-UE uplink delivery game.

    The episode ends when every UE has had all of its SDUs received by
    the BS *and* removed from its buffer (with all SDUs generated), or
    when t_max slots have elapsed. Deleting an SDU that was never
    received makes completion impossible; the episode then runs to
    t_max. Reward is -1 on every slot regardless of the outcome.
    """

    def __init__(self, config: EnvConfig):
        self.config = config
        self.rng: random.Random = random.Random()
        self.t = 0
        self.done = False
        # Per-UE state. Buffers hold SDU indices, oldest first; arrivals
        # append consecutively, so indices are unique per UE.
        self.buffers: List[List[int]] = []
        self.delivered: List[List[bool]] = []
        self.delivered_count: List[int] = []
        self.generated_count: List[int] = []

    def reset(self, rng: random.Random) -> Tuple[List[int], int]:
        """Start a fresh episode; returns (per-UE observations, BS observation)."""
        cfg = self.config
        self.rng = rng
        self.t = 0
        self.done = False
        full = cfg.traffic_mode is TrafficMode.FULL_BUFFER_START
        initial = cfg.sdus_per_ue if full else 0
        self.buffers = [list(range(initial)) for _ in range(cfg.num_ues)]
        self.delivered = [[False] * cfg.sdus_per_ue for _ in range(cfg.num_ues)]
        self.delivered_count = [0] * cfg.num_ues
        self.generated_count = [initial] * cfg.num_ues
        return self.observations(), 0

    def observations(self) -> List[int]:
        return [len(buf) for buf in self.buffers]

    def step(self, actions) -> Tuple[float, List[int], int, bool]:
        """Execute one joint channel action; returns (reward, per-UE
        observations, BS observation, done)."""
        if self.done:
            raise EnvError("step() called on a finished episode")
        cfg = self.config
        num_ues = cfg.num_ues
        if len(actions) != num_ues:
            raise EnvError(f"expected {num_ues} actions, got {len(actions)}")

        # Transmitting from an empty buffer is equivalent to doing nothing.
        transmitters = [u for u in range(num_ues)
                        if actions[u] == ChannelAction.TRANSMIT and self.buffers[u]]
        bs_obs = 0
        if len(transmitters) == 1:
            u = transmitters[0]
            if not (self.rng.random() < cfg.bler):
                bs_obs = u + 1
                sdu = self.buffers[u][0]
                if not self.delivered[u][sdu]:
                    self.delivered[u][sdu] = True
                    self.delivered_count[u] += 1
        elif len(transmitters) >= 2:
            bs_obs = num_ues + 1

        for u in range(num_ues):
            if actions[u] == ChannelAction.DELETE and self.buffers[u]:
                self.buffers[u].pop(0)

        if cfg.traffic_mode is TrafficMode.EMPTY_BUFFER_START:
            for u in range(num_ues):
                if self.generated_count[u] < cfg.sdus_per_ue \
                        and self.rng.random() < cfg.arrival_prob:
                    self.buffers[u].append(self.generated_count[u])
                    self.generated_count[u] += 1

        self.t += 1
        self.done = self.t >= cfg.t_max or all(
            self.generated_count[u] == cfg.sdus_per_ue
            and self.delivered_count[u] == cfg.sdus_per_ue
            and not self.buffers[u]
            for u in range(num_ues)
        )
        return REWARD_PER_STEP, self.observations(), bs_obs, self.done
