"""Pure-Python episode kernel (reference lane).

Runs one episode under the fixed slot cycle:

  1. every UE picks its channel action and uplink message from the
     current state (observation + memory window),
  2. the environment executes the joint channel actions,
  3. the BS replies with one downlink message per UE,
  4. every UE pushes (m_t, a_t, n_t, o_t) into its memory and forms the
     next state from the new observation,
  5. in training mode both value tables are backed up for every UE from
     the shared transition (terminal bootstrap is zero).

The downlink message issued at the end of slot t is therefore actionable
at slot t+1; a grant is valid exactly one slot after issuance.

The compiled kernel in ``_kernel.pyx`` mirrors this module operation for
operation, including the order of every RNG draw, so both lanes produce
bit-identical episodes from the same ``random.Random`` instance.
"""

from __future__ import annotations

import random
from typing import Optional

from .bs import bs_policy
from .env import MacEnv
from .experts import make_agent
from .learner import (
    OBS_BITS,
    RECORD_BITS,
    NUM_CHANNEL_ACTIONS,
    NUM_UL_MESSAGES,
    QTables,
    egreedy_index,
)
from .types import AgentKind, EnvConfig, EpisodeResult, Mode


def run_episode(env_cfg: EnvConfig,
                qtables: QTables,
                epsilon: float,
                mode: Mode,
                agent: AgentKind,
                rng: random.Random,
                alpha: float = 0.3,
                gamma: float = 1.0,
                record_trace: bool = False) -> EpisodeResult:
    """Run one episode to termination and return its outcome.

    In Eval mode epsilon is forced to zero, tables are never written, and
    unseen states read as the default value.
    """
    train = mode is Mode.TRAIN
    if not train:
        epsilon = 0.0
    learner = agent is AgentKind.LEARNER

    env = MacEnv(env_cfg)
    obs, _ = env.reset(rng)
    num_ues = env_cfg.num_ues

    if learner:
        memory_len = qtables.memory_len
        if not 1 <= memory_len <= 5:
            raise ValueError(f"memory_len must be in [1, 5], got {memory_len}")
        shift = RECORD_BITS * memory_len
        mask = (1 << shift) - 1
        default = qtables.default_value
        mems = [0] * num_ues
        keys = [obs[u] << shift for u in range(num_ues)]
    else:
        agents = [make_agent(agent) for _ in range(num_ues)]

    granted_prev: Optional[int] = None
    trace = [] if record_trace else None
    total = 0.0
    done = False

    while not done:
        t = env.t
        if learner:
            actions = []
            uplinks = []
            for u in range(num_ues):
                key = keys[u]
                row_p = qtables.q_p.get(key)
                if row_p is None:
                    row_p = [default] * NUM_CHANNEL_ACTIONS
                actions.append(egreedy_index(row_p, NUM_CHANNEL_ACTIONS, epsilon, rng))
                row_s = qtables.q_s.get(key)
                if row_s is None:
                    row_s = [default] * NUM_UL_MESSAGES
                uplinks.append(egreedy_index(row_s, NUM_UL_MESSAGES, epsilon, rng))
        else:
            actions = []
            uplinks = []
            for u in range(num_ues):
                a, n = agents[u].act(obs[u])
                actions.append(int(a))
                uplinks.append(int(n))

        reward, obs_next, bs_obs, done = env.step(actions)
        decision = bs_policy(bs_obs, uplinks, granted_prev, rng)
        granted_prev = decision.granted
        dl = [int(m) for m in decision.dl_messages]

        if learner:
            next_keys = []
            for u in range(num_ues):
                packed = (dl[u] << 9) | (actions[u] << 7) | (uplinks[u] << OBS_BITS) | obs[u]
                mems[u] = ((mems[u] << RECORD_BITS) | packed) & mask
                next_keys.append((obs_next[u] << shift) | mems[u])
            if train:
                for u in range(num_ues):
                    key = keys[u]
                    next_key = next_keys[u]
                    if done:
                        boot_p = 0.0
                        boot_s = 0.0
                    else:
                        nrow = qtables.q_p.get(next_key)
                        boot_p = default if nrow is None else max(nrow)
                        nrow = qtables.q_s.get(next_key)
                        boot_s = default if nrow is None else max(nrow)
                    row = qtables.q_p.get(key)
                    if row is None:
                        row = [default] * NUM_CHANNEL_ACTIONS
                        qtables.q_p[key] = row
                    a = actions[u]
                    row[a] = row[a] + alpha * (reward + gamma * boot_p - row[a])
                    row = qtables.q_s.get(key)
                    if row is None:
                        row = [default] * NUM_UL_MESSAGES
                        qtables.q_s[key] = row
                    n = uplinks[u]
                    row[n] = row[n] + alpha * (reward + gamma * boot_s - row[n])
            keys = next_keys
        else:
            for u in range(num_ues):
                agents[u].observe(actions[u], dl[u])

        if record_trace:
            trace.append((t, tuple(obs), tuple(actions), tuple(uplinks),
                          tuple(dl), bs_obs, reward))
        total += reward
        obs = obs_next

    return EpisodeResult(total, env.t, trace)
