"""Domain types shared across the simulator, the learners and the tooling.

The alphabets are deliberately tiny: three physical-layer actions, two
uplink control messages, three downlink control messages. Everything a
UE or the base station exchanges per slot is drawn from these sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional

# Hard desk-scale bounds imposed by the packed integer state key used by
# the episode kernels (6 bits for the buffer observation, 11 bits per
# memory record, and the whole key must fit in a signed 64-bit integer).
MAX_BUFFER_CAPACITY = 63
MAX_MEMORY_LEN = 5
MAX_UES = 64


class ConfigError(ValueError):
    """A configuration value is missing, unknown, or out of range."""


class ChannelAction(IntEnum):
    """Physical-layer actions a UE can invoke on the shared channel."""

    NOTHING = 0
    TRANSMIT = 1  # send the oldest buffered SDU (no-op on an empty buffer)
    DELETE = 2    # drop the oldest buffered SDU


class UplinkMessage(IntEnum):
    """Uplink control-channel vocabulary (UE to BS)."""

    NULL = 0
    SCHEDULING_REQUEST = 1


class DownlinkMessage(IntEnum):
    """Downlink control-channel vocabulary (BS to UE)."""

    NULL = 0
    SCHEDULING_GRANT = 1  # grant valid for the next slot only
    ACK = 2               # acknowledges the last received SDU


class TrafficMode(Enum):
    FULL_BUFFER_START = "full"
    EMPTY_BUFFER_START = "empty"


class Mode(Enum):
    TRAIN = "train"
    EVAL = "eval"


class AgentKind(Enum):
    """Which per-UE agent drives the episode."""

    LEARNER = "learner"          # tabular dual-policy learner
    EXPERT = "expert"            # fully coordinated hand-coded UE
    FIRE_FORGET = "fire-forget"  # transmit, delete next slot, ignore all DL
    ACK_WAIT = "ack-wait"        # request, transmit on grant, delete on ack


NUM_CHANNEL_ACTIONS = len(ChannelAction)
NUM_UL_MESSAGES = len(UplinkMessage)
NUM_DL_MESSAGES = len(DownlinkMessage)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


@dataclass(frozen=True)
class EnvConfig:
    """Scenario parameters for the shared-uplink environment.

    ``buffer_capacity`` defaults to ``sdus_per_ue`` (every SDU fits).
    ``arrival_prob`` only matters for the empty-buffer-start traffic mode.
    """

    num_ues: int = 1
    sdus_per_ue: int = 1
    bler: float = 0.0
    t_max: int = 32
    buffer_capacity: Optional[int] = None
    traffic_mode: TrafficMode = TrafficMode.FULL_BUFFER_START
    arrival_prob: float = 0.5

    def __post_init__(self) -> None:
        if self.buffer_capacity is None:
            object.__setattr__(self, "buffer_capacity", self.sdus_per_ue)
        _require(isinstance(self.num_ues, int) and 1 <= self.num_ues <= MAX_UES,
                 f"num_ues must be an integer in [1, {MAX_UES}], got {self.num_ues!r}")
        _require(isinstance(self.sdus_per_ue, int) and self.sdus_per_ue >= 1,
                 f"sdus_per_ue must be an integer >= 1, got {self.sdus_per_ue!r}")
        _require(isinstance(self.t_max, int) and self.t_max >= 1,
                 f"t_max must be an integer >= 1, got {self.t_max!r}")
        _require(isinstance(self.buffer_capacity, int)
                 and self.sdus_per_ue <= self.buffer_capacity <= MAX_BUFFER_CAPACITY,
                 "buffer_capacity must be an integer within "
                 f"[sdus_per_ue, {MAX_BUFFER_CAPACITY}], got {self.buffer_capacity!r}")
        _require(isinstance(self.bler, (int, float)) and math.isfinite(self.bler)
                 and 0.0 <= self.bler <= 1.0,
                 f"bler must be within [0, 1], got {self.bler!r}")
        _require(isinstance(self.arrival_prob, (int, float)) and math.isfinite(self.arrival_prob)
                 and 0.0 <= self.arrival_prob <= 1.0,
                 f"arrival_prob must be within [0, 1], got {self.arrival_prob!r}")
        _require(isinstance(self.traffic_mode, TrafficMode),
                 f"traffic_mode must be a TrafficMode, got {self.traffic_mode!r}")


@dataclass(frozen=True)
class TrainConfig:
    """Learning and session-control hyper-parameters."""

    alpha: float = 0.3
    gamma: float = 1.0
    f_eps: float = 0.999991
    eps_floor: float = 0.01
    n_tr: int = 8192
    n_eval: int = 128
    n_rep: int = 4
    memory_len: int = 1
    seed: Optional[int] = None
    agent: AgentKind = AgentKind.LEARNER

    def __post_init__(self) -> None:
        _require(isinstance(self.alpha, (int, float)) and 0.0 < self.alpha <= 1.0,
                 f"alpha must be within (0, 1], got {self.alpha!r}")
        _require(isinstance(self.gamma, (int, float)) and 0.0 <= self.gamma <= 1.0,
                 f"gamma must be within [0, 1], got {self.gamma!r}")
        _require(isinstance(self.f_eps, (int, float)) and 0.0 < self.f_eps <= 1.0,
                 f"f_eps must be within (0, 1], got {self.f_eps!r}")
        _require(isinstance(self.eps_floor, (int, float)) and 0.0 <= self.eps_floor <= 1.0,
                 f"eps_floor must be within [0, 1], got {self.eps_floor!r}")
        _require(isinstance(self.n_tr, int) and self.n_tr >= 0,
                 f"n_tr must be an integer >= 0, got {self.n_tr!r}")
        _require(isinstance(self.n_eval, int) and self.n_eval >= 1,
                 f"n_eval must be an integer >= 1, got {self.n_eval!r}")
        _require(isinstance(self.n_rep, int) and self.n_rep >= 1,
                 f"n_rep must be an integer >= 1, got {self.n_rep!r}")
        _require(isinstance(self.memory_len, int) and 1 <= self.memory_len <= MAX_MEMORY_LEN,
                 f"memory_len must be an integer in [1, {MAX_MEMORY_LEN}], got {self.memory_len!r}")
        _require(self.seed is None or isinstance(self.seed, int),
                 f"seed must be an integer, got {self.seed!r}")
        _require(isinstance(self.agent, AgentKind),
                 f"agent must be an AgentKind, got {self.agent!r}")


@dataclass(frozen=True)
class StepRecord:
    """One slot of an episode as seen from outside.

    ``ue_obs`` are the buffer observations before the actions were taken;
    ``bs_obs`` is the uplink outcome of this slot; ``dl_messages`` is the
    BS reply issued at the end of the slot (consumed next slot).
    """

    t: int
    ue_obs: tuple
    actions: tuple
    ul_messages: tuple
    dl_messages: tuple
    bs_obs: int
    reward: float


@dataclass
class EpisodeTrace:
    """Full per-step record of one episode plus its metadata."""

    steps: list
    episode_return: float
    config_hash: str = ""
    seed: int = 0
    episode_index: int = 0
    mode: Mode = Mode.EVAL

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class EpisodeResult:
    """What an episode kernel returns: the return, the length, and the
    raw step tuples when tracing was requested."""

    episode_return: float
    steps: int
    trace: Optional[list] = None


@dataclass
class SessionResult:
    """Outcome of one training session (n_tr training + n_eval evaluation
    episodes with a frozen table pair)."""

    learning_curve: list
    epsilons: list
    eval_returns: list
    mean_eval: float
    traces: list
    qtables: object
    session_seed: int

    def best_trace(self) -> Optional[EpisodeTrace]:
        if not self.traces:
            return None
        return max(self.traces, key=lambda tr: tr.episode_return)


@dataclass
class ExperimentResult:
    """Aggregate over ``n_rep`` sessions run with distinct derived seeds."""

    sessions: list
    mean_eval: float
    stderr_eval: float
    best_eval: float


@dataclass
class GeneralizationResult:
    """Frozen-table transfer evaluation: train on one scenario, evaluate
    on another."""

    matched: ExperimentResult
    transfer_means: list
    transfer_mean: float
    transfer_best: float
