"""macsim: slot-synchronous multi-UE MAC simulator with tabular learners.

UEs jointly learn a channel-access policy and the uplink signaling
needed to coordinate with an expert base-station scheduler over a shared
packet-erasure uplink. Ships analytic performance oracles, hand-coded
baseline UEs, a reproducible training/evaluation harness, and trace or
coordination-metric tooling. The episode inner loop runs on a compiled
kernel when available, with a bit-identical pure-Python fallback.
"""

__version__ = "0.1.0"

from .analysis import (
    expected_r1,
    expected_r2,
    instantaneous_coordination,
    optimal_return,
    pearson,
)
from .types import (
    AgentKind,
    ChannelAction,
    ConfigError,
    DownlinkMessage,
    EnvConfig,
    Mode,
    TrafficMode,
    TrainConfig,
    UplinkMessage,
)
from .env import MacEnv
from .kernel import backend_name, has_compiled_kernel, run_episode
from .trainer import (
    anneal_epsilon,
    derive_seed,
    grid_search,
    run_experiment,
    run_generalization,
    run_session,
)

__all__ = [
    "__version__",
    "AgentKind",
    "ChannelAction",
    "ConfigError",
    "DownlinkMessage",
    "EnvConfig",
    "MacEnv",
    "Mode",
    "TrafficMode",
    "TrainConfig",
    "UplinkMessage",
    "anneal_epsilon",
    "backend_name",
    "derive_seed",
    "expected_r1",
    "expected_r2",
    "grid_search",
    "has_compiled_kernel",
    "instantaneous_coordination",
    "optimal_return",
    "pearson",
    "run_episode",
    "run_experiment",
    "run_generalization",
    "run_session",
]
