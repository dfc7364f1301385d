"""Session, experiment, generalization and grid-search orchestration.

A session is n_tr training episodes (exploration annealed between
episodes) followed by n_eval greedy evaluation episodes with the tables
frozen. Experiments repeat sessions with distinct derived seeds and
aggregate. Generalization trains on one scenario and re-evaluates the
frozen tables on another, reusing the evaluation seed stream so a
matched-condition transfer reproduces the session's own evaluation
exactly.

Seed discipline: every consumer derives its seed from a parent seed via
sha256 over "<parent>:<label>:<index>" (see derive_seed), so any single
episode of any session is individually reproducible.
"""

from __future__ import annotations

import hashlib
import itertools
import random
import statistics
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernel
from .learner import QTables
from .types import (
    AgentKind,
    ConfigError,
    EnvConfig,
    EpisodeTrace,
    ExperimentResult,
    GeneralizationResult,
    Mode,
    SessionResult,
    StepRecord,
    TrainConfig,
)


def derive_seed(parent: int, label: str, index: int) -> int:
    """Deterministic, documented seed splitting: 64-bit child seed from
    sha256 of "<parent>:<label>:<index>"."""
    digest = hashlib.sha256(f"{parent}:{label}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def anneal_epsilon(eps_prev: float, f_eps: float, episode_number: int,
                   floor: float = 0.01) -> float:
    """Exploration annealing applied once per training episode boundary:
    max(eps_prev * f_eps**episode_number, floor)."""
    return max(eps_prev * f_eps ** episode_number, floor)


def _require_seed(cfg: TrainConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("a master seed is required (set TrainConfig.seed)")
    return cfg.seed


def _wrap_trace(raw: list, episode_return: float, config_hash: str, seed: int,
                index: int, mode: Mode) -> EpisodeTrace:
    steps = [StepRecord(*step) for step in raw]
    return EpisodeTrace(steps, episode_return, config_hash, seed, index, mode)


def run_session(env_cfg: EnvConfig, train_cfg: TrainConfig,
                session_seed: Optional[int] = None,
                record_eval_traces: bool = True,
                config_hash: str = "") -> SessionResult:
    """One training session; deterministic given (configs, session seed)."""
    seed = session_seed if session_seed is not None else _require_seed(train_cfg)
    q = QTables(memory_len=train_cfg.memory_len)
    curve: List[float] = []
    epsilons: List[float] = []
    eps = 1.0
    for e in range(1, train_cfg.n_tr + 1):
        eps = anneal_epsilon(eps, train_cfg.f_eps, e, train_cfg.eps_floor)
        rng = random.Random(derive_seed(seed, "train", e))
        res = kernel.run_episode(env_cfg, q, eps, Mode.TRAIN, train_cfg.agent,
                                 rng, train_cfg.alpha, train_cfg.gamma)
        curve.append(res.episode_return)
        epsilons.append(eps)

    eval_returns: List[float] = []
    traces: List[EpisodeTrace] = []
    for i in range(1, train_cfg.n_eval + 1):
        ep_seed = derive_seed(seed, "eval", i)
        rng = random.Random(ep_seed)
        res = kernel.run_episode(env_cfg, q, 0.0, Mode.EVAL, train_cfg.agent,
                                 rng, train_cfg.alpha, train_cfg.gamma,
                                 record_trace=record_eval_traces)
        eval_returns.append(res.episode_return)
        if record_eval_traces:
            traces.append(_wrap_trace(res.trace, res.episode_return, config_hash,
                                      ep_seed, i, Mode.EVAL))

    mean_eval = sum(eval_returns) / len(eval_returns)
    return SessionResult(curve, epsilons, eval_returns, mean_eval, traces, q, seed)


def _aggregate(sessions: Sequence[SessionResult]) -> ExperimentResult:
    means = [s.mean_eval for s in sessions]
    mean = sum(means) / len(means)
    stderr = statistics.stdev(means) / len(means) ** 0.5 if len(means) > 1 else 0.0
    return ExperimentResult(list(sessions), mean, stderr, max(means))


def run_experiment(env_cfg: EnvConfig, train_cfg: TrainConfig,
                   record_eval_traces: bool = True,
                   config_hash: str = "") -> ExperimentResult:
    """n_rep sessions with seeds derived from the master seed, aggregated
    as (mean, standard error of the mean, best)."""
    master = _require_seed(train_cfg)
    sessions = [
        run_session(env_cfg, train_cfg, derive_seed(master, "session", rep),
                    record_eval_traces, config_hash)
        for rep in range(train_cfg.n_rep)
    ]
    return _aggregate(sessions)


def evaluate_frozen(env_cfg: EnvConfig, q: QTables, session_seed: int,
                    n_eval: int, agent: AgentKind = AgentKind.LEARNER,
                    record_traces: bool = False,
                    config_hash: str = "") -> Tuple[List[float], List[EpisodeTrace]]:
    """Greedy evaluation of frozen tables using the session's evaluation
    seed stream (episode i uses derive_seed(session_seed, "eval", i))."""
    returns: List[float] = []
    traces: List[EpisodeTrace] = []
    for i in range(1, n_eval + 1):
        ep_seed = derive_seed(session_seed, "eval", i)
        rng = random.Random(ep_seed)
        res = kernel.run_episode(env_cfg, q, 0.0, Mode.EVAL, agent, rng,
                                 record_trace=record_traces)
        returns.append(res.episode_return)
        if record_traces:
            traces.append(_wrap_trace(res.trace, res.episode_return, config_hash,
                                      ep_seed, i, Mode.EVAL))
    return returns, traces


def run_generalization(train_env: EnvConfig, eval_env: EnvConfig,
                       train_cfg: TrainConfig) -> GeneralizationResult:
    """Train on one scenario, evaluate the frozen tables on another.

    The same shared table pair serves every UE of the evaluation
    scenario, so evaluating with more UEs than were trained is valid;
    unseen states fall back to the default value with random
    tie-breaking.
    """
    master = _require_seed(train_cfg)
    sessions: List[SessionResult] = []
    transfer_means: List[float] = []
    for rep in range(train_cfg.n_rep):
        session_seed = derive_seed(master, "session", rep)
        sr = run_session(train_env, train_cfg, session_seed,
                         record_eval_traces=False)
        sessions.append(sr)
        returns, _ = evaluate_frozen(eval_env, sr.qtables, session_seed,
                                     train_cfg.n_eval, train_cfg.agent)
        transfer_means.append(sum(returns) / len(returns))
    matched = _aggregate(sessions)
    mean = sum(transfer_means) / len(transfer_means)
    return GeneralizationResult(matched, transfer_means, mean, max(transfer_means))


_ENV_FIELDS = {"num_ues", "sdus_per_ue", "bler", "t_max", "buffer_capacity",
               "traffic_mode", "arrival_prob"}
_TRAIN_FIELDS = {"alpha", "gamma", "f_eps", "eps_floor", "n_tr", "n_eval",
                 "n_rep", "memory_len", "seed", "agent"}


def grid_search(env_cfg: EnvConfig, train_cfg: TrainConfig,
                grids: Dict[str, Sequence]) -> List[dict]:
    """Cartesian sweep over configuration fields; one experiment per cell.

    Every cell reuses the master seed, so a sweep with singleton grids is
    identical to a plain run_experiment.
    """
    for name in grids:
        if name not in _ENV_FIELDS and name not in _TRAIN_FIELDS:
            raise ConfigError(f"unknown grid parameter: {name!r}")
    names = sorted(grids)
    rows: List[dict] = []
    for values in itertools.product(*(grids[n] for n in names)):
        cell = dict(zip(names, values))
        env_over = {k: v for k, v in cell.items() if k in _ENV_FIELDS}
        train_over = {k: v for k, v in cell.items() if k in _TRAIN_FIELDS}
        cell_env = replace(env_cfg, **env_over) if env_over else env_cfg
        cell_train = replace(train_cfg, **train_over) if train_over else train_cfg
        result = run_experiment(cell_env, cell_train, record_eval_traces=False)
        rows.append({"params": cell, "result": result})
    return rows
