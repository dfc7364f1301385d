"""Configuration ingestion and result persistence.

Config files are flat key=value text ('#' comments allowed); CLI flags
override file values. Every result artifact embeds the run's config
hash, which covers exactly the fields that influence results (both
configs, the master seed and the tool version), so equal hashes imply
byte-identical result files. Timestamps live only in the manifest.

Formats: learning curves as CSV (one header row, '.' decimal separator,
a single leading '# manifest=<hash>' comment line), episode traces and
Q-table snapshots as JSON with round-trip-exact floats.
"""

from __future__ import annotations

import csv
import io as _io
import json
import time
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import __version__
from .learner import QTables
from .types import (
    AgentKind,
    ConfigError,
    EnvConfig,
    EpisodeTrace,
    Mode,
    SessionResult,
    StepRecord,
    TrafficMode,
    TrainConfig,
)

import hashlib

SNAPSHOT_FORMAT_VERSION = 1

_ENV_KEYS = {
    "num_ues": int,
    "sdus_per_ue": int,
    "bler": float,
    "t_max": int,
    "buffer_capacity": int,
    "start_buffer": str,
    "arrival_prob": float,
}
_TRAIN_KEYS = {
    "alpha": float,
    "gamma": float,
    "f_eps": float,
    "eps_floor": float,
    "n_tr": int,
    "n_eval": int,
    "n_rep": int,
    "memory_len": int,
    "seed": int,
    "agent": str,
}


def _parse_value(key: str, raw: str, caster) -> object:
    try:
        if caster is int:
            return int(raw)
        if caster is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"invalid value for {key!r}: {raw!r}") from None


def _read_key_values(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(
                    f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            values[key.strip()] = raw.strip()
    return values


def parse_config(path: Optional[str] = None,
                 overrides: Optional[Mapping[str, object]] = None
                 ) -> Tuple[EnvConfig, TrainConfig]:
    """Build validated configs from an optional file plus overrides.

    Unknown keys and out-of-range values are rejected with a diagnostic
    naming the offending key. Unspecified fields take the documented
    defaults.
    """
    raw: Dict[str, object] = {}
    if path is not None:
        for key, value in _read_key_values(path).items():
            if key in _ENV_KEYS:
                raw[key] = _parse_value(key, value, _ENV_KEYS[key])
            elif key in _TRAIN_KEYS:
                raw[key] = _parse_value(key, value, _TRAIN_KEYS[key])
            else:
                raise ConfigError(f"unknown config key: {key!r}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _ENV_KEYS and key not in _TRAIN_KEYS:
            raise ConfigError(f"unknown config key: {key!r}")
        raw[key] = value

    env_kwargs: Dict[str, object] = {}
    train_kwargs: Dict[str, object] = {}
    for key, value in raw.items():
        if key == "start_buffer":
            try:
                env_kwargs["traffic_mode"] = TrafficMode(str(value))
            except ValueError:
                raise ConfigError(
                    f"start_buffer must be 'full' or 'empty', got {value!r}") from None
        elif key == "agent":
            try:
                train_kwargs["agent"] = AgentKind(str(value))
            except ValueError:
                choices = ", ".join(k.value for k in AgentKind)
                raise ConfigError(
                    f"agent must be one of {choices}, got {value!r}") from None
        elif key in _ENV_KEYS:
            env_kwargs[key] = value
        else:
            train_kwargs[key] = value
    return EnvConfig(**env_kwargs), TrainConfig(**train_kwargs)


def _config_items(env_cfg: EnvConfig, train_cfg: TrainConfig) -> List[Tuple[str, str]]:
    items = [
        ("num_ues", str(env_cfg.num_ues)),
        ("sdus_per_ue", str(env_cfg.sdus_per_ue)),
        ("bler", repr(float(env_cfg.bler))),
        ("t_max", str(env_cfg.t_max)),
        ("buffer_capacity", str(env_cfg.buffer_capacity)),
        ("start_buffer", env_cfg.traffic_mode.value),
        ("arrival_prob", repr(float(env_cfg.arrival_prob))),
        ("alpha", repr(float(train_cfg.alpha))),
        ("gamma", repr(float(train_cfg.gamma))),
        ("f_eps", repr(float(train_cfg.f_eps))),
        ("eps_floor", repr(float(train_cfg.eps_floor))),
        ("n_tr", str(train_cfg.n_tr)),
        ("n_eval", str(train_cfg.n_eval)),
        ("n_rep", str(train_cfg.n_rep)),
        ("memory_len", str(train_cfg.memory_len)),
        ("seed", str(train_cfg.seed)),
        ("agent", train_cfg.agent.value),
    ]
    return items


def config_hash(env_cfg: EnvConfig, train_cfg: TrainConfig) -> str:
    """Hash over every field that influences results (plus tool version)."""
    digest = hashlib.sha256()
    digest.update(f"macsim:{__version__}".encode())
    for key, value in _config_items(env_cfg, train_cfg):
        digest.update(f";{key}={value}".encode())
    return digest.hexdigest()


def build_manifest(env_cfg: EnvConfig, train_cfg: TrainConfig,
                   timestamp: Optional[float] = None) -> dict:
    """Run manifest: configs, version, content hash, seed, timestamps.

    The timestamp is metadata only and is excluded from the hash.
    """
    return {
        "tool": "macsim",
        "version": __version__,
        "created_unix": time.time() if timestamp is None else timestamp,
        "master_seed": train_cfg.seed,
        "config": dict(_config_items(env_cfg, train_cfg)),
        "hash": config_hash(env_cfg, train_cfg),
    }


def write_manifest(path: str, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Learning curves

def render_learning_curve(sessions: Sequence[SessionResult],
                          manifest_hash: str) -> str:
    """CSV with columns episode,return,epsilon,session_id (training
    episodes only, sessions in seed order)."""
    out = _io.StringIO()
    out.write(f"# manifest={manifest_hash}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["episode", "return", "epsilon", "session_id"])
    for sid, session in enumerate(sessions):
        for e, (ret, eps) in enumerate(zip(session.learning_curve,
                                           session.epsilons), 1):
            writer.writerow([e, repr(ret), repr(eps), sid])
    return out.getvalue()


def export_learning_curve(path: str, sessions: Sequence[SessionResult],
                          manifest_hash: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_learning_curve(sessions, manifest_hash))


# ---------------------------------------------------------------------------
# Episode traces

def trace_to_dict(trace: EpisodeTrace) -> dict:
    return {
        "manifest": trace.config_hash,
        "seed": trace.seed,
        "episode_index": trace.episode_index,
        "mode": trace.mode.value,
        "episode_return": trace.episode_return,
        "steps": [
            {
                "t": s.t,
                "ue_obs": list(s.ue_obs),
                "actions": list(s.actions),
                "ul_messages": list(s.ul_messages),
                "dl_messages": list(s.dl_messages),
                "bs_obs": s.bs_obs,
                "reward": s.reward,
            }
            for s in trace.steps
        ],
    }


def trace_from_dict(data: dict) -> EpisodeTrace:
    steps = [
        StepRecord(s["t"], tuple(s["ue_obs"]), tuple(s["actions"]),
                   tuple(s["ul_messages"]), tuple(s["dl_messages"]),
                   s["bs_obs"], s["reward"])
        for s in data["steps"]
    ]
    return EpisodeTrace(steps, data["episode_return"], data["manifest"],
                        data["seed"], data["episode_index"], Mode(data["mode"]))


def export_trace(path: str, trace: EpisodeTrace) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trace_to_dict(trace), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_trace(path: str) -> EpisodeTrace:
    with open(path, "r", encoding="utf-8") as fh:
        return trace_from_dict(json.load(fh))


_ACTION_SYM = {0: "-", 1: "TX", 2: "DEL"}
_UL_SYM = {0: "-", 1: "SR"}
_DL_SYM = {0: "-", 1: "SG", 2: "ACK"}


def render_trace_text(trace: EpisodeTrace) -> str:
    """Message-sequence-chart style plain-text rendering, one row per
    slot: per-UE buffer size, action, uplink message, downlink reply,
    and the BS-side uplink outcome."""
    if not trace.steps:
        return "(empty trace)\n"
    num_ues = len(trace.steps[0].ue_obs)
    header = ["t"] + [f"ue{u} o/a/n/m" for u in range(num_ues)] + ["bs"]
    rows = [header]
    for s in trace.steps:
        cells = [str(s.t)]
        for u in range(num_ues):
            cells.append(f"{s.ue_obs[u]} {_ACTION_SYM[s.actions[u]]:>3} "
                         f"{_UL_SYM[s.ul_messages[u]]:>2} {_DL_SYM[s.dl_messages[u]]:>3}")
        if s.bs_obs == 0:
            bs = "idle"
        elif s.bs_obs == num_ues + 1:
            bs = "collision"
        else:
            bs = f"rx ue{s.bs_obs - 1}"
        cells.append(bs)
        rows.append(cells)
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
             for row in rows]
    lines.append(f"return={trace.episode_return}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Q-table snapshots

def snapshot_qtables(path: str, q: QTables, manifest_hash: str = "") -> None:
    """Versioned snapshot; floats survive the round trip bit-exactly."""
    payload = {
        "format_version": SNAPSHOT_FORMAT_VERSION,
        "manifest": manifest_hash,
        "memory_len": q.memory_len,
        "default_value": q.default_value,
        "q_p": {str(k): v for k, v in sorted(q.q_p.items())},
        "q_s": {str(k): v for k, v in sorted(q.q_s.items())},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_qtables(path: str, expected_memory_len: Optional[int] = None) -> QTables:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != SNAPSHOT_FORMAT_VERSION:
        raise ConfigError(
            f"unsupported snapshot format version {version!r}, "
            f"expected {SNAPSHOT_FORMAT_VERSION}")
    memory_len = payload["memory_len"]
    if expected_memory_len is not None and memory_len != expected_memory_len:
        raise ConfigError(
            f"snapshot memory_len {memory_len} does not match configured "
            f"memory_len {expected_memory_len}")
    q = QTables(memory_len=memory_len, default_value=payload["default_value"])
    q.q_p = {int(k): [float(v) for v in row] for k, row in payload["q_p"].items()}
    q.q_s = {int(k): [float(v) for v in row] for k, row in payload["q_s"].items()}
    return q
