"""Command-line interface.

One subcommand per experiment family: train, eval, baseline, oracle,
ic, generalize, grid, trace. Scenario and training flags mirror the
config file keys; a master --seed is mandatory for every command that
produces results. Artifacts land in --out-dir (manifest, learning
curve CSV, summary JSON, Q-table snapshot, traces).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, analysis, io, kernel, trainer
from .types import AgentKind, ConfigError, EnvConfig, Mode, TrainConfig


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--num-ues", type=int, dest="num_ues")
    parser.add_argument("--sdus", type=int, dest="sdus_per_ue",
                        help="SDUs each UE must deliver")
    parser.add_argument("--bler", type=float, dest="bler")
    parser.add_argument("--t-max", type=int, dest="t_max")
    parser.add_argument("--buffer-capacity", type=int, dest="buffer_capacity")
    parser.add_argument("--start-buffer", choices=["full", "empty"],
                        dest="start_buffer")
    parser.add_argument("--arrival-prob", type=float, dest="arrival_prob")


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, dest="alpha")
    parser.add_argument("--gamma", type=float, dest="gamma")
    parser.add_argument("--f-eps", type=float, dest="f_eps")
    parser.add_argument("--eps-floor", type=float, dest="eps_floor")
    parser.add_argument("--n-tr", type=int, dest="n_tr")
    parser.add_argument("--n-eval", type=int, dest="n_eval")
    parser.add_argument("--n-rep", type=int, dest="n_rep")
    parser.add_argument("--memory-len", type=int, dest="memory_len")
    parser.add_argument("--seed", type=int, dest="seed")


_OVERRIDE_KEYS = ["num_ues", "sdus_per_ue", "bler", "t_max", "buffer_capacity",
                  "start_buffer", "arrival_prob", "alpha", "gamma", "f_eps",
                  "eps_floor", "n_tr", "n_eval", "n_rep", "memory_len", "seed"]


def _configs_from_args(args, agent: str = None):
    overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
    if agent is not None:
        overrides["agent"] = agent
    env_cfg, train_cfg = io.parse_config(args.config, overrides)
    if train_cfg.seed is None:
        raise ConfigError("--seed is required (reproducibility first)")
    return env_cfg, train_cfg


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_summary(out: Path, name: str, payload: dict) -> None:
    path = out / name
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")


def _experiment_summary(result, manifest_hash: str) -> dict:
    return {
        "manifest": manifest_hash,
        "mean_eval_return": result.mean_eval,
        "stderr_eval_return": result.stderr_eval,
        "best_eval_return": result.best_eval,
        "session_mean_eval_returns": [s.mean_eval for s in result.sessions],
    }


def cmd_train(args) -> int:
    env_cfg, train_cfg = _configs_from_args(args)
    out = _out_dir(args)
    manifest = io.build_manifest(env_cfg, train_cfg)
    io.write_manifest(out / "manifest.json", manifest)
    result = trainer.run_experiment(env_cfg, train_cfg,
                                    config_hash=manifest["hash"])
    io.export_learning_curve(out / "learning_curve.csv", result.sessions,
                             manifest["hash"])
    best = max(result.sessions, key=lambda s: s.mean_eval)
    io.snapshot_qtables(out / "qtables.json", best.qtables, manifest["hash"])
    best_trace = best.best_trace()
    if best_trace is not None:
        io.export_trace(out / "best_eval_trace.json", best_trace)
    _write_summary(out, "summary.json", _experiment_summary(result, manifest["hash"]))
    print(f"mean eval return {result.mean_eval:.4f} "
          f"(stderr {result.stderr_eval:.4f}, best {result.best_eval:.4f}) "
          f"[{kernel.backend_name()} kernel]")
    return 0


def cmd_eval(args) -> int:
    env_cfg, train_cfg = _configs_from_args(args)
    q = io.load_qtables(args.snapshot, expected_memory_len=train_cfg.memory_len)
    out = _out_dir(args)
    manifest = io.build_manifest(env_cfg, train_cfg)
    io.write_manifest(out / "manifest.json", manifest)
    returns, traces = trainer.evaluate_frozen(
        env_cfg, q, train_cfg.seed, train_cfg.n_eval,
        record_traces=True, config_hash=manifest["hash"])
    mean = sum(returns) / len(returns)
    _write_summary(out, "eval_summary.json", {
        "manifest": manifest["hash"],
        "mean_eval_return": mean,
        "eval_returns": returns,
    })
    best = max(traces, key=lambda tr: tr.episode_return)
    io.export_trace(out / "best_eval_trace.json", best)
    print(f"mean eval return {mean:.4f} over {len(returns)} episodes")
    return 0


def cmd_baseline(args) -> int:
    env_cfg, train_cfg = _configs_from_args(args, agent=args.agent)
    train_cfg = replace(train_cfg, n_tr=0)
    out = _out_dir(args)
    manifest = io.build_manifest(env_cfg, train_cfg)
    io.write_manifest(out / "manifest.json", manifest)
    result = trainer.run_experiment(env_cfg, train_cfg,
                                    config_hash=manifest["hash"])
    _write_summary(out, "summary.json", _experiment_summary(result, manifest["hash"]))
    print(f"{args.agent}: mean eval return {result.mean_eval:.4f} "
          f"(best {result.best_eval:.4f})")
    return 0


def cmd_oracle(args) -> int:
    r1 = analysis.expected_r1(args.bler, args.t_max)
    r2 = analysis.expected_r2(args.bler, args.t_max)
    best = max(r1, r2)
    print(f"bler={args.bler} t_max={args.t_max}")
    print(f"fire-forget expected return: {r1}")
    print(f"ack-wait expected return:    {r2}")
    print(f"optimum:                     {best}")
    return 0


def cmd_ic(args) -> int:
    traces = [io.load_trace(p) for p in args.traces]
    if not traces:
        raise ConfigError("no trace files given")
    num_ues = len(traces[0].steps[0].ue_obs)
    per_ue = [analysis.instantaneous_coordination(traces, u).value
              for u in range(num_ues)]
    for u, value in enumerate(per_ue):
        print(f"ue{u}: IC = {value:.6f} nats")
    print(f"mean IC = {sum(per_ue) / len(per_ue):.6f} nats")
    return 0


def cmd_generalize(args) -> int:
    env_cfg, train_cfg = _configs_from_args(args)
    eval_over = {}
    if args.eval_num_ues is not None:
        eval_over["num_ues"] = args.eval_num_ues
    if args.eval_bler is not None:
        eval_over["bler"] = args.eval_bler
    if args.eval_sdus is not None:
        eval_over["sdus_per_ue"] = args.eval_sdus
        eval_over["buffer_capacity"] = max(args.eval_sdus, env_cfg.buffer_capacity)
    if args.eval_t_max is not None:
        eval_over["t_max"] = args.eval_t_max
    eval_cfg = replace(env_cfg, **eval_over) if eval_over else env_cfg
    result = trainer.run_generalization(env_cfg, eval_cfg, train_cfg)
    out = _out_dir(args)
    manifest = io.build_manifest(env_cfg, train_cfg)
    io.write_manifest(out / "manifest.json", manifest)
    _write_summary(out, "generalization.json", {
        "manifest": manifest["hash"],
        "matched_mean_eval_return": result.matched.mean_eval,
        "matched_best_eval_return": result.matched.best_eval,
        "transfer_mean_eval_return": result.transfer_mean,
        "transfer_best_eval_return": result.transfer_best,
        "transfer_session_means": result.transfer_means,
        "eval_overrides": eval_over,
    })
    print(f"matched {result.matched.mean_eval:.4f} -> transfer {result.transfer_mean:.4f}")
    return 0


def cmd_grid(args) -> int:
    env_cfg, train_cfg = _configs_from_args(args)
    grids = {}
    for spec_str in args.grid:
        if "=" not in spec_str:
            raise ConfigError(f"--grid expects name=v1,v2,..., got {spec_str!r}")
        name, _, values = spec_str.partition("=")
        name = name.strip()
        caster = float if name in {"alpha", "gamma", "f_eps", "eps_floor", "bler",
                                   "arrival_prob"} else int
        grids[name] = [caster(v) for v in values.split(",") if v]
    rows = trainer.grid_search(env_cfg, train_cfg, grids)
    out = _out_dir(args)
    manifest = io.build_manifest(env_cfg, train_cfg)
    io.write_manifest(out / "manifest.json", manifest)
    table = [{"params": row["params"],
              "mean_eval_return": row["result"].mean_eval,
              "stderr_eval_return": row["result"].stderr_eval,
              "best_eval_return": row["result"].best_eval} for row in rows]
    _write_summary(out, "grid.json", {"manifest": manifest["hash"], "cells": table})
    for row in table:
        print(row["params"], "->", f"{row['mean_eval_return']:.4f}")
    return 0


def cmd_trace(args) -> int:
    env_cfg, train_cfg = _configs_from_args(args, agent=args.agent)
    manifest = io.build_manifest(env_cfg, train_cfg)
    from .learner import QTables
    if args.snapshot:
        q = io.load_qtables(args.snapshot, expected_memory_len=train_cfg.memory_len)
    else:
        q = QTables(memory_len=train_cfg.memory_len)
    rng = random.Random(train_cfg.seed)
    res = kernel.run_episode(env_cfg, q, 0.0, Mode.EVAL, train_cfg.agent, rng,
                             record_trace=True)
    trace = trainer._wrap_trace(res.trace, res.episode_return, manifest["hash"],
                                train_cfg.seed, 0, Mode.EVAL)
    if args.out:
        io.export_trace(args.out, trace)
        print(f"wrote {args.out}")
    sys.stdout.write(io.render_trace_text(trace))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macsim",
        description="Multi-UE MAC signaling and channel-access learning testbed")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train learners and export results")
    _add_scenario_flags(p)
    _add_train_flags(p)
    p.add_argument("--out-dir", default="runs/train")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a Q-table snapshot")
    _add_scenario_flags(p)
    _add_train_flags(p)
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out-dir", default="runs/eval")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline", help="run a hand-coded UE population")
    _add_scenario_flags(p)
    _add_train_flags(p)
    p.add_argument("--agent", choices=["expert", "fire-forget", "ack-wait"],
                   required=True)
    p.add_argument("--out-dir", default="runs/baseline")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("oracle", help="print analytic expected returns")
    p.add_argument("--bler", type=float, required=True)
    p.add_argument("--t-max", type=int, required=True, dest="t_max")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("ic", help="instantaneous coordination from traces")
    p.add_argument("traces", nargs="+", help="episode trace JSON files")
    p.set_defaults(func=cmd_ic)

    p = sub.add_parser("generalize", help="train on one scenario, evaluate on another")
    _add_scenario_flags(p)
    _add_train_flags(p)
    p.add_argument("--eval-num-ues", type=int)
    p.add_argument("--eval-bler", type=float)
    p.add_argument("--eval-sdus", type=int)
    p.add_argument("--eval-t-max", type=int)
    p.add_argument("--out-dir", default="runs/generalize")
    p.set_defaults(func=cmd_generalize)

    p = sub.add_parser("grid", help="hyper-parameter grid search")
    _add_scenario_flags(p)
    _add_train_flags(p)
    p.add_argument("--grid", action="append", default=[],
                   metavar="NAME=V1,V2,...", help="repeatable grid axis")
    p.add_argument("--out-dir", default="runs/grid")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("trace", help="run one greedy episode and render it")
    _add_scenario_flags(p)
    _add_train_flags(p)
    p.add_argument("--agent", default="expert",
                   choices=["learner", "expert", "fire-forget", "ack-wait"])
    p.add_argument("--snapshot", help="Q-table snapshot for agent=learner")
    p.add_argument("--out", help="also write the trace JSON here")
    p.set_defaults(func=cmd_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
