"""Operator surface: train / eval / serve / baseline / export / drive."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import netio, snapshot
from .agent import Agent
from .envs import make_env
from .experiment import (apply_config_items, baseline_run, default_agent_config,
                         eval_run, load_config_file, summarize, train_run)

ENV_PORT_VAR = "HYPERCOL_PORT"


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--env", default="minipong", choices=("minipong", "catch"))
    sub.add_argument("--episodes", type=int, default=100)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--config", default=None, help="key=value config file")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override one config key")
    sub.add_argument("--out", default="runs", help="output directory")


def _resolve_config(args):
    config = default_agent_config(args.env)
    items = {}
    if args.config:
        items.update(load_config_file(args.config))
    for entry in args.overrides:
        if "=" not in entry:
            raise SystemExit(f"--set expects KEY=VALUE, got {entry!r}")
        key, value = entry.split("=", 1)
        items[key.strip()] = value.strip()
    if items:
        config = apply_config_items(config, items)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


def _port_of(args) -> int:
    if args.port is not None:
        return args.port
    return int(os.environ.get(ENV_PORT_VAR, netio.DEFAULT_PORT))


def cmd_train(args) -> int:
    config = _resolve_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"train_{args.env}.csv"
    snap_path = out_dir / f"{args.env}.snapshot"
    agent = Agent.load(args.snapshot) if args.snapshot else None

    def progress(episode, record):
        if episode % 50 == 0 or episode == args.episodes:
            print(f"episode {episode}: goal_diff={record['goal_diff']} "
                  f"rolling30={record['rolling30_diff']:.2f}", file=sys.stderr)

    result = train_run(args.env, args.episodes, seed=args.seed, config=config,
                       csv_path=csv_path, snapshot_path=snap_path, agent=agent,
                       progress=progress if args.verbose else None)
    print(f"wrote {csv_path} and {snap_path}")
    summary = summarize(result.records)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_eval(args) -> int:
    agent = Agent.load(args.snapshot)
    summary = eval_run(agent, args.env, args.episodes, seed=args.seed)
    mean, sd = summary["mean_goal_diff"], summary["sd_goal_diff"]
    print(f"goal_diff: {mean:.3f} +/- {sd:.3f} over {summary['episodes']} episodes")
    print(f"score: {summary['mean_agent_goals']:.3f} : "
          f"{summary['mean_opponent_goals']:.3f}")
    return 0


def cmd_baseline(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"baseline_{args.env}.csv"
    result = baseline_run(args.env, args.episodes, seed=args.seed or 0,
                          csv_path=csv_path)
    summary = summarize(result.records)
    print(f"wrote {csv_path}")
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    config = _resolve_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    snap_path = out_dir / "served.snapshot"
    preloaded = Agent.load(args.snapshot) if args.snapshot else None

    def factory(sensor_dim, actuator_dim, actions):
        if preloaded is not None:
            return preloaded
        return Agent(config, sensor_dim, actuator_dim,
                     [[float(a)] for a in actions])

    server = netio.Server(factory, host=args.host, port=_port_of(args),
                          snapshot_path=snap_path)
    print(f"serving on {server.address[0]}:{server.port}", file=sys.stderr)
    try:
        server.serve(sessions=args.sessions if args.sessions > 0 else None)
    except KeyboardInterrupt:
        if server.agent is not None:
            server.agent.save(snap_path)
            print(f"snapshot flushed to {snap_path}", file=sys.stderr)
    finally:
        server.close()
    return 0


def cmd_drive(args) -> int:
    env = make_env(args.env, seed=args.seed or 0)
    results = netio.run_env_client(args.host, _port_of(args), env, args.episodes)
    for i, r in enumerate(results, 1):
        print(f"episode {i}: {r.agent_goals}:{r.opponent_goals} "
              f"({r.steps} steps)")
    return 0


def cmd_export(args) -> int:
    agent = Agent.load(args.snapshot)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    state_path = out_dir / "state.json"
    tables_path = out_dir / "tables.txt"
    state_path.write_text(
        json.dumps(snapshot.agent_state(agent), sort_keys=True, indent=1),
        encoding="utf-8")
    chunks = []
    for col in agent.l1_columns:
        if col.parser is not None:
            chunks.append(f"# column {col.col_id} (layer 1)\n"
                          + col.parser.dump_tables())
    for col in agent.l2_columns:
        chunks.append(f"# column {col.col_id} (layer 2)\n"
                      + col.parser.dump_tables())
    tables_path.write_text("\n\n".join(chunks) + "\n", encoding="utf-8")
    print(f"wrote {state_path} and {tables_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypercol",
        description="Columnar vector-symbolic reinforcement learner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an agent on a built-in environment")
    _add_common(p)
    p.add_argument("--snapshot", default=None, help="resume from a snapshot")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="frozen evaluation of a snapshot")
    _add_common(p)
    p.add_argument("--snapshot", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline", help="random-policy oracle run")
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("serve", help="serve an agent over the TCP protocol")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--sessions", type=int, default=0,
                   help="sessions to serve before exiting (0: forever)")
    p.add_argument("--snapshot", default=None, help="resume from a snapshot")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("drive", help="drive a remote agent with a local env")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_drive)

    p = sub.add_parser("export", help="dump a snapshot to readable text")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", default="runs/export")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
