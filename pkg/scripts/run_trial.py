#!/usr/bin/env python3
"""Trial protocol: 3 sequential trials of (train 500 episodes, eval 500),
reporting the average evaluation score across trials on one line.

Usage: python3 scripts/run_trial.py [--env minipong] [--seed 3] [--out runs/trial]
"""

import argparse
import sys
from pathlib import Path

from hypercol.experiment import default_agent_config, eval_run, train_run


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--env", default="minipong", choices=("minipong", "catch"))
    parser.add_argument("--train-episodes", type=int, default=500)
    parser.add_argument("--eval-episodes", type=int, default=500)
    parser.add_argument("--trials", type=int, default=3)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default="runs/trial")
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    diffs = []
    for trial in range(1, args.trials + 1):
        seed = (args.seed if args.seed is not None
                else default_agent_config(args.env).seed) + trial - 1
        result = train_run(args.env, args.train_episodes, seed=seed,
                           csv_path=out_dir / f"trial{trial}_train.csv",
                           snapshot_path=out_dir / f"trial{trial}.snapshot")
        summary = eval_run(result.agent, args.env, args.eval_episodes,
                           seed=seed + 1000)
        diffs.append(summary["mean_goal_diff"])
        print(f"trial {trial}: eval goal_diff {summary['mean_goal_diff']:+.2f} "
              f"+/- {summary['sd_goal_diff']:.2f}", file=sys.stderr)
    average = sum(diffs) / len(diffs)
    print(f"AGENT\t{args.env.upper()}\t{average:+.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
