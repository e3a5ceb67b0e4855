"""Command line entry point: ``mobile-manip {train,eval,replay,report,robustness,selftest}``.

Exit codes: 0 on success, 1 on a runtime failure, 2 on bad arguments or missing input files.
"""

import argparse
import csv
import dataclasses
import os
import sys

from gymnasium import logger

from gym_mobile_manipulation import __version__
from gym_mobile_manipulation.checkpoint import load_checkpoint
from gym_mobile_manipulation.config import RunConfig
from gym_mobile_manipulation.envs import TaskKind
from gym_mobile_manipulation.errors import MobileManipulationError
from gym_mobile_manipulation.evaluation import (
    EVAL_FAMILIES,
    evaluate,
    parse_report_csv,
    replay,
    report,
    robustness_csv,
    robustness_report,
    stats_report,
)
from gym_mobile_manipulation.policies import MlpPolicy, ScriptedChasePolicy
from gym_mobile_manipulation.ppo import read_stats, train
from gym_mobile_manipulation.selftest import run_selftest
from gym_mobile_manipulation.trajectories import TrajectoryFamily

_FAMILY_NAMES = [family.value for family in TrajectoryFamily]


class _UsageError(Exception):
    pass


def _require_file(path):
    if path is not None and not os.path.isfile(path):
        raise _UsageError(f"file not found: {path}")
    return path


def _load_config(path):
    return RunConfig.from_file(_require_file(path)) if path else RunConfig()


def _families(names):
    return tuple(TrajectoryFamily(name) for name in names) if names else EVAL_FAMILIES


def _write_or_print(text, path):
    if path:
        with open(path, "w") as file:
            file.write(text)
        logger.info(f"Wrote {path}")
    else:
        sys.stdout.write(text)


def _cmd_train(args):
    config = _load_config(args.config)
    if args.task:
        config = dataclasses.replace(config, task=TaskKind(args.task))
    if args.seed:
        config = config.with_seeds(args.seed)
    output_dir = args.output_dir or config.output_dir
    os.makedirs(output_dir, exist_ok=True)
    config.save(os.path.join(output_dir, "config.cfg"))
    result = train(config, output_dir=output_dir, progress=not args.no_progress, resume=args.resume)
    for seed, path in result.checkpoints.items():
        print(f"seed {seed}: {path}")
    return 0


def _cmd_eval(args):
    _require_file(args.checkpoint)
    config = _load_config(args.config) if args.config else None
    eval_report = evaluate(
        args.checkpoint,
        run_config=config,
        families=_families(args.families),
        episodes_per_family=args.episodes,
        noise_on=not args.no_noise,
        seed=args.seed,
    )
    _write_or_print(report(eval_report, fmt=args.format), args.output)
    return 0


def _cmd_replay(args):
    if args.checkpoint:
        checkpoint = load_checkpoint(_require_file(args.checkpoint))
        config = RunConfig.loads(checkpoint.config_text)
        policy = MlpPolicy(checkpoint.params)
    else:
        config = _load_config(args.config)
        policy = ScriptedChasePolicy(config.task, config.env.robot)
    output = args.output or os.path.join(config.output_dir, f"replay_{args.family}_seed{args.seed}.csv")
    rows = replay(policy, config.task, args.seed, family=args.family, env_config=config.env, path=output)
    print(f"{output}: {len(rows)} steps")
    return 0


def _cmd_report(args):
    for path in args.files:
        _require_file(path)
    for path in args.files:
        with open(path, newline="") as file:
            header = next(csv.reader(file), [])
        if "family" in header:
            with open(path) as file:
                text = report(parse_report_csv(file.read()), fmt=args.format)
        elif "iteration" in header:
            text = stats_report(read_stats(path), fmt=args.format)
        else:
            raise _UsageError(f"{path} is neither an evaluation report nor a training stats file")
        sys.stdout.write(f"# {path}\n{text}")
    return 0


def _cmd_robustness(args):
    config = _load_config(args.config)
    policies = {}
    for path in args.checkpoints:
        policies[path] = MlpPolicy(load_checkpoint(_require_file(path)).params)
    if not policies:
        policies["scripted"] = ScriptedChasePolicy(config.task, config.env.robot)
    rows = robustness_report(
        policies,
        config.task,
        families=_families(args.families),
        episodes_per_family=args.episodes,
        env_config=config.env,
        widen=args.widen,
        seed=args.seed,
    )
    _write_or_print(robustness_csv(rows), args.output)
    return 0


def _cmd_selftest(args):
    results = run_selftest(seed=args.seed)
    for result in results:
        print(f"{'ok    ' if result.passed else 'FAILED'} {result.name}: {result.detail}")
    return 0 if all(result.passed for result in results) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="mobile-manip", description="Dynamic tracking and grasping with PPO.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress at INFO level.")
    commands = parser.add_subparsers(dest="command", required=True)

    train_parser = commands.add_parser("train", help="Train one policy per seed.")
    train_parser.add_argument("--config", help="Config file (section.key = value lines).")
    train_parser.add_argument("--task", choices=[task.value for task in TaskKind])
    train_parser.add_argument("--seed", type=int, action="append", help="Training seed, repeat for several.")
    train_parser.add_argument("--output-dir", help="Overrides run.output_dir.")
    train_parser.add_argument("--no-progress", action="store_true", help="Hide the progress bar.")
    train_parser.add_argument("--resume", action="store_true", help="Continue from existing checkpoints.")
    train_parser.set_defaults(handler=_cmd_train)

    eval_parser = commands.add_parser("eval", help="Evaluate a checkpoint per trajectory family.")
    eval_parser.add_argument("checkpoint")
    eval_parser.add_argument("--config", help="Refuse to run unless the checkpoint was trained with this config.")
    eval_parser.add_argument("--families", nargs="+", choices=_FAMILY_NAMES)
    eval_parser.add_argument("--episodes", type=int, default=100, help="Episodes per family.")
    eval_parser.add_argument("--no-noise", action="store_true", help="Evaluate without action/observation noise.")
    eval_parser.add_argument("--seed", type=int, default=0)
    eval_parser.add_argument("--format", choices=["csv", "pretty"], default="pretty")
    eval_parser.add_argument("--output", help="Write the report to this file instead of stdout.")
    eval_parser.set_defaults(handler=_cmd_eval)

    replay_parser = commands.add_parser("replay", help="Write a per-step CSV trace of one episode.")
    replay_parser.add_argument("checkpoint", nargs="?", help="Without a checkpoint the scripted policy is used.")
    replay_parser.add_argument("--config", help="Config of the scripted replay.")
    replay_parser.add_argument("--family", choices=_FAMILY_NAMES, default=TrajectoryFamily.CIRCLE.value)
    replay_parser.add_argument("--seed", type=int, default=0)
    replay_parser.add_argument("--output", help="Trace file, defaults to the run output directory.")
    replay_parser.set_defaults(handler=_cmd_replay)

    report_parser = commands.add_parser("report", help="Render evaluation reports or training stats as tables.")
    report_parser.add_argument("files", nargs="+")
    report_parser.add_argument("--format", choices=["csv", "pretty"], default="pretty")
    report_parser.set_defaults(handler=_cmd_report)

    robustness_parser = commands.add_parser(
        "robustness", help="Compare errors under nominal and widened dynamics randomization."
    )
    robustness_parser.add_argument("checkpoints", nargs="*")
    robustness_parser.add_argument("--config")
    robustness_parser.add_argument("--families", nargs="+", choices=_FAMILY_NAMES)
    robustness_parser.add_argument("--episodes", type=int, default=100)
    robustness_parser.add_argument("--widen", type=float, default=1.5, help="Randomization range scale factor.")
    robustness_parser.add_argument("--seed", type=int, default=0)
    robustness_parser.add_argument("--output")
    robustness_parser.set_defaults(handler=_cmd_robustness)

    selftest_parser = commands.add_parser("selftest", help="Run the gradient, GAE and kinematics oracle checks.")
    selftest_parser.add_argument("--seed", type=int, default=0)
    selftest_parser.set_defaults(handler=_cmd_selftest)
    return parser


def cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return exit_.code
    logger.set_level(logger.INFO if args.verbose else logger.WARN)
    try:
        return args.handler(args)
    except _UsageError as error:
        print(f"{parser.prog}: error: {error}", file=sys.stderr)
        return 2
    except (MobileManipulationError, OSError) as error:
        print(f"{parser.prog}: {type(error).__name__}: {error}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli())
