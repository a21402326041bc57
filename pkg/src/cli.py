"""Command-line entry points: train, eval, analyze, oracle-check.

Exit codes: 0 success, 1 a check ran and failed, 2 configuration error,
3 runtime fault, 130 interrupted.
"""

import argparse
import glob
import string
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from rich.console import Console

from . import __version__
from .analysis import (
    prediction_accuracy,
    read_search_dumps,
    top_k_options,
    tree_stats,
    usage_stats,
    write_report,
)
from .config import RunConfig, load_config
from .env import MOVE_GLYPHS, GridWorld, load_map
from .errors import ConfigurationError, OptionZeroError, UsageError
from .logging_config import get_logger, setup_logging
from .model import Checkpoint, OptionZeroNetwork, load_checkpoint
from .options import run_oracle_suite
from .selfplay import Trajectory, play_episode, read_trajectory_log
from .training import train_loop

logger = get_logger(__name__)
console = Console()

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_RUNTIME, EXIT_INTERRUPTED = 0, 1, 2, 3, 130
OVERLAY_GLYPHS = string.ascii_lowercase


class EvalReport(BaseModel):
    decisions: int
    primitive_steps: int
    total_return: float
    solved: bool
    shortest_path: int
    decision_reduction: Optional[float] = None
    composites: List[str]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optionzero", description="OptionZero on GridWorld.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override the configured log level.")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Run self-play and optimization.")
    train.add_argument("--config", type=Path, default=None, help="key = value config file.")
    train.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    train.add_argument("--resume", action="store_true", help="Continue from the run's latest checkpoint.")
    train.add_argument(
        "--start", choices=("fixed", "random"), default=None, help="Start placement; same as --set env.start_mode=..."
    )

    evaluate = sub.add_parser("eval", help="Greedy play from the map's fixed start.")
    evaluate.add_argument("checkpoint", type=Path)
    evaluate.add_argument("--map", type=Path, default=None, help="Map file; defaults to the config's map.")
    evaluate.add_argument("--config", type=Path, default=None)
    evaluate.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    evaluate.add_argument("--render", action="store_true", help="Print the maze with executed options overlaid.")

    analyze = sub.add_parser("analyze", help="Reports over trajectory logs and search dumps.")
    analyze.add_argument("logs", nargs="*", help="Trajectory log files or glob patterns.")
    analyze.add_argument("--dumps", nargs="*", default=[], help="Search dump files or glob patterns.")
    analyze.add_argument("--usage", action="store_true")
    analyze.add_argument("--tree", action="store_true")
    analyze.add_argument("--accuracy", action="store_true")
    analyze.add_argument("--topk", type=int, default=None, metavar="K")
    analyze.add_argument("--max-option-length", type=int, default=None)
    analyze.add_argument("--out", type=Path, default=Path("analysis"), help="Directory for .csv/.txt reports.")

    oracle = sub.add_parser("oracle-check", help="Derived dominant options versus the brute-force oracle.")
    oracle.add_argument("--trials", type=int, default=10_000)
    oracle.add_argument("--seed", type=int, default=0)
    return parser


# -- train ---------------------------------------------------------------------------


def cmd_train(
    config_path: Optional[Path],
    overrides: Sequence[str],
    resume: bool = False,
    log_level: Optional[str] = None,
    start: Optional[str] = None,
) -> int:
    overrides = list(overrides)
    if start is not None:
        overrides.append(f"env.start_mode={start}")
    config = load_config(config_path, overrides)
    setup_logging(log_level or config.log_level, config.debug, run_dir=config.run_dir)
    history = train_loop(config, resume=resume)
    if history:
        last = history[-1]
        console.print(
            f"[bold]{config.run_name}[/bold]: iteration {last.iteration} version {last.version} "
            f"eval decisions {last.eval_decisions} return {last.eval_return:.1f} "
            f"mean option length {last.mean_option_length:.3f}"
        )
    console.print(f"outputs in {config.run_dir}")
    return EXIT_OK


# -- eval ----------------------------------------------------------------------------


def overlay_for(env: GridWorld, trajectory: Trajectory) -> Dict:
    """Cells entered by each executed option, labelled by option order; primitive moves get '*'."""
    overlay = {}
    offsets = trajectory.offsets
    option_index = 0
    for index, record in enumerate(trajectory):
        cells = env.history[int(offsets[index]) + 1 : int(offsets[index + 1]) + 1]
        if record.length > 1:
            glyph = OVERLAY_GLYPHS[option_index % len(OVERLAY_GLYPHS)]
            option_index += 1
        else:
            glyph = "*"
        for cell in cells:
            overlay[cell] = glyph
    return overlay


def evaluate_checkpoint(config: RunConfig, checkpoint: Checkpoint) -> Tuple[EvalReport, GridWorld, Trajectory]:
    """Greedy, noise-free play from the fixed start with the checkpoint's own model shape."""
    if tuple(checkpoint.config.observation_shape) != tuple(config.model.observation_shape):
        raise ConfigurationError(
            "Map does not match the checkpoint",
            problems=[f"observation shape {config.model.observation_shape} != {checkpoint.config.observation_shape}"],
        )
    network = OptionZeroNetwork(checkpoint.config, checkpoint.params)
    search = config.search.model_copy(update={"max_option_length": checkpoint.config.max_option_length})
    env = GridWorld.from_config(config.env, start_mode="fixed")
    trajectory = play_episode(
        env, network, search, np.random.default_rng(config.seed), game=0, add_noise=False, temperature=0.0
    )
    shortest = env.grid.shortest_path_length()
    report = EvalReport(
        decisions=len(trajectory),
        primitive_steps=trajectory.total_length,
        total_return=trajectory.total_reward,
        solved=trajectory.terminal,
        shortest_path=shortest,
        decision_reduction=trajectory.total_length / len(trajectory) if len(trajectory) else None,
        composites=["".join(MOVE_GLYPHS[a] for a in record.executed) for record in trajectory],
    )
    return report, env, trajectory


def cmd_eval(
    checkpoint_path: Path,
    map_path: Optional[Path] = None,
    render: bool = False,
    config_path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    log_level: Optional[str] = None,
) -> int:
    overrides = list(overrides)
    if map_path is not None:
        load_map(map_path)
        overrides.append(f"env.map_path={map_path}")
    checkpoint = load_checkpoint(checkpoint_path)
    overrides.append(f"option_length={checkpoint.config.max_option_length}")
    config = load_config(config_path, overrides)
    setup_logging(log_level or config.log_level, config.debug)
    report, env, trajectory = evaluate_checkpoint(config, checkpoint)

    for index, composite in enumerate(report.composites):
        kind = "option" if len(composite) > 1 else "primitive"
        console.print(f"{index:4d}  {kind:9s}  {composite}")
    console.print(
        f"decisions {report.decisions}  primitive steps {report.primitive_steps}  "
        f"return {report.total_return:.1f}  solved {report.solved}  shortest path {report.shortest_path}"
    )
    if report.decision_reduction is not None:
        console.print(f"primitive steps per decision {report.decision_reduction:.2f}")
    if render:
        console.print(env.render_ascii(overlay_for(env, trajectory)), markup=False, highlight=False)
    return EXIT_OK


# -- analyze -------------------------------------------------------------------------


def _expand(patterns: Sequence[str]) -> List[Path]:
    paths: List[Path] = []
    for pattern in patterns:
        matches = sorted(glob.glob(pattern))
        if matches:
            paths.extend(Path(m) for m in matches)
        else:
            paths.append(Path(pattern))
    return paths


def _load_all(paths: Sequence[Path], reader) -> list:
    loaded, problems = [], []
    for path in paths:
        if not path.is_file():
            problems.append(f"{path}: not found")
            continue
        try:
            loaded.extend(reader(path))
        except (OSError, UsageError) as exc:
            problems.append(f"{path}: {exc}")
    if problems:
        raise UsageError("Unreadable logs: " + "; ".join(problems))
    return loaded


def cmd_analyze(
    logs: Sequence[str],
    dumps: Sequence[str] = (),
    usage: bool = False,
    tree: bool = False,
    accuracy: bool = False,
    topk: Optional[int] = None,
    max_option_length: Optional[int] = None,
    out: Path = Path("analysis"),
    log_level: Optional[str] = None,
) -> int:
    setup_logging(log_level or "WARNING")
    if not (usage or tree or accuracy or topk is not None):
        usage, accuracy, tree = True, True, bool(dumps)
        topk = 10
    if (usage or accuracy or topk is not None) and not logs:
        raise ConfigurationError("No trajectory logs given", problems=["pass one or more log files or globs"])
    if tree and not dumps:
        raise ConfigurationError("--tree needs --dumps", problems=["pass search dump files with --dumps"])

    trajectories = _load_all(_expand(logs), read_trajectory_log) if logs else []
    if usage:
        report = usage_stats(trajectories, max_option_length)
        console.print(write_report(out, "usage", "Option usage", *report.table()), markup=False, highlight=False)
    if accuracy:
        length = max_option_length or max(
            (len(r.suggested) for t in trajectories for r in t), default=1
        )
        report = prediction_accuracy(trajectories, max(length, 1))
        console.print(
            write_report(out, "accuracy", "Prediction accuracy", *report.table()), markup=False, highlight=False
        )
    if topk is not None:
        report = top_k_options(trajectories, topk, glyphs={int(m): g for m, g in MOVE_GLYPHS.items()})
        console.print(write_report(out, "topk", "Top options", *report.table()), markup=False, highlight=False)
    if tree:
        report = tree_stats(_load_all(_expand(dumps), read_search_dumps))
        console.print(write_report(out, "tree", "Search trees", *report.table()), markup=False, highlight=False)
    return EXIT_OK


# -- oracle-check --------------------------------------------------------------------


def cmd_oracle_check(trials: int, seed: int, log_level: Optional[str] = None) -> int:
    setup_logging(log_level or "WARNING")
    report = run_oracle_suite(trials=trials, seed=seed)
    status = "PASS" if report.passed else "FAIL"
    console.print(f"{status}: {report.trials} trials, {report.failures} failures (seed {seed})")
    for case, count in sorted(report.by_case.items()):
        console.print(f"  {case}: {count}")
    if report.counterexample is not None:
        console.print(f"counterexample: {report.counterexample}", markup=False)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


# -- main ----------------------------------------------------------------------------


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(args.config, args.overrides, args.resume, args.log_level, args.start)
        if args.command == "eval":
            return cmd_eval(args.checkpoint, args.map, args.render, args.config, args.overrides, args.log_level)
        if args.command == "analyze":
            return cmd_analyze(
                args.logs,
                args.dumps,
                usage=args.usage,
                tree=args.tree,
                accuracy=args.accuracy,
                topk=args.topk,
                max_option_length=args.max_option_length,
                out=args.out,
                log_level=args.log_level,
            )
        return cmd_oracle_check(args.trials, args.seed, args.log_level)
    except ConfigurationError as exc:
        console.print(f"configuration error: {exc}", style="red", markup=False, highlight=False)
        return exc.exit_code
    except OptionZeroError as exc:
        logger.error("command_failed", command=args.command, error=str(exc))
        console.print(f"error: {exc}", style="red", markup=False, highlight=False)
        return exc.exit_code
    except KeyboardInterrupt:
        console.print("\ninterrupted; workers drained and logs flushed")
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
