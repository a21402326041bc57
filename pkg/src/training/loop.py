"""Alternating self-play and optimization over a run directory."""

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import orjson
from pydantic import BaseModel

from ..config import RunConfig, dump_config
from ..env import GridWorld
from ..errors import CheckpointError, OptionZeroError, TrainingFault
from ..logging_config import bind_run_context, clear_run_context, get_logger
from ..model import SGD, LossBreakdown, OptionZeroNetwork, UnrollBatch, load_checkpoint, save_checkpoint
from ..options import OptionDistribution, derive_dominant_option
from ..search import search_dump_record
from ..selfplay import ReplayBuffer, Trajectory, play_episode, read_trajectory_log, write_trajectory_log
from .unroll import assemble_unroll

logger = get_logger(__name__)

# Stream tags for numpy.random.default_rng([seed, tag, ...]).
INIT_STREAM, SAMPLE_STREAM, GAME_STREAM, EVAL_STREAM = 0, 1, 2, 3


class IterationMetrics(BaseModel):
    """One line of metrics.jsonl."""

    iteration: int
    version: int
    games: int
    replay_games: int
    train_steps: int
    loss_total: Optional[float] = None
    loss_policy: Optional[float] = None
    loss_value: Optional[float] = None
    loss_reward: Optional[float] = None
    loss_option: Optional[float] = None
    loss_l2: Optional[float] = None
    mean_return: float
    solved_rate: float
    mean_decisions: float
    mean_option_length: float
    option_usage_pct: float
    repeat_pct: Optional[float] = None
    eval_return: float
    eval_decisions: int
    eval_primitive_steps: int
    eval_solved: bool
    eval_dominant_option: List[int]
    elapsed_seconds: float


def selfplay_summary(trajectories: Sequence[Trajectory]) -> Dict[str, Any]:
    """Return, solve rate and executed-length statistics of one iteration's games."""
    lengths = [record.length for trajectory in trajectories for record in trajectory]
    options = [record.executed for trajectory in trajectories for record in trajectory if record.length > 1]
    repeats = sum(1 for option in options if len(set(option)) == 1)
    return {
        "mean_return": float(np.mean([t.total_reward for t in trajectories])) if trajectories else 0.0,
        "solved_rate": float(np.mean([t.terminal for t in trajectories])) if trajectories else 0.0,
        "mean_decisions": float(np.mean([len(t) for t in trajectories])) if trajectories else 0.0,
        "mean_option_length": float(np.mean(lengths)) if lengths else 0.0,
        "option_usage_pct": 100.0 * len(options) / len(lengths) if lengths else 0.0,
        "repeat_pct": 100.0 * repeats / len(options) if options else None,
    }


def _mean_losses(losses: Sequence[LossBreakdown]) -> Dict[str, Optional[float]]:
    keys = ("total", "policy", "value", "reward", "option", "l2")
    if not losses:
        return {f"loss_{key}": None for key in keys}
    return {f"loss_{key}": float(np.mean([getattr(b, key) for b in losses])) for key in keys}


def _append_jsonl(path: Path, rows: Sequence[Dict[str, Any]]) -> None:
    if not rows:
        return
    with path.open("ab") as fh:
        for row in rows:
            fh.write(orjson.dumps(row, option=orjson.OPT_SERIALIZE_NUMPY) + b"\n")


class Trainer:
    """Owns the model, the optimizer state, the replay buffer and the run directory.

    Self-play workers read the published parameter snapshot; only the trainer
    thread replaces it.
    """

    def __init__(self, config: RunConfig, resume: bool = False):
        self.config = config
        self.run_dir = Path(config.run_dir)
        self.checkpoint_dir = self.run_dir / "checkpoints"
        self.trajectory_log = self.run_dir / "trajectories.jsonl"
        self.search_log = self.run_dir / "search_dumps.jsonl"
        self.metrics_log = self.run_dir / "metrics.jsonl"
        self.fault_dir = self.run_dir / "faults"

        training = config.training
        self.replay = ReplayBuffer.from_config(config.replay, training)
        # The L2 term is part of the loss; no extra decay in the update.
        self.optimizer = SGD(
            lr=training.learning_rate,
            momentum=training.momentum,
            weight_decay=0.0,
            max_grad_norm=training.max_grad_norm,
        )
        self._snapshot_lock = threading.Lock()
        self._network = OptionZeroNetwork.initialize(config.model, np.random.default_rng([config.seed, INIT_STREAM]))
        self.iteration = 0
        if resume:
            self._restore()
        else:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            (self.run_dir / "config.cfg").write_text(dump_config(config))
        self._sample_rng = np.random.default_rng([config.seed, SAMPLE_STREAM, self.iteration])

    # -- snapshot ------------------------------------------------------------------

    @property
    def network(self) -> OptionZeroNetwork:
        with self._snapshot_lock:
            return self._network

    def _publish(self, network: OptionZeroNetwork) -> None:
        with self._snapshot_lock:
            self._network = network

    # -- resume --------------------------------------------------------------------

    def latest_checkpoint(self) -> Optional[Path]:
        found = sorted(self.checkpoint_dir.glob("iter_*.npz"))
        return found[-1] if found else None

    def _restore(self) -> None:
        path = self.latest_checkpoint()
        if path is None:
            raise CheckpointError("No checkpoint to resume from", run_dir=str(self.run_dir))
        checkpoint = load_checkpoint(path, expected=self.config.model)
        self._publish(OptionZeroNetwork(self.config.model, checkpoint.params))
        self.optimizer.velocity = checkpoint.velocity
        self.iteration = int(checkpoint.extra.get("iteration", 0))
        if self.trajectory_log.is_file():
            played = self.iteration * self.config.training.games_per_iteration
            kept = [t for t in read_trajectory_log(self.trajectory_log) if t.game < played]
            for trajectory in kept[-self.config.replay.capacity_games :]:
                self.replay.push(trajectory)
        logger.info(
            "run_resumed",
            checkpoint=str(path),
            iteration=self.iteration,
            version=checkpoint.params.version,
            replay_games=len(self.replay),
        )

    # -- self-play -----------------------------------------------------------------

    def _play_game(self, network: OptionZeroNetwork, game: int) -> Tuple[Trajectory, List[Dict[str, Any]]]:
        dumps: List[Dict[str, Any]] = []
        on_search = None
        if self.config.training.write_search_dumps:

            def on_search(result, move, executed):
                dumps.append(search_dump_record(result, game=game, move=move, executed=executed))

        env = GridWorld.from_config(self.config.env)
        rng = np.random.default_rng([self.config.seed, GAME_STREAM, game])
        try:
            trajectory = play_episode(env, network, self.config.search, rng, game=game, on_search=on_search)
        except OptionZeroError as exc:
            exc.context.setdefault("worker", threading.current_thread().name)
            raise
        return trajectory, dumps

    def play_games(self, iteration: int) -> Tuple[List[Trajectory], List[Dict[str, Any]]]:
        """Play one iteration's games with the current snapshot, in game-id order."""
        per_iteration = self.config.training.games_per_iteration
        game_ids = range(iteration * per_iteration, (iteration + 1) * per_iteration)
        network = self.network
        if self.config.workers == 1:
            results = [self._play_game(network, game) for game in game_ids]
        else:
            pool = ThreadPoolExecutor(max_workers=self.config.workers, thread_name_prefix="selfplay")
            try:
                results = list(pool.map(lambda game: self._play_game(network, game), game_ids))
            except KeyboardInterrupt:
                pool.shutdown(wait=True, cancel_futures=True)
                raise
            pool.shutdown(wait=True)
        trajectories = [t for t, _ in results]
        dumps = [d for _, ds in results for d in ds]
        return trajectories, dumps

    # -- optimization --------------------------------------------------------------

    def sample_batch(self) -> UnrollBatch:
        training = self.config.training
        model = self.config.model
        items = self.replay.sample(training.batch_size, self._sample_rng)
        samples = [
            assemble_unroll(
                item.trajectory,
                item.index,
                training.unroll_steps,
                training.td_steps,
                training.discount,
                model.max_option_length,
                model.action_space_size,
                execute_options=self.config.search.execute_options,
                weight=item.weight,
            )
            for item in items
        ]
        return UnrollBatch.from_samples(samples, model.max_option_length, model.action_space_size)

    def _dump_batch(self, batch: UnrollBatch, version: int) -> Path:
        self.fault_dir.mkdir(parents=True, exist_ok=True)
        path = self.fault_dir / f"batch_v{version}.npz"
        np.savez(path, **{f.name: getattr(batch, f.name) for f in fields(batch)})
        return path

    def train_step(self) -> LossBreakdown:
        network = self.network
        batch = self.sample_batch()
        try:
            _, gradient, breakdown = network.loss_and_gradient(batch)
        except TrainingFault as exc:
            path = self._dump_batch(batch, network.version)
            context = {k: v for k, v in exc.context.items() if k != "dump_path"}
            logger.error("training_fault", dump_path=str(path), **context)
            raise TrainingFault("Non-finite loss; batch dumped", dump_path=str(path), **context) from exc
        self._publish(network.with_params(self.optimizer.step(network.params, gradient)))
        return breakdown

    # -- evaluation ----------------------------------------------------------------

    def evaluate(self, iteration: int) -> Tuple[Trajectory, Tuple[int, ...]]:
        """Greedy, noise-free episode from the map's fixed start plus the dominant option there."""
        network = self.network
        env = GridWorld.from_config(self.config.env, start_mode="fixed")
        rng = np.random.default_rng([self.config.seed, EVAL_STREAM, iteration])
        trajectory = play_episode(env, network, self.config.search, rng, game=-1, add_noise=False, temperature=0.0)
        prediction = network.predict(network.represent(env.reset(rng)))
        option = derive_dominant_option(OptionDistribution.from_prediction(prediction.policy, prediction.option_heads))
        return trajectory, option

    # -- driver --------------------------------------------------------------------

    def run_iteration(self, iteration: int) -> IterationMetrics:
        started = time.monotonic()
        trajectories, dumps = self.play_games(iteration)
        for trajectory in trajectories:
            self.replay.push(trajectory)
        write_trajectory_log(self.trajectory_log, trajectories)
        _append_jsonl(self.search_log, dumps)

        losses: List[LossBreakdown] = []
        if len(self.replay) >= self.config.training.warmup_games:
            for _ in range(self.config.training.steps_per_iteration):
                losses.append(self.train_step())

        evaluation, option = self.evaluate(iteration)
        network = self.network
        metrics = IterationMetrics(
            iteration=iteration,
            version=network.version,
            games=len(trajectories),
            replay_games=len(self.replay),
            train_steps=len(losses),
            eval_return=evaluation.total_reward,
            eval_decisions=len(evaluation),
            eval_primitive_steps=evaluation.total_length,
            eval_solved=evaluation.terminal,
            eval_dominant_option=list(option),
            elapsed_seconds=time.monotonic() - started,
            **_mean_losses(losses),
            **selfplay_summary(trajectories),
        )
        _append_jsonl(self.metrics_log, [metrics.model_dump()])
        save_checkpoint(
            self.checkpoint_dir / f"iter_{iteration:04d}.npz",
            self.config.model,
            network.params,
            velocity=self.optimizer.velocity,
            extra={"iteration": iteration + 1},
        )
        logger.info(
            "iteration_complete",
            iteration=iteration,
            version=metrics.version,
            loss=metrics.loss_total,
            mean_return=round(metrics.mean_return, 3),
            mean_option_length=round(metrics.mean_option_length, 3),
            option_usage_pct=round(metrics.option_usage_pct, 2),
            eval_decisions=metrics.eval_decisions,
            eval_solved=metrics.eval_solved,
        )
        return metrics

    def run(self) -> List[IterationMetrics]:
        logger.info(
            "training_started",
            run_dir=str(self.run_dir),
            start_iteration=self.iteration,
            iterations=self.config.training.iterations,
            workers=self.config.workers,
        )
        history = []
        try:
            while self.iteration < self.config.training.iterations:
                bind_run_context(run=self.config.run_name, iteration=self.iteration)
                history.append(self.run_iteration(self.iteration))
                self.iteration += 1
        finally:
            clear_run_context()
        return history


def train_loop(config: RunConfig, resume: bool = False) -> List[IterationMetrics]:
    """Run (or continue) training as configured; returns the metrics of the iterations run."""
    return Trainer(config, resume=resume).run()


def read_metrics(path: Path) -> List[IterationMetrics]:
    with Path(path).open("rb") as fh:
        return [IterationMetrics(**orjson.loads(line)) for line in fh if line.strip()]
