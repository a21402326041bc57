"""Self-play: one episode of search-then-act decisions."""

from typing import Callable, List, Optional

import numpy as np

from ..config import SearchConfig
from ..env import CompositeAction, CompositeEnvironment
from ..errors import OptionZeroError
from ..logging_config import get_logger
from ..model import OptionZeroNetwork
from ..search import SearchResult, run_search
from .records import DecisionRecord, Trajectory, make_record

logger = get_logger(__name__)

SearchCallback = Callable[[SearchResult, int, CompositeAction], None]


def play_episode(
    env: CompositeEnvironment,
    network: OptionZeroNetwork,
    config: SearchConfig,
    rng: np.random.Generator,
    game: int = 0,
    add_noise: bool = True,
    temperature: Optional[float] = None,
    on_search: Optional[SearchCallback] = None,
) -> Trajectory:
    """Search, act and record until the environment reports a terminal state.

    With `config.execute_options` off only the first primitive of a sampled
    option reaches the environment. Faults are re-raised with the game and
    decision index attached.
    """
    observation = env.reset(rng)
    records: List[DecisionRecord] = []
    reached_goal = False
    while not env.terminal:
        move = len(records)
        try:
            result = run_search(observation, network, config, rng, add_noise=add_noise, temperature=temperature)
            composite = result.chosen if config.execute_options else result.chosen[:1]
            step = env.step(composite)
        except OptionZeroError as exc:
            exc.context.setdefault("game", game)
            exc.context.setdefault("decision", move)
            raise
        executed = tuple(composite[: step.steps_executed])
        records.append(
            make_record(
                observation=observation,
                policy=result.root_policy,
                executed=executed,
                rewards=step.rewards,
                discount=config.discount,
                root_value=result.root_value,
                predicted=result.root_option,
                policy_argmax=result.root_policy_argmax,
                suggested=result.suggested,
                tree_metrics={
                    "option_edge_expanded": result.tree_metrics.option_edge_expanded,
                    "simulations_traversing_option": result.tree_metrics.simulations_traversing_option,
                    "max_depth": result.tree_metrics.max_depth,
                },
            )
        )
        if on_search is not None:
            on_search(result, move, executed)
        observation = step.observation
        reached_goal = step.reached_goal

    trajectory = Trajectory(records=tuple(records), terminal=reached_goal, game=game)
    logger.debug(
        "episode_complete",
        game=game,
        decisions=len(trajectory),
        primitive_steps=trajectory.total_length,
        solved=reached_goal,
        episode_return=trajectory.total_reward,
    )
    return trajectory
