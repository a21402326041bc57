"""n-step returns over composite decisions, prioritized replay, episodes and trajectory logs."""

import numpy as np
import pytest

from src.env import GridWorld, load_map
from src.errors import SearchFault, UsageError
from src.model import OptionZeroNetwork
from src.selfplay import (
    ReplayBuffer,
    compute_n_step_return,
    play_episode,
    priority,
    read_trajectory_log,
    write_trajectory_log,
)

from conftest import MAPS, ScriptedNetwork, grid_model_config, make_trajectory, search_config

GAMMA = 0.997


def flat_n_step(trajectory, index, td_steps, discount):
    """Independent computation over flattened primitive rewards and decision boundaries."""
    offsets = [int(o) for o in trajectory.offsets]
    rewards = trajectory.flat_rewards()
    begin = offsets[index]
    boundary = next((o for o in offsets[index + 1 :] if o - begin >= td_steps), offsets[-1])
    value = sum(discount ** (i - begin) * rewards[i] for i in range(begin, boundary))
    if boundary < offsets[-1]:
        value += discount ** (boundary - begin) * trajectory.records[offsets.index(boundary)].root_value
    return value


# -- n-step returns ----------------------------------------------------------------------


def test_mixed_lengths_bootstrap_at_first_boundary_past_n():
    traj = make_trajectory([2, 1, 1, 2, 1, 1], rewards=[[-1, 0.5], [-1], [-1], [-1, 2.0], [-1], [-1]])
    result = compute_n_step_return(traj, 0, td_steps=5, discount=GAMMA)
    u = [r.discounted_reward for r in traj.records]
    expected = u[0] + GAMMA**2 * u[1] + GAMMA**3 * u[2] + GAMMA**4 * u[3] + GAMMA**6 * traj.records[4].root_value
    assert result.value == pytest.approx(expected)
    assert result.bootstrap_index == 4
    assert result.bootstrap_offset == 6


def test_discounted_decision_reward():
    traj = make_trajectory([3], rewards=[[-1.0, 0.0, 200.0]])
    assert traj.records[0].discounted_reward == pytest.approx(-1.0 + GAMMA**2 * 200.0)


def test_single_step_decisions_reduce_to_plain_n_step():
    rng = np.random.default_rng(0)
    n = 6
    rewards = [[float(r)] for r in rng.normal(size=12)]
    values = list(rng.normal(size=12))
    traj = make_trajectory([1] * 12, rewards=rewards, root_values=values)
    for t in range(12):
        expected = sum(GAMMA**j * rewards[t + j][0] for j in range(min(n, 12 - t)))
        if t + n < 12:
            expected += GAMMA**n * values[t + n]
        assert compute_n_step_return(traj, t, n, GAMMA).value == pytest.approx(expected)


def test_random_trajectories_match_flattened_computation():
    rng = np.random.default_rng(1)
    for _ in range(30):
        lengths = [int(x) for x in rng.integers(1, 5, size=int(rng.integers(1, 15)))]
        rewards = [list(rng.normal(size=n)) for n in lengths]
        values = list(rng.normal(size=len(lengths)))
        traj = make_trajectory(lengths, rewards=rewards, root_values=values)
        td_steps = int(rng.integers(1, 8))
        for t in range(len(traj)):
            result = compute_n_step_return(traj, t, td_steps, GAMMA)
            assert result.value == pytest.approx(flat_n_step(traj, t, td_steps, GAMMA), abs=1e-9)
            if result.bootstrap_index < len(traj):
                assert td_steps <= result.bootstrap_offset <= td_steps + 4 - 1


def test_episode_end_bootstraps_with_zero():
    traj = make_trajectory([2, 2], rewards=[[-1, 0], [-1, 200]], root_values=[5.0, 7.0])
    result = compute_n_step_return(traj, 1, td_steps=5, discount=GAMMA)
    assert result.value == pytest.approx(-1 + GAMMA * 200)
    assert result.bootstrap_index == 2


def test_out_of_range_index():
    with pytest.raises(UsageError):
        compute_n_step_return(make_trajectory([1]), 1, 5, GAMMA)


def test_priority_is_absolute_error_plus_epsilon():
    traj = make_trajectory([1], rewards=[[3.0]], root_values=[1.0])
    assert priority(traj, 0, 5, GAMMA, epsilon=1e-6) == pytest.approx(2.0 + 1e-6)


# -- replay ------------------------------------------------------------------------------


def test_sampling_follows_priorities_and_weights():
    buffer = ReplayBuffer(capacity_games=4, td_steps=5, discount=GAMMA, alpha=1.0, beta=1.0)
    buffer.push(make_trajectory([1, 1]), priorities=np.array([3.0, 1.0]))
    items = buffer.sample(400, np.random.default_rng(0))
    by_index = {item.index: item for item in items}
    assert by_index[0].probability == pytest.approx(0.75)
    assert by_index[1].probability == pytest.approx(0.25)
    # (1/(2*0.75)) / (1/(2*0.25))
    assert by_index[0].weight == pytest.approx(1 / 3)
    assert by_index[1].weight == pytest.approx(1.0)
    share = sum(item.index == 0 for item in items) / len(items)
    assert 0.65 < share < 0.85


def test_zero_alpha_is_uniform_with_unit_weights():
    buffer = ReplayBuffer(capacity_games=4, td_steps=5, discount=GAMMA, alpha=0.0, beta=0.4)
    buffer.push(make_trajectory([1, 1, 2]), priorities=np.array([10.0, 1.0, 0.1]))
    items = buffer.sample(50, np.random.default_rng(0))
    assert all(item.probability == pytest.approx(1 / 3) for item in items)
    assert all(item.weight == pytest.approx(1.0) for item in items)


def test_empty_buffer_cannot_be_sampled():
    buffer = ReplayBuffer(capacity_games=2, td_steps=5, discount=GAMMA)
    with pytest.raises(UsageError):
        buffer.sample(1, np.random.default_rng(0))


def test_oldest_game_is_evicted():
    buffer = ReplayBuffer(capacity_games=2, td_steps=5, discount=GAMMA)
    for game in range(3):
        buffer.push(make_trajectory([1, 2], game=game))
    assert len(buffer) == 2
    assert [t.game for t in buffer.games()] == [1, 2]
    assert buffer.num_records == 4
    assert buffer.total_pushed == 3


def test_push_computes_priorities_from_returns():
    buffer = ReplayBuffer(capacity_games=2, td_steps=1, discount=GAMMA, priority_epsilon=0.5)
    traj = make_trajectory([1], rewards=[[2.0]], root_values=[0.5])
    np.testing.assert_allclose(buffer.priorities_for(traj), [2.0])
    with pytest.raises(UsageError):
        buffer.push(traj, priorities=np.array([1.0, 2.0]))


# -- episodes ----------------------------------------------------------------------------


def small_network(seed=0) -> OptionZeroNetwork:
    rng = np.random.default_rng(seed)
    network = OptionZeroNetwork.initialize(grid_model_config(), rng)
    theta = rng.normal(0.0, 0.8, size=network.params.theta.shape)
    return network.with_params(network.params.replace(theta, 0))


def smoke_env(decision_cap=8) -> GridWorld:
    return GridWorld(load_map(MAPS / "smoke_5x5.txt"), start_mode="fixed", decision_cap=decision_cap)


def test_episode_without_option_execution_records_primitives_only():
    config = search_config(simulations=10, execute_options=False)
    traj = play_episode(smoke_env(), small_network(), config, np.random.default_rng(0))
    assert 1 <= len(traj) <= 8
    assert all(record.length == 1 for record in traj)
    assert all(len(record.rewards) == 1 for record in traj)


def test_episode_records_match_environment_history():
    env = smoke_env(decision_cap=10)
    config = search_config(simulations=10)
    traj = play_episode(env, small_network(2), config, np.random.default_rng(1), game=7)
    assert traj.game == 7
    assert traj.total_length == len(env.history) - 1
    assert traj.terminal == env.reached_goal
    for record in traj:
        assert 1 <= record.length <= 3
        assert record.policy.sum() == pytest.approx(1.0)
        assert record.rewards[0] == -1.0 or record.rewards[0] == 199.0


def test_episodes_are_reproducible():
    config = search_config(simulations=10)
    one = play_episode(smoke_env(), small_network(3), config, np.random.default_rng(5))
    two = play_episode(smoke_env(), small_network(3), config, np.random.default_rng(5))
    assert one.flat_actions() == two.flat_actions()
    assert [r.root_value for r in one] == [r.root_value for r in two]


def test_search_fault_carries_game_and_decision():
    network = ScriptedNetwork(policy=[0.25] * 4, value=float("nan"))
    with pytest.raises(SearchFault) as info:
        play_episode(smoke_env(), network, search_config(), np.random.default_rng(0), game=5)
    assert info.value.context["game"] == 5
    assert info.value.context["decision"] == 0


# -- trajectory log ----------------------------------------------------------------------


def test_trajectory_log_round_trip(tmp_path):
    first = make_trajectory([2, 1], game=0, terminal=True)
    second = make_trajectory([1, 3, 1], game=1, terminal=False, predicted=[[0], [1, 1], [2]])
    path = tmp_path / "trajectories.jsonl"
    assert write_trajectory_log(path, [second, first]) == 5
    loaded = read_trajectory_log(path)
    assert [t.game for t in loaded] == [0, 1]
    assert loaded[0].terminal and not loaded[1].terminal
    assert loaded[1].flat_actions() == second.flat_actions()
    assert [r.predicted for r in loaded[1]] == [(0,), (1, 1), (2,)]
    assert loaded[1].records[1].discounted_reward == pytest.approx(second.records[1].discounted_reward)
    assert loaded[0].records[0].observation.shape == (3, 5, 5)


def test_malformed_log_lines_are_reported_together(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"game": 0}\nnot json\n')
    with pytest.raises(UsageError) as info:
        read_trajectory_log(path)
    assert "bad.jsonl:1" in str(info.value) and "bad.jsonl:2" in str(info.value)
