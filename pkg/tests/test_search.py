"""Option-aware MCTS: selection rules, option chains, backup and tree invariants."""

import numpy as np
import pytest

from src.errors import SearchFault
from src.model import OptionZeroNetwork
from src.search import (
    OPTION,
    PRIMITIVE,
    EdgeStats,
    MinMaxStats,
    Node,
    OptionEdge,
    Transition,
    add_root_noise,
    adjusted_primitive_prior,
    adjusted_primitive_q,
    backup,
    default_q,
    evaluate_root,
    expand_and_evaluate,
    run_search,
    sample_root_action,
    search_dump_record,
    select_option_vs_primitive,
    select_path,
    select_primitive,
    tree_violations,
    virtual_loss_q,
    visit_distribution,
)

from conftest import ScriptedNetwork, consistent_heads, grid_model_config, reference_muzero_search, search_config

OBS = np.zeros((3, 5, 5))


def node_with(priors, visits=None, values=None) -> Node:
    node = Node(depth=0, action_space_size=len(priors), evaluated=True)
    for i, prior in enumerate(priors):
        node.edges[i].stats.prior = prior
        if visits is not None:
            node.edges[i].stats.visits = visits[i]
            node.edges[i].stats.value = values[i]
    return node


def random_network(seed, max_option_length=3, scale=1.0) -> OptionZeroNetwork:
    rng = np.random.default_rng(seed)
    network = OptionZeroNetwork.initialize(grid_model_config(max_option_length=max_option_length), rng)
    theta = rng.normal(0.0, scale, size=network.params.theta.shape)
    return network.with_params(network.params.replace(theta, 0))


def option_network(per_step=0.9, value=0.5, reward=1.0) -> ScriptedNetwork:
    return ScriptedNetwork(
        policy=[per_step, 0.05, 0.03, 1.0 - per_step - 0.08],
        option_heads=consistent_heads(0, per_step, 3, 4),
        value=value,
        reward=reward,
    )


# -- selection formulas ------------------------------------------------------------------


def test_fresh_node_selects_argmax_prior():
    node = node_with([0.1, 0.2, 0.6, 0.1])
    assert select_primitive(node, c_puct=1.25) == 2
    assert default_q(node, MinMaxStats(enabled=False)) == 1.0


def test_default_q_is_mean_of_visited_children():
    node = node_with([0.25] * 4, visits=[2, 0, 3, 0], values=[0.2, 0.0, 0.6, 0.0])
    assert default_q(node, MinMaxStats(enabled=False)) == pytest.approx(0.4)


def test_ties_keep_lowest_action():
    assert select_primitive(node_with([0.25] * 4), c_puct=1.0) == 0


def test_adjusted_primitive_q_and_prior():
    prim = EdgeStats(prior=0.3, visits=10, value=0.5)
    option = EdgeStats(prior=0.4, visits=4, value=0.8)
    assert adjusted_primitive_q(prim, option) == pytest.approx(0.3)
    assert adjusted_primitive_prior(prim, option) == 0.0
    assert adjusted_primitive_q(EdgeStats(visits=4, value=0.8), option) is None


def test_virtual_loss_for_unvisited_option():
    assert virtual_loss_q(EdgeStats(visits=24, value=0.5)) == pytest.approx(0.48)
    assert virtual_loss_q(EdgeStats()) == 0.0


def test_option_wins_second_stage_on_fresh_node():
    root = evaluate_root(OBS, option_network())
    assert select_primitive(root, 1.25) == 0
    assert select_option_vs_primitive(root, 0, 1.25) == OPTION
    assert select_option_vs_primitive(root, 1, 1.25) == PRIMITIVE


def test_primitive_wins_when_option_visits_look_bad():
    root = evaluate_root(OBS, option_network())
    root.edges[0].stats.visits, root.edges[0].stats.value = 10, 0.5
    root.option_edge.stats.visits, root.option_edge.stats.value = 8, -1.0
    assert select_option_vs_primitive(root, 0, 1.25) == PRIMITIVE


# -- tree construction -------------------------------------------------------------------


def test_root_option_chain_is_built_from_consistent_heads():
    network = option_network(per_step=0.9)
    root = evaluate_root(OBS, network)
    assert root.derived_option == (0, 0, 0)
    edge = root.option_edge
    assert edge.actions == (0, 0, 0)
    assert edge.stats.prior == pytest.approx(0.729)
    assert edge.target is root.edges[0].child.edges[0].child.edges[0].child
    assert edge.target.depth == 3
    assert not root.edges[0].child.evaluated


def test_short_option_stops_at_half():
    # products per step: 0.8 -> 0.64 -> 0.512 (capped at L=3); 0.75 -> 0.5625 -> 0.42; 0.6 -> 0.36
    root = evaluate_root(OBS, option_network(per_step=0.8))
    assert root.derived_option == (0, 0, 0)
    root = evaluate_root(OBS, option_network(per_step=0.75))
    assert root.derived_option == (0, 0)
    root = evaluate_root(OBS, option_network(per_step=0.6))
    assert root.option_edge is None


def test_primitive_backup_is_reward_plus_discounted_value():
    network = ScriptedNetwork(policy=[0.25] * 4, value=0.5, reward=1.0)
    config = search_config(simulations=1, normalize_q=False)
    root = evaluate_root(OBS, network)
    stats = MinMaxStats(enabled=False)
    path, leaf = select_path(root, config, stats)
    expand_and_evaluate(path, leaf, network, config.discount)
    backup(path, leaf, config.discount, stats)
    assert root.edges[0].stats.visits == 1
    assert root.edges[0].stats.value == pytest.approx(1.0 + 0.997 * 0.5)
    assert root.edges[0].stats.reward == 1.0


def test_option_simulation_updates_both_edges_with_one_dynamics_call():
    network = option_network(value=0.5, reward=1.0)
    config = search_config(simulations=1, normalize_q=False)
    root = evaluate_root(OBS, network)
    stats = MinMaxStats(enabled=False)
    path, leaf = select_path(root, config, stats)
    assert len(path) == 1 and path[0].is_option
    expand_and_evaluate(path, leaf, network, config.discount)
    backup(path, leaf, config.discount, stats)
    assert network.dynamics_calls == [(0.0, (0, 0, 0))]
    expected = 1.0 + 0.997**3 * 0.5
    assert root.option_edge.stats.value == pytest.approx(expected)
    assert root.edges[0].stats.value == pytest.approx(expected)
    assert root.edges[0].stats.visits == root.option_edge.stats.visits == 1


def test_intermediate_chain_node_gets_exact_return():
    network = option_network(value=0.5, reward=1.0)
    config = search_config(simulations=1, normalize_q=False)
    root = evaluate_root(OBS, network)
    stats = MinMaxStats(enabled=False)
    path, leaf = select_path(root, config, stats)
    expand_and_evaluate(path, leaf, network, config.discount)
    backup(path, leaf, config.discount, stats)

    # now reach depth 1 by a primitive move and expand it
    middle = root.edges[0].child
    step = [Transition(root, (0,), PRIMITIVE)]
    expand_and_evaluate(step, middle, network, config.discount)
    assert middle.cum_reward == pytest.approx(1.0)
    assert middle.depth == 1
    assert tree_violations(root, 1, config.discount, 3) == []


def test_expansion_from_root_is_rejected():
    network = option_network()
    with pytest.raises(SearchFault):
        expand_and_evaluate([], Node(depth=0, action_space_size=4), network, 0.997)


def test_non_finite_value_is_a_search_fault():
    network = ScriptedNetwork(policy=[0.25] * 4, value=float("nan"))
    with pytest.raises(SearchFault):
        evaluate_root(OBS, network)


def test_model_and_search_must_agree_on_option_length():
    with pytest.raises(SearchFault):
        run_search(OBS, option_network(), search_config(max_option_length=4), np.random.default_rng(0))


# -- whole searches ----------------------------------------------------------------------


def test_root_visits_equal_simulations_and_option_is_used():
    network = option_network(value=0.5, reward=-1.0)
    result = run_search(OBS, network, search_config(simulations=30), np.random.default_rng(0), add_noise=False)
    assert int(result.root.primitive_visits().sum()) == 30
    assert result.tree_metrics.option_edge_expanded
    assert result.tree_metrics.simulations_traversing_option > 0
    assert result.root_option == (0, 0, 0)
    assert result.root_policy_argmax == 0
    assert result.root_policy.sum() == pytest.approx(1.0)
    assert len(result.tree_metrics.simulation_depths) == 30


@pytest.mark.parametrize("seed", range(12))
def test_random_searches_keep_tree_invariants(seed):
    network = random_network(seed)
    config = search_config(simulations=25)
    obs = np.random.default_rng(seed).random((3, 5, 5))
    result = run_search(obs, network, config, np.random.default_rng(seed))
    assert tree_violations(result.root, 25, config.discount, 3) == []
    assert len(result.chosen) in (1, len(result.root_option) if result.root.option_edge else 1)


def test_scripted_option_searches_keep_tree_invariants():
    rng = np.random.default_rng(3)
    for trial in range(10):
        heads_by_depth = {d: consistent_heads(int(rng.integers(4)), float(rng.uniform(0.75, 0.99)), 3, 4) for d in range(40)}
        network = ScriptedNetwork(
            policy=[0.85, 0.05, 0.05, 0.05],
            option_heads_by_depth=heads_by_depth,
            value=float(rng.normal()),
            reward=float(rng.normal()),
        )
        config = search_config(simulations=40)
        result = run_search(OBS, network, config, np.random.default_rng(trial))
        assert tree_violations(result.root, 40, config.discount, 3) == []


@pytest.mark.slow
def test_many_random_searches_keep_tree_invariants():
    simulations_run = 0
    seed = 100
    while simulations_run < 10_000:
        network = random_network(seed, max_option_length=4)
        config = search_config(simulations=50, max_option_length=4)
        obs = np.random.default_rng(seed).random((3, 5, 5))
        result = run_search(obs, network, config, np.random.default_rng(seed))
        assert tree_violations(result.root, 50, config.discount, 4) == []
        simulations_run += 50
        seed += 1


@pytest.mark.parametrize("seed", range(5))
def test_single_step_options_match_plain_muzero_search(seed):
    network = random_network(seed, max_option_length=1, scale=0.7)
    config = search_config(simulations=20, max_option_length=1)
    obs = np.random.default_rng(seed).random((3, 5, 5))
    ours = run_search(obs, network, config, np.random.default_rng(0), add_noise=False, temperature=0.0)
    reference = reference_muzero_search(obs, network, 20, config.c_puct, config.discount)
    assert ours.root.option_edge is None
    for action in range(4):
        assert ours.root.edges[action].stats.visits == reference.children[action].visit_count
        assert ours.root.edges[action].stats.value == pytest.approx(reference.children[action].q(), abs=1e-9)


class RecordingNetwork:
    """Delegates to a network and logs every call with the exact bytes of its inputs."""

    def __init__(self, network):
        self._network = network
        self.calls = []

    def __getattr__(self, name):
        return getattr(self._network, name)

    def represent(self, obs):
        self.calls.append(("represent", np.asarray(obs).tobytes()))
        return self._network.represent(obs)

    def dynamics(self, state, action):
        self.calls.append(("dynamics", np.asarray(state).tobytes(), tuple(int(a) for a in action)))
        return self._network.dynamics(state, action)

    def predict(self, state):
        self.calls.append(("predict", np.asarray(state).tobytes()))
        return self._network.predict(state)


@pytest.mark.parametrize("seed", range(5))
def test_single_step_search_trace_is_identical_to_plain_muzero(seed):
    network = random_network(seed, max_option_length=1, scale=0.7)
    config = search_config(simulations=30, max_option_length=1)
    obs = np.random.default_rng(seed).random((3, 5, 5))
    ours, reference = RecordingNetwork(network), RecordingNetwork(network)
    run_search(obs, ours, config, np.random.default_rng(0), add_noise=False, temperature=0.0)
    reference_muzero_search(obs, reference, 30, config.c_puct, config.discount)
    assert len(ours.calls) == 2 + 2 * 30
    assert ours.calls == reference.calls


# -- root action -------------------------------------------------------------------------


def root_with_option(visits, option_visits, option=(1, 1)) -> Node:
    root = node_with([0.25] * 4, visits=visits, values=[0.0] * 4)
    target = root
    for a in option:
        target = target.child(a)
    root.option_edge = OptionEdge(actions=option, stats=EdgeStats(visits=option_visits), target=target)
    return root


def test_greedy_root_action_compares_option_with_remaining_primitive_visits():
    assert sample_root_action(root_with_option([3, 10, 2, 0], 6), 0.0) == (1, 1)
    assert sample_root_action(root_with_option([3, 10, 2, 0], 4), 0.0) == (1,)
    assert sample_root_action(root_with_option([3, 10, 2, 0], 5), 0.0) == (1,)
    assert sample_root_action(root_with_option([12, 10, 2, 0], 10), 0.0) == (0,)


def test_sampled_root_action_follows_visit_split():
    rng = np.random.default_rng(0)
    root = root_with_option([0, 10, 0, 0], 10)
    assert all(sample_root_action(root, 1.0, rng) == (1, 1) for _ in range(20))
    root = root_with_option([0, 10, 0, 0], 0)
    assert all(sample_root_action(root, 1.0, rng) == (1,) for _ in range(20))


def test_sampled_root_action_spreads_over_visits():
    rng = np.random.default_rng(1)
    root = node_with([0.25] * 4, visits=[5, 5, 0, 0], values=[0.0] * 4)
    draws = {sample_root_action(root, 1.0, rng) for _ in range(200)}
    assert draws == {(0,), (1,)}


def test_sampled_first_action_marginal_matches_root_policy():
    # chi-square goodness of fit over 10^5 draws; 16.27 is the 0.1% critical value for 3 degrees of freedom
    rng = np.random.default_rng(2)
    visits = [3, 10, 2, 5]
    root = root_with_option(visits, 6)
    draws = 100_000
    first = np.zeros(4)
    options = 0
    for _ in range(draws):
        action = sample_root_action(root, 1.0, rng)
        first[action[0]] += 1
        options += len(action) > 1
    expected = draws * np.asarray(visits) / sum(visits)
    assert ((first - expected) ** 2 / expected).sum() < 16.27
    # within action 1 the option takes its 6 of 10 visits
    assert options / first[1] == pytest.approx(0.6, abs=0.02)


def test_small_temperature_sampling_stays_finite():
    rng = np.random.default_rng(0)
    root = root_with_option([30, 20, 0, 0], 0)
    with np.errstate(over="raise", invalid="raise"):
        assert all(sample_root_action(root, 0.001, rng) == (0,) for _ in range(50))
        probs = visit_distribution(np.array([300.0, 299.0, 0.0, 1.0]), 1e-4)
    assert np.all(np.isfinite(probs))
    assert probs[0] == pytest.approx(1.0)


def test_zero_epsilon_noise_leaves_priors():
    root = evaluate_root(OBS, option_network())
    before = [e.stats.prior for e in root.edges] + [root.option_edge.stats.prior]
    add_root_noise(root, 0.3, 0.0, np.random.default_rng(0))
    assert [e.stats.prior for e in root.edges] + [root.option_edge.stats.prior] == before


def test_noise_keeps_priors_normalized_and_option_prior_in_range():
    root = evaluate_root(OBS, option_network())
    add_root_noise(root, 0.3, 0.25, np.random.default_rng(0))
    assert sum(e.stats.prior for e in root.edges) == pytest.approx(1.0)
    assert 0.0 <= root.option_edge.stats.prior <= 1.0


def test_search_is_deterministic_given_generator():
    network = random_network(4)
    config = search_config(simulations=20)
    obs = np.random.default_rng(4).random((3, 5, 5))
    one = run_search(obs, network, config, np.random.default_rng(9))
    two = run_search(obs, network, config, np.random.default_rng(9))
    np.testing.assert_array_equal(one.root_policy, two.root_policy)
    assert one.chosen == two.chosen
    assert one.root_value == two.root_value


def test_search_dump_lists_evaluated_nodes():
    result = run_search(OBS, option_network(), search_config(simulations=8), np.random.default_rng(0))
    dump = search_dump_record(result, game=2, move=5)
    assert dump["simulations"] == 8
    assert dump["game"] == 2 and dump["move"] == 5
    assert dump["nodes"][0]["depth"] == 0
    assert "option_edge" in dump["nodes"][0]
    assert sum(edge["N"] for edge in dump["nodes"][0]["edges"]) == 8
