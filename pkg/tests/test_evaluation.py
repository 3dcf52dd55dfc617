import numpy as np
import pytest

from logdesign.env import Environment, GeometricSpec, make_geometric_env
from logdesign.evaluation import (
    LoggedDataset,
    closed_form_mse,
    ipw_estimate,
    monte_carlo_mse,
    on_policy_mse,
    policy_value,
    simulate_dataset,
    worst_case_mse,
)
from logdesign.policy import Policy, explicit_policy, uniform_policy

from oracles import enumerated_bias, enumerated_variance


def single_context_env(*mu_values):
    mu = np.asarray(mu_values, dtype=np.float64)[:, None]
    return Environment(contexts=(0,), arrival_probs=[1.0], actions=tuple(range(len(mu_values))), mu=mu)


class TestPolicyValue:
    def test_deterministic(self):
        env = single_context_env(0.7, 0.2)
        assert policy_value(env, explicit_policy([[1.0], [0.0]])) == pytest.approx(0.7)

    def test_uniform_average(self):
        env = single_context_env(0.9, 0.1)
        assert policy_value(env, uniform_policy(2, 1)) == pytest.approx(0.5)

    def test_arrival_weighting(self):
        env = Environment(
            contexts=(0, 1),
            arrival_probs=[0.25, 0.75],
            actions=(0,),
            mu=np.array([[0.4, 0.8]]),
        )
        assert policy_value(env, uniform_policy(1, 2)) == pytest.approx(0.7)


class TestIpwEstimate:
    def test_matched_policies_give_reward_mean(self):
        logging = explicit_policy([[0.3], [0.7]])
        data = LoggedDataset(
            contexts=[0, 0, 0, 0],
            actions=[0, 1, 1, 0],
            rewards=[1, 0, 1, 1],
            logging_policy=logging,
        )
        assert ipw_estimate(data, logging) == pytest.approx(0.75)

    def test_zero_rewards(self):
        logging = uniform_policy(3, 1)
        data = LoggedDataset(contexts=[0, 0], actions=[1, 2], rewards=[0, 0], logging_policy=logging)
        assert ipw_estimate(data, uniform_policy(3, 1)) == 0.0

    def test_single_record_ratio(self):
        logging = explicit_policy([[0.1], [0.9]])
        target = explicit_policy([[0.3], [0.7]])
        data = LoggedDataset(contexts=[0], actions=[0], rewards=[1], logging_policy=logging)
        assert ipw_estimate(data, target) == pytest.approx(3.0)

    def test_record_outside_support_rejected(self):
        logging = explicit_policy([[1.0], [0.0]])
        with pytest.raises(ValueError):
            LoggedDataset(contexts=[0], actions=[1], rewards=[0], logging_policy=logging)


class TestClosedFormMse:
    def test_two_action_variance(self):
        env = single_context_env(1.0, 0.3)
        target = explicit_policy([[1.0], [0.0]])
        bd = closed_form_mse(env, target, uniform_policy(2, 1), n=1)
        assert bd.bias_sq == 0.0
        assert bd.variance == pytest.approx(1.0)
        assert bd.mse == bd.bias_sq + bd.variance

    def test_covered_support_unbiased(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = int(rng.integers(2, 8))
            env = single_context_env(*rng.random(a))
            logging = explicit_policy(rng.dirichlet(np.ones(a))[:, None] * 0.5 + 0.5 / a)
            target = explicit_policy(rng.dirichlet(np.ones(a))[:, None])
            assert closed_form_mse(env, target, logging, 7).bias_sq == 0.0

    def test_truncated_support_bias(self):
        env = single_context_env(0.9, 0.5)
        target = explicit_policy([[0.4], [0.6]])
        logging = explicit_policy([[1.0], [0.0]])
        bd = closed_form_mse(env, target, logging, n=3)
        assert bd.bias_sq == pytest.approx((0.6 * 0.5) ** 2)

    def test_variance_scaling_law(self):
        env = single_context_env(0.8, 0.2, 0.4)
        target = explicit_policy([[0.5], [0.25], [0.25]])
        logging = explicit_policy([[0.6], [0.4], [0.0]])
        at_2 = closed_form_mse(env, target, logging, 2)
        at_10 = closed_form_mse(env, target, logging, 10)
        assert at_2.variance == pytest.approx(5 * at_10.variance, rel=1e-12)
        assert at_2.bias_sq == at_10.bias_sq

    def test_matches_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            a = int(rng.integers(2, 6))
            x = int(rng.integers(1, 4))
            env = Environment(
                contexts=tuple(range(x)),
                arrival_probs=rng.dirichlet(np.ones(x)),
                actions=tuple(range(a)),
                mu=rng.random((a, x)),
            )
            logging = explicit_policy(rng.dirichlet(np.ones(a), size=x).T * 0.5 + 0.5 / a)
            target = explicit_policy(rng.dirichlet(np.ones(a), size=x).T)
            n = int(rng.integers(1, 5))
            bd = closed_form_mse(env, target, logging, n)
            assert abs(bd.variance - enumerated_variance(env, target, logging, n)) <= 1e-12
            assert abs(bd.bias_sq - enumerated_bias(env, target, logging)) <= 1e-12

    def test_on_policy_equals_self_logging(self):
        env = single_context_env(0.9, 0.1)
        target = explicit_policy([[0.7], [0.3]])
        assert on_policy_mse(env, target, 50).mse == closed_form_mse(env, target, target, 50).mse


class TestSimulateDataset:
    def test_sure_rewards(self):
        env = single_context_env(1.0, 1.0)
        data = simulate_dataset(env, uniform_policy(2, 1), 200, seed=1)
        assert np.all(data.rewards == 1)

    def test_impossible_rewards(self):
        env = single_context_env(0.0, 0.0)
        data = simulate_dataset(env, uniform_policy(2, 1), 200, seed=1)
        assert np.all(data.rewards == 0)

    def test_action_frequencies(self):
        env = single_context_env(0.9, 0.1)
        data = simulate_dataset(env, uniform_policy(2, 1), 100_000, seed=7)
        freq = np.mean(data.actions == 0)
        assert abs(freq - 0.5) < 0.005

    def test_determinism(self):
        env = make_geometric_env(3, 20, GeometricSpec(scale=0.1, decay=0.9, seed=0))
        a = simulate_dataset(env, uniform_policy(20, 3), 500, seed=9)
        b = simulate_dataset(env, uniform_policy(20, 3), 500, seed=9)
        assert np.array_equal(a.contexts, b.contexts)
        assert np.array_equal(a.actions, b.actions)
        assert np.array_equal(a.rewards, b.rewards)

    def test_respects_logging_support(self):
        env = single_context_env(0.5, 0.5, 0.5)
        logging = explicit_policy([[0.0], [0.4], [0.6]])
        data = simulate_dataset(env, logging, 2_000, seed=3)
        assert np.all(data.actions != 0)


class TestMonteCarlo:
    def test_single_replication_squared_error(self):
        env = single_context_env(0.9, 0.1)
        logging = uniform_policy(2, 1)
        summary = monte_carlo_mse(env, logging, logging, n=50, replications=1, seed=2)
        expected = (summary.estimates[0] - policy_value(env, logging)) ** 2
        assert summary.empirical_mse == pytest.approx(expected)

    def test_unbiased_under_overlap(self):
        env = single_context_env(0.6, 0.2, 0.1)
        target = explicit_policy([[0.5], [0.3], [0.2]])
        logging = explicit_policy([[0.2], [0.3], [0.5]])
        summary = monte_carlo_mse(env, target, logging, n=200, replications=10_000, seed=5)
        truth = policy_value(env, target)
        se = np.std(summary.estimates) / np.sqrt(summary.replications)
        assert abs(summary.empirical_mean - truth) < 3 * se

    def test_replication_seeds_order_free(self):
        env = single_context_env(0.7, 0.3)
        logging = uniform_policy(2, 1)
        a = monte_carlo_mse(env, logging, logging, n=20, replications=5, seed=100)
        b = monte_carlo_mse(env, logging, logging, n=20, replications=3, seed=102)
        np.testing.assert_array_equal(a.estimates[2:], b.estimates)


class TestWorstCase:
    def test_single_action(self):
        value = worst_case_mse([1.0], uniform_policy(1, 1), n=1)
        assert value == pytest.approx(0.25, abs=1e-9)

    def test_uniform_ten_actions(self):
        assert worst_case_mse([1.0], uniform_policy(10, 1), n=1) == pytest.approx(9.0, abs=1e-9)

    def test_degenerate_ten_actions(self):
        probs = np.zeros((10, 1))
        probs[0, 0] = 1.0
        assert worst_case_mse([1.0], Policy(probs=probs), n=1) == pytest.approx(1.0, abs=1e-9)

    def test_two_contexts_against_brute_force(self):
        # brute force: deterministic target per context, rewards on a coarse
        # grid at the targeted action, mu = 1 off support
        logging = Policy(probs=np.array([[0.7, 1.0], [0.3, 0.0]]))
        arrival = np.array([0.4, 0.6])
        step = 0.05
        grid = np.arange(0.0, 1.0 + step / 2, step)
        best = 0.0
        for a0 in range(2):
            for a1 in range(2):
                for m0 in grid:
                    for m1 in grid:
                        bias = 0.0
                        variance = 0.0
                        for x, (a, m) in enumerate([(a0, m0), (a1, m1)]):
                            p = logging.probs[a, x]
                            if p == 0.0:
                                bias += arrival[x] * m
                            else:
                                variance += arrival[x] * (m / p - m * m)
                        best = max(best, bias**2 + variance)
        assert worst_case_mse(arrival, logging, n=1, mu_grid_step=step) == pytest.approx(best, rel=1e-12)

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            worst_case_mse([1.0], uniform_policy(2, 1), n=1, mu_grid_step=0.0)
