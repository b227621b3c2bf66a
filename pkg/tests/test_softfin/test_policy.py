"""
Unit tests for `softfin.rl.policy` module.
"""

import math

import numpy as np
import pytest

from softfin.errors import ConfigurationError
from softfin.nn import Linear, Network, save_checkpoint
from softfin.plant import ANGLE_LIMIT, OMEGA_MAX, OMEGA_MIN, MotorCommand
from softfin.rl.policy import (
    ACTION_HALF_RANGE,
    LOG_STD_MAX,
    LOG_STD_MIN,
    PolicyCheckpoint,
    PolicyNet,
    RandomActor,
    action_log_prob,
    gaussian_entropy,
    log_prob_per_dim,
    log_tanh_derivative,
    squash_log_std,
    to_action,
)
from softfin.rl.state import encode_state, state_size


@pytest.fixture(name="policy")
def fixture_policy():
    return PolicyNet.build(k=1, hidden=6, seed=5)


@pytest.fixture(name="observation")
def fixture_observation():
    return encode_state(0.2, (2.0, -0.5), [(0.3, 2.0)], k=1)


class TestSquashing:
    def test_Should_stay_in_range_When_raw_log_std_is_extreme(self):
        log_std, slope = squash_log_std(np.array([-100.0, 0.0, 100.0]))

        assert np.all(log_std >= LOG_STD_MIN)
        assert np.all(log_std <= LOG_STD_MAX)
        assert log_std[1] == pytest.approx(0.5 * (LOG_STD_MIN + LOG_STD_MAX))
        assert np.all(slope >= 0.0)

    def test_Should_return_derivative_When_compared_to_finite_differences(self):
        raw = np.linspace(-2.0, 2.0, 9)
        h = 1e-6

        _, slope = squash_log_std(raw)
        numeric = (squash_log_std(raw + h)[0] - squash_log_std(raw - h)[0]) / (2 * h)

        np.testing.assert_allclose(slope, numeric, rtol=1e-6)

    def test_Should_keep_actions_strictly_in_bounds_When_pre_squash_is_huge(self):
        action = to_action(np.array([[1e3, 1e3], [-1e3, -1e3]]))

        assert -ANGLE_LIMIT < action[1, 0] < action[0, 0] < ANGLE_LIMIT
        assert OMEGA_MIN < action[1, 1] < action[0, 1] < OMEGA_MAX
        MotorCommand(*action[0])
        MotorCommand(*action[1])

    def test_Should_be_finite_When_tanh_derivative_underflows(self):
        values = log_tanh_derivative(np.array([-50.0, 50.0, 400.0]))

        assert np.all(np.isfinite(values))
        assert values[0] == pytest.approx(values[1])
        assert values[1] == pytest.approx(2.0 * (math.log(2.0) - 50.0))

    def test_Should_match_direct_formula_When_argument_is_moderate(self):
        u = np.linspace(-3.0, 3.0, 13)

        np.testing.assert_allclose(
            log_tanh_derivative(u), np.log(1.0 - np.tanh(u) ** 2), rtol=1e-10
        )


class TestLogProb:
    def test_Should_integrate_to_one_When_density_is_taken_over_command_space(self):
        n = 200000
        t = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
        u = np.repeat(np.arctanh(t)[:, None], 2, axis=1)
        mean = np.array([0.3, -0.2])
        log_std = np.array([-1.0, -0.7])

        density = np.exp(log_prob_per_dim(u, mean, log_std))
        mass = density.sum(axis=0) * ACTION_HALF_RANGE * (2.0 / n)

        np.testing.assert_allclose(mass, [1.0, 1.0], atol=1e-3)

    def test_Should_sum_dimensions_When_joint_log_prob_is_taken(self):
        u = np.array([[0.1, -0.4], [1.2, 0.3]])
        mean = np.array([0.0, 0.1])
        log_std = np.array([-0.5, -1.0])

        np.testing.assert_allclose(
            action_log_prob(u, mean, log_std),
            log_prob_per_dim(u, mean, log_std).sum(axis=-1),
        )

    def test_Should_grow_with_log_std_When_entropy_is_taken(self):
        narrow = gaussian_entropy(np.array([-1.0, -1.0]))
        wide = gaussian_entropy(np.array([0.0, 0.0]))

        assert wide - narrow == pytest.approx(2.0)


class TestPolicyNet:
    def test_Should_size_input_from_history_When_built(self, policy):
        assert policy.trunk.layers[0].in_features == state_size(1)
        assert policy.hidden == 6
        assert set(policy.networks) == {"trunk", "actor", "critic"}

    def test_Should_be_deterministic_When_mode_is_mean(self, policy, observation):
        first, _ = policy.act(observation, policy.initial_state(), mode="mean")
        second, _ = policy.act(observation, policy.initial_state(), mode="mean")

        assert first.command == second.command
        np.testing.assert_array_equal(first.pre_squash, second.pre_squash)

    def test_Should_reproduce_samples_When_rng_is_reseeded(self, policy, observation):
        first, _ = policy.act(
            observation, policy.initial_state(), rng=np.random.default_rng(2)
        )
        second, _ = policy.act(
            observation, policy.initial_state(), rng=np.random.default_rng(2)
        )

        assert first.command == second.command

    def test_Should_keep_commands_in_bounds_When_actor_is_saturated(
        self, policy, observation
    ):
        policy.actor.parameters()["0.linear.bias"][:] = [60.0, -60.0, 30.0, 30.0]
        rng = np.random.default_rng(0)
        state = policy.initial_state()

        for _ in range(50):
            sample, state = policy.act(observation, state, rng=rng)
            assert -ANGLE_LIMIT < sample.command.target_angle < ANGLE_LIMIT
            assert OMEGA_MIN < sample.command.target_angular_velocity < OMEGA_MAX

    def test_Should_advance_state_When_acting_but_not_when_valuing(
        self, policy, observation
    ):
        state = policy.initial_state()
        before = [(h.copy(), c.copy()) for h, c in state]

        value_first = policy.value(observation, state)
        value_second = policy.value(observation, state)
        _, new_state = policy.act(observation, state, mode="mean")

        assert value_first == value_second
        np.testing.assert_array_equal(state[0][0], before[0][0])
        assert not np.allclose(new_state[0][0], before[0][0])

    def test_Should_report_critic_value_When_acting(self, policy, observation):
        sample, _ = policy.act(observation, policy.initial_state(), mode="mean")

        assert sample.value == pytest.approx(
            policy.value(observation, policy.initial_state())
        )

    def test_Should_report_log_prob_of_pre_squash_value_When_acting(
        self, policy, observation
    ):
        sample, _ = policy.act(observation, policy.initial_state(), mode="mean")
        outputs = policy.forward_sequences(
            observation[None, None, :], policy.initial_state()
        )

        expected = action_log_prob(
            sample.pre_squash, outputs.mean[0, 0], outputs.log_std[0, 0]
        )
        assert sample.log_prob == pytest.approx(float(expected))
        np.testing.assert_allclose(sample.action, to_action(sample.pre_squash))

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"mode": "greedy"}, "mode must be one of"),
            ({"mode": "sample", "rng": None}, "needs an RNG"),
        ],
    )
    def test_Should_raise_When_act_arguments_are_invalid(
        self, policy, observation, kwargs, message
    ):
        with pytest.raises(ConfigurationError, match=message):
            policy.act(observation, policy.initial_state(), **kwargs)

    def test_Should_round_trip_parameters_When_loaded_into_another_policy(self, policy):
        other = PolicyNet.build(k=1, hidden=6, seed=99)

        other.load_parameters(policy.snapshot())

        for name, value in policy.parameters().items():
            np.testing.assert_array_equal(other.parameters()[name], value)

    def test_Should_not_share_arrays_When_copied(self, policy):
        clone = policy.copy()

        clone.parameters()["actor/0.linear.bias"][:] += 1.0

        assert not np.allclose(
            clone.parameters()["actor/0.linear.bias"],
            policy.parameters()["actor/0.linear.bias"],
        )

    def test_Should_count_all_networks_When_parameter_count_is_taken(self):
        policy = PolicyNet.build(k=0, hidden=4, seed=0)

        assert policy.parameter_count == 205


class TestRandomActor:
    def test_Should_draw_valid_commands_When_given_rng(self):
        actor = RandomActor()
        rng = np.random.default_rng(0)

        samples = [actor.act(None, None, rng=rng)[0] for _ in range(100)]

        assert len({s.command for s in samples}) == 100
        assert actor.value(None, None) == 0.0

    def test_Should_raise_When_rng_is_missing(self):
        with pytest.raises(ConfigurationError, match="needs an RNG"):
            RandomActor().act(None, None)


class TestPolicyCheckpoint:
    def test_Should_restore_policy_and_metadata_When_saved_and_loaded(
        self, tmp_path, policy, observation
    ):
        path = str(tmp_path / "policy.ckpt")
        checkpoint = PolicyCheckpoint(
            policy,
            reference=(2.0, -1.0),
            seed=7,
            steps=300,
            episode_rewards=[-0.5, -0.25],
        )

        written = checkpoint.save(path)
        loaded = PolicyCheckpoint.load(path)

        assert written == (tmp_path / "policy.ckpt").stat().st_size
        assert loaded.reference == (2.0, -1.0)
        assert loaded.seed == 7
        assert loaded.steps == 300
        assert loaded.episode_rewards == [-0.5, -0.25]
        assert loaded.conditioning == "in-state"
        assert loaded.policy.k == 1
        expected, _ = policy.act(observation, policy.initial_state(), mode="mean")
        actual, _ = loaded.policy.act(
            observation, loaded.policy.initial_state(), mode="mean"
        )
        assert actual.command == expected.command

    def test_Should_keep_missing_reference_and_rewards_When_untrained(
        self, tmp_path, policy
    ):
        path = str(tmp_path / "policy.ckpt")

        PolicyCheckpoint(policy).save(path)
        loaded = PolicyCheckpoint.load(path)

        assert loaded.reference is None
        assert loaded.episode_rewards == []

    def test_Should_raise_When_checkpoint_is_not_a_policy(self, tmp_path):
        path = str(tmp_path / "other.ckpt")
        network = Network.build([Linear(2, 2)], seed=0)
        save_checkpoint(path, {"net": network}, {"kind": "surrogate"})

        with pytest.raises(ConfigurationError, match="not a policy checkpoint"):
            PolicyCheckpoint.load(path)

    def test_Should_raise_When_checkpoint_is_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            PolicyCheckpoint.load(str(tmp_path / "absent.ckpt"))
